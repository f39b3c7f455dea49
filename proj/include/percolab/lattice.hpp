#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "percolab/common.hpp"

namespace percolab::lattice {

using Point = std::vector<int>;

std::string to_string(const Point& p);

// B(center; radius) = {y : |y_i - center_i| <= radius for all i}.
struct Box {
  Point center;
  int radius = 0;

  int dim() const { return static_cast<int>(center.size()); }
  bool contains(const Point& p) const;
  std::uint64_t vertex_count() const;
};

struct Incidence {
  int neighbor;
  int edge;
};

// Oriented view of an undirected edge; vertices are graph ids.
struct DirectedEdge {
  int tail = -1;
  int head = -1;
  int edge = -1;
  bool operator==(const DirectedEdge&) const = default;
};

// Vertex subset of a graph, stored as a membership table.
class Region {
 public:
  Region() = default;
  explicit Region(int num_vertices) : member_(static_cast<std::size_t>(num_vertices), 0) {}
  Region(int num_vertices, std::span<const int> vertices);

  void insert(int v) { member_.at(static_cast<std::size_t>(v)) = 1; }
  void erase(int v) { member_.at(static_cast<std::size_t>(v)) = 0; }
  bool contains(int v) const { return member_[static_cast<std::size_t>(v)] != 0; }
  int capacity() const { return static_cast<int>(member_.size()); }
  int size() const;
  std::vector<int> members() const;

 private:
  std::vector<char> member_;
};

class Graph {
 public:
  Graph(int dim, std::vector<Point> points, std::vector<std::pair<int, int>> edges);

  // Nearest-neighbour graph on B(center; radius), free boundary.
  static Graph box(const Box& box);
  static Graph box(int dim, int radius);
  // Graph from edges given by endpoint coordinates; vertices in first-seen order.
  static Graph from_point_edges(int dim, const std::vector<std::pair<Point, Point>>& edges);
  // One `(a,b,...) (c,d,...)` pair per line; blank lines and '#' comments skipped.
  static Graph parse_edge_list(std::istream& in);

  int dim() const { return dim_; }
  int num_vertices() const { return static_cast<int>(points_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const Point& point(int v) const { return points_.at(static_cast<std::size_t>(v)); }
  std::optional<int> find_vertex(const Point& p) const;
  int vertex(const Point& p) const;  // throws DomainError when absent

  std::pair<int, int> edge(int e) const { return edges_.at(static_cast<std::size_t>(e)); }
  std::span<const Incidence> incident(int v) const {
    return adjacency_.at(static_cast<std::size_t>(v));
  }
  std::optional<int> edge_between(int u, int v) const;
  int other_end(int e, int v) const;

  // Vertices whose coordinates lie in the box.
  Region region_of(const Box& box) const;
  // Stable content hash (hex) of points and edges.
  std::string hash() const;

 private:
  int dim_;
  std::vector<Point> points_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<Incidence>> adjacency_;
  std::map<Point, int> index_;
};

using GraphPtr = std::shared_ptr<const Graph>;

class Configuration {
 public:
  Configuration(GraphPtr graph, std::vector<std::uint64_t> bits, double p);
  static Configuration from_mask(GraphPtr graph, std::uint64_t mask, double p);
  static Configuration all(GraphPtr graph, bool open, double p);

  const Graph& graph() const { return *graph_; }
  const GraphPtr& graph_ptr() const { return graph_; }
  double p() const { return p_; }

  bool is_open(int e) const {
    return (bits_[static_cast<std::size_t>(e) >> 6] >> (e & 63)) & 1U;
  }
  int open_count() const;
  Configuration with_edge(int e, bool open) const;
  // Only valid when num_edges <= 64.
  std::uint64_t mask() const;
  // '1' for open, '0' for closed, in edge order.
  std::string bitstring() const;

 private:
  GraphPtr graph_;
  std::vector<std::uint64_t> bits_;
  double p_;
};

struct ClusterPartition {
  std::vector<int> id;     // vertex -> cluster id (0..count-1)
  std::vector<int> sizes;  // cluster id -> size
};

// Connection demand: source <-> target inside region (whole graph when empty).
struct Demand {
  int source;
  int target;
  std::optional<Region> region;
};

inline constexpr int kMaxEnumerationEdges = 24;
inline constexpr int kMaxDisjointEdges = 24;
inline constexpr int kMaxDisjointDemands = 4;

// Status of edge e in the configuration drawn from (p, seed, stream).
bool sampled_edge_open(std::uint64_t key, int e, double p);
std::uint64_t configuration_key(std::uint64_t seed, std::uint64_t stream);

Configuration sample_configuration(GraphPtr graph, double p, std::uint64_t seed,
                                   std::uint64_t stream = 0);

// Calls visit(config, weight) for all 2^|E| configurations.
void enumerate_configurations(const GraphPtr& graph, double p,
                              const std::function<void(const Configuration&, double)>& visit);

ClusterPartition clusters(const Configuration& config);

bool connected(const Configuration& config, int x, int y, const Region* region = nullptr);
// Vertices reachable from the seeds by open paths inside the region.
std::vector<int> cluster_of(const Configuration& config, std::span<const int> seeds,
                            const Region* region = nullptr);
bool doubly_connected(const Configuration& config, int x, int y,
                      const Region* region = nullptr);
bool disjointly_occurs(const Configuration& config, const std::vector<Demand>& demands,
                       int max_demands = kMaxDisjointDemands);

// Edge ids of all simple open paths source->target inside the region, as bit masks.
std::vector<std::uint64_t> open_path_masks(const Configuration& config, const Demand& demand);

}  // namespace percolab::lattice
