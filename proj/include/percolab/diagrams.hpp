#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "percolab/common.hpp"
#include "percolab/lattice.hpp"
#include "percolab/trees.hpp"

namespace percolab::diagrams {

using lattice::Point;

struct KernelParams {
  int d = 0;
  double exponent = 0;
};

// Japanese bracket <x> = (1 + |x|^2)^(1/2).
double bracket(std::span<const int> x);
double bracket(std::span<const double> x);
double bracket_diff(const Point& a, const Point& b);

// <x>^exponent.
double riesz(std::span<const int> x, const KernelParams& params);
double riesz(std::span<const double> x, const KernelParams& params);

// Multigraph with pinned and free vertices; each edge is one kernel factor
// <z_a - z_b>^exponent.
class Diagram {
 public:
  struct Edge {
    int a, b;
    double exponent;
  };

  explicit Diagram(int d);

  int add_pinned(Point position);
  int add_free();
  // Exponent defaults to 2 - d.
  void add_edge(int a, int b, std::optional<double> exponent = std::nullopt);

  int dim() const { return d_; }
  double default_exponent() const { return 2.0 - d_; }
  int vertex_count() const { return static_cast<int>(pins_.size()); }
  bool is_pinned(int v) const { return pins_.at(static_cast<std::size_t>(v)).has_value(); }
  const Point& position(int v) const;
  std::vector<int> free_vertices() const;
  std::vector<int> pinned_vertices() const;
  const std::vector<Edge>& edges() const { return edges_; }
  std::vector<int> neighbors(int v) const;
  int degree(int v) const;
  // Largest Euclidean norm over pins, rounded up.
  int max_pin_magnitude() const;

 private:
  int d_;
  std::vector<std::optional<Point>> pins_;
  std::vector<Edge> edges_;
};

// Truncation radius 4 * max pin magnitude (at least 1).
int default_truncation(const Diagram& diagram);

// Exact sums refuse when the reduced work exceeds this many kernel terms.
inline constexpr double kExactWorkLimit = 1e9;

// Work estimate for val_exact: for one free vertex, (2L+1)^m outer points
// times the squared-norm histogram length of the remaining d - m
// coordinates (m = coordinates on which some pin is nonzero); otherwise
// |B(L)|^#free.
double exact_work(const Diagram& diagram, int L);

// Sum over free placements in B(L)^#free of the product of edge kernels.
double val_exact(const Diagram& diagram, int L, unsigned workers = 1);

struct McParams {
  std::uint64_t samples = 100000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

// Importance-sampled estimate of the same truncated sum. Free vertices are
// drawn in order. Each comes from an equal-weight mixture of lattice laws
// with point mass <y>^e, centred at its pinned and drawn neighbours (e the
// summed edge exponent) and at pins or drawn vertices reachable through
// undrawn free vertices (e = 2 - d). Each law mixes tail radii 1, 2, 4, ...
// up to the distance to the nearest other centre; beyond its tail radius
// the radial mass falls like r^-3. Unbiased.
MCEstimate val_mc(const Diagram& diagram, int L, const McParams& params);

// ---------------------------------------------------------------------------
// Convolution checks
// ---------------------------------------------------------------------------

enum class ConvVariant { standard, log, triple };

std::string to_string(ConvVariant v);
ConvVariant parse_conv_variant(const std::string& s);

struct RatioReport {
  double lhs = 0;  // truncated sum
  double rhs = 0;  // bound without constant
  double ratio = 0;
};

// standard: sum_z <x-z>^(-d+a) <z-y>^(-d+b) against <x-y>^(-d+a+b).
// log:      a = 0, against <x-y>^(-d+b) log<x-y>.
// triple:   sum_z of three <.>^(2-d) factors against the cyclic min sum.
RatioReport check_convolution(const Point& x, const Point& y, double a, double b, int L, ConvVariant variant,
                              const std::optional<Point>& w = std::nullopt, unsigned workers = 1);

// sum_w <w-u>^(2-d) <w-v>^(2-d) <w-w1>^(2-d)
//   against n^2 (n^(2-d) + <u-w1>^(2-d) + <v-w1>^(2-d)) <u-v>^(2-d).
RatioReport check_interior_delta(const Point& u, const Point& v, const Point& w1, double n, int L,
                                 unsigned workers = 1);

// <u-w2>^(2-d) <v-w3>^(2-d) * (interior sum) against
//   n^(4-d) (<u-w1>^(2-d) + <u-w2>^(2-d)) (<v-w3>^(2-d) + <v-w1>^(2-d)) <u-v>^(2-d).
RatioReport check_path_reduction(const Point& u, const Point& v, const Point& w1, const Point& w2, const Point& w3,
                                 double n, int L, unsigned workers = 1);

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

struct ContractionCertificate {
  double n_exponent = 0;  // 4 - d
  std::string claim;
};

struct CherryContraction {
  Diagram first;   // v and w_2 deleted, edge p - w_1
  Diagram second;  // v and w_1 deleted, edge p - w_2
  ContractionCertificate certificate;
};

// free_vertex must have degree 3 with two pinned leaf neighbours.
CherryContraction contract_cherry(const Diagram& diagram, int free_vertex);

struct ReductionLedger {
  int leaves = 0;                 // l + 1
  int steps = 0;                  // contractions along each branch (l - 1)
  double exponent = 0;            // (4 - d)(l - 1)
  double apriori_exponent = 0;    // (4 - d) l - 2
  std::vector<std::pair<Point, Point>> residual;  // single edges v - w_i
};

// Iterated cherry contraction of a binary tree diagram down to single edges.
// `root` is the pinned leaf playing the role of v (default: first pin).
ReductionLedger tree_reduce(const Diagram& diagram, std::optional<int> root = std::nullopt);

// Binary tree diagram: leaves pinned at pins[label], internal vertices free.
Diagram tree_diagram(const trees::AbstractTree& tree, const std::vector<Point>& pins);
// Four free cycle vertices z_0..z_3, z_i joined to pin w_i.
Diagram four_cycle_diagram(const std::vector<Point>& pins);

// sum_{z0, z2 in B(L)} <w1-z0>^(2-d) <z0-z2>^(8-2d) <z2-w2>^(2-d). Exact when
// |B(L)|^2 fits the work limit, otherwise importance sampled.
MCEstimate one_loop(const Point& w1, const Point& w2, int L, const McParams& mc);

// ---------------------------------------------------------------------------
// Far-regime filters and fits
// ---------------------------------------------------------------------------

enum class RegionKind { F, G };

// G: points x_0..x_k all in [-n/eps, n/eps]^d with consecutive Euclidean
//    separations >= eps n.
// F: points = [g_tail, x_1, x_2, ...] with origin implicit; all of |g|,
//    |x_i - g| >= eps n and |g| <= n/eps.
bool region_filter(const std::vector<Point>& points, double eps, double n, RegionKind kind);

struct ScalingFit {
  double slope = 0;
  double intercept = 0;
  double residual_max = 0;
  std::vector<std::pair<double, double>> points;  // (log n, log value)
};

ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& samples);

}  // namespace percolab::diagrams
