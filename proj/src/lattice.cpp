#include "percolab/lattice.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <set>
#include <sstream>

namespace percolab::lattice {

std::string to_string(const Point& p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(p[i]);
  }
  return s + ")";
}

bool Box::contains(const Point& p) const {
  if (p.size() != center.size()) return false;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (std::abs(p[i] - center[i]) > radius) return false;
  return true;
}

std::uint64_t Box::vertex_count() const {
  std::uint64_t n = 1;
  for (int i = 0; i < dim(); ++i) n *= static_cast<std::uint64_t>(2 * radius + 1);
  return n;
}

Region::Region(int num_vertices, std::span<const int> vertices) : Region(num_vertices) {
  for (int v : vertices) insert(v);
}

int Region::size() const {
  return static_cast<int>(std::count(member_.begin(), member_.end(), char{1}));
}

std::vector<int> Region::members() const {
  std::vector<int> out;
  for (std::size_t v = 0; v < member_.size(); ++v)
    if (member_[v]) out.push_back(static_cast<int>(v));
  return out;
}

Graph::Graph(int dim, std::vector<Point> points, std::vector<std::pair<int, int>> edges)
    : dim_(dim), points_(std::move(points)), edges_(std::move(edges)) {
  if (dim_ < 1) throw DomainError("graph dimension must be >= 1");
  adjacency_.resize(points_.size());
  for (std::size_t v = 0; v < points_.size(); ++v) {
    if (static_cast<int>(points_[v].size()) != dim_)
      throw DomainError("vertex " + to_string(points_[v]) + " has wrong dimension");
    if (!index_.emplace(points_[v], static_cast<int>(v)).second)
      throw DomainError("duplicate vertex " + to_string(points_[v]));
  }
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    auto [u, v] = edges_[e];
    if (u < 0 || v < 0 || u >= num_vertices() || v >= num_vertices() || u == v)
      throw DomainError("invalid edge " + std::to_string(e));
    adjacency_[static_cast<std::size_t>(u)].push_back({v, static_cast<int>(e)});
    adjacency_[static_cast<std::size_t>(v)].push_back({u, static_cast<int>(e)});
  }
}

Graph Graph::box(const Box& b) {
  const int d = b.dim();
  if (d < 1) throw DomainError("box dimension must be >= 1");
  if (b.radius < 0) throw DomainError("box radius must be nonnegative");
  const int side = 2 * b.radius + 1;
  const std::uint64_t n = b.vertex_count();
  if (n > (1ULL << 31)) throw GuardError("box too large");
  std::vector<Point> pts;
  pts.reserve(n);
  Point cur(static_cast<std::size_t>(d));
  for (std::uint64_t idx = 0; idx < n; ++idx) {
    std::uint64_t r = idx;
    for (int i = d - 1; i >= 0; --i) {
      cur[static_cast<std::size_t>(i)] =
          static_cast<int>(r % static_cast<std::uint64_t>(side)) - b.radius + b.center[static_cast<std::size_t>(i)];
      r /= static_cast<std::uint64_t>(side);
    }
    pts.push_back(cur);
  }
  std::vector<std::pair<int, int>> edges;
  edges.reserve(n * static_cast<std::uint64_t>(d));
  std::uint64_t stride = 1;
  std::vector<std::uint64_t> strides(static_cast<std::size_t>(d));
  for (int i = d - 1; i >= 0; --i) {
    strides[static_cast<std::size_t>(i)] = stride;
    stride *= static_cast<std::uint64_t>(side);
  }
  for (std::uint64_t idx = 0; idx < n; ++idx) {
    for (int i = 0; i < d; ++i) {
      int c = pts[idx][static_cast<std::size_t>(i)] - b.center[static_cast<std::size_t>(i)];
      if (c < b.radius)
        edges.emplace_back(static_cast<int>(idx), static_cast<int>(idx + strides[static_cast<std::size_t>(i)]));
    }
  }
  return Graph(d, std::move(pts), std::move(edges));
}

Graph Graph::box(int dim, int radius) { return box(Box{Point(static_cast<std::size_t>(dim), 0), radius}); }

Graph Graph::from_point_edges(int dim, const std::vector<std::pair<Point, Point>>& edges) {
  std::vector<Point> pts;
  std::map<Point, int> idx;
  std::vector<std::pair<int, int>> es;
  auto id = [&](const Point& p) {
    auto [it, fresh] = idx.emplace(p, static_cast<int>(pts.size()));
    if (fresh) pts.push_back(p);
    return it->second;
  };
  std::set<std::pair<Point, Point>> seen;
  for (const auto& [a, b] : edges) {
    if (static_cast<int>(a.size()) != dim || static_cast<int>(b.size()) != dim)
      throw DomainError("edge " + to_string(a) + " " + to_string(b) + " has the wrong dimension");
    int l1 = 0;
    for (int i = 0; i < dim; ++i) l1 += std::abs(a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)]);
    if (l1 != 1) throw DomainError("edge " + to_string(a) + " " + to_string(b) + " is not a nearest-neighbour bond");
    if (!seen.insert(std::minmax(a, b)).second) throw DomainError("duplicate edge " + to_string(a) + " " + to_string(b));
    int u = id(a);
    int v = id(b);
    es.emplace_back(u, v);
  }
  return Graph(dim, std::move(pts), std::move(es));
}

namespace {

std::vector<Point> parse_tuples(const std::string& line) {
  std::vector<Point> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    if (line[i] != '(') throw DomainError("edge list: expected '(' in: " + line);
    std::size_t close = line.find(')', i);
    if (close == std::string::npos) throw DomainError("edge list: unclosed tuple in: " + line);
    Point p;
    std::stringstream ss(line.substr(i + 1, close - i - 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t used = 0;
        p.push_back(std::stoi(tok, &used));
        if (tok.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw DomainError("edge list: bad coordinate '" + tok + "'");
      }
    }
    out.push_back(std::move(p));
    i = close + 1;
  }
  return out;
}

}  // namespace

Graph Graph::parse_edge_list(std::istream& in) {
  std::vector<std::pair<Point, Point>> edges;
  std::string line;
  int dim = -1;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto tuples = parse_tuples(line);
    if (tuples.size() != 2) throw DomainError("edge list: need exactly two tuples per line: " + line);
    for (const auto& t : tuples) {
      if (dim < 0) dim = static_cast<int>(t.size());
      if (static_cast<int>(t.size()) != dim) throw DomainError("edge list: inconsistent dimension");
    }
    edges.emplace_back(tuples[0], tuples[1]);
  }
  if (edges.empty()) throw DomainError("edge list: no edges");
  return from_point_edges(dim, edges);
}

std::optional<int> Graph::find_vertex(const Point& p) const {
  auto it = index_.find(p);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int Graph::vertex(const Point& p) const {
  auto v = find_vertex(p);
  if (!v) throw DomainError("vertex " + to_string(p) + " not in graph");
  return *v;
}

std::optional<int> Graph::edge_between(int u, int v) const {
  for (const auto& inc : incident(u))
    if (inc.neighbor == v) return inc.edge;
  return std::nullopt;
}

int Graph::other_end(int e, int v) const {
  auto [a, b] = edge(e);
  return a == v ? b : a;
}

Region Graph::region_of(const Box& b) const {
  Region r(num_vertices());
  for (int v = 0; v < num_vertices(); ++v)
    if (b.contains(point(v))) r.insert(v);
  return r;
}

std::string Graph::hash() const {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(dim_));
  for (const auto& p : points_)
    for (int c : p) h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(c)));
  for (const auto& [u, v] : edges_)
    h = mix64(h ^ (static_cast<std::uint64_t>(u) << 32 | static_cast<std::uint64_t>(v)));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------

Configuration::Configuration(GraphPtr graph, std::vector<std::uint64_t> bits, double p)
    : graph_(std::move(graph)), bits_(std::move(bits)), p_(p) {
  if (!graph_) throw DomainError("configuration without graph");
  bits_.resize((static_cast<std::size_t>(graph_->num_edges()) + 63) / 64 + 1, 0);
}

Configuration Configuration::from_mask(GraphPtr graph, std::uint64_t mask, double p) {
  return Configuration(std::move(graph), {mask}, p);
}

Configuration Configuration::all(GraphPtr graph, bool open, double p) {
  std::vector<std::uint64_t> bits((static_cast<std::size_t>(graph->num_edges()) + 63) / 64 + 1, 0);
  if (open)
    for (int e = 0; e < graph->num_edges(); ++e) bits[static_cast<std::size_t>(e) >> 6] |= 1ULL << (e & 63);
  return Configuration(std::move(graph), std::move(bits), p);
}

int Configuration::open_count() const {
  int n = 0;
  for (auto w : bits_) n += __builtin_popcountll(w);
  return n;
}

Configuration Configuration::with_edge(int e, bool open) const {
  Configuration c = *this;
  auto& w = c.bits_[static_cast<std::size_t>(e) >> 6];
  if (open)
    w |= 1ULL << (e & 63);
  else
    w &= ~(1ULL << (e & 63));
  return c;
}

std::uint64_t Configuration::mask() const {
  if (graph_->num_edges() > 64) throw DomainError("mask() needs at most 64 edges");
  return bits_[0];
}

std::string Configuration::bitstring() const {
  std::string s(static_cast<std::size_t>(graph_->num_edges()), '0');
  for (int e = 0; e < graph_->num_edges(); ++e)
    if (is_open(e)) s[static_cast<std::size_t>(e)] = '1';
  return s;
}

// ---------------------------------------------------------------------------

std::uint64_t configuration_key(std::uint64_t seed, std::uint64_t stream) {
  return stream_key(seed, {0x636f6e66ULL, stream});
}

bool sampled_edge_open(std::uint64_t key, int e, double p) {
  if (p >= 1.0) return true;
  if (p <= 0.0) return false;
  return counter_uniform(key, static_cast<std::uint64_t>(e)) < p;
}

Configuration sample_configuration(GraphPtr graph, double p, std::uint64_t seed, std::uint64_t stream) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0,1]");
  const std::uint64_t key = configuration_key(seed, stream);
  std::vector<std::uint64_t> bits((static_cast<std::size_t>(graph->num_edges()) + 63) / 64 + 1, 0);
  for (int e = 0; e < graph->num_edges(); ++e)
    if (sampled_edge_open(key, e, p)) bits[static_cast<std::size_t>(e) >> 6] |= 1ULL << (e & 63);
  return Configuration(std::move(graph), std::move(bits), p);
}

void enumerate_configurations(const GraphPtr& graph, double p,
                              const std::function<void(const Configuration&, double)>& visit) {
  const int m = graph->num_edges();
  if (m > kMaxEnumerationEdges)
    throw GuardError("enumeration refused: " + std::to_string(m) + " edges exceeds limit " +
                     std::to_string(kMaxEnumerationEdges));
  std::vector<double> w(static_cast<std::size_t>(m) + 1);
  for (int j = 0; j <= m; ++j) w[static_cast<std::size_t>(j)] = std::pow(p, j) * std::pow(1.0 - p, m - j);
  const std::uint64_t total = 1ULL << m;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    Configuration c = Configuration::from_mask(graph, mask, p);
    visit(c, w[static_cast<std::size_t>(__builtin_popcountll(mask))]);
  }
}

// ---------------------------------------------------------------------------

namespace {

struct UnionFind {
  std::vector<int> parent, rank;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)), rank(static_cast<std::size_t>(n), 0) {
    for (int i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      auto& px = parent[static_cast<std::size_t>(x)];
      px = parent[static_cast<std::size_t>(px)];
      x = px;
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank[static_cast<std::size_t>(a)] < rank[static_cast<std::size_t>(b)]) std::swap(a, b);
    parent[static_cast<std::size_t>(b)] = a;
    if (rank[static_cast<std::size_t>(a)] == rank[static_cast<std::size_t>(b)]) ++rank[static_cast<std::size_t>(a)];
  }
};

bool in_region(const Region* r, int v) { return !r || r->contains(v); }

}  // namespace

ClusterPartition clusters(const Configuration& config) {
  const Graph& g = config.graph();
  UnionFind uf(g.num_vertices());
  for (int e = 0; e < g.num_edges(); ++e)
    if (config.is_open(e)) {
      auto [u, v] = g.edge(e);
      uf.unite(u, v);
    }
  ClusterPartition out;
  out.id.assign(static_cast<std::size_t>(g.num_vertices()), -1);
  std::vector<int> root_id(static_cast<std::size_t>(g.num_vertices()), -1);
  for (int v = 0; v < g.num_vertices(); ++v) {
    int r = uf.find(v);
    auto& rid = root_id[static_cast<std::size_t>(r)];
    if (rid < 0) {
      rid = static_cast<int>(out.sizes.size());
      out.sizes.push_back(0);
    }
    out.id[static_cast<std::size_t>(v)] = rid;
    ++out.sizes[static_cast<std::size_t>(rid)];
  }
  return out;
}

std::vector<int> cluster_of(const Configuration& config, std::span<const int> seeds, const Region* region) {
  const Graph& g = config.graph();
  std::vector<char> seen(static_cast<std::size_t>(g.num_vertices()), 0);
  std::vector<int> out;
  for (int s : seeds)
    if (in_region(region, s) && !seen[static_cast<std::size_t>(s)]) {
      seen[static_cast<std::size_t>(s)] = 1;
      out.push_back(s);
    }
  for (std::size_t head = 0; head < out.size(); ++head) {
    int u = out[head];
    for (const auto& inc : g.incident(u)) {
      if (!config.is_open(inc.edge)) continue;
      int w = inc.neighbor;
      if (seen[static_cast<std::size_t>(w)] || !in_region(region, w)) continue;
      seen[static_cast<std::size_t>(w)] = 1;
      out.push_back(w);
    }
  }
  return out;
}

bool connected(const Configuration& config, int x, int y, const Region* region) {
  if (!in_region(region, x) || !in_region(region, y)) return false;
  if (x == y) return true;
  const Graph& g = config.graph();
  std::vector<char> seen(static_cast<std::size_t>(g.num_vertices()), 0);
  std::vector<int> queue{x};
  seen[static_cast<std::size_t>(x)] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    int u = queue[head];
    for (const auto& inc : g.incident(u)) {
      if (!config.is_open(inc.edge)) continue;
      int w = inc.neighbor;
      if (seen[static_cast<std::size_t>(w)] || !in_region(region, w)) continue;
      if (w == y) return true;
      seen[static_cast<std::size_t>(w)] = 1;
      queue.push_back(w);
    }
  }
  return false;
}

bool doubly_connected(const Configuration& config, int x, int y, const Region* region) {
  if (!in_region(region, x) || !in_region(region, y)) return false;
  if (x == y) return true;
  const Graph& g = config.graph();
  // flow[e] = +1 when one unit goes first->second endpoint, -1 for the reverse.
  std::vector<int> flow(static_cast<std::size_t>(g.num_edges()), 0);
  for (int round = 0; round < 2; ++round) {
    std::vector<int> via(static_cast<std::size_t>(g.num_vertices()), -2);
    std::vector<int> queue{x};
    via[static_cast<std::size_t>(x)] = -1;
    bool found = false;
    for (std::size_t head = 0; head < queue.size() && !found; ++head) {
      int u = queue[head];
      for (const auto& inc : g.incident(u)) {
        if (!config.is_open(inc.edge)) continue;
        int w = inc.neighbor;
        if (via[static_cast<std::size_t>(w)] != -2 || !in_region(region, w)) continue;
        int dir = g.edge(inc.edge).first == u ? 1 : -1;
        if (flow[static_cast<std::size_t>(inc.edge)] == dir) continue;  // saturated
        via[static_cast<std::size_t>(w)] = inc.edge;
        if (w == y) {
          found = true;
          break;
        }
        queue.push_back(w);
      }
    }
    if (!found) return false;
    for (int v = y; v != x;) {
      int e = via[static_cast<std::size_t>(v)];
      int u = g.other_end(e, v);
      int dir = g.edge(e).first == u ? 1 : -1;
      flow[static_cast<std::size_t>(e)] += dir;
      v = u;
    }
  }
  return true;
}

std::vector<std::uint64_t> open_path_masks(const Configuration& config, const Demand& demand) {
  const Graph& g = config.graph();
  if (g.num_edges() > 64) throw GuardError("path masks need at most 64 edges");
  const Region* region = demand.region ? &*demand.region : nullptr;
  std::vector<std::uint64_t> out;
  if (!in_region(region, demand.source) || !in_region(region, demand.target)) return out;
  if (demand.source == demand.target) {
    out.push_back(0);
    return out;
  }
  std::vector<char> on_path(static_cast<std::size_t>(g.num_vertices()), 0);
  std::function<void(int, std::uint64_t)> dfs = [&](int u, std::uint64_t mask) {
    if (u == demand.target) {
      out.push_back(mask);
      return;
    }
    for (const auto& inc : g.incident(u)) {
      if (!config.is_open(inc.edge)) continue;
      int w = inc.neighbor;
      if (on_path[static_cast<std::size_t>(w)] || !in_region(region, w)) continue;
      on_path[static_cast<std::size_t>(w)] = 1;
      dfs(w, mask | (1ULL << inc.edge));
      on_path[static_cast<std::size_t>(w)] = 0;
    }
  };
  on_path[static_cast<std::size_t>(demand.source)] = 1;
  dfs(demand.source, 0);
  return out;
}

bool disjointly_occurs(const Configuration& config, const std::vector<Demand>& demands, int max_demands) {
  const Graph& g = config.graph();
  if (g.num_edges() > kMaxDisjointEdges)
    throw GuardError("disjoint occurrence refused: " + std::to_string(g.num_edges()) +
                     " edges exceeds limit " + std::to_string(kMaxDisjointEdges));
  if (static_cast<int>(demands.size()) > max_demands)
    throw GuardError("disjoint occurrence refused: " + std::to_string(demands.size()) +
                     " demands exceeds limit " + std::to_string(max_demands));
  std::vector<std::vector<std::uint64_t>> paths;
  for (const auto& d : demands) {
    auto ps = open_path_masks(config, d);
    if (ps.empty()) return false;
    // Keep inclusion-minimal witnesses only.
    std::sort(ps.begin(), ps.end(), [](std::uint64_t a, std::uint64_t b) {
      return __builtin_popcountll(a) < __builtin_popcountll(b);
    });
    std::vector<std::uint64_t> minimal;
    for (auto m : ps) {
      bool dominated = false;
      for (auto k : minimal)
        if ((k & m) == k) {
          dominated = true;
          break;
        }
      if (!dominated) minimal.push_back(m);
    }
    paths.push_back(std::move(minimal));
  }
  std::vector<std::size_t> order(paths.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return paths[a].size() < paths[b].size(); });
  std::function<bool(std::size_t, std::uint64_t)> search = [&](std::size_t i, std::uint64_t used) {
    if (i == order.size()) return true;
    for (auto m : paths[order[i]])
      if ((m & used) == 0 && search(i + 1, used | m)) return true;
    return false;
  };
  return search(0, 0);
}

}  // namespace percolab::lattice
