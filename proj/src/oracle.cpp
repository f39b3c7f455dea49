#include "percolab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "percolab/pivotals.hpp"

namespace percolab::oracle {

// ---------------------------------------------------------------------------
// Events
// ---------------------------------------------------------------------------

namespace {

EventPtr make(Event e) { return std::make_shared<const Event>(std::move(e)); }

bool in_range(const Graph& g, int v) { return v >= 0 && v < g.num_vertices(); }

}  // namespace

EventPtr connection(int x, int y, std::optional<Region> region) {
  Event e;
  e.kind = Event::Kind::connection;
  e.x = x;
  e.y = y;
  e.region = std::move(region);
  return make(std::move(e));
}

EventPtr multi_connection(std::vector<int> points) {
  Event e;
  e.kind = Event::Kind::multi_connection;
  e.points = std::move(points);
  return make(std::move(e));
}

EventPtr doubly(int x, int y, std::optional<Region> region) {
  Event e;
  e.kind = Event::Kind::doubly;
  e.x = x;
  e.y = y;
  e.region = std::move(region);
  return make(std::move(e));
}

EventPtr pivotal_equals(int source, std::vector<int> targets, DirectedEdge edge, Extreme which) {
  Event e;
  e.kind = Event::Kind::pivotal_equals;
  e.x = source;
  e.points = std::move(targets);
  e.edge = edge;
  e.extreme = which;
  return make(std::move(e));
}

EventPtr tree_equals(std::vector<int> marked, trees::AbstractTree tree) {
  Event e;
  e.kind = Event::Kind::tree_equals;
  e.points = std::move(marked);
  e.tree = std::move(tree);
  return make(std::move(e));
}

EventPtr all_of(std::vector<EventPtr> parts) {
  Event e;
  e.kind = Event::Kind::all_of;
  e.children = std::move(parts);
  return make(std::move(e));
}

EventPtr negation(EventPtr part) {
  Event e;
  e.kind = Event::Kind::negation;
  e.children = {std::move(part)};
  return make(std::move(e));
}

EventPtr disjoint(std::vector<EventPtr> parts) {
  Event e;
  e.kind = Event::Kind::disjoint;
  e.children = std::move(parts);
  return make(std::move(e));
}

int depth(const Event& e) {
  int d = 0;
  for (const auto& c : e.children) d = std::max(d, depth(*c));
  return e.children.empty() ? 1 : d + 1;
}

void validate(const Event& e, const Graph& g) {
  if (depth(e) > kMaxEventDepth) throw DomainError("event composition deeper than " + std::to_string(kMaxEventDepth));
  auto check = [&](int v) {
    if (!in_range(g, v)) throw DomainError("event references vertex " + std::to_string(v) + " outside the graph");
  };
  switch (e.kind) {
    case Event::Kind::connection:
    case Event::Kind::doubly:
      check(e.x);
      check(e.y);
      if (e.region && e.region->capacity() != g.num_vertices()) throw DomainError("region size mismatch");
      break;
    case Event::Kind::multi_connection:
    case Event::Kind::tree_equals:
      for (int v : e.points) check(v);
      if (e.kind == Event::Kind::tree_equals && static_cast<int>(e.points.size()) != e.tree->leaves())
        throw DomainError("tree event: marked count differs from leaf count");
      break;
    case Event::Kind::pivotal_equals:
      check(e.x);
      for (int v : e.points) check(v);
      if (e.edge.edge < 0 || e.edge.edge >= g.num_edges()) throw DomainError("pivotal event: bad edge");
      break;
    case Event::Kind::disjoint:
      for (const auto& c : e.children)
        if (c->kind != Event::Kind::connection) throw DomainError("disjoint occurrence supports connection events only");
      [[fallthrough]];
    case Event::Kind::all_of:
    case Event::Kind::negation:
      for (const auto& c : e.children) validate(*c, g);
      break;
  }
}

bool evaluate(const Event& e, const Configuration& config) {
  switch (e.kind) {
    case Event::Kind::connection:
      return lattice::connected(config, e.x, e.y, e.region ? &*e.region : nullptr);
    case Event::Kind::doubly:
      return lattice::doubly_connected(config, e.x, e.y, e.region ? &*e.region : nullptr);
    case Event::Kind::multi_connection: {
      if (e.points.empty()) return true;
      auto cl = lattice::cluster_of(config, std::span<const int>(&e.points[0], 1));
      std::set<int> c(cl.begin(), cl.end());
      return std::all_of(e.points.begin(), e.points.end(), [&](int v) { return c.count(v) > 0; });
    }
    case Event::Kind::pivotal_equals: {
      for (int t : e.points)
        if (!lattice::connected(config, e.x, t)) return false;
      auto cp = pivotals::common_pivotal_extremes(config, e.x, e.points);
      const auto& got = e.extreme == Extreme::first ? cp.first : cp.last;
      return got && *got == e.edge;
    }
    case Event::Kind::tree_equals: {
      for (int v : e.points)
        if (!lattice::connected(config, e.points[0], v)) return false;
      auto cls = conntree::classify_tree(conntree::build_connectivity_tree(config, e.points));
      return cls.binary && *cls.tree == *e.tree;
    }
    case Event::Kind::all_of:
      return std::all_of(e.children.begin(), e.children.end(), [&](const EventPtr& c) { return evaluate(*c, config); });
    case Event::Kind::negation:
      return !evaluate(*e.children.at(0), config);
    case Event::Kind::disjoint: {
      std::vector<lattice::Demand> demands;
      for (const auto& c : e.children) demands.push_back({c->x, c->y, c->region});
      return lattice::disjointly_occurs(config, demands, static_cast<int>(std::max<std::size_t>(demands.size(), lattice::kMaxDisjointDemands)));
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

double OpenCountSeries::at(double p) const {
  CompensatedSum s;
  for (int j = 0; j <= edges; ++j) {
    double c = coeff[static_cast<std::size_t>(j)];
    if (c != 0.0) s.add(c * std::pow(p, j) * std::pow(1.0 - p, edges - j));
  }
  return s.value();
}

OpenCountSeries exact_series(const GraphPtr& graph, const std::function<double(const Configuration&)>& f,
                             unsigned workers, int max_edges) {
  const int m = graph->num_edges();
  if (m > max_edges || m > lattice::kMaxEnumerationEdges)
    throw GuardError("enumeration refused: " + std::to_string(m) + " edges exceeds limit " +
                     std::to_string(std::min(max_edges, lattice::kMaxEnumerationEdges)));
  const int chunk_bits = std::min(m, 8);
  const std::size_t chunks = std::size_t{1} << chunk_bits;
  const int low_bits = m - chunk_bits;
  auto parts = map_chunks<std::vector<double>>(chunks, workers, [&](std::size_t c) {
    std::vector<double> coeff(static_cast<std::size_t>(m) + 1, 0.0);
    const std::uint64_t base = static_cast<std::uint64_t>(c) << low_bits;
    for (std::uint64_t low = 0; low < (1ULL << low_bits); ++low) {
      std::uint64_t mask = base | low;
      Configuration cfg = Configuration::from_mask(graph, mask, 0.5);
      double v = f(cfg);
      if (v != 0.0) coeff[static_cast<std::size_t>(__builtin_popcountll(mask))] += v;
    }
    return coeff;
  });
  OpenCountSeries out{m, std::vector<double>(static_cast<std::size_t>(m) + 1, 0.0)};
  for (const auto& part : parts)
    for (int j = 0; j <= m; ++j) out.coeff[static_cast<std::size_t>(j)] += part[static_cast<std::size_t>(j)];
  return out;
}

double exact_event_probability(const GraphPtr& graph, double p, const Event& event, unsigned workers) {
  validate(event, *graph);
  return exact_series(graph, [&](const Configuration& c) { return evaluate(event, c) ? 1.0 : 0.0; }, workers).at(p);
}

// ---------------------------------------------------------------------------
// Switching identity
// ---------------------------------------------------------------------------

namespace {

double beta_of(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("p must lie in (0,1)");
  return p / (1.0 - p);
}

bool all_connected(const Configuration& c, const std::vector<int>& pts) {
  auto cl = lattice::cluster_of(c, std::span<const int>(&pts[0], 1));
  std::set<int> s(cl.begin(), cl.end());
  return std::all_of(pts.begin(), pts.end(), [&](int v) { return s.count(v) > 0; });
}

Region complement(int n, const std::vector<int>& vs) {
  Region r(n);
  for (int v = 0; v < n; ++v) r.insert(v);
  for (int v : vs) r.erase(v);
  return r;
}

}  // namespace

bool switching_edge_eligible(const std::vector<int>& marked, const DirectedEdge& g) {
  return std::find(marked.begin(), marked.end(), g.tail) == marked.end() &&
         std::find(marked.begin(), marked.end(), g.head) == marked.end();
}

SwitchingSeries switching_series(const GraphPtr& graph, const std::vector<int>& marked,
                                 const trees::AbstractTree& tree, const DirectedEdge& g, unsigned workers) {
  const int k = static_cast<int>(marked.size()) - 1;
  if (k < 2) throw DomainError("switching needs at least three marked vertices");
  if (tree.leaves() != k + 1) throw DomainError("tree leaf count differs from marked count");
  if (graph->num_edges() > kSwitchingMaxEdges)
    throw GuardError("switching oracle refused: " + std::to_string(graph->num_edges()) + " edges exceeds limit " +
                     std::to_string(kSwitchingMaxEdges));
  auto site = trees::select_IJV(tree);
  if (std::min(site.I, site.J) != k - 1 || std::max(site.I, site.J) != k)
    throw DomainError("x_{k-1}, x_k must be the I/J leaves of the tree");
  auto [a, b] = graph->edge(g.edge);
  if (!((a == g.tail && b == g.head) || (a == g.head && b == g.tail))) throw DomainError("g is not an edge of the graph");
  if (!switching_edge_eligible(marked, g)) throw DomainError("g touches a marked vertex");

  std::optional<trees::AbstractTree> reduced;
  if (k >= 3) reduced = trees::phi_reduce(tree).reduced;
  const int x0 = marked[0], xa = marked[static_cast<std::size_t>(k - 1)], xb = marked[static_cast<std::size_t>(k)];
  std::vector<int> pair{xa, xb};
  std::vector<int> reduced_marked(marked.begin(), marked.end() - 2);
  reduced_marked.push_back(g.tail);

  SwitchingSeries out;
  out.lhs = exact_series(graph, [&](const Configuration& c) -> double {
    if (!c.is_open(g.edge) || !all_connected(c, marked)) return 0.0;
    auto cp = pivotals::common_pivotal_extremes(c, x0, pair);
    if (!cp.last || !(*cp.last == g)) return 0.0;
    auto cls = conntree::classify_tree(conntree::build_connectivity_tree(c, marked));
    return cls.binary && *cls.tree == tree ? 1.0 : 0.0;
  }, workers, kSwitchingMaxEdges);
  out.rhs = exact_series(graph, [&](const Configuration& c) -> double {
    if (c.is_open(g.edge) || !all_connected(c, reduced_marked)) return 0.0;
    auto cl = lattice::cluster_of(c, std::span<const int>(&g.tail, 1));
    Region off = complement(c.graph().num_vertices(), cl);
    if (!lattice::connected(c, xa, g.head, &off) || !lattice::connected(c, xb, g.head, &off)) return 0.0;
    if (pivotals::common_pivotal_extremes(c, g.head, pair).first) return 0.0;
    if (reduced) {
      auto cls = conntree::classify_tree(conntree::build_connectivity_tree(c, reduced_marked));
      if (!cls.binary || !(*cls.tree == *reduced)) return 0.0;
    }
    return 1.0;
  }, workers, kSwitchingMaxEdges);
  return out;
}

SwitchingReport switching_report(const SwitchingSeries& s, double p) {
  SwitchingReport r;
  r.p = p;
  r.lhs = s.lhs.at(p);
  r.rhs = s.rhs.at(p);
  r.residual = std::fabs(r.lhs - beta_of(p) * r.rhs);
  auto zero = [](const OpenCountSeries& x) {
    return std::all_of(x.coeff.begin(), x.coeff.end(), [](double c) { return c == 0.0; });
  };
  r.vacuous = zero(s.lhs) && zero(s.rhs);
  return r;
}

SwitchingReport verify_switching(const GraphPtr& graph, double p, const std::vector<int>& marked,
                                 const trees::AbstractTree& tree, const DirectedEdge& g, unsigned workers) {
  beta_of(p);
  return switching_report(switching_series(graph, marked, tree, g, workers), p);
}

// ---------------------------------------------------------------------------
// Bubble switching
// ---------------------------------------------------------------------------

SubsetFunction constant_function(double c) {
  return [c](const std::vector<int>&) { return c; };
}

SubsetFunction indicator_contains(std::vector<int> required) {
  std::sort(required.begin(), required.end());
  return [required](const std::vector<int>& s) {
    return std::includes(s.begin(), s.end(), required.begin(), required.end()) ? 1.0 : 0.0;
  };
}

SubsetFunction seeded_random_function(std::uint64_t seed) {
  return [seed](const std::vector<int>& s) {
    std::uint64_t h = stream_key(seed, {0x73756273ULL, s.size()});
    for (int v : s) h = mix64(h ^ (static_cast<std::uint64_t>(v) + kGolden));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
  };
}

BubbleReport verify_bubble_switch(const GraphPtr& graph, double p, const DirectedEdge& f, int K, int x1, int x2,
                                  const SubsetFunction& G, unsigned workers) {
  const double beta = beta_of(p);
  if (graph->num_edges() > kBubbleSwitchMaxEdges)
    throw GuardError("bubble switching oracle refused: " + std::to_string(graph->num_edges()) +
                     " edges exceeds limit " + std::to_string(kBubbleSwitchMaxEdges));
  if (K < 0) throw DomainError("K must be nonnegative");
  const int origin = graph->vertex(lattice::Point(static_cast<std::size_t>(graph->dim()), 0));
  lattice::Box box{lattice::Point(static_cast<std::size_t>(graph->dim()), 0), 2 * K};
  const Region inside = graph->region_of(box);
  if (inside.contains(x1) || inside.contains(x2)) throw DomainError("x_1 and x_2 must lie outside B(2K)");
  if (!inside.contains(f.tail)) throw DomainError("the tail of f must lie in B(2K)");
  auto [a, b] = graph->edge(f.edge);
  if (!((a == f.tail && b == f.head) || (a == f.head && b == f.tail))) throw DomainError("f is not an edge of the graph");

  auto restricted = [&](const Configuration& c, std::vector<int> seeds) {
    auto cl = lattice::cluster_of(c, seeds, &inside);
    std::sort(cl.begin(), cl.end());
    return cl;
  };
  std::vector<int> both{x1, x2};
  auto lhs = exact_series(graph, [&](const Configuration& c) -> double {
    if (!c.is_open(f.edge) || !lattice::connected(c, origin, x1) || !lattice::connected(c, origin, x2)) return 0.0;
    if (pivotals::common_pivotal_extremes(c, origin, both).first) return 0.0;
    auto piv = pivotals::open_pivotals(c, origin, x2);
    if (piv.edges.empty() || !(piv.edges.front() == f)) return 0.0;
    return G(restricted(c, {origin}));
  }, workers, kBubbleSwitchMaxEdges);
  auto rhs = exact_series(graph, [&](const Configuration& c) -> double {
    if (c.is_open(f.edge)) return 0.0;
    if (!lattice::doubly_connected(c, origin, f.tail) || !lattice::connected(c, origin, x1)) return 0.0;
    auto cl = lattice::cluster_of(c, std::span<const int>(&f.tail, 1));
    Region off = complement(c.graph().num_vertices(), cl);
    if (!lattice::connected(c, f.head, x2, &off)) return 0.0;
    return G(restricted(c, {origin, f.head}));
  }, workers, kBubbleSwitchMaxEdges);
  BubbleReport r;
  r.lhs = lhs.at(p);
  r.rhs = rhs.at(p);
  r.residual = std::fabs(r.lhs - beta * r.rhs);
  return r;
}

// ---------------------------------------------------------------------------
// BK and tree-graph bound
// ---------------------------------------------------------------------------

BkReport verify_bk(const GraphPtr& graph, double p, const Event& a, const Event& b, unsigned workers) {
  if (graph->num_edges() > kBkMaxEdges)
    throw GuardError("BK oracle refused: " + std::to_string(graph->num_edges()) + " edges exceeds limit " +
                     std::to_string(kBkMaxEdges));
  if (a.kind != Event::Kind::connection || b.kind != Event::Kind::connection)
    throw DomainError("BK oracle supports increasing connection events");
  validate(a, *graph);
  validate(b, *graph);
  std::vector<lattice::Demand> demands{{a.x, a.y, a.region}, {b.x, b.y, b.region}};
  BkReport r;
  r.lhs = exact_series(graph, [&](const Configuration& c) {
    return lattice::disjointly_occurs(c, demands) ? 1.0 : 0.0;
  }, workers).at(p);
  double pa = exact_series(graph, [&](const Configuration& c) { return evaluate(a, c) ? 1.0 : 0.0; }, workers).at(p);
  double pb = exact_series(graph, [&](const Configuration& c) { return evaluate(b, c) ? 1.0 : 0.0; }, workers).at(p);
  r.rhs = pa * pb;
  return r;
}

std::vector<std::vector<double>> two_point_matrix(const GraphPtr& graph, double p, unsigned workers) {
  const int n = graph->num_vertices();
  std::vector<std::vector<double>> tau(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int x = 0; x < n; ++x)
    for (int y = x; y < n; ++y) {
      double v = x == y ? 1.0 : exact_series(graph, [&](const Configuration& c) {
        return lattice::connected(c, x, y) ? 1.0 : 0.0;
      }, workers).at(p);
      tau[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] = tau[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] = v;
    }
  return tau;
}

TreeBoundReport verify_tree_bound(const GraphPtr& graph, double p, const std::vector<int>& points, unsigned workers) {
  const int k = static_cast<int>(points.size());
  if (k < 3 || k > 4) throw DomainError("tree bound supports k in {3,4}");
  if (graph->num_edges() > kTreeBoundMaxEdges)
    throw GuardError("tree-bound oracle refused: " + std::to_string(graph->num_edges()) + " edges exceeds limit " +
                     std::to_string(kTreeBoundMaxEdges));
  TreeBoundReport r;
  r.tau = exact_series(graph, [&](const Configuration& c) { return all_connected(c, points) ? 1.0 : 0.0; }, workers).at(p);
  auto tau = two_point_matrix(graph, p, workers);
  const int n = graph->num_vertices();
  CompensatedSum bound;
  for (const auto& t : trees::enumerate_trees(k)) {
    std::vector<int> place(static_cast<std::size_t>(t.node_count()), 0);
    for (int l = 0; l < k; ++l) place[static_cast<std::size_t>(l)] = points[static_cast<std::size_t>(l)];
    const int internal = t.internal_count();
    std::uint64_t combos = 1;
    for (int i = 0; i < internal; ++i) combos *= static_cast<std::uint64_t>(n);
    for (std::uint64_t idx = 0; idx < combos; ++idx) {
      std::uint64_t r2 = idx;
      for (int i = 0; i < internal; ++i) {
        place[static_cast<std::size_t>(k + i)] = static_cast<int>(r2 % static_cast<std::uint64_t>(n));
        r2 /= static_cast<std::uint64_t>(n);
      }
      double prod = 1.0;
      for (int v = 1; v < t.node_count() && prod != 0.0; ++v)
        prod *= tau[static_cast<std::size_t>(place[static_cast<std::size_t>(v)])][static_cast<std::size_t>(place[static_cast<std::size_t>(t.parent(v))])];
      bound.add(prod);
    }
  }
  r.bound = bound.value();
  return r;
}

// ---------------------------------------------------------------------------
// Witness structure
// ---------------------------------------------------------------------------

std::optional<std::vector<std::vector<int>>> edge_disjoint_paths(const Configuration& config,
                                                                 const std::vector<int>& sources, int sink) {
  const Graph& g = config.graph();
  const int n = g.num_vertices();
  std::vector<int> flow(static_cast<std::size_t>(g.num_edges()), 0);  // +1: first -> second endpoint
  std::vector<char> source_used(sources.size(), 0);
  auto dir = [&](int e, int from) { return g.edge(e).first == from ? 1 : -1; };
  for (std::size_t round = 0; round < sources.size(); ++round) {
    // BFS from all unused sources at once; via[v] = edge, or -1 - source index.
    std::vector<int> via(static_cast<std::size_t>(n), -1000000);
    std::vector<int> queue;
    for (std::size_t s = 0; s < sources.size(); ++s)
      if (!source_used[s] && via[static_cast<std::size_t>(sources[s])] == -1000000) {
        via[static_cast<std::size_t>(sources[s])] = -1 - static_cast<int>(s);
        queue.push_back(sources[s]);
      }
    bool found = via[static_cast<std::size_t>(sink)] != -1000000;
    for (std::size_t h = 0; h < queue.size() && !found; ++h) {
      int u = queue[h];
      for (const auto& inc : g.incident(u)) {
        if (!config.is_open(inc.edge) || via[static_cast<std::size_t>(inc.neighbor)] != -1000000) continue;
        if (flow[static_cast<std::size_t>(inc.edge)] == dir(inc.edge, u)) continue;
        via[static_cast<std::size_t>(inc.neighbor)] = inc.edge;
        if (inc.neighbor == sink) {
          found = true;
          break;
        }
        queue.push_back(inc.neighbor);
      }
    }
    if (!found) return std::nullopt;
    int v = sink;
    while (via[static_cast<std::size_t>(v)] >= 0) {
      int e = via[static_cast<std::size_t>(v)];
      int u = g.other_end(e, v);
      flow[static_cast<std::size_t>(e)] += dir(e, u);
      v = u;
    }
    source_used[static_cast<std::size_t>(-1 - via[static_cast<std::size_t>(v)])] = 1;
  }
  // Decompose: follow outgoing flow from each source, cutting loops.
  std::vector<std::vector<int>> paths;
  for (int s : sources) {
    std::vector<int> path{s};
    int at = s;
    std::size_t guard = 0;
    while (at != sink && guard++ < static_cast<std::size_t>(4 * g.num_edges() + 4)) {
      bool moved = false;
      for (const auto& inc : g.incident(at)) {
        if (flow[static_cast<std::size_t>(inc.edge)] != dir(inc.edge, at)) continue;
        flow[static_cast<std::size_t>(inc.edge)] = 0;
        at = inc.neighbor;
        auto seen = std::find(path.begin(), path.end(), at);
        if (seen != path.end()) path.erase(seen + 1, path.end());
        else path.push_back(at);
        moved = true;
        break;
      }
      if (!moved) return std::nullopt;
    }
    if (at != sink) return std::nullopt;
    paths.push_back(std::move(path));
  }
  return paths;
}

WitnessReport verify_witness_structure(const Configuration& config, const conntree::ConnTree& tree, int v) {
  WitnessReport rep;
  const auto kids = tree.children(v);
  // Clause 1: marked vertices below v reach v (the BFS tree from v spans them).
  std::vector<int> below;
  for (int x : tree.marked) {
    if (x == v) continue;
    for (int y = x; tree.parent.count(y);) {
      y = tree.parent.at(y);
      if (y == v) {
        below.push_back(x);
        break;
      }
    }
  }
  rep.spanning_tree = std::all_of(below.begin(), below.end(), [&](int x) { return lattice::connected(config, x, v); });
  if (!rep.spanning_tree) rep.failure = "marked descendant not connected to v";

  // Clause 2: every pair of children has edge-disjoint paths to v.
  rep.disjoint_pairs = true;
  for (std::size_t i = 0; i < kids.size() && rep.disjoint_pairs; ++i)
    for (std::size_t j = i + 1; j < kids.size(); ++j)
      if (!edge_disjoint_paths(config, {kids[i], kids[j]}, v)) {
        rep.disjoint_pairs = false;
        rep.failure = "children " + std::to_string(kids[i]) + "," + std::to_string(kids[j]) + " share a cut edge";
        break;
      }

  // Clause 3: for m >= 3, a on pi_1, b on pi_2, c with the five-fold disjoint occurrence.
  if (kids.size() >= 3 && rep.disjoint_pairs) {
    auto pi = *edge_disjoint_paths(config, {kids[0], kids[1]}, v);
    const int n = config.graph().num_vertices();
    for (std::size_t j = 2; j < kids.size(); ++j) {
      std::optional<CycleWitness> found;
      for (int a : pi[0]) {
        for (int b : pi[1]) {
          for (int c = 0; c < n && !found; ++c) {
            std::vector<lattice::Demand> d{{v, a, {}}, {a, c, {}}, {kids[j], c, {}}, {c, b, {}}, {b, v, {}}};
            if (lattice::disjointly_occurs(config, d, 5)) found = CycleWitness{kids[j], a, b, c};
          }
          if (found) break;
        }
        if (found) break;
      }
      if (!found) {
        rep.cycles = false;
        rep.failure = "no cycle witness for child " + std::to_string(kids[j]);
        break;
      }
      rep.cycle_witnesses.push_back(*found);
    }
  }
  return rep;
}

}  // namespace percolab::oracle
