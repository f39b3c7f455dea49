#include "percolab/battery.hpp"

#include <algorithm>
#include <memory>
#include <set>

#include "percolab/common.hpp"

namespace percolab::battery {

namespace {

using Edges = std::vector<std::pair<Point, Point>>;

// Path through consecutive points.
void add_path(Edges& edges, const std::vector<Point>& pts) {
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) edges.emplace_back(pts[i], pts[i + 1]);
}

MarkedGraph marked_graph(std::string name, int dim, const Edges& edges, const std::vector<Point>& marked) {
  MarkedGraph g;
  g.name = std::move(name);
  g.graph = make_graph(dim, edges);
  for (const auto& p : marked) g.marked.push_back(g.graph->vertex(p));
  return g;
}

MarkedGraph box_graph(std::string name, int dim, int radius, const std::vector<Point>& marked) {
  MarkedGraph g;
  g.name = std::move(name);
  g.graph = std::make_shared<const lattice::Graph>(lattice::Graph::box(dim, radius));
  for (const auto& p : marked) g.marked.push_back(g.graph->vertex(p));
  return g;
}

MarkedGraph y_bridge() {
  Edges e;
  add_path(e, {{0, 0}, {1, 0}, {2, 0}, {3, 0}, {3, 1}, {2, 1}, {2, 0}});
  e.emplace_back(Point{4, 0}, Point{3, 0});
  e.emplace_back(Point{3, 2}, Point{3, 1});
  add_path(e, {{1, 0}, {1, 1}, {2, 1}});
  return marked_graph("y-bridge", 2, e, {{0, 0}, {4, 0}, {3, 2}});
}

MarkedGraph ladder() {
  Edges e;
  for (int i = 0; i < 4; ++i) {
    e.emplace_back(Point{i, 0}, Point{i + 1, 0});
    e.emplace_back(Point{i, 1}, Point{i + 1, 1});
  }
  for (int i = 0; i <= 4; ++i) e.emplace_back(Point{i, 0}, Point{i, 1});
  return marked_graph("ladder-2x5", 2, e, {{0, 0}, {0, 1}, {4, 0}, {4, 1}});
}

MarkedGraph cube() {
  Edges e;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) {
        if (x == 0) e.emplace_back(Point{x, y, z}, Point{1, y, z});
        if (y == 0) e.emplace_back(Point{x, y, z}, Point{x, 1, z});
        if (z == 0) e.emplace_back(Point{x, y, z}, Point{x, y, 1});
      }
  return marked_graph("cube-2x2x2", 3, e, {{0, 0, 0}, {1, 1, 0}, {1, 0, 1}});
}

MarkedGraph triangle_with_legs() {
  Edges e;
  add_path(e, {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}});
  add_path(e, {{1, 0}, {2, 0}, {3, 0}});
  add_path(e, {{1, 1}, {1, 2}, {1, 3}});
  add_path(e, {{0, 1}, {-1, 1}, {-2, 1}});
  add_path(e, {{0, 0}, {0, -1}});
  return marked_graph("square-with-legs", 2, e, {{0, -1}, {3, 0}, {1, 3}, {-2, 1}});
}

MarkedGraph theta_graph() {
  Edges e;
  add_path(e, {{0, 0}, {1, 0}, {2, 0}, {3, 0}});
  add_path(e, {{0, 0}, {0, 1}, {1, 1}, {2, 1}, {3, 1}, {3, 0}});
  add_path(e, {{1, 0}, {1, 1}});
  add_path(e, {{2, 0}, {2, 1}});
  return marked_graph("theta", 2, e, {{0, 0}, {3, 0}, {1, 1}});
}

lattice::Box box_around_origin(int dim, int radius) { return lattice::Box{Point(static_cast<std::size_t>(dim), 0), radius}; }

}  // namespace

GraphPtr make_graph(int dim, const std::vector<std::pair<Point, Point>>& edges) {
  return std::make_shared<const lattice::Graph>(lattice::Graph::from_point_edges(dim, edges));
}

std::vector<DirectedEdge> eligible_edges(const MarkedGraph& g) {
  std::vector<DirectedEdge> out;
  for (int e = 0; e < g.graph->num_edges(); ++e) {
    auto [u, v] = g.graph->edge(e);
    for (auto [t, h] : {std::pair{u, v}, std::pair{v, u}}) {
      DirectedEdge de{t, h, e};
      if (oracle::switching_edge_eligible(g.marked, de)) out.push_back(de);
    }
  }
  return out;
}

std::vector<MarkedGraph> switching_graphs() {
  std::vector<MarkedGraph> out;
  out.push_back(y_bridge());
  out.push_back(box_graph("grid-3x3-k2", 2, 1, {{-1, -1}, {1, 1}, {1, -1}}));
  out.push_back(box_graph("grid-3x3-k3", 2, 1, {{-1, -1}, {1, 1}, {1, -1}, {-1, 1}}));
  out.push_back(cube());
  out.push_back(ladder());
  return out;
}

std::vector<trees::AbstractTree> switching_trees(int k) {
  std::vector<trees::AbstractTree> out;
  for (auto& t : trees::enumerate_trees(k)) {
    auto site = trees::select_IJV(t);
    if (std::min(site.I, site.J) == k - 2 && std::max(site.I, site.J) == k - 1) out.push_back(std::move(t));
  }
  return out;
}

BubbleInstance bubble_instance() {
  Edges e;
  add_path(e, {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}});
  add_path(e, {{1, 0}, {2, 0}, {3, 0}});
  add_path(e, {{2, 0}, {2, 1}, {1, 1}});
  add_path(e, {{0, 1}, {0, 2}, {0, 3}});
  add_path(e, {{1, 1}, {1, 2}, {0, 2}});
  add_path(e, {{1, 2}, {1, 3}, {0, 3}});

  BubbleInstance b;
  b.graph = make_graph(2, e);
  b.K = 1;
  b.x1 = b.graph->vertex({3, 0});
  b.x2 = b.graph->vertex({0, 3});
  const auto& g = *b.graph;
  auto directed = [&](const Point& t, const Point& h) {
    int u = g.vertex(t), v = g.vertex(h);
    return DirectedEdge{u, v, *g.edge_between(u, v)};
  };
  b.f = {directed({0, 0}, {1, 0}), directed({1, 0}, {2, 0}), directed({1, 1}, {1, 2}), directed({0, 2}, {0, 3})};
  b.indicator_set = {g.vertex({0, 0}), g.vertex({1, 0})};
  std::sort(b.indicator_set.begin(), b.indicator_set.end());
  const auto ball = box_around_origin(2, 2 * b.K);
  for (const auto& f : b.f)
    if (!ball.contains(g.point(f.tail))) throw DomainError("bubble instance edge tail outside B(2K)");
  return b;
}

std::vector<MarkedGraph> tree_bound_graphs() {
  std::vector<MarkedGraph> out;
  out.push_back(triangle_with_legs());
  auto legs3 = triangle_with_legs();
  legs3.name = "square-with-legs-k3";
  legs3.marked.pop_back();
  out.push_back(legs3);
  out.push_back(y_bridge());
  out.push_back(theta_graph());
  out.push_back(box_graph("grid-3x3-k3", 2, 1, {{-1, -1}, {1, 1}, {1, -1}}));
  out.push_back(box_graph("grid-3x3-k4", 2, 1, {{-1, -1}, {1, 1}, {1, -1}, {-1, 1}}));
  out.push_back(cube());
  out.push_back(ladder());
  return out;
}

std::vector<MarkedGraph> all_graphs() {
  std::vector<MarkedGraph> out;
  std::set<std::string> seen;
  auto add = [&](const std::vector<MarkedGraph>& gs) {
    for (const auto& g : gs)
      if (seen.insert(g.name).second) out.push_back(g);
  };
  add(switching_graphs());
  add(tree_bound_graphs());
  add({three_branch_junction()});
  return out;
}

BkInstance random_bk_instance(std::uint64_t seed, std::uint64_t index) {
  CounterRng rng(seed, {0x626b, index});
  const auto full = lattice::Graph::box(2, 1);
  for (;;) {
    Edges kept;
    for (int e = 0; e < full.num_edges(); ++e)
      if (rng.uniform() < 0.8) {
        auto [u, v] = full.edge(e);
        kept.emplace_back(full.point(u), full.point(v));
      }
    if (kept.size() < 3) continue;
    BkInstance inst;
    inst.graph = make_graph(2, kept);
    const int n = inst.graph->num_vertices();
    auto pick_pair = [&] {
      int x = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
      if (y >= x) ++y;
      return std::pair{x, y};
    };
    auto [a1, a2] = pick_pair();
    auto [b1, b2] = pick_pair();
    inst.a = oracle::connection(a1, a2);
    inst.b = oracle::connection(b1, b2);
    static constexpr double kPs[] = {0.3, 0.5, 0.7};
    inst.p = kPs[rng.below(3)];
    return inst;
  }
}

BkInstance disjoint_bk_instance() {
  Edges e;
  add_path(e, {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}});
  add_path(e, {{3, 0}, {4, 0}, {4, 1}, {3, 1}, {3, 0}});
  BkInstance inst;
  inst.graph = make_graph(2, e);
  inst.p = 0.5;
  inst.a = oracle::connection(inst.graph->vertex({0, 0}), inst.graph->vertex({1, 1}));
  inst.b = oracle::connection(inst.graph->vertex({3, 0}), inst.graph->vertex({4, 1}));
  return inst;
}

MarkedGraph three_branch_junction() {
  Edges e;
  add_path(e, {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}});
  add_path(e, {{1, 0}, {2, 0}, {3, 0}});
  add_path(e, {{1, 1}, {1, 2}, {1, 3}});
  add_path(e, {{0, 1}, {-1, 1}, {-2, 1}});
  add_path(e, {{0, 0}, {0, -1}, {0, -2}, {0, -3}, {0, -4}});
  return marked_graph("three-branch-junction", 2, e, {{0, -4}, {3, 0}, {1, 3}, {-2, 1}});
}

}  // namespace percolab::battery
