#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "brute_oracles.hpp"
#include "percolab/battery.hpp"
#include "percolab/conntree.hpp"
#include "percolab/oracle.hpp"
#include "percolab/pivotals.hpp"

using namespace percolab;
using namespace percolab::lattice;

namespace {

GraphPtr share(Graph g) { return std::make_shared<const Graph>(std::move(g)); }

double beta(double p) { return p / (1 - p); }

// Exact probability by direct mask enumeration with brute connectivity.
double brute_probability(const GraphPtr& g, double p, const std::function<bool(const Configuration&)>& f) {
  const int m = g->num_edges();
  double total = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    auto c = Configuration::from_mask(g, mask, p);
    if (!f(c)) continue;
    int open = __builtin_popcountll(mask);
    total += std::pow(p, open) * std::pow(1 - p, m - open);
  }
  return total;
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("exact probability of a single edge connection is p") {
    auto g = share(Graph::from_point_edges(1, {{{0}, {1}}}));
    for (double p : {0.1, 0.5, 0.9}) CHECK(oracle::exact_event_probability(g, p, *oracle::connection(0, 1)) == doctest::Approx(p).epsilon(1e-14));
  }

  TEST_CASE("double connection across two parallel two-edge paths") {
    auto g = share(Graph::from_point_edges(2, {{{0, 0}, {1, 0}}, {{1, 0}, {1, 1}}, {{0, 0}, {0, 1}}, {{0, 1}, {1, 1}}}));
    int x = g->vertex({0, 0}), y = g->vertex({1, 1});
    double p = 0.6;
    CHECK(oracle::exact_event_probability(g, p, *oracle::doubly(x, y)) == doctest::Approx(std::pow(p, 4)).epsilon(1e-14));
    double two_paths = brute_probability(g, p, [&](const Configuration& c) { return brute::connected(c, x, y); });
    CHECK(oracle::exact_event_probability(g, p, *oracle::connection(x, y)) == doctest::Approx(two_paths).epsilon(1e-14));
    CHECK(two_paths == doctest::Approx(2 * p * p - std::pow(p, 4)).epsilon(1e-14));
  }

  TEST_CASE("connection without a second connection on a square") {
    auto g = share(Graph::from_point_edges(2, {{{0, 0}, {1, 0}}, {{1, 0}, {1, 1}}, {{1, 1}, {0, 1}}, {{0, 1}, {0, 0}}}));
    int x = g->vertex({0, 0}), y = g->vertex({1, 0}), z = g->vertex({0, 1});
    double p = 0.3;
    auto ev = oracle::all_of({oracle::connection(x, y), oracle::negation(oracle::connection(x, z))});
    // xy open, xz closed, and the three-edge detour y-w-z not fully open.
    CHECK(oracle::exact_event_probability(g, p, *ev) == doctest::Approx(p * (1 - p) * (1 - p * p)).epsilon(1e-14));
  }

  TEST_CASE("exact probabilities agree with sampled frequencies") {
    const std::uint64_t n = 1000000;
    std::vector<std::pair<GraphPtr, std::vector<int>>> cases;
    auto box = share(Graph::box(2, 1));
    cases.push_back({box, {box->vertex({-1, -1}), box->vertex({1, 1})}});
    cases.push_back({box, {box->vertex({-1, -1}), box->vertex({1, 1}), box->vertex({1, -1})}});
    auto j = battery::three_branch_junction();
    cases.push_back({j.graph, j.marked});
    for (const auto& [g, pts] : cases) {
      double p = 0.6;
      double exact = oracle::exact_event_probability(g, p, *oracle::multi_connection(pts));
      double hits = 0;
      for (std::uint64_t s = 0; s < n; ++s) {
        auto c = sample_configuration(g, p, 9, s);
        bool all = true;
        for (int x : pts) all = all && connected(c, pts[0], x);
        hits += all;
      }
      double freq = hits / n, se = std::sqrt(exact * (1 - exact) / n);
      CHECK(std::fabs(freq - exact) < 4 * se);
    }
  }

  TEST_CASE("switching identity on the generic battery graphs") {
    for (const auto& g : battery::switching_graphs()) {
      if (g.name == "ladder-2x5") continue;  // covered by the next case
      const int k = static_cast<int>(g.marked.size());
      for (const auto& t : battery::switching_trees(k))
        for (const auto& e : battery::eligible_edges(g))
          for (double p : {0.3, 0.5, 0.7}) CHECK(oracle::verify_switching(g.graph, p, g.marked, t, e).residual < 1e-12);
    }
  }

  TEST_CASE("switching residual on the ladder is exactly the branch-point coincidence") {
    auto gs = battery::switching_graphs();
    auto g = *std::find_if(gs.begin(), gs.end(), [](const auto& m) { return m.name == "ladder-2x5"; });
    auto t = battery::switching_trees(4).at(0);
    const std::vector<int> pair{g.marked[2], g.marked[3]};
    int nonzero = 0;
    for (const auto& e : battery::eligible_edges(g)) {
      auto s = oracle::switching_series(g.graph, g.marked, t, e);
      // Left side restricted to configurations where the lower end of g is
      // not already a connectivity-tree vertex.
      auto generic = oracle::exact_series(g.graph, [&](const Configuration& c) -> double {
        if (!c.is_open(e.edge)) return 0;
        for (int x : g.marked)
          if (!connected(c, g.marked[0], x)) return 0;
        auto cp = pivotals::common_pivotal_extremes(c, g.marked[0], pair);
        if (!cp.last || !(*cp.last == e)) return 0;
        auto ct = conntree::build_connectivity_tree(c, g.marked);
        auto cls = conntree::classify_tree(ct);
        if (!cls.binary || !(*cls.tree == t)) return 0;
        return std::binary_search(ct.vertices.begin(), ct.vertices.end(), e.tail) ? 0.0 : 1.0;
      });
      for (double p : {0.3, 0.5, 0.7}) {
        CHECK(std::fabs(generic.at(p) - beta(p) * s.rhs.at(p)) < 1e-12);
        nonzero += std::fabs(s.lhs.at(p) - beta(p) * s.rhs.at(p)) > 1e-12;
      }
    }
    CHECK(nonzero == 12);
  }

  TEST_CASE("switching rejects a tree whose cherry is not the last two leaves") {
    auto g = battery::switching_graphs()[2];
    auto bad = trees::AbstractTree::from_newick("((1,2),3)0;");
    auto e = battery::eligible_edges(g).at(0);
    CHECK_THROWS_AS(oracle::verify_switching(g.graph, 0.5, g.marked, bad, e), DomainError);
  }

  TEST_CASE("bubble switching for constant, indicator and random G") {
    auto b = battery::bubble_instance();
    int nonvacuous = 0;
    for (const auto& f : b.f)
      for (double p : {0.3, 0.5, 0.7}) {
        auto r1 = oracle::verify_bubble_switch(b.graph, p, f, b.K, b.x1, b.x2, oracle::constant_function(1.0));
        CHECK(r1.residual < 1e-12);
        nonvacuous += r1.lhs > 0;
        CHECK(oracle::verify_bubble_switch(b.graph, p, f, b.K, b.x1, b.x2, oracle::indicator_contains(b.indicator_set)).residual < 1e-12);
        for (std::uint64_t s = 1; s <= 5; ++s)
          CHECK(oracle::verify_bubble_switch(b.graph, p, f, b.K, b.x1, b.x2, oracle::seeded_random_function(s)).residual < 1e-12);
      }
    CHECK(nonvacuous > 0);
  }

  TEST_CASE("bubble switching rejects endpoints inside B(2K)") {
    auto b = battery::bubble_instance();
    int inside = b.graph->vertex({1, 1});
    CHECK_THROWS_AS(oracle::verify_bubble_switch(b.graph, 0.5, b.f[0], b.K, inside, b.x2, oracle::constant_function(1)), DomainError);
  }

  TEST_CASE("BK on a single edge and on disjoint components") {
    auto g = share(Graph::from_point_edges(1, {{{0}, {1}}}));
    auto r = oracle::verify_bk(g, 0.4, *oracle::connection(0, 1), *oracle::connection(0, 1));
    CHECK(r.lhs == 0.0);
    CHECK(r.rhs == doctest::Approx(0.16).epsilon(1e-14));
    auto d = battery::disjoint_bk_instance();
    auto rd = oracle::verify_bk(d.graph, d.p, *d.a, *d.b);
    CHECK(std::fabs(rd.lhs - rd.rhs) < 1e-14);
  }

  TEST_CASE("BK holds on random instances") {
    for (std::uint64_t i = 0; i < 40; ++i) {
      auto b = battery::random_bk_instance(3, i);
      CHECK(b.graph->num_edges() <= 12);
      auto r = oracle::verify_bk(b.graph, b.p, *b.a, *b.b);
      CHECK(r.lhs <= r.rhs + 1e-12);
    }
  }

  TEST_CASE("tree-graph bound") {
    auto gs = battery::tree_bound_graphs();
    for (const auto& g : gs) {
      double last = -1;
      for (double p : {0.2, 0.4, 0.6, 0.8}) {
        auto r = oracle::verify_tree_bound(g.graph, p, g.marked);
        CHECK(r.tau <= r.bound);
        CHECK(r.bound >= last);
        last = r.bound;
      }
    }
    // Structurally disconnected points: both sides vanish.
    auto g = share(Graph::from_point_edges(1, {{{0}, {1}}, {{3}, {4}}, {{6}, {7}}}));
    auto r = oracle::verify_tree_bound(g, 0.5, {0, 2, 4});
    CHECK(r.tau == 0.0);
    CHECK(r.bound == 0.0);
  }

  TEST_CASE("tree bound for three points is the star sum of two-point functions") {
    auto g = battery::tree_bound_graphs()[1];  // square with legs, three marked points
    REQUIRE(g.marked.size() == 3);
    auto tau = oracle::two_point_matrix(g.graph, 0.5);
    double star = 0;
    for (int z = 0; z < g.graph->num_vertices(); ++z) star += tau[g.marked[0]][z] * tau[g.marked[1]][z] * tau[g.marked[2]][z];
    auto r = oracle::verify_tree_bound(g.graph, 0.5, g.marked);
    CHECK(r.bound == doctest::Approx(star).epsilon(1e-12));
  }

  TEST_CASE("witness structure at a Y junction and at the three-branch junction") {
    auto y = share(Graph::from_point_edges(2, {{{-1, 0}, {0, 0}}, {{0, 0}, {1, 0}}, {{0, 0}, {0, 1}}}));
    auto cy = Configuration::all(y, true, 0.5);
    std::vector<int> m{y->vertex({0, 1}), y->vertex({-1, 0}), y->vertex({1, 0})};
    auto ty = conntree::build_connectivity_tree(cy, m);
    int v = ty.parent.at(m[1]);
    auto ry = oracle::verify_witness_structure(cy, ty, v);
    CHECK(ry.ok());
    CHECK(ry.cycle_witnesses.empty());

    auto j = battery::three_branch_junction();
    auto cj = Configuration::all(j.graph, true, 0.5);
    auto tj = conntree::build_connectivity_tree(cj, j.marked);
    int center = j.graph->vertex({0, 0});
    REQUIRE(tj.children(center).size() == 3);
    auto rj = oracle::verify_witness_structure(cj, tj, center);
    CHECK(rj.ok());
    REQUIRE(rj.cycle_witnesses.size() == 1);
    auto paths = oracle::edge_disjoint_paths(cj, {tj.children(center)[0], tj.children(center)[1]}, center);
    CHECK(paths.has_value());
  }

  TEST_CASE("edge-disjoint paths fail through a shared bridge") {
    auto g = share(Graph::from_point_edges(2, {{{0, 0}, {1, 0}}, {{1, 0}, {2, 0}}, {{1, 0}, {1, 1}}}));
    auto c = Configuration::all(g, true, 0.5);
    CHECK_FALSE(oracle::edge_disjoint_paths(c, {g->vertex({2, 0}), g->vertex({1, 1})}, g->vertex({0, 0})).has_value());
  }

  TEST_CASE("guards refuse oversized graphs") {
    auto big = share(Graph::box(2, 3));
    CHECK_THROWS_AS(oracle::verify_tree_bound(big, 0.5, {0, 1, 2}), GuardError);
  }
}
