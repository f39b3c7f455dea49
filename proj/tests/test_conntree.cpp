#include <doctest.h>

#include <memory>

#include "brute_oracles.hpp"
#include "percolab/battery.hpp"
#include "percolab/conntree.hpp"

using namespace percolab;
using namespace percolab::lattice;

namespace {

GraphPtr share(Graph g) { return std::make_shared<const Graph>(std::move(g)); }

bool matches_brute(const Configuration& c, const std::vector<int>& marked) {
  auto t = conntree::build_connectivity_tree(c, marked);
  auto b = brute::connectivity_tree(c, marked);
  return t.vertices == b.vertices && t.parent == b.parent && conntree::tree_invariants_hold(t);
}

}  // namespace

TEST_SUITE("conntree") {
  TEST_CASE("Y junction gives the three-leaf tree") {
    // Arms from (0,0) to (-2,0), (2,0), (0,2).
    auto g = share(Graph::from_point_edges(
        2, {{{-2, 0}, {-1, 0}}, {{-1, 0}, {0, 0}}, {{0, 0}, {1, 0}}, {{1, 0}, {2, 0}}, {{0, 0}, {0, 1}}, {{0, 1}, {0, 2}}}));
    auto c = Configuration::all(g, true, 0.5);
    std::vector<int> m{g->vertex({-2, 0}), g->vertex({2, 0}), g->vertex({0, 2})};
    auto t = conntree::build_connectivity_tree(c, m);
    CHECK(conntree::tree_invariants_hold(t));
    auto cls = conntree::classify_tree(t);
    REQUIRE(cls.binary);
    CHECK(cls.tree->canonical() == "(1,2)0;");
    // Branch point: tail of the last common pivotal seen from x_1 and x_2.
    int branch = t.parent.at(m[1]);
    CHECK(g->point(branch) == Point{0, 0});
    CHECK(t.parent.at(branch) == m[0]);
    CHECK(matches_brute(c, m));
  }

  TEST_CASE("marked vertex on the path to another is degenerate") {
    auto g = share(Graph::from_point_edges(1, {{{0}, {1}}, {{1}, {2}}}));
    auto c = Configuration::all(g, true, 0.5);
    auto t = conntree::build_connectivity_tree(c, {0, 1, 2});
    auto cls = conntree::classify_tree(t);
    CHECK_FALSE(cls.binary);
    REQUIRE(cls.reason);
    CHECK(*cls.reason == conntree::Degeneracy::marked_not_leaf);
  }

  TEST_CASE("three arms meeting at one vertex are degenerate") {
    auto j = battery::three_branch_junction();
    auto c = Configuration::all(j.graph, true, 0.5);
    auto t = conntree::build_connectivity_tree(c, j.marked);
    auto cls = conntree::classify_tree(t);
    CHECK_FALSE(cls.binary);
    REQUIRE(cls.reason);
    CHECK(*cls.reason == conntree::Degeneracy::indegree_ge_3);
    CHECK(matches_brute(c, j.marked));
  }

  TEST_CASE("disconnected marked set throws") {
    auto g = share(Graph::box(1, 1));
    auto c = Configuration::all(g, false, 0.5);
    CHECK_THROWS_AS(conntree::build_connectivity_tree(c, {0, 2}), DomainError);
  }

  TEST_CASE("matches the pivotal-intersection oracle on sampled configurations") {
    auto g = share(Graph::box(2, 2));
    std::vector<std::vector<Point>> sets{{{-2, -2}, {2, 2}, {2, -2}}, {{0, 0}, {2, 2}, {-2, 2}, {2, -2}}};
    for (const auto& pts : sets) {
      std::vector<int> m;
      for (const auto& p : pts) m.push_back(g->vertex(p));
      int accepted = 0;
      for (std::uint64_t s = 0; accepted < 150; ++s) {
        auto c = sample_configuration(g, 0.65, 21, s);
        bool all = true;
        for (int x : m) all = all && brute::connected(c, m[0], x);
        if (!all) continue;
        ++accepted;
        CHECK(matches_brute(c, m));
      }
    }
  }

  TEST_CASE("pivotal chain runs from x_i to x_0") {
    auto g = share(Graph::from_point_edges(1, {{{0}, {1}}, {{1}, {2}}, {{2}, {3}}}));
    auto c = Configuration::all(g, true, 0.5);
    auto chain = conntree::pivotal_chain(c, g->vertex({3}), g->vertex({0}));
    CHECK(chain == std::vector<int>{g->vertex({3}), g->vertex({2}), g->vertex({1}), g->vertex({0})});
  }
}
