#include <doctest.h>

#include <memory>

#include "brute_oracles.hpp"
#include "percolab/pivotals.hpp"

using namespace percolab;
using namespace percolab::lattice;

namespace {

GraphPtr share(Graph g) { return std::make_shared<const Graph>(std::move(g)); }

bool same_as_brute(const Configuration& c, const pivotals::PivotalList& list, int x, int y) {
  auto b = brute::pivotals(c, x, y);
  if (b.size() != list.edges.size()) return false;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b[i].edge != list.edges[i].edge || b[i].tail != list.edges[i].tail || b[i].head != list.edges[i].head)
      return false;
  return true;
}

}  // namespace

TEST_SUITE("pivotals") {
  TEST_CASE("every edge of an open path is pivotal, in order") {
    auto g = share(Graph::from_point_edges(1, {{{0}, {1}}, {{1}, {2}}, {{2}, {3}}}));
    auto c = Configuration::all(g, true, 0.5);
    auto list = pivotals::open_pivotals(c, g->vertex({0}), g->vertex({3}));
    REQUIRE(list.edges.size() == 3);
    for (int i = 0; i < 3; ++i) {
      CHECK(g->point(list.edges[static_cast<std::size_t>(i)].tail) == Point{i});
      CHECK(g->point(list.edges[static_cast<std::size_t>(i)].head) == Point{i + 1});
    }
  }

  TEST_CASE("a cycle carries no pivotals") {
    auto g = share(Graph::box(2, 1));
    auto c = Configuration::all(g, true, 0.5);
    CHECK(pivotals::open_pivotals(c, g->vertex({-1, -1}), g->vertex({1, 1})).edges.empty());
  }

  TEST_CASE("disconnected pair throws") {
    auto g = share(Graph::box(1, 1));
    auto c = Configuration::all(g, false, 0.5);
    CHECK_THROWS_AS(pivotals::open_pivotals(c, 0, 2), pivotals::NotConnectedError);
  }

  TEST_CASE("fast and definitional pivotals match an independent oracle") {
    auto g = share(Graph::box(2, 3));
    int checked = 0;
    for (std::uint64_t s = 0; checked < 300; ++s) {
      auto c = sample_configuration(g, 0.6, 5, s);
      int x = static_cast<int>(s % 49), y = static_cast<int>((s * 13 + 5) % 49);
      if (x == y || !brute::connected(c, x, y)) continue;
      ++checked;
      auto fast = pivotals::open_pivotals(c, x, y);
      auto slow = pivotals::open_pivotals_definitional(c, x, y);
      CHECK(same_as_brute(c, fast, x, y));
      CHECK(same_as_brute(c, slow, x, y));
      for (const auto& path : pivotals::random_open_paths(c, x, y, 4, s)) CHECK(pivotals::order_consistent(c, fast, path));
    }
  }

  TEST_CASE("common extremes are the first and last shared pivotals") {
    // Path 0-1-2 then a fork 2-3 and 2-4.
    auto g = share(Graph::from_point_edges(2, {{{0, 0}, {1, 0}}, {{1, 0}, {2, 0}}, {{2, 0}, {3, 0}}, {{2, 0}, {2, 1}}}));
    auto c = Configuration::all(g, true, 0.5);
    int o = g->vertex({0, 0});
    std::vector<int> t{g->vertex({3, 0}), g->vertex({2, 1})};
    auto ex = pivotals::common_pivotal_extremes(c, o, t);
    REQUIRE(ex.first);
    REQUIRE(ex.last);
    CHECK(g->point(ex.first->tail) == Point{0, 0});
    CHECK(g->point(ex.last->tail) == Point{1, 0});
    CHECK(g->point(ex.last->head) == Point{2, 0});
    auto def = pivotals::common_pivotal_extremes_definitional(c, o, t);
    CHECK(def.first == ex.first);
    CHECK(def.last == ex.last);
  }

  TEST_CASE("order check rejects a path that skips the list") {
    auto g = share(Graph::from_point_edges(1, {{{0}, {1}}, {{1}, {2}}}));
    auto c = Configuration::all(g, true, 0.5);
    auto list = pivotals::open_pivotals(c, 0, 2);
    CHECK(pivotals::order_consistent(c, list, {0, 1}));
    CHECK_FALSE(pivotals::order_consistent(c, list, {1, 0}));
  }
}
