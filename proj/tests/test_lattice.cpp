#include <doctest.h>

#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>

#include "percolab/lattice.hpp"

using namespace percolab;
using namespace percolab::lattice;

namespace {

GraphPtr share(Graph g) { return std::make_shared<const Graph>(std::move(g)); }

// Independent connectivity oracle: union-find over open edges.
struct Dsu {
  std::vector<int> p;
  explicit Dsu(int n) : p(static_cast<std::size_t>(n)) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
  void unite(int a, int b) { p[find(a)] = find(b); }
};

bool uf_connected(const Configuration& c, int x, int y) {
  Dsu d(c.graph().num_vertices());
  for (int e = 0; e < c.graph().num_edges(); ++e)
    if (c.is_open(e)) d.unite(c.graph().edge(e).first, c.graph().edge(e).second);
  return d.find(x) == d.find(y);
}

// Square 0-1-2-3-0 in Z^2.
GraphPtr square() {
  return share(Graph::from_point_edges(2, {{{0, 0}, {1, 0}}, {{1, 0}, {1, 1}}, {{1, 1}, {0, 1}}, {{0, 1}, {0, 0}}}));
}

}  // namespace

TEST_SUITE("lattice") {
  TEST_CASE("box sizes") {
    for (int d = 1; d <= 4; ++d)
      for (int R = 0; R <= 2; ++R) {
        auto g = Graph::box(d, R);
        const int side = 2 * R + 1;
        CHECK(g.num_vertices() == static_cast<int>(std::pow(side, d)));
        CHECK(g.num_edges() == d * static_cast<int>(std::pow(side, d - 1)) * (side - 1));
      }
    Box b{{0, 0, 0}, 2};
    CHECK(b.vertex_count() == 125);
    CHECK(b.contains({2, -2, 0}));
    CHECK_FALSE(b.contains({3, 0, 0}));
  }

  TEST_CASE("edge-list parsing") {
    std::istringstream in("# comment\n(0,0) (1,0)\n\n(1,0) (1,1)\n");
    auto g = Graph::parse_edge_list(in);
    CHECK(g.dim() == 2);
    CHECK(g.num_vertices() == 3);
    CHECK(g.num_edges() == 2);
    CHECK(g.vertex({1, 1}) == 2);
    CHECK(g.edge_between(0, 2) == std::nullopt);
    std::istringstream bad("(0,0) (2,0)\n");
    CHECK_THROWS_AS(Graph::parse_edge_list(bad), DomainError);
  }

  TEST_CASE("graph hash tracks content") {
    CHECK(Graph::box(2, 1).hash() == Graph::box(2, 1).hash());
    CHECK(Graph::box(2, 1).hash() != Graph::box(2, 2).hash());
  }

  TEST_CASE("connected agrees with union-find on sampled configurations") {
    auto g = share(Graph::box(2, 3));
    for (std::uint64_t s = 0; s < 200; ++s) {
      auto c = sample_configuration(g, 0.5, 3, s);
      int x = static_cast<int>(s % 49), y = static_cast<int>((s * 7 + 3) % 49);
      CHECK(connected(c, x, y) == uf_connected(c, x, y));
    }
  }

  TEST_CASE("sampling is deterministic and has the right edge density") {
    auto g = share(Graph::box(3, 3));
    auto a = sample_configuration(g, 0.3, 11, 5);
    auto b = sample_configuration(g, 0.3, 11, 5);
    CHECK(a.bitstring() == b.bitstring());
    CHECK(a.bitstring() != sample_configuration(g, 0.3, 11, 6).bitstring());
    double open = 0, total = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
      auto c = sample_configuration(g, 0.3, 11, s);
      open += c.open_count();
      total += g->num_edges();
    }
    CHECK(std::fabs(open / total - 0.3) < 4 * std::sqrt(0.21 / total));
  }

  TEST_CASE("enumeration weights sum to one") {
    double total = 0;
    int count = 0;
    enumerate_configurations(square(), 0.3, [&](const Configuration&, double w) {
      total += w;
      ++count;
    });
    CHECK(count == 16);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("doubly connected and disjoint occurrence on a square") {
    auto g = square();
    auto all = Configuration::all(g, true, 0.5);
    CHECK(doubly_connected(all, 0, 2));
    auto cut = all.with_edge(0, false);
    CHECK(connected(cut, 0, 2));
    CHECK_FALSE(doubly_connected(cut, 0, 2));
    // Two disjoint routes 0 -> 2 exist only while both sides are open.
    CHECK(disjointly_occurs(all, {{0, 2, {}}, {0, 2, {}}}));
    CHECK_FALSE(disjointly_occurs(cut, {{0, 2, {}}, {0, 2, {}}}));
    CHECK(open_path_masks(all, {0, 2, {}}).size() == 2);
    CHECK(open_path_masks(cut, {0, 2, {}}).size() == 1);
  }

  TEST_CASE("region-restricted connection") {
    auto g = square();
    auto all = Configuration::all(g, true, 0.5);
    Region r(g->num_vertices());
    r.insert(0);
    r.insert(1);
    r.insert(2);
    auto cut = all.with_edge(1, false);  // (1,0)-(1,1)
    CHECK(connected(cut, 0, 2));
    CHECK_FALSE(connected(cut, 0, 2, &r));
  }

  TEST_CASE("cluster partition sizes") {
    auto g = square();
    auto c = Configuration::from_mask(g, 0b0001, 0.5);
    auto part = clusters(c);
    std::vector<int> sizes = part.sizes;
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes == std::vector<int>{1, 1, 2});
  }
}
