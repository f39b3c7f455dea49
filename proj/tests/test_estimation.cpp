#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "brute_oracles.hpp"
#include "percolab/estimation.hpp"
#include "percolab/oracle.hpp"

using namespace percolab;
using namespace percolab::estimation;

namespace {

int max_abs(const Point& p) {
  int m = 0;
  for (int c : p) m = std::max(m, std::abs(c));
  return m;
}

}  // namespace

TEST_SUITE("estimation") {
  TEST_CASE("tau at p = 1 and p = 0") {
    auto box = make_box(2, 2);
    std::vector<Point> pts{{0, 0}, {2, 1}, {-1, -2}};
    CHECK(estimate_tau_k(box, 1.0, pts, 500, 3).mean == 1.0);
    CHECK(estimate_tau_k(box, 0.0, pts, 500, 3).mean == 0.0);
    CHECK(estimate_tau_k(box, 0.0, {{1, 1}}, 10, 3).mean == 1.0);
  }

  TEST_CASE("tau matches exact enumeration on a small box") {
    auto box = make_box(2, 1);
    std::vector<Point> pts{{-1, -1}, {1, 1}, {1, -1}};
    std::vector<int> ids;
    for (const auto& p : pts) ids.push_back(box.vertex(p));
    const double exact = oracle::exact_event_probability(box.graph, 0.55, *oracle::multi_connection(ids));
    auto est = estimate_tau_k(box, 0.55, pts, 200000, 17);
    CHECK(est.samples == 200000);
    CHECK(std::fabs(est.mean - exact) < 4 * est.stderr_);
    CHECK(est.stderr_ == doctest::Approx(std::sqrt(exact * (1 - exact) / 200000)).epsilon(0.05));
  }

  TEST_CASE("tau stderr scales as one over root trials") {
    auto box = make_box(2, 2);
    std::vector<Point> pts{{0, 0}, {2, 0}};
    auto a = estimate_tau_k(box, 0.6, pts, 10000, 5);
    auto b = estimate_tau_k(box, 0.6, pts, 160000, 5);
    CHECK(a.stderr_ / b.stderr_ == doctest::Approx(4.0).epsilon(0.1));
  }

  TEST_CASE("estimates are deterministic in seed and worker count") {
    auto box = make_box(2, 3);
    std::vector<Point> pts{{0, 0}, {3, 0}, {0, -3}};
    auto a = estimate_tau_k(box, 0.6, pts, 5000, 9, 1);
    auto b = estimate_tau_k(box, 0.6, pts, 5000, 9, 3);
    CHECK(a.mean == b.mean);
    CHECK(a.stderr_ == b.stderr_);
    auto c = estimate_tau_k(box, 0.6, pts, 5000, 10, 1);
    CHECK(c.mean != a.mean);
    auto rbox = make_box(2, 4);
    auto r1 = estimate_rho_truncated(rbox, 0.6, 2, 1, 20, 4, 1);
    auto r2 = estimate_rho_truncated(rbox, 0.6, 2, 1, 20, 4, 2);
    CHECK(r1.value.mean == r2.value.mean);
  }

  TEST_CASE("conditioned sample satisfies its event") {
    auto box = make_box(2, 4);
    for (std::uint64_t s = 0; s < 20; ++s) {
      auto cs = conditioned_cluster_sample(box, 0.5, 3, 11, s);
      CHECK(cs.center == box.origin());
      CHECK(cs.attempts >= 1);
      auto d = brute::components(cs.config);
      bool reaches = false;
      for (int v = 0; v < box.graph->num_vertices(); ++v)
        if (d.find(v) == d.find(cs.center) && max_abs(box.graph->point(v)) >= 3) reaches = true;
      CHECK(reaches);
      auto again = conditioned_cluster_sample(box, 0.5, 3, 11, s);
      CHECK(again.attempts == cs.attempts);
    }
  }

  TEST_CASE("conditioning guard") {
    auto box = make_box(2, 3);
    CHECK_THROWS_AS(conditioned_cluster_sample(box, 0.0, 2, 1, 0, std::nullopt, 50), GuardError);
  }

  TEST_CASE("truncated rho is monotone in M at fixed seed") {
    auto box = make_box(2, 12);
    double prev = -1;
    for (int M = 0; M <= 3; ++M) {
      auto r = estimate_rho_truncated(box, 0.6, 4, M, 30, 8);
      CHECK(r.truncation_M == M);
      CHECK(r.value.mean >= prev);
      prev = r.value.mean;
    }
  }

  TEST_CASE("scaling probe at p = 1") {
    std::vector<std::vector<double>> y{{0, 0, 0, 0, 0}, {1, 0, 0, 0, 0}, {0, 1, 0, 0, 0}};
    std::vector<int> ns{1, 2};
    auto rows = scaling_probe(y, 5, 1.0, ns, 50, 2);
    REQUIRE(rows.size() == ns.size());
    for (const auto& r : rows) {
      CHECK(r.tau.mean == 1.0);
      const double expected = std::pow(static_cast<double>(r.n), -((4.0 - 5) * 2 - 2.0));
      CHECK(r.rescaled == doctest::Approx(expected).epsilon(1e-12));
      CHECK(r.points[1] == Point{r.n, 0, 0, 0, 0});
    }
  }

  TEST_CASE("box guard") {
    CHECK_THROWS_AS(make_box(5, 20), GuardError);
  }
}
