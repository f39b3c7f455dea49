#include <doctest.h>

#include <cmath>
#include <numbers>

#include "percolab/integrals.hpp"

using namespace percolab;
using namespace percolab::integrals;

namespace {

ContinuumPoint unit(int d, int i, double s = 1.0) {
  ContinuumPoint p(static_cast<std::size_t>(d), 0.0);
  p[static_cast<std::size_t>(i)] = s;
  return p;
}

const trees::AbstractTree kThree = trees::AbstractTree::from_newick("(1,2)0;");

}  // namespace

TEST_SUITE("integrals") {
  TEST_CASE("sphere areas") {
    CHECK(sphere_area(2) == doctest::Approx(2 * std::numbers::pi));
    CHECK(sphere_area(3) == doctest::Approx(4 * std::numbers::pi));
    CHECK(sphere_area(7) == doctest::Approx(16 * std::pow(std::numbers::pi, 3) / 15));
  }

  TEST_CASE("quadrature frozen value and self-consistency") {
    auto q = quad_I3(unit(7, 0), unit(7, 1), 7);
    CHECK(q.value == doctest::Approx(14.107016).epsilon(1e-5));
    CHECK(q.error < 1e-3 * q.value);
    QuadParams wide;
    wide.cutoff_factor = 128;
    auto w = quad_I3(unit(7, 0), unit(7, 1), 7, wide);
    CHECK(std::fabs(w.value - q.value) < q.error + w.error);
  }

  TEST_CASE("quadrature is symmetric in its poles") {
    ContinuumPoint a{0.3, -1.1, 0.2, 0, 0.5, 0, 0.1}, b{1.4, 0.2, 0, -0.3, 0, 0.2, 0};
    auto ab = quad_I3(a, b, 7), ba = quad_I3(b, a, 7);
    CHECK(std::fabs(ab.value - ba.value) < ab.error + ba.error);
  }

  TEST_CASE("homogeneity exponent (4-d)k + d - 6") {
    auto q1 = quad_I3(unit(7, 0), unit(7, 1), 7);
    auto q2 = quad_I3(unit(7, 0, 2), unit(7, 1, 2), 7);
    double expected = std::pow(2.0, (4 - 7) * 3 + 7 - 6);
    CHECK(expected == std::pow(2.0, -8));
    CHECK(q2.value / q1.value == doctest::Approx(expected).epsilon(1e-4));
  }

  TEST_CASE("Monte Carlo agrees with quadrature") {
    std::vector<ContinuumPoint> y{unit(7, 0, 0), unit(7, 0), unit(7, 1)};
    auto mc = eval_I_T(kThree, y, 7, {400000, 5, 1, 2.0});
    auto q = quad_I3(y[1], y[2], 7);
    CHECK(std::fabs(mc.mean - q.value) < 4 * mc.stderr_ + q.error);
    CHECK(mc.stderr_ < 0.05 * q.value);
  }

  TEST_CASE("Monte Carlo is translation invariant within noise") {
    std::vector<ContinuumPoint> y{unit(7, 0, 0), unit(7, 0), unit(7, 1)};
    auto shifted = y;
    for (auto& p : shifted) p[3] += 5.0, p[0] -= 2.0;
    auto a = eval_I_T(kThree, y, 7, {200000, 8, 1, 2.0});
    auto b = eval_I_T(kThree, shifted, 7, {200000, 8, 1, 2.0});
    CHECK(std::fabs(a.mean - b.mean) < 4 * std::hypot(a.stderr_, b.stderr_));
  }

  TEST_CASE("Monte Carlo is deterministic across worker counts") {
    std::vector<ContinuumPoint> y{unit(7, 0, 0), unit(7, 0), unit(7, 1), unit(7, 2)};
    auto t = trees::AbstractTree::from_newick("((1,2),3)0;");
    auto a = eval_I_T(t, y, 7, {50000, 2, 1, 2.0});
    auto b = eval_I_T(t, y, 7, {50000, 2, 4, 2.0});
    CHECK(a.mean == b.mean);
    CHECK(a.stderr_ == b.stderr_);
  }

  TEST_CASE("coincident points are rejected") {
    std::vector<ContinuumPoint> y{unit(7, 0), unit(7, 0), unit(7, 1)};
    CHECK_THROWS_AS(eval_I_T(kThree, y, 7, {}), DomainError);
    CHECK_THROWS_AS(quad_I3(unit(7, 0), unit(7, 0), 7), DomainError);
  }

  TEST_CASE("limit inputs validation") {
    LimitInputs li{1.0, 0.5, 1.0, 7};
    CHECK(li.beta() == 1.0);
    CHECK_NOTHROW(li.validate());
    li.d = 6;
    CHECK_THROWS_WITH_AS(li.validate(), doctest::Contains("d > 6"), DomainError);
    LimitInputs bad{1.0, 0.0, 1.0, 7};
    CHECK_THROWS_AS(bad.validate(), DomainError);
  }

  TEST_CASE("three-point prediction is 2d alpha^3 beta rho I_3") {
    LimitInputs li{1.3, 0.3, 0.7, 7};
    std::vector<ContinuumPoint> y{unit(7, 0, 0), unit(7, 0), unit(7, 1)};
    auto pr = predicted_kpoint_constant(3, y, li, {200000, 4, 1, 2.0});
    REQUIRE(pr.terms.size() == 1);
    const double coeff = 2 * 7 * std::pow(1.3, 3) * li.beta() * 0.7;
    CHECK(pr.value == doctest::Approx(coeff * pr.terms[0].mean).epsilon(1e-14));
    CHECK(pr.stderr_ == doctest::Approx(coeff * pr.terms[0].stderr_).epsilon(1e-14));
    auto q = quad_I3(y[1], y[2], 7);
    CHECK(std::fabs(pr.value - coeff * q.value) < 4 * pr.stderr_ + coeff * q.error);
  }

  TEST_CASE("four-point prediction sums three trees") {
    LimitInputs li{1.0, 0.5, 1.0, 7};
    std::vector<ContinuumPoint> y{unit(7, 0, 0), unit(7, 0), unit(7, 1), unit(7, 2)};
    auto pr = predicted_kpoint_constant(4, y, li, {20000, 4, 1, 2.0});
    CHECK(pr.terms.size() == 3);
    double sum = 0;
    for (const auto& t : pr.terms) sum += t.mean;
    const double coeff = std::pow(1.0, 5) * std::pow(2 * 7 * 1.0 * 1.0, 2);
    CHECK(pr.value == doctest::Approx(coeff * sum).epsilon(1e-12));
  }
}
