#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "delayadm/admissibility.hpp"
#include "delayadm/error.hpp"
#include "oracles.hpp"

using namespace delayadm;

namespace {

DelaySystem scalar(double a, double a1, double b) {
  return DelaySystem::single(CMatrix::Constant(1, 1, a), CMatrix::Constant(1, 1, a1), CMatrix::Constant(1, 1, b));
}

std::vector<cplx> test_points(double base) {
  std::vector<cplx> out;
  for (double re : {0.5, 1.0, 2.0}) {
    for (double im : {-3.0, -1.0, 1.0, 3.0}) out.emplace_back(base + re, im);
  }
  return out;
}

}  // namespace

TEST_CASE("characteristic matrix of a scalar equation") {
  const cplx l(0.4, 1.2);
  const CMatrix d = characteristic_matrix(scalar(-1.0, 0.5, 1.0), l);
  CHECK(std::abs(d(0, 0) - (l + 1.0 - 0.5 * std::exp(-l))) < 1e-14);
}

TEST_CASE("analytic resolvent matches the closed form on the real axis") {
  const DelaySystem sys = scalar(-1.0, 0.0, 1.0);
  for (double r : {0.1, 0.684, 3.0}) {
    const ResolventSample s = resolvent_norm_analytic(sys, cplx(r, 0.0), 0.0);
    CHECK(s.weighted == doctest::Approx(oracle::scalar_weighted_resolvent(r)).epsilon(1e-12));
    CHECK(s.method == ResolventSample::Method::analytic);
  }
}

TEST_CASE("analytic and discretized resolvents agree within one percent") {
  for (double a1 : {0.0, 0.5}) {
    const DelaySystem sys = scalar(-1.0, a1, 1.0);
    const GridSpec grid{200, 0.0};
    const DiscreteGenerator gen = assemble_generator(sys, grid);
    for (const cplx& l : test_points(0.0)) {
      const double a = resolvent_norm_analytic(sys, l, 0.0).norm;
      const double d = resolvent_norm_discrete(sys, gen, l, 0.0).norm;
      CHECK(std::abs(a - d) <= 0.01 * a);
    }
  }
}

TEST_CASE("resolvent needs the right half-plane and reports singular points") {
  const DelaySystem sys = scalar(0.0, 1.0, 1.0);
  CHECK_THROWS_AS(resolvent_norm_analytic(sys, cplx(-0.1, 0.0), 0.0), RangeError);
  CHECK_THROWS_AS(resolvent_norm_analytic(sys, cplx(0.5, 0.0), 0.6), RangeError);
  try {
    resolvent_norm_analytic(sys, cplx(oracle::omega_constant(), 0.0), 0.0);
    FAIL("expected a singular characteristic matrix");
  } catch (const SingularityError& e) {
    CHECK(std::abs(e.lambda() - oracle::omega_constant()) < 1e-12);
  }
}

TEST_CASE("Weiss sweep recovers the scalar grid-search constant") {
  const WeissResult w = weiss_constant(scalar(-1.0, 0.0, 1.0), 0.0, SweepRegion::make(0.0));
  const double expect = oracle::scalar_weiss_constant();
  CHECK(w.c_est == doctest::Approx(0.61).epsilon(0.01 / 0.61));
  CHECK(w.c_est == doctest::Approx(expect).epsilon(1e-4));
  CHECK(std::abs(w.argmax.imag()) < 1e-3);
  CHECK(w.skipped.empty());
}

TEST_CASE("sweep region layout") {
  const SweepRegion r = SweepRegion::make(0.5, 1e-3, 1e3, 50.0, 10, 5);
  CHECK(r.re_points.front() == doctest::Approx(0.501));
  CHECK(r.re_points.back() <= 0.5 + 1e3 + 1e-9);
  CHECK(r.im_points.size() == 5);
  CHECK_THROWS_AS(SweepRegion::make(0.0, 2.0, 1.0), ConfigError);
}

TEST_CASE("finite-time admissibility constants") {
  const DelaySystem sys = scalar(-1.0, 0.0, 1.0);
  const GridSpec grid{100, 0.0};
  const FiniteTimeConstant c1 = finite_time_constant(sys, 1.0, grid);
  CHECK(c1.c_head == doctest::Approx(oracle::scalar_head_admissibility(1.0)).epsilon(0.01));
  CHECK(c1.c_full >= c1.c_head);

  std::vector<double> full;
  for (double tau : {3.0, 4.0, 5.0}) full.push_back(finite_time_constant(sys, tau, GridSpec{40, 0.0}).c_full);
  const auto [lo, hi] = std::minmax_element(full.begin(), full.end());
  CHECK(*hi <= 1.05 * *lo);
  CHECK_THROWS_AS(finite_time_constant(sys, 0.0033, grid), ConfigError);
}

TEST_CASE("resolvent discretization error stays below a frozen K/m") {
  // K was measured once on this test set (max m·|analytic − discrete| ≈ 0.205)
  // and frozen with headroom.
  constexpr double kFrozenK = 0.5;
  const DelaySystem sys = scalar(-1.0, 0.5, 1.0);
  for (int m : {25, 50, 100, 200}) {
    const DiscreteGenerator gen = assemble_generator(sys, GridSpec{m, 0.0});
    for (const cplx& l : test_points(0.0)) {
      const double diff = std::abs(resolvent_norm_analytic(sys, l, 0.0).norm -
                                   resolvent_norm_discrete(sys, gen, l, 0.0).norm);
      CHECK(diff * m <= kFrozenK);
    }
  }
}

TEST_CASE("Weiss estimate does not decrease under sweep refinement") {
  const DelaySystem sys = scalar(-1.0, 0.3, 1.0);
  const double coarse = weiss_constant(sys, 0.0, SweepRegion::make(0.0, 1e-3, 1e3, 50.0, 30, 21)).c_est;
  const double fine = weiss_constant(sys, 0.0, SweepRegion::make(0.0, 1e-3, 1e3, 50.0, 60, 41)).c_est;
  CHECK(fine >= coarse - 1e-8);
}

TEST_CASE("admissibility constants are linear in B") {
  const DelaySystem one_b = scalar(-1.0, 0.2, 1.0);
  const DelaySystem three_b = scalar(-1.0, 0.2, 3.0);
  const SweepRegion region = SweepRegion::make(0.0, 1e-3, 1e3, 50.0, 30, 21);
  CHECK(weiss_constant(three_b, 0.0, region).c_est ==
        doctest::Approx(3.0 * weiss_constant(one_b, 0.0, region).c_est).epsilon(1e-12));
  const GridSpec grid{40, 0.0};
  CHECK(finite_time_constant(three_b, 2.0, grid).c_full ==
        doctest::Approx(3.0 * finite_time_constant(one_b, 2.0, grid).c_full).epsilon(1e-10));
}

TEST_CASE("weighted values are the norm times the half-plane weight, reproducibly") {
  const DelaySystem sys = scalar(-1.0, 0.5, 1.0);
  const double omega = -0.25;
  const WeissResult a = weiss_constant(sys, omega, SweepRegion::make(0.0, 1e-3, 1e3, 50.0, 20, 11));
  const WeissResult b = weiss_constant(sys, omega, SweepRegion::make(0.0, 1e-3, 1e3, 50.0, 20, 11));
  CHECK(a.c_est == b.c_est);
  REQUIRE(a.samples.size() == b.samples.size());
  for (const auto& s : a.samples) {
    CHECK(s.weighted == doctest::Approx(std::sqrt(s.lambda.real() - omega) * s.norm).epsilon(1e-14));
  }
}
