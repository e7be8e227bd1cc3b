#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "delayadm/adjoint.hpp"
#include "delayadm/bounds.hpp"
#include "delayadm/error.hpp"
#include "oracles.hpp"

using namespace delayadm;

namespace {

DelaySystem scalar(double a, double a1) {
  return DelaySystem::single(CMatrix::Constant(1, 1, a), CMatrix::Constant(1, 1, a1), CMatrix());
}

const std::vector<double> kUnit = {0.0, 0.25, 0.5, 0.75, 1.0};
const NormCheckOptions kCoarse{GridSpec{20, 0.0}, 2};

}  // namespace

TEST_CASE("unperturbed growth bound holds for dissipative systems") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 3; ++trial) {
    const DelaySystem sys = DelaySystem::single(oracle::random_dissipative(2, rng), CMatrix::Zero(2, 2), CMatrix());
    const BoundReport r = check_T0_bound(sys, std::vector<double>{0.0, 0.5, 1.0, 1.5}, kCoarse);
    CHECK(r.passed);
    CHECK(r.samples.size() == 4);
    for (const auto& s : r.samples) CHECK(s.theoretical == doctest::Approx(std::exp(s.t / 2.0)));
  }
}

TEST_CASE("perturbed bounds hold with the measured constant below its cap") {
  std::mt19937_64 rng(32);
  for (double a1 : {0.5, 1.0}) {
    const DelaySystem sys = DelaySystem::single(oracle::random_dissipative(2, rng),
                                                oracle::with_norm(oracle::random_complex(2, 2, rng), a1), CMatrix());
    const BoundReport g = check_gronwall(sys, kUnit, kCoarse);
    const BoundReport main = check_main_bound(sys, kUnit, kCoarse);
    CHECK(g.passed);
    CHECK(main.passed);
    REQUIRE(main.detail("M_cap"));
    REQUIRE(main.detail("M_measured"));
    CHECK(*main.detail("M_cap") == doctest::Approx(std::sqrt(2.0) * std::exp(2.0 * a1 * a1)));
    CHECK(*main.detail("M_measured") <= *main.detail("M_cap"));
    CHECK(*main.detail("delay_norm") == doctest::Approx(a1));
  }
}

TEST_CASE("bound checks require a contraction") {
  CHECK_THROWS_AS(check_T0_bound(scalar(0.3, 0.0), kUnit, kCoarse), DomainError);
}

TEST_CASE("perturbation constant matches the Cauchy-Schwarz extremal") {
  const MvEstimate e = miyadera_voigt_q(scalar(0.0, 1.0), 0.25, GridSpec{100, 0.0}, 42, 200);
  CHECK(e.q == doctest::Approx(oracle::scalar_mv_extremal(0.25)).epsilon(0.02));
  CHECK(e.upper_chain == doctest::Approx(0.75));
  CHECK(e.q <= e.upper_chain);
  CHECK(e.source == "extremal");
}

TEST_CASE("log-concave envelope matches the chord oracle") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  for (int profile = 0; profile < 5; ++profile) {
    std::vector<double> ts;
    std::vector<double> norms;
    for (int i = 0; i <= 12; ++i) {
      ts.push_back(i / 12.0);
      norms.push_back(u(rng));
    }
    const Envelope e = log_concave_envelope(ts, norms);
    const auto expect = oracle::concave_majorant(ts, e.log_values);
    for (std::size_t i = 0; i < ts.size(); ++i) {
      CHECK(e.log_envelope[i] == doctest::Approx(expect[i]).epsilon(1e-12));
      CHECK(e.log_envelope[i] >= e.log_values[i]);
      CHECK(e.values()[i] >= norms[i] * (1.0 - 1e-12));
    }
    const BoundReport r = check_envelope(ts, norms);
    CHECK(r.passed);
    CHECK(*r.detail("concave") == 1.0);
  }
}

TEST_CASE("envelope of an already log-concave profile is the profile") {
  std::vector<double> ts;
  std::vector<double> norms;
  for (int i = 0; i <= 10; ++i) {
    ts.push_back(i / 10.0);
    norms.push_back(std::exp(-ts.back() * ts.back()));
  }
  const Envelope e = log_concave_envelope(ts, norms);
  CHECK(e.vertices.size() == ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) CHECK(e.values()[i] == doctest::Approx(norms[i]));
}

TEST_CASE("numerical range bound dominates the discrete spectrum") {
  for (double c : {0.0, 0.5, 1.0}) {
    const DelaySystem sys = scalar(-1.0, c);
    const GridSpec grid{60, 0.0};
    const double omega = numerical_range_bound(sys, grid);
    const CVector eig = generator_eigenvalues(assemble_generator(sys, grid));
    CHECK(omega >= eig.real().maxCoeff() - 1e-10);
  }
  CHECK(numerical_range_bound(scalar(0.0, 0.5), GridSpec{40, 0.0}) >
        numerical_range_bound(scalar(0.0, 0.0), GridSpec{40, 0.0}));
}

TEST_CASE("norm derivative at zero of the pure shift is one half") {
  const DerivativeEstimate d = norm_derivative_at_zero(scalar(0.0, 0.0), std::vector<double>{0.1, 0.05, 0.025},
                                                       GridSpec{40, 0.0});
  CHECK(d.estimate == doctest::Approx(0.5).epsilon(0.02));
  CHECK(d.quotients.size() == 3);
}

TEST_CASE("bound reports serialize") {
  const BoundReport r = check_T0_bound(scalar(-1.0, 0.0), kUnit, kCoarse);
  const Json j = report_to_json(r);
  CHECK(j.at("kind") == "T0");
  CHECK(j.at("passed") == true);
  std::ostringstream os;
  write_report_csv(os, r);
  const std::string csv = os.str();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(r.samples.size()) + 1);
}

TEST_CASE("perturbation constant shrinks with the window") {
  const DelaySystem sys = scalar(-0.2, 0.8);
  double prev = 1e300;
  for (double t0 : {0.5, 0.25, 0.125, 0.0625}) {
    const double q = miyadera_voigt_q(sys, t0, GridSpec{64, 0.0}, 42, 100).q;
    CHECK(q <= prev + 1e-12);
    prev = q;
  }
  CHECK(prev < 0.25);
}

TEST_CASE("grid slack of the unperturbed bound shrinks under refinement") {
  const DelaySystem sys = scalar(-0.5, 0.0);
  const std::vector<double> ts = {0.5, 1.0};
  const double coarse = check_T0_bound(sys, ts, NormCheckOptions{GridSpec{20, 0.0}, 2}).slack;
  const double fine = check_T0_bound(sys, ts, NormCheckOptions{GridSpec{40, 0.0}, 2}).slack;
  CHECK(fine <= coarse);
}
