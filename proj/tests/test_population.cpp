#include <doctest.h>

#include <cmath>
#include <random>

#include "delayadm/error.hpp"
#include "delayadm/population.hpp"

using namespace delayadm;

namespace {

Profile bump(double amplitude, double from, double to) {
  Profile p;
  p.kind = Profile::Kind::bump;
  p.value = amplitude;
  p.from = from;
  p.to = to;
  return p;
}

PopulationConfig smooth_config(int n) {
  PopulationConfig c;
  c.mu = Profile::constant(1.0);
  c.nu = Profile::constant(0.2);
  c.beta = bump(0.4, 3.0, 5.0);
  c.initial = bump(1.0, 0.5, 1.5);
  c.s_max = 5.0;
  c.n = n;
  return c;
}

}  // namespace

TEST_CASE("profiles evaluate and round trip through json") {
  const Profile b = bump(2.0, 1.0, 3.0);
  CHECK(b(0.5) == 0.0);
  CHECK(b(2.0) > 0.0);
  CHECK(b(3.5) == 0.0);
  const Profile back = profile_from_json(profile_to_json(b), "beta");
  for (double s : {0.0, 1.5, 2.0, 2.9}) CHECK(back(s) == b(s));
  CHECK(profile_from_json(Json::parse("0.25"), "mu")(4.0) == 0.25);
  CHECK_THROWS_AS(profile_from_json(Json::parse(R"({"kind":"spline"})"), "mu"), ConfigError);
  const Profile t = profile_from_json(Json::parse(R"({"kind":"tabulated","s":[0,1],"values":[1,3]})"), "mu");
  CHECK(t(0.5) == doctest::Approx(2.0));
}

TEST_CASE("birth law is imposed exactly on the eliminated boundary node") {
  const PopulationConfig cfg = smooth_config(100);
  const PopulationModel model = build_population_system(cfg, GridSpec{10, 0.0});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CVector g(model.system.dim());
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = u(rng);
  CHECK(std::abs(model.boundary_value(g) - model.birth_integral(g)) < 1e-14);
}

TEST_CASE("pure mortality decays like e^{-t}") {
  PopulationConfig cfg;
  cfg.mu = Profile::constant(1.0);
  cfg.initial = bump(1.0, 0.5, 1.5);
  cfg.s_max = 5.0;
  cfg.n = 400;
  const PopulationRun run = run_population_demo(cfg, GridSpec{40, 0.0}, 1.0);
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    const double expect = run.total.front() * std::exp(-run.times[i]);
    CHECK(std::abs(run.total[i] - expect) <= 0.02 * expect);
  }
}

TEST_CASE("upwind scheme keeps densities nonnegative") {
  const PopulationRun run = run_population_demo(smooth_config(200), GridSpec{20, 0.0}, 2.0);
  CHECK(run.min_overall >= -1e-10);
}

TEST_CASE("boundary residual converges at first order") {
  const double coarse = run_population_demo(smooth_config(200), GridSpec{20, 0.0}, 2.0).max_boundary_residual;
  const double fine = run_population_demo(smooth_config(400), GridSpec{40, 0.0}, 2.0).max_boundary_residual;
  CHECK(std::log2(coarse / fine) >= 0.95);
}

TEST_CASE("population configuration errors") {
  CHECK_THROWS_AS(build_population_system(smooth_config(400), GridSpec{10, 0.0}), ConfigError);
  PopulationConfig c = smooth_config(100);
  c.mu = Profile::constant(-1.0);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = smooth_config(4);
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("without aging transfer the model has no delayed coupling") {
  PopulationConfig cfg = smooth_config(100);
  cfg.nu = Profile::constant(0.0);
  const PopulationModel model = build_population_system(cfg, GridSpec{10, 0.0});
  for (const auto& d : model.system.delays()) CHECK(d.matrix.cwiseAbs().maxCoeff() == 0.0);
  const LiftedState v = population_initial_state(cfg, model, 10);
  const Trajectory tr = simulate_steps(model.system, v, {}, 1.0, GridSpec{10, 0.0});
  const Trajectory plain = simulate_steps(model.system.unperturbed(), v, {}, 1.0, GridSpec{10, 0.0});
  CHECK((tr.samples - plain.samples).cwiseAbs().maxCoeff() == 0.0);
  // Stiff transport (dt·‖A‖ ≈ 1) limits agreement with the exponential to RK4 accuracy.
  CHECK((tr.at(1.0) - apply_T0(model.system, 1.0, v).head).norm() <= 1e-3 * v.head.norm());
}
