#include "delayadm/population.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "delayadm/error.hpp"

namespace delayadm {

Profile Profile::constant(double v) {
  Profile p;
  p.value = v;
  return p;
}

double Profile::operator()(double s) const {
  switch (kind) {
    case Kind::constant: return value;
    case Kind::gaussian: {
      const double x = (s - center) / width;
      return value * std::exp(-0.5 * x * x);
    }
    case Kind::step: return (s >= from && s <= to) ? value : 0.0;
    case Kind::bump: {
      if (s <= from || s >= to) return 0.0;
      const double x = (2.0 * s - from - to) / (to - from);
      return value * std::exp(1.0 - 1.0 / (1.0 - x * x));
    }
    case Kind::tabulated: {
      if (s <= table_s.front()) return table_v.front();
      if (s >= table_s.back()) return table_v.back();
      const auto it = std::upper_bound(table_s.begin(), table_s.end(), s);
      const std::size_t hi = static_cast<std::size_t>(it - table_s.begin());
      const double frac = (s - table_s[hi - 1]) / (table_s[hi] - table_s[hi - 1]);
      return (1.0 - frac) * table_v[hi - 1] + frac * table_v[hi];
    }
  }
  return 0.0;
}

namespace {

double number(const Json& j, const char* key, const std::string& what) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ConfigError(what + ": missing numeric field '" + key + "'");
  }
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw ConfigError(what + ": field '" + key + "' is not finite");
  return v;
}

}  // namespace

Profile profile_from_json(const Json& j, const char* what) {
  const std::string name(what);
  if (j.is_number()) return Profile::constant(j.get<double>());
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ConfigError(name + ": expected a number or an object with a 'kind'");
  }
  const std::string kind = j.at("kind").get<std::string>();
  Profile p;
  if (kind == "constant") {
    p.kind = Profile::Kind::constant;
    p.value = number(j, "value", name);
  } else if (kind == "gaussian") {
    p.kind = Profile::Kind::gaussian;
    p.value = number(j, "amplitude", name);
    p.center = number(j, "center", name);
    p.width = number(j, "width", name);
    if (!(p.width > 0.0)) throw ConfigError(name + ": gaussian width must be positive");
  } else if (kind == "step" || kind == "bump") {
    p.kind = kind == "step" ? Profile::Kind::step : Profile::Kind::bump;
    p.value = number(j, kind == "step" ? "value" : "amplitude", name);
    p.from = number(j, "from", name);
    p.to = number(j, "to", name);
    if (!(p.to > p.from)) throw ConfigError(name + ": need from < to");
  } else if (kind == "tabulated") {
    p.kind = Profile::Kind::tabulated;
    if (!j.contains("s") || !j.contains("values")) {
      throw ConfigError(name + ": tabulated profile needs 's' and 'values'");
    }
    p.table_s = j.at("s").get<std::vector<double>>();
    p.table_v = j.at("values").get<std::vector<double>>();
    if (p.table_s.empty() || p.table_s.size() != p.table_v.size()) {
      throw ConfigError(name + ": 's' and 'values' must be nonempty and equally long");
    }
    for (std::size_t i = 1; i < p.table_s.size(); ++i) {
      if (!(p.table_s[i] > p.table_s[i - 1])) throw ConfigError(name + ": 's' must increase strictly");
    }
  } else {
    throw ConfigError(name + ": unknown profile kind '" + kind + "'");
  }
  return p;
}

Json profile_to_json(const Profile& p) {
  Json j = Json::object();
  switch (p.kind) {
    case Profile::Kind::constant:
      j["kind"] = "constant";
      j["value"] = p.value;
      break;
    case Profile::Kind::gaussian:
      j["kind"] = "gaussian";
      j["amplitude"] = p.value;
      j["center"] = p.center;
      j["width"] = p.width;
      break;
    case Profile::Kind::step:
    case Profile::Kind::bump:
      j["kind"] = p.kind == Profile::Kind::step ? "step" : "bump";
      j[p.kind == Profile::Kind::step ? "value" : "amplitude"] = p.value;
      j["from"] = p.from;
      j["to"] = p.to;
      break;
    case Profile::Kind::tabulated:
      j["kind"] = "tabulated";
      j["s"] = p.table_s;
      j["values"] = p.table_v;
      break;
  }
  return j;
}

double PopulationConfig::resolved_s_max() const {
  if (s_max > 0.0) return s_max;
  double min_mu = std::numeric_limits<double>::infinity();
  constexpr int kProbe = 1000;
  for (int i = 0; i <= kProbe; ++i) min_mu = std::min(min_mu, mu(50.0 * i / kProbe));
  return min_mu > 0.0 ? std::min(50.0, 5.0 / min_mu) : 50.0;
}

void PopulationConfig::validate() const {
  if (n < 8) throw ConfigError("population: n must be at least 8, got " + std::to_string(n));
  if (s_max < 0.0 || !std::isfinite(s_max)) throw ConfigError("population: s_max must be positive");
  if (band_to < band_from) throw ConfigError("population: control band needs from ≤ to");
  const double top = resolved_s_max();
  const double ds = top / n;
  for (int i = 0; i <= n; ++i) {
    const double s = i * ds;
    const double mu_s = mu(s);
    const double beta_s = beta(s);
    const double nu_s = nu(s);
    if (!std::isfinite(mu_s) || !std::isfinite(beta_s) || !std::isfinite(nu_s)) {
      throw ConfigError("population: coefficient not finite at age " + format_double(s));
    }
    if (mu_s < 0.0) throw ConfigError("population: mu must be nonnegative (age " + format_double(s) + ")");
    if (beta_s < 0.0) {
      throw ConfigError("population: beta must be nonnegative (age " + format_double(s) + ")");
    }
  }
}

cplx PopulationModel::boundary_value(const CVector& g) const {
  const int n = static_cast<int>(g.size());
  cplx acc{};
  for (int i = 1; i < n; ++i) acc += beta[i] * g(i - 1);
  acc += 0.5 * beta[n] * g(n - 1);
  return ds * acc / (1.0 - 0.5 * ds * beta[0]);
}

cplx PopulationModel::birth_integral(const CVector& g) const {
  const int n = static_cast<int>(g.size());
  cplx acc = 0.5 * beta[0] * boundary_value(g);
  for (int i = 1; i < n; ++i) acc += beta[i] * g(i - 1);
  acc += 0.5 * beta[n] * g(n - 1);
  return ds * acc;
}

cplx PopulationModel::total(const CVector& g) const {
  const int n = static_cast<int>(g.size());
  cplx acc = 0.5 * boundary_value(g);
  for (int i = 1; i < n; ++i) acc += g(i - 1);
  acc += 0.5 * g(n - 1);
  return ds * acc;
}

PopulationModel build_population_system(const PopulationConfig& cfg, const GridSpec& grid) {
  cfg.validate();
  grid.validate();
  const int n = cfg.n;
  const double top = cfg.resolved_s_max();
  const double ds = top / n;
  if (grid.step() > ds * (1.0 + 1e-12)) {
    throw ConfigError("population: CFL violated, dt = " + format_double(grid.step()) +
                      " exceeds the age step " + format_double(ds));
  }
  std::vector<double> ages(n + 1), beta(n + 1);
  for (int i = 0; i <= n; ++i) {
    ages[i] = i * ds;
    beta[i] = cfg.beta(ages[i]);
  }
  const double denom = 1.0 - 0.5 * ds * beta[0];
  if (!(denom > 0.0)) {
    throw ConfigError("population: birth law cannot be eliminated (Δs·β(0)/2 ≥ 1); refine the age grid");
  }

  // Unknown k ↔ age node k + 1.
  CMatrix a = CMatrix::Zero(n, n);
  const double inv = 1.0 / ds;
  for (int k = 0; k < n; ++k) {
    a(k, k) = -inv - cfg.mu(ages[k + 1]);
    if (k > 0) a(k, k - 1) += inv;
  }
  // g_0 = (Δs/denom)·(Σ_{i<n} β_i g_i + β_n g_n / 2) feeds the first row.
  for (int i = 1; i <= n; ++i) {
    const double w = i == n ? 0.5 : 1.0;
    a(0, i - 1) += inv * ds * w * beta[i] / denom;
  }
  CMatrix a1 = CMatrix::Zero(n, n);
  bool nu_nonneg = true;
  for (int k = 0; k < n; ++k) {
    const double v = cfg.nu(ages[k + 1]);
    a1(k, k) = v;
    nu_nonneg = nu_nonneg && v >= 0.0;
  }
  CMatrix b = CMatrix::Zero(n, 1);
  for (int k = 0; k < n; ++k) {
    if (ages[k + 1] >= cfg.band_from && ages[k + 1] <= cfg.band_to && cfg.band_to > cfg.band_from) {
      b(k, 0) = 1.0;
    }
  }
  return PopulationModel{DelaySystem::single(std::move(a), std::move(a1), std::move(b)), ds,
                         std::move(ages), std::move(beta), nu_nonneg};
}

LiftedState population_initial_state(const PopulationConfig& cfg, const PopulationModel& model,
                                     int m) {
  const int n = cfg.n;
  CVector x(n);
  for (int k = 0; k < n; ++k) x(k) = cfg.initial(model.ages[k + 1]);
  return LiftedState::constant(x, m);
}

PopulationRun run_population_demo(const PopulationConfig& cfg, const GridSpec& grid, double t_end) {
  const PopulationModel model = build_population_system(cfg, grid);
  const LiftedState v0 = population_initial_state(cfg, model, grid.m);
  PopulationRun run;
  run.trajectory = simulate_steps(model.system, v0, InputSignal{}, t_end, grid);
  const Trajectory& tr = run.trajectory;
  const int first = static_cast<int>(std::lround(1.0 / tr.dt));
  run.min_overall = std::numeric_limits<double>::infinity();
  for (int j = first; j < tr.count(); ++j) {
    const CVector g = tr.samples.row(j).transpose();
    run.times.push_back(tr.time(j));
    run.total.push_back(model.total(g).real());
    run.boundary_residual.push_back(std::abs(g(0) - model.birth_integral(g)));
    double lo = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < g.size(); ++i) lo = std::min(lo, g(i).real());
    run.min_value.push_back(lo);
    run.min_overall = std::min(run.min_overall, lo);
    run.max_boundary_residual = std::max(run.max_boundary_residual, run.boundary_residual.back());
  }
  return run;
}

Json population_summary_json(const PopulationConfig& cfg, const PopulationModel& model,
                             const GridSpec& grid, const PopulationRun& run) {
  Json j = Json::object();
  j["n"] = cfg.n;
  j["s_max"] = cfg.resolved_s_max();
  j["ds"] = model.ds;
  j["dt"] = grid.step();
  j["cfl"] = grid.step() / model.ds;
  j["omega0"] = model.system.omega0();
  j["nu_nonnegative"] = model.nu_nonnegative;
  // Positivity is only expected for ν ≥ 0.
  j["positivity_expected"] = model.nu_nonnegative;
  j["min_value"] = run.min_overall;
  j["max_boundary_residual"] = run.max_boundary_residual;
  j["initial_total"] = run.total.empty() ? 0.0 : run.total.front();
  j["final_total"] = run.total.empty() ? 0.0 : run.total.back();
  Json coeffs = Json::object();
  coeffs["mu"] = profile_to_json(cfg.mu);
  coeffs["nu"] = profile_to_json(cfg.nu);
  coeffs["beta"] = profile_to_json(cfg.beta);
  coeffs["initial"] = profile_to_json(cfg.initial);
  j["coefficients"] = std::move(coeffs);
  return j;
}

void write_population_series_csv(std::ostream& os, const PopulationRun& run) {
  os << "t,total,boundary_residual,min_value\n";
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    os << format_double(run.times[i]) << ',' << format_double(run.total[i]) << ','
       << format_double(run.boundary_residual[i]) << ',' << format_double(run.min_value[i]) << '\n';
  }
}

}  // namespace delayadm
