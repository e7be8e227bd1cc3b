#include "delayadm/experiment.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "delayadm/admissibility.hpp"
#include "delayadm/adjoint.hpp"
#include "delayadm/bounds.hpp"
#include "delayadm/error.hpp"

namespace delayadm {

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"simulate", "bounds", "admissibility",
                                                 "adjoint-check", "population-demo"};
  return names;
}

namespace {

namespace fs = std::filesystem;

// Section of the config holding the parameters of each experiment.
std::string section_for(const std::string& experiment) {
  std::string s = experiment;
  std::replace(s.begin(), s.end(), '-', '_');
  return s;
}

bool known_experiment(const std::string& e) {
  const auto& names = experiment_names();
  return std::find(names.begin(), names.end(), e) != names.end();
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Json parse_json(const std::string& text, const std::string& path) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Translate the byte offset into a line/column anchor.
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": malformed JSON: " + e.what());
  }
}

// Typed field access with path-qualified messages.
class Section {
public:
  Section(const Json* j, std::string path) : j_(j), path_(std::move(path)) {
    if (j_ != nullptr && !j_->is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const char* key) const { return j_ != nullptr && j_->contains(key) && !j_->at(key).is_null(); }
  const Json& at(const char* key) const { return j_->at(key); }
  std::string where(const char* key) const { return path_ + "." + key; }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    return number(key);
  }
  double number(const char* key) const {
    if (!has(key) || !at(key).is_number()) throw ConfigError(where(key) + ": expected a number");
    const double v = at(key).get<double>();
    if (!std::isfinite(v)) throw ConfigError(where(key) + ": not finite");
    return v;
  }
  int integer(const char* key, int fallback) const {
    if (!has(key)) return fallback;
    if (!at(key).is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
    return at(key).get<int>();
  }
  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!at(key).is_boolean()) throw ConfigError(where(key) + ": expected true or false");
    return at(key).get<bool>();
  }
  std::vector<double> numbers(const char* key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    const Json& a = at(key);
    if (!a.is_array() || a.empty()) throw ConfigError(where(key) + ": expected a nonempty array of numbers");
    std::vector<double> out;
    for (const auto& e : a) {
      if (!e.is_number()) throw ConfigError(where(key) + ": expected numbers only");
      out.push_back(e.get<double>());
    }
    return out;
  }
  CVector vector(const char* key) const {
    const Json& a = at(key);
    if (a.is_number()) return CVector::Constant(1, complex_from_json(a));
    if (!a.is_array() || a.empty()) throw ConfigError(where(key) + ": expected a nonempty vector");
    CVector v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
      try {
        v(static_cast<Eigen::Index>(i)) = complex_from_json(a[i]);
      } catch (const ConfigError& e) {
        throw ConfigError(where(key) + "[" + std::to_string(i) + "]: " + e.what());
      }
    }
    return v;
  }
  Section child(const char* key) const {
    return Section(has(key) ? &at(key) : nullptr, where(key));
  }
  const std::string& path() const { return path_; }

private:
  const Json* j_;
  std::string path_;
};

GridSpec parse_grid(const Json& raw, int refine) {
  const Section g(raw.contains("grid") ? &raw.at("grid") : nullptr, "grid");
  GridSpec grid;
  grid.m = g.integer("m", 200);
  grid.dt = g.number("dt", 0.0);
  if (grid.m < 2) throw ConfigError("grid.m: must be at least 2, got " + std::to_string(grid.m));
  if (grid.dt < 0.0) throw ConfigError("grid.dt: must be positive (or 0 for the default 1/(2m))");
  if (refine < 1) throw ConfigError("--refine: factor must be a positive integer");
  if (refine > 1) grid = grid.refined(refine);
  return grid;
}

PopulationConfig parse_population(const Section& s) {
  PopulationConfig cfg;
  const auto profile = [&](const char* key, Profile fallback) {
    if (!s.has(key)) return fallback;
    return profile_from_json(s.at(key), s.where(key).c_str());
  };
  cfg.mu = profile("mu", cfg.mu);
  cfg.nu = profile("nu", cfg.nu);
  cfg.beta = profile("beta", cfg.beta);
  cfg.initial = profile("initial", cfg.initial);
  cfg.s_max = s.number("s_max", 0.0);
  cfg.n = s.integer("n", cfg.n);
  if (s.has("band")) {
    const auto band = s.numbers("band", {});
    if (band.size() != 2) throw ConfigError(s.where("band") + ": expected [from, to]");
    cfg.band_from = band[0];
    cfg.band_to = band[1];
  }
  cfg.validate();
  return cfg;
}

DelaySystem parse_matrices(const Section& s) {
  if (!s.has("A")) throw ConfigError(s.where("A") + ": missing");
  CMatrix a = matrix_from_json(s.at("A"), s.where("A").c_str());
  std::vector<Delay> delays;
  if (s.has("delays")) {
    const Json& list = s.at("delays");
    if (!list.is_array() || list.empty()) throw ConfigError(s.where("delays") + ": expected a nonempty array");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const Section d(&list[k], s.where("delays") + "[" + std::to_string(k) + "]");
      if (!d.has("matrix")) throw ConfigError(d.where("matrix") + ": missing");
      delays.push_back({matrix_from_json(d.at("matrix"), d.where("matrix").c_str()), d.number("lag", 1.0)});
    }
  } else if (s.has("A1")) {
    delays.push_back({matrix_from_json(s.at("A1"), s.where("A1").c_str()), 1.0});
  } else {
    delays.push_back({CMatrix::Zero(a.rows(), a.cols()), 1.0});
  }
  CMatrix b = s.has("B") ? matrix_from_json(s.at("B"), s.where("B").c_str()) : CMatrix();
  try {
    return DelaySystem(std::move(a), std::move(delays), std::move(b));
  } catch (const Error& e) {
    throw ConfigError(s.path() + ": " + e.what());
  }
}

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::string fmt(double v) { return format_double(v); }

class Run {
public:
  Run(const ExperimentConfig& cfg, fs::path out) : cfg_(cfg), out_(std::move(out)) {}

  void simulate();
  void bounds();
  void admissibility();
  void adjoint_check();
  void population_demo();

  const std::vector<Check>& checks() const { return checks_; }
  const std::vector<std::string>& artifacts() const { return artifacts_; }
  const std::vector<std::pair<std::string, double>>& phases() const { return phases_; }

private:
  const DelaySystem& system() const { return *cfg_.system; }
  Section params() const {
    const std::string key = section_for(cfg_.experiment);
    return Section(cfg_.raw.contains(key) ? &cfg_.raw.at(key) : nullptr, key);
  }

  void check(std::string name, bool passed, std::string detail) {
    checks_.push_back({std::move(name), passed, std::move(detail)});
  }
  void write_json(const std::string& name, const Json& j) {
    write_json_file((out_ / name).string(), j);
    artifacts_.push_back(name);
  }
  void write_text(const std::string& name, const std::function<void(std::ostream&)>& body) {
    std::ostringstream ss;
    body(ss);
    write_text_file((out_ / name).string(), ss.str());
    artifacts_.push_back(name);
  }
  template <class F>
  auto timed(const char* phase, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      phases_.emplace_back(phase, seconds_since(start));
    } else {
      auto result = f();
      phases_.emplace_back(phase, seconds_since(start));
      return result;
    }
  }
  static double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  const ExperimentConfig& cfg_;
  fs::path out_;
  std::vector<Check> checks_;
  std::vector<std::string> artifacts_;
  std::vector<std::pair<std::string, double>> phases_;
};

LiftedState parse_initial(const Section& p, const DelaySystem& sys, int m) {
  if (!p.has("initial")) throw ConfigError(p.where("initial") + ": missing");
  const Section init = p.child("initial");
  if (init.has("state")) {
    LiftedState v = state_from_json(init.at("state"));
    if (v.dim() != sys.dim()) throw ConfigError(init.where("state") + ": dimension does not match the system");
    if (v.m() != m) throw ConfigError(init.where("state") + ": history grid m differs from grid.m");
    return v;
  }
  if (!init.has("head")) throw ConfigError(init.where("head") + ": missing (or give 'state')");
  const CVector x = init.vector("head");
  if (x.size() != sys.dim()) throw ConfigError(init.where("head") + ": expected " + std::to_string(sys.dim()) + " entries");
  const std::string history = init.has("history") ? init.at("history").get<std::string>() : "constant";
  if (history == "constant") return LiftedState::constant(x, m);
  if (history == "zero") return LiftedState(x, HistorySegment(m, sys.dim()));
  throw ConfigError(init.where("history") + ": expected 'constant' or 'zero'");
}

InputSignal parse_input(const Section& p, const DelaySystem& sys, int steps) {
  if (!p.has("input")) return {};
  const Section in = p.child("input");
  if (!in.has("constant")) throw ConfigError(in.where("constant") + ": missing");
  const CVector u = in.vector("constant");
  if (u.size() != sys.inputs()) {
    throw ConfigError(in.where("constant") + ": expected " + std::to_string(sys.inputs()) + " entries");
  }
  return InputSignal{u.transpose().replicate(steps + 1, 1)};
}

void Run::simulate() {
  const Section p = params();
  const DelaySystem& sys = system();
  const double t_end = p.number("T_end");
  const LiftedState v0 = parse_initial(p, sys, cfg_.grid.m);
  const int steps = static_cast<int>(std::ceil(t_end / cfg_.grid.step() - 1e-9));
  const InputSignal u = parse_input(p, sys, steps);
  const Trajectory traj = timed("simulate", [&] { return simulate_steps(sys, v0, u, t_end, cfg_.grid); });
  write_text("trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, traj); });
  write_json("final_state.json", state_to_json(traj.state(traj.end_time(), cfg_.grid.m)));

  Json summary = Json::object();
  summary["T_end"] = traj.end_time();
  summary["dt"] = traj.dt;
  Json head = Json::array();
  const CVector last = traj.samples.row(traj.count() - 1).transpose();
  for (Eigen::Index i = 0; i < last.size(); ++i) head.push_back(complex_to_json(last(i)));
  summary["final_head"] = std::move(head);

  if (p.has("checks")) {
    const Json& list = p.at("checks");
    if (!list.is_array()) throw ConfigError(p.where("checks") + ": expected an array");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const Section c(&list[k], p.where("checks") + "[" + std::to_string(k) + "]");
      const double t = c.number("t");
      const CVector expect = c.vector("head");
      const double tol = c.number("tol", 1e-6);
      if (expect.size() != sys.dim()) throw ConfigError(c.where("head") + ": dimension mismatch");
      const double err = (traj.at(t) - expect).cwiseAbs().maxCoeff();
      check("simulate.head@t=" + fmt(t), err <= tol, "max error " + fmt(err) + ", tol " + fmt(tol));
    }
  }
  if (p.boolean("compare_volterra", false)) {
    const double t = std::min(1.0, t_end);
    const double tol = p.number("volterra_tol", 1e-4);
    const LiftedState s = timed("volterra", [&] { return apply_T_volterra(sys, t, v0, cfg_.grid); });
    const double err = (s.head - traj.at(t)).norm();
    summary["volterra_head_difference"] = err;
    check("simulate.volterra_agreement", err <= tol, "head difference " + fmt(err) + ", tol " + fmt(tol));
  }
  write_json("simulate_summary.json", summary);
}

std::vector<double> unit_interval(const std::vector<double>& ts) {
  std::vector<double> out;
  for (double t : ts) {
    if (t >= 0.0 && t <= 1.0) out.push_back(t);
  }
  return out;
}

void Run::bounds() {
  const Section p = params();
  const DelaySystem& sys = system();
  std::vector<double> ts = p.numbers("ts", {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  const std::vector<double> t0s = p.numbers("t0s", {0.125, 0.25, 0.5});
  const std::vector<double> hs = p.numbers("hs", {0.1, 0.01, 0.001});
  NormCheckOptions opts;
  opts.grid = cfg_.grid;
  opts.refine = p.integer("refine", 2);

  sys.require_contraction("bounds");
  std::vector<BoundReport> reports;
  reports.push_back(timed("T0", [&] { return check_T0_bound(sys, ts, opts); }));
  const std::vector<double> unit = unit_interval(ts);
  if (sys.single_unit_delay() && !unit.empty()) {
    reports.push_back(timed("gronwall", [&] { return check_gronwall(sys, unit, opts); }));
    reports.push_back(timed("main", [&] { return check_main_bound(sys, unit, opts); }));
  }
  reports.push_back(timed("mv", [&] { return check_mv(sys, t0s, cfg_.grid, cfg_.seed); }));
  if (unit.size() >= 2) {
    const std::vector<double> norms = timed("norms", [&] { return semigroup_norms(sys, unit, cfg_.grid); });
    reports.push_back(check_envelope(unit, norms));
  }

  Json doc = Json::object();
  Json list = Json::array();
  for (const auto& r : reports) {
    list.push_back(report_to_json(r));
    write_text(std::string("bounds_") + to_string(r.kind) + ".csv",
               [&](std::ostream& os) { write_report_csv(os, r); });
    check(std::string("bounds.") + to_string(r.kind), r.passed,
          "margin " + fmt(r.margin) + ", slack " + fmt(r.slack));
  }
  doc["reports"] = std::move(list);
  if (!sys.single_unit_delay()) doc["skipped"] = Json::array({"gronwall", "main"});

  Json diag = Json::object();
  diag["numerical_range_bound"] = timed("range", [&] { return numerical_range_bound(sys, cfg_.grid); });
  const DerivativeEstimate d = timed("derivative", [&] { return norm_derivative_at_zero(sys, hs, cfg_.grid); });
  Json dj = Json::object();
  dj["estimate"] = d.estimate;
  dj["residual"] = d.residual;
  dj["hs"] = d.hs;
  dj["quotients"] = d.quotients;
  diag["norm_derivative_at_zero"] = std::move(dj);
  doc["diagnostics"] = std::move(diag);
  write_json("bounds.json", doc);
}

void Run::admissibility() {
  const Section p = params();
  const DelaySystem& sys = system();
  double omega = 0.0;
  std::string omega_source = "config";
  if (cfg_.omega) {
    omega = *cfg_.omega;
    omega_source = "command_line";
  } else if (p.has("omega")) {
    omega = p.number("omega");
  } else {
    omega = timed("range", [&] { return numerical_range_bound(sys, cfg_.grid); });
    omega_source = "numerical_range_bound";
  }
  const double base = std::max(omega, 0.0);
  const Section r = p.child("region");
  const SweepRegion region = SweepRegion::make(base, r.number("delta", 1e-3), r.number("reach", 1e3),
                                               r.number("im_max", 50.0), r.integer("re_count", 60),
                                               r.integer("im_count", 41));
  const WeissResult weiss = timed("weiss", [&] { return weiss_constant(sys, omega, region); });

  // Analytic against discrete resolvent on a fixed λ test set.
  std::vector<cplx> lambdas;
  if (p.has("lambdas")) {
    const Json& list = p.at("lambdas");
    if (!list.is_array() || list.empty()) throw ConfigError(p.where("lambdas") + ": expected a nonempty array");
    for (const auto& z : list) lambdas.push_back(complex_from_json(z));
  } else {
    for (double re : {0.5, 1.0, 2.0}) {
      for (double im : {-3.0, -1.0, 1.0, 3.0}) lambdas.emplace_back(base + re, im);
    }
  }
  const double cross_tol = p.number("crosscheck_tol", 0.01);
  std::vector<ResolventSample> cross;
  Json cross_json = Json::array();
  double worst = 0.0;
  int singular = 0;
  timed("crosscheck", [&] {
    const DiscreteGenerator gen = assemble_generator(sys, cfg_.grid);
    for (const cplx& lambda : lambdas) {
      try {
        const ResolventSample a = resolvent_norm_analytic(sys, lambda, omega);
        const ResolventSample d = resolvent_norm_discrete(sys, gen, lambda, omega);
        cross.push_back(a);
        cross.push_back(d);
        const double rel = a.norm > 0.0 ? std::abs(a.norm - d.norm) / a.norm : std::abs(d.norm);
        worst = std::max(worst, rel);
        Json e = Json::object();
        e["lambda"] = complex_to_json(lambda);
        e["analytic"] = a.norm;
        e["discrete"] = d.norm;
        e["relative_difference"] = rel;
        cross_json.push_back(std::move(e));
      } catch (const SingularityError& e) {
        ++singular;
        Json s = Json::object();
        s["lambda"] = complex_to_json(lambda);
        s["singular"] = e.what();
        cross_json.push_back(std::move(s));
      }
    }
  });

  const std::vector<double> taus = p.numbers("taus", {1.0});
  Json finite = Json::array();
  for (double tau : taus) {
    const FiniteTimeConstant c = timed("finite_time", [&] { return finite_time_constant(sys, tau, cfg_.grid); });
    Json e = Json::object();
    e["tau"] = tau;
    e["c_full"] = c.c_full;
    e["c_head"] = c.c_head;
    finite.push_back(std::move(e));
    check("admissibility.c_finite@tau=" + fmt(tau), std::isfinite(c.c_full), "c_full " + fmt(c.c_full));
  }

  std::vector<ResolventSample> all = weiss.samples;
  all.insert(all.end(), cross.begin(), cross.end());
  write_text("sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, all); });
  Json summary = weiss_summary_json(weiss);
  summary["omega_source"] = omega_source;
  summary["crosscheck"] = std::move(cross_json);
  summary["finite_time"] = std::move(finite);
  write_json("admissibility_summary.json", summary);

  check("admissibility.resolvent_crosscheck", worst <= cross_tol && singular == 0,
        "max relative difference " + fmt(worst) + ", tol " + fmt(cross_tol) + ", singular " +
            std::to_string(singular));
  check("admissibility.weiss_finite", std::isfinite(weiss.c_est), "C_est " + fmt(weiss.c_est));
  if (p.has("expect_C")) {
    const Section e = p.child("expect_C");
    const double value = e.number("value");
    const double tol = e.number("tol", 0.01);
    check("admissibility.expected_C", std::abs(weiss.c_est - value) <= tol,
          "C_est " + fmt(weiss.c_est) + ", expected " + fmt(value) + " ± " + fmt(tol));
  }
}

constexpr double kOrderTolerance = 0.05;

void Run::adjoint_check() {
  const Section p = params();
  const DelaySystem& sys = system();
  const int pairs = p.integer("pairs", 100);
  const double tol = p.number("tol", 1e-2);
  if (pairs < 1) throw ConfigError(p.where("pairs") + ": must be positive");
  const int m = cfg_.grid.m;
  const GridSpec fine = cfg_.grid.refined(2);

  const DiscreteGenerator gen = timed("assemble", [&] { return assemble_generator(sys, cfg_.grid); });
  const DiscreteGenerator adj = assemble_adjoint(sys, cfg_.grid);
  write_text("generator.csv", [&](std::ostream& os) { write_generator_csv(os, gen); });
  write_text("adjoint.csv", [&](std::ostream& os) { write_generator_csv(os, adj); });

  std::mt19937_64 rng(cfg_.seed);
  double worst = 0.0;
  double worst_fine = 0.0;
  double worst_zero = 0.0;
  std::ostringstream table;
  table << "pair,defect_m,defect_2m,zero_tail_defect\n";
  timed("pairing", [&] {
    for (int k = 0; k < pairs; ++k) {
      const SmoothPair pair = SmoothPair::random(sys.dim(), rng);
      const double d = pairing_defect(sys, cfg_.grid, pair.v(m), pair.w(m));
      const double df = pairing_defect(sys, fine, pair.v(fine.m), pair.w(fine.m));
      // Zero tails apart from the fused node f(0) = x.
      LiftedState v = LiftedState::zero(sys.dim(), m);
      v.head = pair.x;
      v.tail.set_node(m, pair.x);
      LiftedState w = LiftedState::zero(sys.dim(), m);
      w.head = pair.y;
      const double dz = pairing_defect(sys, cfg_.grid, v, w);
      worst = std::max(worst, d);
      worst_fine = std::max(worst_fine, df);
      worst_zero = std::max(worst_zero, dz);
      table << k << ',' << fmt(d) << ',' << fmt(df) << ',' << fmt(dz) << '\n';
    }
  });
  write_text("pairing.csv", [&](std::ostream& os) { os << table.str(); });
  const double order = std::log2(worst / worst_fine);

  Json summary = Json::object();
  summary["m"] = m;
  summary["pairs"] = pairs;
  summary["max_defect"] = worst;
  summary["max_defect_refined"] = worst_fine;
  summary["observed_order"] = order;
  summary["max_zero_tail_defect"] = worst_zero;
  summary["generator_boundary"] = gen.boundary_spec;
  summary["adjoint_boundary"] = adj.boundary_spec;
  check("adjoint.pairing_max", worst <= tol, "max defect " + fmt(worst) + ", tol " + fmt(tol));
  check("adjoint.pairing_order", order >= 1.0 - kOrderTolerance, "observed order " + fmt(order));
  check("adjoint.zero_tail", worst_zero <= 1e-12, "max defect " + fmt(worst_zero));

  if (p.has("expect_root")) {
    const Section e = p.child("expect_root");
    const cplx root = complex_from_json(e.at("value"));
    const double root_tol = e.number("tol", 1e-2);
    const CVector eig = timed("eigenvalues", [&] { return generator_eigenvalues(gen); });
    double best = std::numeric_limits<double>::infinity();
    cplx nearest;
    for (Eigen::Index i = 0; i < eig.size(); ++i) {
      if (std::abs(eig(i) - root) < best) {
        best = std::abs(eig(i) - root);
        nearest = eig(i);
      }
    }
    summary["nearest_eigenvalue"] = complex_to_json(nearest);
    summary["root_distance"] = best;
    check("adjoint.characteristic_root", best <= root_tol,
          "distance " + fmt(best) + ", tol " + fmt(root_tol));
  }
  write_json("adjoint_summary.json", summary);
}

void Run::population_demo() {
  if (!cfg_.population) throw ConfigError("population-demo: system.population is required");
  const Section p = params();
  const double t_end = p.number("T_end", 2.0);
  const PopulationConfig& pc = *cfg_.population;
  const PopulationModel model = build_population_system(pc, cfg_.grid);
  const PopulationRun run = timed("simulate", [&] { return run_population_demo(pc, cfg_.grid, t_end); });
  write_text("trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, run.trajectory); });
  write_text("population_series.csv", [&](std::ostream& os) { write_population_series_csv(os, run); });
  Json summary = population_summary_json(pc, model, cfg_.grid, run);

  if (model.nu_nonnegative) {
    check("population.positivity", run.min_overall >= -1e-10, "min value " + fmt(run.min_overall));
  }
  if (p.boolean("refine_study", true)) {
    // Halve both the age step and the time step.
    PopulationConfig finer = pc;
    finer.n = 2 * pc.n;
    finer.s_max = pc.resolved_s_max();
    const PopulationRun fine = timed("refine", [&] { return run_population_demo(finer, cfg_.grid.refined(2), t_end); });
    const double order = std::log2(run.max_boundary_residual / fine.max_boundary_residual);
    summary["refined_max_boundary_residual"] = fine.max_boundary_residual;
    summary["boundary_residual_order"] = order;
    check("population.boundary_order", order >= 1.0 - kOrderTolerance, "observed order " + fmt(order));
  }
  write_json("population_summary.json", summary);
}

std::string compiler_version() {
#if defined(__clang__)
  return std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  return std::string("gcc ") + __VERSION__;
#else
  return "unknown";
#endif
}

}  // namespace

ExperimentConfig load_config(const std::string& path, const std::string& experiment,
                             std::optional<std::uint64_t> seed, int refine) {
  const std::string text = read_file(path);
  ExperimentConfig cfg;
  cfg.config_hash = hex64(fnv1a64(text));
  cfg.raw = parse_json(text, path);
  if (!cfg.raw.is_object()) throw ConfigError(path + ": top level must be an object");

  std::string named;
  if (cfg.raw.contains("experiment")) {
    if (!cfg.raw.at("experiment").is_string()) throw ConfigError("experiment: expected a string");
    named = cfg.raw.at("experiment").get<std::string>();
  }
  cfg.experiment = experiment.empty() ? named : experiment;
  if (cfg.experiment.empty()) throw ConfigError("experiment: not given on the command line or in the config");
  if (!known_experiment(cfg.experiment)) throw ConfigError("experiment: unknown experiment '" + cfg.experiment + "'");
  if (!named.empty() && named != cfg.experiment) {
    throw ConfigError("experiment: config is for '" + named + "', invoked as '" + cfg.experiment + "'");
  }

  if (cfg.raw.contains("seed")) {
    if (!cfg.raw.at("seed").is_number_unsigned()) throw ConfigError("seed: expected a nonnegative integer");
    cfg.seed = cfg.raw.at("seed").get<std::uint64_t>();
  }
  if (seed) cfg.seed = *seed;
  cfg.grid = parse_grid(cfg.raw, refine);
  cfg.grid.validate();

  if (!cfg.raw.contains("system")) throw ConfigError("system: missing");
  const Section sys(&cfg.raw.at("system"), "system");
  if (sys.has("population")) {
    cfg.population = parse_population(sys.child("population"));
    cfg.system = build_population_system(*cfg.population, cfg.grid).system;
  } else {
    cfg.system = parse_matrices(sys);
  }
  for (const auto& d : cfg.system->delays()) {
    if (d.lag < cfg.grid.step() * (1.0 - 1e-9)) {
      throw ConfigError("system: lag " + format_double(d.lag) + " is shorter than dt = " +
                        format_double(cfg.grid.step()));
    }
  }
  if (cfg.experiment == "population-demo" && !cfg.population) {
    throw ConfigError("system.population: required by population-demo");
  }
  return cfg;
}

std::vector<std::string> validate_config(const std::string& path, const std::string& experiment) {
  std::vector<std::string> out;
  ExperimentConfig cfg;
  try {
    cfg = load_config(path, experiment);
  } catch (const std::exception& e) {
    out.emplace_back(e.what());
    return out;
  }
  const bool needs_contraction = cfg.experiment == "bounds";
  if (needs_contraction && !cfg.system->contraction_certified()) {
    out.push_back("contraction certificate failed: max eig((A + A*)/2) = " +
                  format_double(cfg.system->omega0()) + " > 0");
  }
  const std::string key = section_for(cfg.experiment);
  const Json* section = cfg.raw.contains(key) ? &cfg.raw.at(key) : nullptr;
  if (section != nullptr && !section->is_object()) out.push_back(key + ": expected an object");
  if (cfg.experiment == "simulate") {
    if (section == nullptr || !section->contains("T_end")) out.push_back("simulate.T_end: missing");
    if (section == nullptr || !section->contains("initial")) out.push_back("simulate.initial: missing");
  }
  if (cfg.experiment == "bounds" && section != nullptr && section->contains("t0s")) {
    for (const auto& t : section->at("t0s")) {
      if (!t.is_number() || !(t.get<double>() > 0.0) || t.get<double>() > 1.0) {
        out.push_back("bounds.t0s: every t0 must lie in (0, 1]");
        break;
      }
    }
  }
  if (cfg.experiment == "admissibility" && section != nullptr && section->contains("taus")) {
    for (const auto& t : section->at("taus")) {
      if (!t.is_number()) {
        out.push_back("admissibility.taus: expected numbers");
        break;
      }
      const double ratio = t.get<double>() / cfg.grid.step();
      if (!(ratio >= 1.0) || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
        out.push_back("admissibility.taus: tau = " + format_double(t.get<double>()) +
                      " is not a positive multiple of dt = " + format_double(cfg.grid.step()));
        break;
      }
    }
  }
  return out;
}

int run_experiment(const RunOptions& opts, std::string* error_message) {
  const auto start = std::chrono::steady_clock::now();
  Json manifest = Json::object();
  manifest["tool"] = "delayadm";
  manifest["experiment"] = opts.experiment;
  Json versions = Json::object();
  versions["delayadm"] = kVersion;
  versions["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                      "." + std::to_string(EIGEN_MINOR_VERSION);
  versions["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  versions["compiler"] = compiler_version();
  manifest["versions"] = std::move(versions);

  int code = kExitPass;
  std::string error;
  Json checks = Json::array();
  Json artifacts = Json::array();
  Json phases = Json::object();
  const fs::path out(opts.out_dir);
  try {
    fs::create_directories(out);
  } catch (const fs::filesystem_error& e) {
    if (error_message) *error_message = std::string("cannot create output directory: ") + e.what();
    return kExitError;
  }
  try {
    ExperimentConfig cfg = load_config(opts.config_path, opts.experiment, opts.seed, opts.refine);
    cfg.omega = opts.omega;
    if (cfg.omega && !std::isfinite(*cfg.omega)) throw ConfigError("--omega: not finite");
    manifest["config_hash"] = "fnv1a64:" + cfg.config_hash;
    manifest["seed"] = cfg.seed;
    manifest["refine"] = opts.refine;
    Json grid = Json::object();
    grid["m"] = cfg.grid.m;
    grid["dt"] = cfg.grid.step();
    manifest["grid"] = std::move(grid);

    Run run(cfg, out);
    if (cfg.experiment == "simulate") run.simulate();
    if (cfg.experiment == "bounds") run.bounds();
    if (cfg.experiment == "admissibility") run.admissibility();
    if (cfg.experiment == "adjoint-check") run.adjoint_check();
    if (cfg.experiment == "population-demo") run.population_demo();

    for (const auto& c : run.checks()) {
      Json e = Json::object();
      e["name"] = c.name;
      e["passed"] = c.passed;
      e["detail"] = c.detail;
      checks.push_back(std::move(e));
      if (!c.passed) code = kExitCheckFailed;
    }
    for (const auto& a : run.artifacts()) artifacts.push_back(a);
    for (const auto& [name, secs] : run.phases()) phases[name] = secs;
  } catch (const std::exception& e) {
    code = kExitError;
    error = e.what();
  }
  manifest["checks"] = std::move(checks);
  manifest["artifacts"] = std::move(artifacts);
  Json timings = Json::object();
  timings["total_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  timings["phases"] = std::move(phases);
  manifest["timings"] = std::move(timings);
  manifest["exit_code"] = code;
  if (!error.empty()) manifest["error"] = error;
  try {
    write_json_file((out / "run.json").string(), manifest);
  } catch (const std::exception& e) {
    if (error.empty()) error = e.what();
    code = kExitError;
  }
  if (error_message) *error_message = error;
  return code;
}

}  // namespace delayadm
