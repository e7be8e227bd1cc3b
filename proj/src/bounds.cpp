#include "delayadm/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include <Eigen/SVD>

#include "delayadm/adjoint.hpp"
#include "delayadm/error.hpp"

namespace delayadm {

const char* to_string(BoundKind k) {
  switch (k) {
    case BoundKind::t0: return "T0";
    case BoundKind::gronwall: return "gronwall";
    case BoundKind::main: return "main";
    case BoundKind::mv: return "mv";
    case BoundKind::envelope: return "envelope";
    case BoundKind::range: return "range";
    case BoundKind::derivative: return "derivative";
  }
  return "unknown";
}

std::optional<double> BoundReport::detail(const std::string& name) const {
  for (const auto& [k, v] : details) {
    if (k == name) return v;
  }
  return std::nullopt;
}

namespace {

constexpr double kSlackFloor = 1e-6;

struct MeasuredNorms {
  std::vector<double> coarse;
  std::vector<double> fine;
  double delta(std::size_t i) const { return std::abs(coarse[i] - fine[i]); }
};

MeasuredNorms measure(const DelaySystem& sys, std::span<const double> ts, const NormCheckOptions& o) {
  if (o.refine < 2) throw ConfigError("norm check: refinement factor must be at least 2");
  for (double t : ts) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw RangeError("norm check: sample times must be nonnegative");
  }
  return {semigroup_norms(sys, ts, o.grid), semigroup_norms(sys, ts, o.grid.refined(o.refine))};
}

void require_unit_lag(const DelaySystem& sys, const char* what) {
  if (!sys.single_unit_delay()) {
    throw ConfigError(std::string(what) + ": requires a single delay with lag 1");
  }
}

void finish(BoundReport& r, double margin, double max_delta) {
  r.margin = margin;
  r.slack = std::max(kSlackFloor, 3.0 * max_delta);
  r.passed = r.margin >= -r.slack;
}

double delay_norm(const DelaySystem& sys) {
  double acc = 0.0;
  for (const auto& d : sys.delays()) acc += op_norm(d.matrix);
  return acc;
}

}  // namespace

BoundReport check_T0_bound(const DelaySystem& sys, std::span<const double> ts,
                           const NormCheckOptions& opts) {
  if (ts.empty()) throw ConfigError("check_T0_bound: no sample times");
  sys.require_contraction("check_T0_bound");
  const MeasuredNorms n = measure(sys.unperturbed(), ts, opts);
  BoundReport r;
  r.kind = BoundKind::t0;
  double margin = std::numeric_limits<double>::infinity();
  double delta = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    BoundSample s{ts[i], n.coarse[i], std::exp(0.5 * ts[i]), std::nullopt};
    margin = std::min(margin, s.theoretical - s.measured);
    if (ts[i] <= 1.0) {
      s.sharp = std::sqrt(1.0 + ts[i]);
      margin = std::min(margin, *s.sharp - s.measured);
    }
    delta = std::max(delta, n.delta(i));
    r.samples.push_back(s);
  }
  finish(r, margin, delta);
  return r;
}

BoundReport check_gronwall(const DelaySystem& sys, std::span<const double> ts,
                           const NormCheckOptions& opts) {
  if (ts.empty()) throw ConfigError("check_gronwall: no sample times");
  sys.require_contraction("check_gronwall");
  require_unit_lag(sys, "check_gronwall");
  const double a1 = op_norm(sys.delays().front().matrix);
  const MeasuredNorms n = measure(sys, ts, opts);
  BoundReport r;
  r.kind = BoundKind::gronwall;
  double margin = std::numeric_limits<double>::infinity();
  double delta = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double scale = std::exp(-0.5 * ts[i]);
    BoundSample s{ts[i], scale * n.coarse[i], std::sqrt(2.0) * std::exp(2.0 * a1 * a1 * ts[i]),
                  std::nullopt};
    margin = std::min(margin, s.theoretical - s.measured);
    delta = std::max(delta, scale * n.delta(i));
    r.samples.push_back(s);
  }
  r.details.emplace_back("delay_norm", a1);
  finish(r, margin, delta);
  return r;
}

BoundReport check_main_bound(const DelaySystem& sys, std::span<const double> ts,
                             const NormCheckOptions& opts) {
  if (ts.empty()) throw ConfigError("check_main_bound: no sample times");
  sys.require_contraction("check_main_bound");
  require_unit_lag(sys, "check_main_bound");
  const double a1 = op_norm(sys.delays().front().matrix);
  const double m_cap = std::sqrt(2.0) * std::exp(2.0 * a1 * a1);

  // Sample times followed by the unit-interval grid used for M_measured.
  std::vector<double> all(ts.begin(), ts.end());
  constexpr int kSupPoints = 21;
  for (int i = 0; i < kSupPoints; ++i) all.push_back(static_cast<double>(i) / (kSupPoints - 1));
  const MeasuredNorms n = measure(sys, all, opts);

  double m_measured = 0.0;
  double delta = 0.0;
  for (std::size_t i = ts.size(); i < all.size(); ++i) {
    const double scale = std::exp(-0.5 * all[i]);
    m_measured = std::max(m_measured, scale * n.coarse[i]);
    delta = std::max(delta, scale * n.delta(i));
  }

  BoundReport r;
  r.kind = BoundKind::main;
  double margin = m_cap - m_measured;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double t = ts[i];
    const double growth = std::exp(0.5 * t);
    BoundSample s{t, n.coarse[i], growth * (1.0 + a1 * m_cap * std::sqrt(t)),
                  growth * (1.0 + a1 * m_measured * std::sqrt(t))};
    margin = std::min(margin, s.theoretical - s.measured);
    delta = std::max(delta, n.delta(i));
    r.samples.push_back(s);
  }
  r.details.emplace_back("delay_norm", a1);
  r.details.emplace_back("M_cap", m_cap);
  r.details.emplace_back("M_measured", m_measured);
  finish(r, margin, delta);
  return r;
}

namespace {

// Evaluates v ↦ ∫_0^{t0} ‖Σ_k A_k (T0(r)v)(−h_k)‖ dr on a fixed r grid.
class MvFunctional {
public:
  MvFunctional(const DelaySystem& sys, double t0, int m) : sys_(sys) {
    const int steps = std::max(1, static_cast<int>(std::ceil(t0 * 4 * m - 1e-9)));
    dr_ = t0 / steps;
    for (int i = 0; i <= steps; ++i) {
      const double r = i * dr_;
      std::vector<CMatrix> per_delay;
      for (const auto& d : sys.delays()) {
        per_delay.push_back(r > d.lag ? CMatrix(d.matrix * expm(sys.a(), r - d.lag)) : CMatrix());
      }
      r_.push_back(r);
      head_maps_.push_back(std::move(per_delay));
    }
  }

  // v must satisfy f(0) = x; the tail is read through linear interpolation.
  double operator()(const LiftedState& v) const {
    const int n = sys_.dim();
    CVector g(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < r_.size(); ++i) {
      g.setZero();
      for (std::size_t k = 0; k < sys_.delays().size(); ++k) {
        const auto& d = sys_.delays()[k];
        if (head_maps_[i][k].size() != 0) {
          g += head_maps_[i][k] * v.head;
        } else {
          g += d.matrix * v.tail.evaluate(std::min(0.0, r_[i] - d.lag));
        }
      }
      const double w = (i == 0 || i + 1 == r_.size()) ? 0.5 : 1.0;
      acc += w * dr_ * g.norm();
    }
    return acc;
  }

private:
  const DelaySystem& sys_;
  double dr_ = 0.0;
  std::vector<double> r_;
  std::vector<std::vector<CMatrix>> head_maps_;
};

LiftedState normalized(LiftedState v) {
  const double nv = lifted_norm(v);
  if (nv > 0.0) v *= cplx(1.0 / nv);
  return v;
}

}  // namespace

MvEstimate miyadera_voigt_q(const DelaySystem& sys, double t0, const GridSpec& grid,
                            std::uint64_t seed, int random_states) {
  if (!(t0 > 0.0) || t0 > 1.0) throw RangeError("miyadera_voigt_q: t0 must lie in (0, 1]");
  sys.require_contraction("miyadera_voigt_q");
  grid.validate();
  const int n = sys.dim();
  const int m = grid.m;
  const MvFunctional functional(sys, t0, m);
  MvEstimate est;
  est.upper_chain = delay_norm(sys) * (t0 + std::sqrt(t0));

  const auto consider = [&](const LiftedState& v, const char* source) {
    const double value = functional(v);
    if (value > est.q) {
      est.q = value;
      est.source = source;
    }
  };

  // Compatible basis: head coordinates carry node m along.
  for (int i = 0; i < n; ++i) {
    LiftedState v = LiftedState::zero(n, m);
    v.head(i) = 1.0;
    v.tail.values()(m, i) = 1.0;
    consider(normalized(v), "basis");
  }
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) {
      LiftedState v = LiftedState::zero(n, m);
      v.tail.values()(j, i) = 1.0;
      consider(normalized(v), "basis");
    }
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int s = 0; s < random_states; ++s) {
    LiftedState v = LiftedState::zero(n, m);
    for (int i = 0; i < n; ++i) v.head(i) = cplx(normal(rng), normal(rng));
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < n; ++i) v.tail.values()(j, i) = cplx(normal(rng), normal(rng));
    }
    v.tail.set_node(m, v.head);
    consider(normalized(v), "random");
  }

  // Indicator of [−h_k, −h_k + t0] along the top right singular vector of A_k.
  for (const auto& d : sys.delays()) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Eigen::MatrixXcd(d.matrix), Eigen::ComputeFullV);
    const CVector dir = svd.matrixV().col(0);
    LiftedState v = LiftedState::zero(n, m);
    bool any = false;
    for (int j = 0; j < m; ++j) {
      const double sigma = v.tail.node(j);
      if (sigma >= -d.lag - 1e-12 && sigma <= -d.lag + t0 + 1e-12) {
        v.tail.set_node(j, dir);
        any = true;
      }
    }
    if (any) consider(normalized(v), "extremal");
  }
  return est;
}

BoundReport check_mv(const DelaySystem& sys, std::span<const double> t0s, const GridSpec& grid,
                     std::uint64_t seed) {
  if (t0s.empty()) throw ConfigError("check_mv: no t0 values");
  BoundReport r;
  r.kind = BoundKind::mv;
  double margin = std::numeric_limits<double>::infinity();
  double delta = 0.0;
  for (double t0 : t0s) {
    const MvEstimate coarse = miyadera_voigt_q(sys, t0, grid, seed);
    const MvEstimate fine = miyadera_voigt_q(sys, t0, grid.refined(2), seed);
    r.samples.push_back({t0, coarse.q, coarse.upper_chain, std::nullopt});
    margin = std::min(margin, coarse.upper_chain - coarse.q);
    delta = std::max(delta, std::abs(coarse.q - fine.q));
  }
  finish(r, margin, delta);
  return r;
}

std::vector<double> Envelope::values() const {
  std::vector<double> out;
  out.reserve(log_envelope.size());
  for (double v : log_envelope) out.push_back(std::exp(v));
  return out;
}

namespace {

// > 0 for a left turn o → a → b.
double cross(double ox, double oy, double ax, double ay, double bx, double by) {
  return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox);
}

}  // namespace

Envelope log_concave_envelope(std::span<const double> ts, std::span<const double> norms) {
  if (ts.empty() || ts.size() != norms.size()) {
    throw DimensionError("log_concave_envelope: need matching, nonempty samples");
  }
  Envelope e;
  e.ts.assign(ts.begin(), ts.end());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!(norms[i] > 0.0) || !std::isfinite(norms[i])) {
      throw DomainError("log_concave_envelope: nonpositive norm at t = " + format_double(ts[i]));
    }
    if (i > 0 && !(ts[i] > ts[i - 1])) {
      throw DomainError("log_concave_envelope: sample times must increase strictly");
    }
    e.log_values.push_back(std::log(norms[i]));
  }
  const auto& y = e.log_values;
  for (int i = 0; i < static_cast<int>(ts.size()); ++i) {
    while (e.vertices.size() >= 2) {
      const int a = e.vertices[e.vertices.size() - 2];
      const int b = e.vertices.back();
      if (cross(ts[a], y[a], ts[b], y[b], ts[i], y[i]) >= 0.0) {
        e.vertices.pop_back();
      } else {
        break;
      }
    }
    e.vertices.push_back(i);
  }
  e.log_envelope.resize(ts.size());
  for (std::size_t v = 0; v + 1 < e.vertices.size(); ++v) {
    const int a = e.vertices[v];
    const int b = e.vertices[v + 1];
    for (int i = a; i <= b; ++i) {
      const double frac = (ts[i] - ts[a]) / (ts[b] - ts[a]);
      e.log_envelope[i] = i == a ? y[a] : (i == b ? y[b] : y[a] + frac * (y[b] - y[a]));
    }
  }
  if (e.vertices.size() == 1) e.log_envelope[0] = y[0];
  return e;
}

BoundReport check_envelope(std::span<const double> ts, std::span<const double> norms) {
  const Envelope e = log_concave_envelope(ts, norms);
  BoundReport r;
  r.kind = BoundKind::envelope;
  double margin = std::numeric_limits<double>::infinity();
  const std::vector<double> env = e.values();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    r.samples.push_back({ts[i], norms[i], env[i], std::nullopt});
    margin = std::min(margin, e.log_envelope[i] - e.log_values[i]);
  }
  bool concave = true;
  for (std::size_t i = 1; i + 1 < ts.size(); ++i) {
    // Chord slopes of the envelope must not increase.
    const double left = (e.log_envelope[i] - e.log_envelope[i - 1]) / (ts[i] - ts[i - 1]);
    const double right = (e.log_envelope[i + 1] - e.log_envelope[i]) / (ts[i + 1] - ts[i]);
    if (right > left + 1e-12 * (1.0 + std::abs(left))) concave = false;
  }
  r.details.emplace_back("hull_vertices", static_cast<double>(e.vertices.size()));
  r.details.emplace_back("concave", concave ? 1.0 : 0.0);
  r.margin = margin;
  r.slack = 1e-12;
  r.passed = concave && margin >= -r.slack;
  return r;
}

double numerical_range_bound(const DelaySystem& sys, const GridSpec& grid) {
  const DiscreteGenerator g = assemble_generator(sys, grid);
  CMatrix s = g.matrix;
  for (int i = 0; i < g.size(); ++i) {
    const double si = std::sqrt(g.metric[i]);
    s.row(i) *= si;
    s.col(i) /= si;
  }
  return hermitian_max_eigenvalue(s);
}

DerivativeEstimate norm_derivative_at_zero(const DelaySystem& sys, std::span<const double> hs,
                                           const GridSpec& grid) {
  if (hs.empty()) throw ConfigError("norm_derivative_at_zero: no steps");
  constexpr double kCellsPerStep = 8.0;
  DerivativeEstimate out;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double h = hs[i];
    if (!(h > 0.0)) throw RangeError("norm_derivative_at_zero: steps must be positive");
    if (i > 0 && !(h < hs[i - 1])) throw RangeError("norm_derivative_at_zero: steps must decrease");
    GridSpec g;
    g.m = std::max(grid.m, static_cast<int>(std::ceil(kCellsPerStep / h - 1e-9)));
    const double norm = semigroup_norm(sys, h, g, Basis::compatible);
    out.hs.push_back(h);
    out.quotients.push_back((norm - 1.0) / h);
  }
  const auto& q = out.quotients;
  std::vector<double> extrapolated;
  for (std::size_t i = 1; i < q.size(); ++i) {
    const double h0 = hs[i - 1];
    const double h1 = hs[i];
    extrapolated.push_back((h0 * q[i] - h1 * q[i - 1]) / (h0 - h1));
  }
  if (extrapolated.empty()) {
    out.estimate = q.back();
    out.residual = std::numeric_limits<double>::quiet_NaN();
  } else {
    out.estimate = extrapolated.back();
    out.residual = extrapolated.size() >= 2
                       ? std::abs(extrapolated.back() - extrapolated[extrapolated.size() - 2])
                       : std::abs(extrapolated.back() - q.back());
  }
  return out;
}

Json report_to_json(const BoundReport& r) {
  Json j = Json::object();
  j["kind"] = to_string(r.kind);
  j["passed"] = r.passed;
  j["margin"] = r.margin;
  j["slack"] = r.slack;
  Json samples = Json::array();
  for (const auto& s : r.samples) {
    Json e = Json::object();
    e["t"] = s.t;
    e["measured"] = s.measured;
    e["theoretical"] = s.theoretical;
    if (s.sharp) e["sharp"] = *s.sharp;
    samples.push_back(std::move(e));
  }
  j["samples"] = std::move(samples);
  Json details = Json::object();
  for (const auto& [k, v] : r.details) details[k] = v;
  j["details"] = std::move(details);
  return j;
}

void write_report_csv(std::ostream& os, const BoundReport& r) {
  const bool sharp = std::any_of(r.samples.begin(), r.samples.end(),
                                 [](const BoundSample& s) { return s.sharp.has_value(); });
  os << "t,measured,theoretical" << (sharp ? ",sharp" : "") << '\n';
  for (const auto& s : r.samples) {
    os << format_double(s.t) << ',' << format_double(s.measured) << ','
       << format_double(s.theoretical);
    if (sharp) os << ',' << (s.sharp ? format_double(*s.sharp) : std::string());
    os << '\n';
  }
}

}  // namespace delayadm
