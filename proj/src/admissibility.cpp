#include "delayadm/admissibility.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "delayadm/error.hpp"

namespace delayadm {

const char* to_string(ResolventSample::Method m) {
  return m == ResolventSample::Method::analytic ? "analytic" : "discrete";
}

SweepRegion SweepRegion::make(double omega, double delta, double reach, double im_max, int re_count,
                              int im_count) {
  if (!(delta > 0.0) || !(reach > delta) || !(im_max >= 0.0) || re_count < 2 || im_count < 1) {
    throw ConfigError("sweep region: need 0 < delta < reach, im_max ≥ 0, re_count ≥ 2, im_count ≥ 1");
  }
  SweepRegion r;
  r.delta = delta;
  r.reach = reach;
  r.im_max = im_max;
  const double lo = std::log(delta);
  const double hi = std::log(reach);
  for (int i = 0; i < re_count; ++i) {
    r.re_points.push_back(omega + std::exp(lo + (hi - lo) * i / (re_count - 1)));
  }
  if (im_count == 1) {
    r.im_points.push_back(0.0);
  } else {
    for (int i = 0; i < im_count; ++i) {
      r.im_points.push_back(-im_max + 2.0 * im_max * i / (im_count - 1));
    }
    if (im_count % 2 == 1) r.im_points[im_count / 2] = 0.0;
  }
  return r;
}

CMatrix characteristic_matrix(const DelaySystem& sys, cplx lambda) {
  const int n = sys.dim();
  CMatrix d = lambda * CMatrix::Identity(n, n) - sys.a();
  for (const auto& k : sys.delays()) d -= std::exp(-lambda * k.lag) * k.matrix;
  return d;
}

namespace {

// ∫_{-1}^0 e^{2 Re λ σ} dσ, continuous at Re λ = 0.
double tail_energy(double re) {
  if (std::abs(re) < 1e-12) return 1.0;
  return -std::expm1(-2.0 * re) / (2.0 * re);
}

void require_half_plane(cplx lambda, double omega_ref, const char* what) {
  if (!(lambda.real() > std::max(0.0, omega_ref))) {
    throw RangeError(std::string(what) + ": need Re λ > max(0, ω), got Re λ = " +
                     format_double(lambda.real()));
  }
}

ResolventSample make_sample(cplx lambda, double norm, double omega_ref, ResolventSample::Method m) {
  return {lambda, norm, std::sqrt(lambda.real() - omega_ref) * norm, m};
}

}  // namespace

ResolventSample resolvent_norm_analytic(const DelaySystem& sys, cplx lambda, double omega_ref) {
  require_half_plane(lambda, omega_ref, "resolvent_norm_analytic");
  CMatrix x;
  try {
    x = solve(characteristic_matrix(sys, lambda), sys.b());
  } catch (const SingularityError& e) {
    throw SingularityError(std::string("characteristic matrix singular: ") + e.what(), lambda);
  }
  const double norm = op_norm(x) * std::sqrt(1.0 + tail_energy(lambda.real()));
  return make_sample(lambda, norm, omega_ref, ResolventSample::Method::analytic);
}

ResolventSample resolvent_norm_discrete(const DelaySystem& sys, const DiscreteGenerator& gen,
                                        cplx lambda, double omega_ref) {
  require_half_plane(lambda, omega_ref, "resolvent_norm_discrete");
  if (gen.side != DiscreteGenerator::Side::generator || gen.dim != sys.dim()) {
    throw DimensionError("resolvent_norm_discrete: generator does not belong to this system");
  }
  const int n = sys.dim();
  const int size = gen.size();
  CMatrix shifted = -gen.matrix;
  shifted.diagonal().array() += lambda;
  CMatrix rhs = CMatrix::Zero(size, sys.inputs());
  rhs.topRows(n) = sys.b();
  CMatrix image;
  try {
    image = solve(shifted, rhs);
  } catch (const SingularityError& e) {
    throw SingularityError(std::string("discrete resolvent singular: ") + e.what(), lambda);
  }
  for (int i = 0; i < size; ++i) image.row(i) *= std::sqrt(gen.metric[i]);
  return make_sample(lambda, op_norm(image), omega_ref, ResolventSample::Method::discrete);
}

ResolventSample resolvent_norm_discrete(const DelaySystem& sys, cplx lambda, const GridSpec& grid,
                                        double omega_ref) {
  return resolvent_norm_discrete(sys, assemble_generator(sys, grid), lambda, omega_ref);
}

namespace {

constexpr double kGolden = 0.6180339887498949;

// Golden-section maximization of f on [a, b].
template <class F>
std::pair<double, double> golden_max(F&& f, double a, double b, double tol) {
  double c = b - kGolden * (b - a);
  double d = a + kGolden * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol * (1.0 + std::abs(a) + std::abs(b))) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? std::pair{c, fc} : std::pair{d, fd};
}

}  // namespace

WeissResult weiss_constant(const DelaySystem& sys, double omega_ref, const SweepRegion& region) {
  if (region.re_points.empty() || region.im_points.empty()) {
    throw ConfigError("weiss_constant: empty sweep region");
  }
  WeissResult out;
  out.omega_ref = omega_ref;
  out.region = region;
  int best_re = -1;
  int best_im = -1;
  for (std::size_t i = 0; i < region.re_points.size(); ++i) {
    for (std::size_t j = 0; j < region.im_points.size(); ++j) {
      const cplx lambda(region.re_points[i], region.im_points[j]);
      try {
        const ResolventSample s = resolvent_norm_analytic(sys, lambda, omega_ref);
        if (best_re < 0 || s.weighted > out.c_est) {
          out.c_est = s.weighted;
          out.argmax = lambda;
          best_re = static_cast<int>(i);
          best_im = static_cast<int>(j);
        }
        out.samples.push_back(s);
      } catch (const SingularityError&) {
        out.skipped.push_back(lambda);
      }
    }
  }
  if (best_re < 0) return out;

  // Refinement evaluations that hit a singular Δ count as zero.
  const auto weighted_at = [&](cplx lambda) {
    try {
      const ResolventSample s = resolvent_norm_analytic(sys, lambda, omega_ref);
      out.samples.push_back(s);
      return s.weighted;
    } catch (const SingularityError&) {
      out.skipped.push_back(lambda);
      return 0.0;
    }
  };
  const auto& re = region.re_points;
  const auto& im = region.im_points;
  constexpr double kTol = 1e-8;

  const double re_lo = re[std::max(best_re - 1, 0)];
  const double re_hi = re[std::min<std::size_t>(best_re + 1, re.size() - 1)];
  double im_fixed = out.argmax.imag();
  const auto [re_arg, re_val] =
      golden_max([&](double x) { return weighted_at({x, im_fixed}); }, re_lo, re_hi, kTol);
  if (re_val > out.c_est) {
    out.c_est = re_val;
    out.argmax = {re_arg, im_fixed};
  }
  if (im.size() > 1) {
    const double re_fixed = out.argmax.real();
    const double im_lo = im[std::max(best_im - 1, 0)];
    const double im_hi = im[std::min<std::size_t>(best_im + 1, im.size() - 1)];
    const auto [im_arg, im_val] =
        golden_max([&](double y) { return weighted_at({re_fixed, y}); }, im_lo, im_hi, kTol);
    if (im_val > out.c_est) {
      out.c_est = im_val;
      out.argmax = {re_fixed, im_arg};
    }
  }
  return out;
}

FiniteTimeConstant finite_time_constant(const DelaySystem& sys, double tau, const GridSpec& grid) {
  grid.validate();
  const double dt = grid.step();
  if (!(tau > 0.0)) throw RangeError("finite_time_constant: tau must be positive");
  const double ratio = tau / dt;
  const int steps = static_cast<int>(std::round(ratio));
  if (steps < 1 || std::abs(ratio - steps) > 1e-9 * ratio) {
    throw ConfigError("finite_time_constant: tau = " + format_double(tau) +
                      " is not a multiple of dt = " + format_double(dt));
  }
  const int n = sys.dim();
  const int p = sys.inputs();
  const int m = grid.m;
  const int nodes = steps + 1;
  const int rows = n * (m + 2);
  CMatrix map = CMatrix::Zero(rows, static_cast<Eigen::Index>(nodes) * p);

  // From zero data the scheme is exactly shift-invariant in time, so two
  // simulations per input direction cover every hat: the half hat at s = 0
  // and the full hat centered at s = dt. The hat centered at node i ≥ 1 is
  // the latter delayed by (i − 1)·dt; the final half hat at s = τ reaches τ
  // having seen only the rising ramp, i.e. the full hat's state at time dt.
  const LiftedState zero = LiftedState::zero(n, m);
  for (int d = 0; d < p; ++d) {
    InputSignal first{CMatrix::Zero(steps + 1, p)};
    first.samples(0, d) = 1.0;
    InputSignal hat{CMatrix::Zero(steps + 1, p)};
    hat.samples(1, d) = 1.0;
    const Trajectory y0 = simulate_steps(sys, zero, first, tau, grid);
    const Trajectory y1 = simulate_steps(sys, zero, hat, tau, grid);
    map.col(d) = y0.state(tau, m).coordinates();
    for (int i = 1; i < nodes; ++i) {
      const double t = i == nodes - 1 ? dt : tau - (i - 1) * dt;
      map.col(static_cast<Eigen::Index>(i) * p + d) = y1.state(t, m).coordinates();
    }
  }

  std::vector<double> in_w(static_cast<std::size_t>(nodes) * p, dt);
  for (int d = 0; d < p; ++d) {
    in_w[d] *= 0.5;
    in_w[static_cast<std::size_t>(nodes - 1) * p + d] *= 0.5;
  }
  FiniteTimeConstant out;
  out.c_full = weighted_op_norm(map, in_w, lifted_weights(n, m));
  const std::vector<double> head_w(n, 1.0);
  out.c_head = weighted_op_norm(CMatrix(map.topRows(n)), in_w, head_w);
  return out;
}

void write_sweep_csv(std::ostream& os, const std::vector<ResolventSample>& samples) {
  os << "re_lambda,im_lambda,norm,weighted,method\n";
  for (const auto& s : samples) {
    os << format_double(s.lambda.real()) << ',' << format_double(s.lambda.imag()) << ','
       << format_double(s.norm) << ',' << format_double(s.weighted) << ',' << to_string(s.method)
       << '\n';
  }
}

Json weiss_summary_json(const WeissResult& r) {
  Json j = Json::object();
  j["C_est"] = r.c_est;
  j["argmax_lambda"] = complex_to_json(r.argmax);
  j["omega_ref"] = r.omega_ref;
  Json g = Json::object();
  g["delta"] = r.region.delta;
  g["reach"] = r.region.reach;
  g["im_max"] = r.region.im_max;
  g["re_count"] = r.region.re_points.size();
  g["im_count"] = r.region.im_points.size();
  j["grid"] = std::move(g);
  Json skipped = Json::array();
  for (const cplx& z : r.skipped) skipped.push_back(complex_to_json(z));
  j["skipped"] = std::move(skipped);
  return j;
}

}  // namespace delayadm
