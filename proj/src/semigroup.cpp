#include "delayadm/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include <Eigen/SparseCore>

#include "delayadm/error.hpp"
#include "delayadm/io.hpp"

namespace delayadm {

DelaySystem::DelaySystem(CMatrix a, std::vector<Delay> delays, CMatrix b)
    : a_(std::move(a)), delays_(std::move(delays)), b_(std::move(b)) {
  require_square(a_, "system matrix A");
  require_finite(a_, "system matrix A");
  const Eigen::Index n = a_.rows();
  if (delays_.empty()) throw DimensionError("delay system: at least one delay term is required");
  for (const auto& d : delays_) {
    if (d.matrix.rows() != n || d.matrix.cols() != n) {
      throw DimensionError("delay system: delay matrix must be " + std::to_string(n) + "x" +
                           std::to_string(n));
    }
    require_finite(d.matrix, "delay matrix");
    if (!(d.lag > 0.0) || d.lag > 1.0) {
      throw ConfigError("delay system: lag " + std::to_string(d.lag) + " outside (0, 1]");
    }
  }
  std::stable_sort(delays_.begin(), delays_.end(),
                   [](const Delay& x, const Delay& y) { return x.lag < y.lag; });
  if (b_.size() == 0) b_ = CMatrix::Zero(n, 1);
  if (b_.rows() != n) {
    throw DimensionError("delay system: B must have " + std::to_string(n) + " rows, got " +
                         std::to_string(b_.rows()));
  }
  require_finite(b_, "control operator B");
  omega0_ = numerical_abscissa(a_);
}

DelaySystem DelaySystem::single(CMatrix a, CMatrix a1, CMatrix b) {
  return DelaySystem(std::move(a), {Delay{std::move(a1), 1.0}}, std::move(b));
}

void DelaySystem::require_contraction(const char* what) const {
  if (!contraction_certified()) {
    throw DomainError(std::string(what) + ": contraction certificate failed (omega0 = " +
                      format_double(omega0_) + ")");
  }
}

DelaySystem DelaySystem::scaled_delays(double s) const {
  std::vector<Delay> d = delays_;
  for (auto& x : d) x.matrix *= s;
  return DelaySystem(a_, std::move(d), b_);
}

DelaySystem DelaySystem::with_input(CMatrix b) const { return DelaySystem(a_, delays_, std::move(b)); }

namespace {

// Matrix-vector product that switches to a sparse representation for the
// large, mostly empty operators produced by PDE discretizations.
class LinearMap {
public:
  explicit LinearMap(const CMatrix& m) {
    if (m.rows() > 32) {
      sparse_ = m.sparseView();
      use_sparse_ = true;
      zero_ = sparse_.nonZeros() == 0;
    } else {
      dense_ = m;
      zero_ = m.isZero(0.0);
    }
  }
  bool zero() const { return zero_; }
  void apply_add(const CVector& x, cplx scale, CVector& out) const {
    if (zero_) return;
    if (use_sparse_) {
      out.noalias() += scale * (sparse_ * x);
    } else {
      out.noalias() += scale * (dense_ * x);
    }
  }

private:
  CMatrix dense_;
  Eigen::SparseMatrix<cplx, Eigen::RowMajor> sparse_;
  bool use_sparse_ = false;
  bool zero_ = false;
};

// RK4 on the delay equation. Time is measured in steps of dt; the history
// interpolant covers negative times and computed samples cover t ≥ 0.
class DelayIntegrator {
public:
  DelayIntegrator(const DelaySystem& sys, const GridSpec& grid)
      : sys_(sys), a_(sys.a()), b_(sys.b()), dt_(grid.step()) {
    grid.validate();
    for (const auto& d : sys.delays()) {
      if (d.lag < dt_ * (1.0 - 1e-9)) {
        throw ConfigError("simulate: lag " + format_double(d.lag) + " is shorter than dt = " +
                          format_double(dt_));
      }
      delays_.emplace_back(d.matrix);
      lag_steps_.push_back(d.lag / dt_);
    }
  }

  double dt() const { return dt_; }

  // Integrates `steps` steps; row k of the result is z(k·dt).
  CMatrix run(const LiftedState& v0, const InputSignal& u, int steps) const {
    const int n = sys_.dim();
    if (v0.dim() != n) throw DimensionError("simulate: initial state dimension mismatch");
    hist_m_ = v0.m();
    spc_ = GridSpec{hist_m_, dt_}.steps_per_cell();
    if (!u.empty()) {
      if (u.samples.cols() != sys_.inputs()) throw DimensionError("simulate: input has wrong width");
      if (u.samples.rows() < steps + 1) {
        throw ConfigError("simulate: input record has " + std::to_string(u.samples.rows()) +
                          " samples, need " + std::to_string(steps + 1));
      }
    }
    v0_ = &v0;
    samples_ = CMatrix::Zero(steps + 1, n);
    samples_.row(0) = v0.head.transpose();
    const bool forced = !u.empty() && !b_.isZero(0.0);

    CVector z(n), k1(n), k2(n), k3(n), k4(n), tmp(n), lookup(n), uval;
    for (int s = 0; s < steps; ++s) {
      z = samples_.row(s).transpose();
      rhs(s, 0.0, z, forced ? &u : nullptr, lookup, uval, k1);
      tmp = z + (0.5 * dt_) * k1;
      rhs(s, 0.5, tmp, forced ? &u : nullptr, lookup, uval, k2);
      tmp = z + (0.5 * dt_) * k2;
      rhs(s, 0.5, tmp, forced ? &u : nullptr, lookup, uval, k3);
      tmp = z + dt_ * k3;
      rhs(s, 1.0, tmp, forced ? &u : nullptr, lookup, uval, k4);
      samples_.row(s + 1) = (z + (dt_ / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).transpose();
    }
    CMatrix out = std::move(samples_);
    samples_ = CMatrix();
    v0_ = nullptr;
    return out;
  }

  // z at time q·dt using the history interpolant for q < 0 and the given
  // samples (rows k·dt) for q ≥ 0.
  static void value_at(double q, const LiftedState& v0, int spc, const CMatrix& samples,
                       CVector& out) {
    const double qr = std::round(q);
    if (std::abs(q - qr) < 1e-9) q = qr;
    if (q >= 0.0) {
      const int j = static_cast<int>(q);
      const double frac = q - j;
      if (frac == 0.0 || j + 1 >= samples.rows()) {
        out = samples.row(std::min<Eigen::Index>(j, samples.rows() - 1)).transpose();
      } else {
        out = ((1.0 - frac) * samples.row(j) + frac * samples.row(j + 1)).transpose();
      }
      return;
    }
    const int m = v0.m();
    double pos = m + q / spc;
    pos = std::max(pos, 0.0);
    const int j = std::min(static_cast<int>(pos), m - 1);
    const double frac = pos - j;
    const auto node = [&](int k) -> CVector {
      return k == m ? CVector(v0.head) : CVector(v0.tail.values().row(k).transpose());
    };
    if (frac == 0.0) {
      out = node(j);
    } else {
      out = (1.0 - frac) * node(j) + frac * node(j + 1);
    }
  }

private:
  void rhs(int s, double c, const CVector& z, const InputSignal* u, CVector& lookup, CVector& uval,
           CVector& out) const {
    out.setZero();
    a_.apply_add(z, 1.0, out);
    const double tau = s + c;
    for (std::size_t k = 0; k < delays_.size(); ++k) {
      if (delays_[k].zero()) continue;
      value_at(tau - lag_steps_[k], *v0_, spc_, samples_, lookup);
      delays_[k].apply_add(lookup, 1.0, out);
    }
    if (u != nullptr) {
      if (c == 0.0) {
        uval = u->samples.row(s).transpose();
      } else if (c == 1.0) {
        uval = u->samples.row(s + 1).transpose();
      } else {
        uval = 0.5 * (u->samples.row(s) + u->samples.row(s + 1)).transpose();
      }
      out.noalias() += b_ * uval;
    }
  }

  const DelaySystem& sys_;
  LinearMap a_;
  CMatrix b_;
  double dt_;
  std::vector<LinearMap> delays_;
  std::vector<double> lag_steps_;
  mutable int hist_m_ = 0;
  mutable int spc_ = 1;
  mutable const LiftedState* v0_ = nullptr;
  mutable CMatrix samples_;
};

int steps_for(double t, double dt) {
  if (!(t >= 0.0)) throw RangeError("negative time " + std::to_string(t));
  return static_cast<int>(std::ceil(t / dt - 1e-9));
}

// Lifted state at time t from the computed samples.
LiftedState read_state(const LiftedState& v0, int spc, const CMatrix& samples, double t, double dt,
                       int m_out) {
  const int n = v0.dim();
  CVector head(n);
  DelayIntegrator::value_at(t / dt, v0, spc, samples, head);
  HistorySegment tail(m_out, n);
  CVector tmp(n);
  for (int j = 0; j <= m_out; ++j) {
    DelayIntegrator::value_at((t + tail.node(j)) / dt, v0, spc, samples, tmp);
    tail.set_node(j, tmp);
  }
  return LiftedState(std::move(head), std::move(tail));
}

}  // namespace

Trajectory simulate_steps(const DelaySystem& sys, const LiftedState& v0, const InputSignal& u,
                          double t_end, const GridSpec& grid) {
  if (!(t_end > 0.0)) throw RangeError("simulate: T_end must be positive");
  DelayIntegrator integ(sys, grid);
  const double dt = integ.dt();
  const int spc = GridSpec{v0.m(), dt}.steps_per_cell();
  const int steps = steps_for(t_end, dt);
  const CMatrix forward = integ.run(v0, u, steps);

  const int back = spc * v0.m();
  Trajectory traj;
  traj.dt = dt;
  traj.samples.resize(back + steps + 1, sys.dim());
  CVector tmp(sys.dim());
  for (int i = 0; i < back; ++i) {
    DelayIntegrator::value_at(static_cast<double>(i - back), v0, spc, forward, tmp);
    traj.samples.row(i) = tmp.transpose();
  }
  traj.samples.bottomRows(steps + 1) = forward;
  if (!u.empty()) traj.input = u.samples.topRows(steps + 1);
  return traj;
}

LiftedState apply_T0(const DelaySystem& sys, double t, const LiftedState& v) {
  if (!(t >= 0.0)) throw RangeError("apply_T0: t must be nonnegative");
  if (v.dim() != sys.dim()) throw DimensionError("apply_T0: state dimension mismatch");
  if (t == 0.0) return v;
  const int m = v.m();
  LiftedState out(expm(sys.a(), t) * v.head, HistorySegment(m, v.dim()));
  for (int j = 0; j <= m; ++j) {
    const double tau = v.tail.node(j);
    if (tau > -t) {
      out.tail.set_node(j, expm(sys.a(), tau + t) * v.head);
    } else if (tau + t >= -1.0 && tau + t <= 0.0) {
      out.tail.set_node(j, v.tail.evaluate(std::min(tau + t, 0.0)));
    }
  }
  return out;
}

namespace {

// Value of the unperturbed tail (T0(τ)v)(σ).
CVector t0_tail_at(const DelaySystem& sys, double tau, const LiftedState& v, double sigma) {
  const double s = sigma + tau;
  if (s > 0.0) return expm(sys.a(), s) * v.head;
  return v.tail.evaluate(std::max(s, -1.0));
}

enum class Side { left, right, average };

// G(τ) = Σ_k A_k e^{(τ−h_k)A} [τ > h_k]: the head response of the delay
// operator applied to T0(τ)(y, 0).
CMatrix delay_kernel(const DelaySystem& sys, double tau, Side side) {
  const int n = sys.dim();
  CMatrix g = CMatrix::Zero(n, n);
  for (const auto& d : sys.delays()) {
    const double gap = tau - d.lag;
    double weight = 0.0;
    if (gap > 1e-12) {
      weight = 1.0;
    } else if (gap >= -1e-12) {
      weight = side == Side::right ? 1.0 : (side == Side::average ? 0.5 : 0.0);
    }
    if (weight != 0.0) g += weight * d.matrix * expm(sys.a(), std::max(gap, 0.0));
  }
  return g;
}

double trap_weight(int l, int lo, int hi) { return (l == lo || l == hi) ? 0.5 : 1.0; }

}  // namespace

LiftedState apply_T_volterra(const DelaySystem& sys, double t, const LiftedState& v,
                             const GridSpec& grid, const VolterraOptions& opts) {
  if (!(t >= 0.0) || t > 1.0 + 1e-12) throw RangeError("apply_T_volterra: t must lie in [0, 1]");
  if (v.dim() != sys.dim()) throw DimensionError("apply_T_volterra: state dimension mismatch");
  if (t == 0.0) return v;
  const int n = sys.dim();
  const int m = v.m();
  const int steps = std::max(1, steps_for(t, grid.step()));
  const double ds = t / steps;

  // Kernels on the quadrature grid s_i = i·ds.
  std::vector<CMatrix> exp_a(steps + 1);
  std::vector<CMatrix> kernel_avg(steps + 1), kernel_left(steps + 1);
  for (int i = 0; i <= steps; ++i) {
    exp_a[i] = expm(sys.a(), i * ds);
    kernel_avg[i] = delay_kernel(sys, i * ds, Side::average);
    kernel_left[i] = delay_kernel(sys, i * ds, Side::left);
  }
  // g(τ) = Ψ(tail of T0(τ)v).
  std::vector<CVector> g(steps + 1);
  for (int i = 0; i <= steps; ++i) {
    g[i] = CVector::Zero(n);
    for (const auto& d : sys.delays()) g[i] += d.matrix * t0_tail_at(sys, i * ds, v, -d.lag);
  }

  const LiftedState base = apply_T0(sys, t, v);
  // P(s): head of S(s) restricted to head-only states; starts at e^{sA}.
  std::vector<CMatrix> head_map = exp_a;

  const auto head_map_at = [&](double s) -> CMatrix {
    const double pos = std::clamp(s / ds, 0.0, static_cast<double>(steps));
    const int j = std::min(static_cast<int>(pos), steps - 1);
    const double frac = pos - j;
    if (frac < 1e-12) return head_map[j];
    if (frac > 1.0 - 1e-12) return head_map[j + 1];
    return (1.0 - frac) * head_map[j] + frac * head_map[j + 1];
  };

  const auto assemble_output = [&]() {
    LiftedState out = base;
    for (int l = 0; l <= steps; ++l) {
      out.head += (ds * trap_weight(l, 0, steps)) * (head_map[l] * g[steps - l]);
    }
    for (int j = 0; j <= m; ++j) {
      const double sigma = out.tail.node(j);
      if (sigma + t <= 0.0) continue;
      // ∫_{max(0,-σ)}^{t} P(s+σ) g(t−s) ds on the grid; the lower limit is
      // snapped to the grid when σ is a grid point.
      const double lower = std::max(0.0, -sigma);
      const double lpos = lower / ds;
      int lo = static_cast<int>(std::ceil(lpos - 1e-9));
      CVector acc = CVector::Zero(n);
      if (lo < steps) {
        for (int l = lo; l <= steps; ++l) {
          acc += (ds * trap_weight(l, lo, steps)) * (head_map_at(l * ds + sigma) * g[steps - l]);
        }
        // Partial cell between the true lower limit and the first grid point.
        const double gap = lo * ds - lower;
        if (gap > 1e-14) {
          acc += (0.5 * gap) * (head_map_at(lower + sigma) * g[steps - lo] +
                                head_map_at(lo * ds + sigma) * g[steps - lo]);
        }
      }
      out.tail.values().row(j) += acc.transpose();
    }
    return out;
  };

  LiftedState current = base;
  double defect = 0.0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    LiftedState next = assemble_output();
    defect = lifted_norm(next - current);
    current = std::move(next);
    if (defect <= opts.tol) return current;

    std::vector<CMatrix> updated(steps + 1);
    for (int i = 0; i <= steps; ++i) {
      CMatrix acc = exp_a[i];
      for (int l = 0; l <= i && i > 0; ++l) {
        const CMatrix& k = (l == 0) ? kernel_left[i] : kernel_avg[i - l];
        if (l == i) continue;  // G(0+) = 0 since every lag is positive
        acc += (ds * trap_weight(l, 0, i)) * (head_map[l] * k);
      }
      updated[i] = std::move(acc);
    }
    head_map = std::move(updated);
  }
  throw ConvergenceError("apply_T_volterra: no convergence after " +
                             std::to_string(opts.max_iterations) + " iterations (last defect " +
                             format_double(defect) + ")",
                         defect);
}

LiftedState apply_T_volterra_composed(const DelaySystem& sys, double t, const LiftedState& v,
                                      const GridSpec& grid, const VolterraOptions& opts) {
  if (!(t >= 0.0)) throw RangeError("apply_T_volterra_composed: t must be nonnegative");
  LiftedState state = v;
  double remaining = t;
  while (remaining > 1e-12) {
    const double piece = std::min(1.0, remaining);
    state = apply_T_volterra(sys, piece, state, grid, opts);
    remaining -= piece;
  }
  return state;
}

namespace {

// Sparse coordinates of the state at time t for an initial state whose
// history interpolant is supported on the cells touching node `support`.
// Nodes whose look-back position misses that support are skipped.
void append_image(const LiftedState& v0, int support, int spc, const CMatrix& samples, double t,
                  double dt, SparseColumn& col) {
  const int n = v0.dim();
  const int m = v0.m();
  CVector value(n);
  const auto emit = [&](int row0) {
    for (int i = 0; i < n; ++i) {
      if (value(i) != cplx{}) col.emplace_back(row0 + i, value(i));
    }
  };
  DelayIntegrator::value_at(t / dt, v0, spc, samples, value);
  emit(0);
  const double shift = t * m;
  const int first_live = std::max(0, static_cast<int>(std::ceil(m - shift - 1e-9)));
  const int lo = std::max(0, static_cast<int>(std::floor(support - 1 - shift)));
  const int hi = std::min(first_live - 1, static_cast<int>(std::ceil(support + 1 - shift)));
  const auto visit = [&](int j) {
    DelayIntegrator::value_at((t - 1.0 + static_cast<double>(j) / m) / dt, v0, spc, samples, value);
    emit(n * (j + 1));
  };
  for (int j = lo; j <= hi; ++j) visit(j);
  for (int j = std::min(first_live, m + 1); j <= m; ++j) visit(j);
}

struct ColumnImages {
  std::vector<std::vector<SparseColumn>> per_time;  // [time][column]
  std::vector<double> in_weights;
  std::vector<double> out_weights;
};

ColumnImages propagate_basis(const DelaySystem& sys, std::span<const double> ts,
                             const GridSpec& grid, Basis basis) {
  grid.validate();
  const int n = sys.dim();
  const int m = grid.m;
  const double tmax = ts.empty() ? 0.0 : *std::max_element(ts.begin(), ts.end());
  DelayIntegrator integ(sys, grid);
  const double dt = integ.dt();
  const int spc = grid.steps_per_cell();
  const int steps = steps_for(tmax, dt);

  ColumnImages out;
  out.out_weights = lifted_weights(n, m);
  const auto wt = trapezoid_weights(m);
  const int cols = basis == Basis::full ? n * (m + 2) : n * (m + 1);
  out.in_weights.resize(cols);
  out.per_time.assign(ts.size(), std::vector<SparseColumn>(cols));

  LiftedState v0 = LiftedState::zero(n, m);
  for (int c = 0; c < cols; ++c) {
    // Set up basis state c.
    v0.head.setZero();
    v0.tail.values().setZero();
    if (c < n) {
      v0.head(c) = 1.0;
      if (basis == Basis::compatible) v0.tail.values()(m, c) = 1.0;
      out.in_weights[c] = basis == Basis::full ? 1.0 : 1.0 + wt[m];
    } else {
      const int node = (c - n) / n;
      const int comp = (c - n) % n;
      v0.tail.values()(node, comp) = 1.0;
      out.in_weights[c] = wt[node];
    }
    // Nonzero nodes of the history interpolant, node m standing for the head.
    const int support = c < n ? m : (c - n) / n;
    const CMatrix samples = steps > 0 ? integ.run(v0, InputSignal{}, steps) : CMatrix(v0.head.transpose());
    for (std::size_t k = 0; k < ts.size(); ++k) {
      SparseColumn& col = out.per_time[k][c];
      if (ts[k] == 0.0) {
        const CVector coords = v0.coordinates();
        for (Eigen::Index i = 0; i < coords.size(); ++i) {
          if (basis == Basis::full ? i == c : coords(i) != cplx{}) col.emplace_back(static_cast<int>(i), coords(i));
        }
        continue;
      }
      append_image(v0, support, spc, samples, ts[k], dt, col);
    }
  }
  return out;
}

}  // namespace

CMatrix assemble_T_matrix(const DelaySystem& sys, double t, const GridSpec& grid) {
  const double ts[1] = {t};
  const ColumnImages img = propagate_basis(sys, ts, grid, Basis::full);
  const int size = static_cast<int>(img.out_weights.size());
  CMatrix out = CMatrix::Zero(size, size);
  for (int c = 0; c < size; ++c) {
    for (const auto& [i, v] : img.per_time[0][c]) out(i, c) = v;
  }
  return out;
}

std::vector<double> semigroup_norms(const DelaySystem& sys, std::span<const double> ts,
                                    const GridSpec& grid, Basis basis) {
  const ColumnImages img = propagate_basis(sys, ts, grid, basis);
  std::vector<double> out;
  out.reserve(ts.size());
  for (std::size_t k = 0; k < ts.size(); ++k) {
    out.push_back(weighted_op_norm(img.per_time[k], img.in_weights, img.out_weights));
  }
  return out;
}

double semigroup_norm(const DelaySystem& sys, double t, const GridSpec& grid, Basis basis) {
  const double ts[1] = {t};
  return semigroup_norms(sys, ts, grid, basis).front();
}

double semigroup_defect(const DelaySystem& sys, double t, double s, const GridSpec& grid) {
  if (!(t >= 0.0) || !(s >= 0.0)) throw RangeError("semigroup_defect: times must be nonnegative");
  grid.validate();
  const int n = sys.dim();
  const int m = grid.m;
  DelayIntegrator integ(sys, grid);
  const double dt = integ.dt();
  const int spc = grid.steps_per_cell();
  const auto propagate = [&](const LiftedState& v, double time) -> LiftedState {
    if (time == 0.0) return v;
    const CMatrix samples = integ.run(v, InputSignal{}, steps_for(time, dt));
    return read_state(v, spc, samples, time, dt, m);
  };

  const int cols = n * (m + 2);
  const auto wt = lifted_weights(n, m);
  double worst = 0.0;
  LiftedState v = LiftedState::zero(n, m);
  for (int c = 0; c < cols; ++c) {
    CVector coords = CVector::Zero(cols);
    coords(c) = 1.0;
    v = LiftedState::from_coordinates(coords, n, m);
    const LiftedState direct = propagate(v, t + s);
    const LiftedState composed = propagate(propagate(v, s), t);
    worst = std::max(worst, lifted_norm(direct - composed) / std::sqrt(wt[c]));
  }
  return worst;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t";
  for (int i = 1; i <= traj.dim(); ++i) os << ",re(z_" << i << "),im(z_" << i << ")";
  os << '\n';
  for (int j = 0; j < traj.count(); ++j) {
    os << format_double(traj.time(j));
    for (int i = 0; i < traj.dim(); ++i) {
      os << ',' << format_double(traj.samples(j, i).real()) << ','
         << format_double(traj.samples(j, i).imag());
    }
    os << '\n';
  }
}

}  // namespace delayadm
