#include "delayadm/delay_state.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "delayadm/error.hpp"

namespace delayadm {

int GridSpec::steps_per_cell() const {
  if (m < 1) throw ConfigError("grid: m must be a positive integer, got " + std::to_string(m));
  const double h = step();
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("grid: dt must be positive");
  const double ratio = (1.0 / m) / h;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("grid: dt = " + std::to_string(h) + " does not divide 1/m = 1/" +
                      std::to_string(m));
  }
  return static_cast<int>(rounded);
}

void GridSpec::validate() const { (void)steps_per_cell(); }

GridSpec GridSpec::refined(int factor) const {
  GridSpec g;
  g.m = m * factor;
  g.dt = dt > 0.0 ? dt / factor : 0.0;
  return g;
}

std::vector<double> trapezoid_weights(int m) {
  std::vector<double> w(static_cast<std::size_t>(m) + 1, 1.0 / m);
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

HistorySegment::HistorySegment(int m, int dim) : m_(m), values_(CMatrix::Zero(m + 1, dim)) {
  if (m < 1 || dim < 1) throw DimensionError("history segment needs m ≥ 1 and dim ≥ 1");
}

HistorySegment::HistorySegment(int m, CMatrix values) : m_(m), values_(std::move(values)) {
  if (m < 1 || values_.rows() != m + 1 || values_.cols() < 1) {
    throw DimensionError("history segment: expected " + std::to_string(m + 1) + " nodal rows, got " +
                         std::to_string(values_.rows()));
  }
  require_finite(values_, "history segment");
}

CVector HistorySegment::evaluate(double sigma) const {
  if (sigma < -1.0 - 1e-12 || sigma > 1e-12) {
    throw RangeError("history segment: σ = " + std::to_string(sigma) + " outside [-1, 0]");
  }
  const double pos = std::clamp((sigma + 1.0) * m_, 0.0, static_cast<double>(m_));
  const int j = std::min(static_cast<int>(pos), m_ - 1);
  const double frac = pos - j;
  if (frac == 0.0) return at_node(j);
  return ((1.0 - frac) * values_.row(j) + frac * values_.row(j + 1)).transpose();
}

LiftedState::LiftedState(CVector h, HistorySegment f) : head(std::move(h)), tail(std::move(f)) {
  if (head.size() != tail.dim()) {
    throw DimensionError("lifted state: head has dimension " + std::to_string(head.size()) +
                         ", tail has dimension " + std::to_string(tail.dim()));
  }
}

LiftedState LiftedState::constant(const CVector& x, int m) {
  CMatrix vals = x.transpose().replicate(m + 1, 1);
  return LiftedState(x, HistorySegment(m, std::move(vals)));
}

LiftedState LiftedState::zero(int dim, int m) {
  return LiftedState(CVector::Zero(dim), HistorySegment(m, dim));
}

CVector LiftedState::coordinates() const {
  const int n = dim();
  CVector c(static_cast<Eigen::Index>(n) * (m() + 2));
  c.head(n) = head;
  for (int j = 0; j <= m(); ++j) c.segment(static_cast<Eigen::Index>(n) * (j + 1), n) = tail.at_node(j);
  return c;
}

LiftedState LiftedState::from_coordinates(const CVector& c, int dim, int m) {
  if (c.size() != static_cast<Eigen::Index>(dim) * (m + 2)) {
    throw DimensionError("lifted state: coordinate vector has wrong length");
  }
  HistorySegment f(m, dim);
  for (int j = 0; j <= m; ++j) f.set_node(j, c.segment(static_cast<Eigen::Index>(dim) * (j + 1), dim));
  return LiftedState(c.head(dim), std::move(f));
}

namespace {

void require_compatible(const LiftedState& a, const LiftedState& b) {
  if (a.dim() != b.dim() || a.m() != b.m()) {
    throw DimensionError("lifted states live on different grids (dim " + std::to_string(a.dim()) +
                         "/" + std::to_string(b.dim()) + ", m " + std::to_string(a.m()) + "/" +
                         std::to_string(b.m()) + ")");
  }
}

}  // namespace

LiftedState& LiftedState::operator+=(const LiftedState& o) {
  require_compatible(*this, o);
  head += o.head;
  tail.values() += o.tail.values();
  return *this;
}

LiftedState& LiftedState::operator-=(const LiftedState& o) {
  require_compatible(*this, o);
  head -= o.head;
  tail.values() -= o.tail.values();
  return *this;
}

LiftedState& LiftedState::operator*=(cplx s) {
  head *= s;
  tail.values() *= s;
  return *this;
}

LiftedState operator+(LiftedState a, const LiftedState& b) { return a += b; }
LiftedState operator-(LiftedState a, const LiftedState& b) { return a -= b; }
LiftedState operator*(cplx s, LiftedState a) { return a *= s; }

cplx inner(const LiftedState& v, const LiftedState& w) {
  require_compatible(v, w);
  cplx acc = w.head.dot(v.head);  // Eigen's dot conjugates its left operand
  const auto wt = trapezoid_weights(v.m());
  for (int j = 0; j <= v.m(); ++j) {
    acc += wt[j] * w.tail.values().row(j).dot(v.tail.values().row(j));
  }
  return acc;
}

double lifted_norm(const LiftedState& v) {
  double acc = v.head.squaredNorm();
  const auto wt = trapezoid_weights(v.m());
  for (int j = 0; j <= v.m(); ++j) acc += wt[j] * v.tail.values().row(j).squaredNorm();
  return std::sqrt(acc);
}

std::vector<double> lifted_weights(int dim, int m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(dim) * (m + 2));
  out.insert(out.end(), dim, 1.0);
  for (double w : trapezoid_weights(m)) out.insert(out.end(), dim, w);
  return out;
}

bool is_in_domain(const LiftedState& v, double tol) {
  return (v.tail.at_node(v.m()) - v.head).norm() <= tol * (1.0 + v.head.norm());
}

CVector Trajectory::at(double t) const {
  const double end = end_time();
  if (t < -1.0 - 1e-12 || t > end + 1e-9 * std::max(1.0, end)) {
    throw RangeError("trajectory: t = " + std::to_string(t) + " outside [-1, " + std::to_string(end) +
                     "]");
  }
  const double pos = std::clamp((t + 1.0) / dt, 0.0, static_cast<double>(count() - 1));
  const double rounded = std::round(pos);
  if (std::abs(pos - rounded) < 1e-9) return samples.row(static_cast<Eigen::Index>(rounded)).transpose();
  const int j = std::min(static_cast<int>(pos), count() - 2);
  const double frac = pos - j;
  return ((1.0 - frac) * samples.row(j) + frac * samples.row(j + 1)).transpose();
}

HistorySegment Trajectory::history(double t, int m) const {
  HistorySegment f(m, dim());
  for (int j = 0; j <= m; ++j) f.set_node(j, at(t + f.node(j)));
  return f;
}

LiftedState Trajectory::state(double t, int m) const { return LiftedState(at(t), history(t, m)); }

double history_shift_defect(const Trajectory& traj, int m, double t, double dt) {
  if (t < 0.0 || t + dt > traj.end_time() + 1e-12 || !(dt > 0.0)) {
    throw RangeError("history_shift_defect: need 0 ≤ t < t + dt ≤ T");
  }
  const HistorySegment now = traj.history(t, m);
  const HistorySegment next = traj.history(t + dt, m);
  const auto wt = trapezoid_weights(m);
  double acc = 0.0;
  for (int j = 0; j <= m; ++j) {
    CVector d_sigma;
    if (j == 0) {
      d_sigma = (now.at_node(1) - now.at_node(0)) * static_cast<double>(m);
    } else if (j == m) {
      d_sigma = (now.at_node(m) - now.at_node(m - 1)) * static_cast<double>(m);
    } else {
      d_sigma = (now.at_node(j + 1) - now.at_node(j - 1)) * (0.5 * m);
    }
    const CVector d_t = (next.at_node(j) - now.at_node(j)) / dt;
    acc += wt[j] * (d_t - d_sigma).squaredNorm();
  }
  return std::sqrt(acc);
}

}  // namespace delayadm
