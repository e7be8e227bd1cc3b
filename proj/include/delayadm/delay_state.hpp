#pragma once

// The lifted state space X × L²([-1,0], X) on a uniform history grid.
//
// A history segment stores m+1 nodal values at σ_j = -1 + j/m. Integrals over
// the window use the composite trapezoid rule, point values between nodes use
// linear interpolation.

#include <vector>

#include "delayadm/numkernel.hpp"

namespace delayadm {

/// History and time discretization. `dt` must divide the history spacing 1/m;
/// zero selects the default 1/(2m).
struct GridSpec {
  int m = 200;
  double dt = 0.0;

  double step() const { return dt > 0.0 ? dt : 0.5 / m; }
  /// Number of time steps per history cell; throws ConfigError unless integral.
  int steps_per_cell() const;
  void validate() const;
  GridSpec refined(int factor = 2) const;
};

/// Trapezoid weights (1/m)·(1/2, 1, ..., 1, 1/2) on m+1 nodes.
std::vector<double> trapezoid_weights(int m);

class HistorySegment {
public:
  HistorySegment() = default;
  /// Zero history of dimension `dim` on m+1 nodes.
  HistorySegment(int m, int dim);
  /// Rows of `values` are the nodal states, node 0 at σ = -1.
  HistorySegment(int m, CMatrix values);

  int m() const { return m_; }
  int dim() const { return static_cast<int>(values_.cols()); }
  double node(int j) const { return -1.0 + static_cast<double>(j) / m_; }

  const CMatrix& values() const { return values_; }
  CMatrix& values() { return values_; }
  CVector at_node(int j) const { return values_.row(j).transpose(); }
  void set_node(int j, const CVector& v) { values_.row(j) = v.transpose(); }

  /// Linear interpolation at σ ∈ [-1, 0].
  CVector evaluate(double sigma) const;

private:
  int m_ = 0;
  CMatrix values_;
};

struct LiftedState {
  CVector head;
  HistorySegment tail;

  LiftedState() = default;
  LiftedState(CVector h, HistorySegment f);

  int dim() const { return static_cast<int>(head.size()); }
  int m() const { return tail.m(); }

  /// Constant history f ≡ x, which lies in the generator domain.
  static LiftedState constant(const CVector& x, int m);
  static LiftedState zero(int dim, int m);

  /// Coordinates (head, node 0, ..., node m), length dim·(m+2).
  CVector coordinates() const;
  static LiftedState from_coordinates(const CVector& c, int dim, int m);

  LiftedState& operator+=(const LiftedState& o);
  LiftedState& operator-=(const LiftedState& o);
  LiftedState& operator*=(cplx s);
};

LiftedState operator+(LiftedState a, const LiftedState& b);
LiftedState operator-(LiftedState a, const LiftedState& b);
LiftedState operator*(cplx s, LiftedState a);

/// ⟨x,y⟩_X + trapezoid ∫⟨f,g⟩; conjugate-linear in the second argument.
cplx inner(const LiftedState& v, const LiftedState& w);
double lifted_norm(const LiftedState& v);

/// Metric weights of the coordinates returned by LiftedState::coordinates().
std::vector<double> lifted_weights(int dim, int m);

/// ‖f(0) − x‖ ≤ tol·(1 + ‖x‖).
bool is_in_domain(const LiftedState& v, double tol = 1e-8);

/// Samples z(t_j) at t_j = -1 + j·dt covering [-1, T], plus the input record
/// used to produce them (rows at t = 0, dt, ...; empty for zero input).
struct Trajectory {
  double dt = 0.0;
  CMatrix samples;
  CMatrix input;

  int dim() const { return static_cast<int>(samples.cols()); }
  int count() const { return static_cast<int>(samples.rows()); }
  double time(int j) const { return -1.0 + j * dt; }
  double end_time() const { return time(count() - 1); }
  /// Linear interpolation in time; throws RangeError outside [-1, T].
  CVector at(double t) const;
  /// History segment z_t sampled on the m-node grid.
  HistorySegment history(double t, int m) const;
  /// (z(t), z_t).
  LiftedState state(double t, int m) const;
};

/// ‖(h_z(t+dt) − h_z(t))/dt − d/dσ z_t‖ in L², with centered differences in
/// the interior of the history grid and one-sided differences at the ends.
double history_shift_defect(const Trajectory& traj, int m, double t, double dt);

}  // namespace delayadm
