#pragma once

// The retarded system ż = Az + Σ_k A_k z(t − h_k) + Bu and its delay
// semigroup on the lifted space.
//
// Two independent routes to T(t):
//   * simulate_steps: RK4 on the delay equation, delayed values interpolated
//     from the stored trajectory;
//   * apply_T_volterra: Picard iteration on the Volterra form
//     S(t)v = T0(t)v + ∫ S(s) A_Ψ T0(t−s) v ds, built on the closed-form T0.

#include <iosfwd>
#include <span>
#include <vector>

#include "delayadm/delay_state.hpp"
#include "delayadm/numkernel.hpp"

namespace delayadm {

struct Delay {
  CMatrix matrix;
  double lag = 1.0;
};

class DelaySystem {
public:
  /// Delays are sorted by lag; every lag must lie in (0, 1]. omega0 is
  /// computed as max eig((A + A*)/2).
  DelaySystem(CMatrix a, std::vector<Delay> delays, CMatrix b);

  /// Single delay (A1, 1).
  static DelaySystem single(CMatrix a, CMatrix a1, CMatrix b);

  int dim() const { return static_cast<int>(a_.rows()); }
  int inputs() const { return static_cast<int>(b_.cols()); }
  const CMatrix& a() const { return a_; }
  const CMatrix& b() const { return b_; }
  const std::vector<Delay>& delays() const { return delays_; }
  double omega0() const { return omega0_; }
  bool contraction_certified() const { return omega0_ <= kContractionTol; }
  /// Throws DomainError naming omega0 unless contraction-certified.
  void require_contraction(const char* what) const;
  bool single_unit_delay() const { return delays_.size() == 1 && delays_.front().lag == 1.0; }

  /// Same A and B, every delay matrix multiplied by `s` (zero gives the
  /// unperturbed system).
  DelaySystem scaled_delays(double s) const;
  DelaySystem unperturbed() const { return scaled_delays(0.0); }
  DelaySystem with_input(CMatrix b) const;

  static constexpr double kContractionTol = 1e-10;

private:
  CMatrix a_;
  std::vector<Delay> delays_;
  CMatrix b_;
  double omega0_ = 0.0;
};

/// Input samples u(t_j) at t_j = j·dt, one row per time; empty means u ≡ 0.
/// Values between samples are linearly interpolated.
struct InputSignal {
  CMatrix samples;
  bool empty() const { return samples.size() == 0; }
};

/// RK4 integration of the delay equation from (z(0), z|[-1,0]) = (x, f).
/// The stored history is the piecewise-linear interpolant of
/// (f_0, ..., f_{m-1}, x), so the nodal value f(0) is superseded by x.
Trajectory simulate_steps(const DelaySystem& sys, const LiftedState& v0, const InputSignal& u,
                          double t_end, const GridSpec& grid);

/// Closed-form unperturbed semigroup T0(t) = [T(t) 0; S_t S_0(t)].
LiftedState apply_T0(const DelaySystem& sys, double t, const LiftedState& v);

struct VolterraOptions {
  double tol = 1e-10;
  int max_iterations = 50;
};

/// Picard iteration for the perturbed semigroup on t ∈ [0, 1]; quadrature
/// step is grid.step(). Throws ConvergenceError after max_iterations.
LiftedState apply_T_volterra(const DelaySystem& sys, double t, const LiftedState& v,
                             const GridSpec& grid, const VolterraOptions& opts = {});

/// Extends apply_T_volterra to t > 1 by composing unit-length pieces.
LiftedState apply_T_volterra_composed(const DelaySystem& sys, double t, const LiftedState& v,
                                      const GridSpec& grid, const VolterraOptions& opts = {});

/// Which initial states span the discrete lifted space.
enum class Basis {
  /// Head coordinates plus every nodal tail value: dim·(m+2) states.
  full,
  /// The compatibility subspace f(0) = x: head coordinates (with node m
  /// tied to them) plus nodes 0..m-1, dim·(m+1) states.
  compatible,
};

/// T(t) in the coordinates of LiftedState::coordinates(); columns are
/// simulate_steps images of the full basis. T(0) is the identity.
CMatrix assemble_T_matrix(const DelaySystem& sys, double t, const GridSpec& grid);

/// ‖T(t)‖ on the discrete lifted space for every t in `ts`, one integration
/// per basis state. Coordinates are weighted by the quadrature metric so the
/// result is the lifted-space operator norm.
std::vector<double> semigroup_norms(const DelaySystem& sys, std::span<const double> ts,
                                    const GridSpec& grid, Basis basis = Basis::full);
double semigroup_norm(const DelaySystem& sys, double t, const GridSpec& grid,
                      Basis basis = Basis::full);

/// max over basis states v of ‖T(t+s)v − T(t)T(s)v‖ / ‖v‖.
double semigroup_defect(const DelaySystem& sys, double t, double s, const GridSpec& grid);

/// CSV with header t, re(z_1), im(z_1), ...; one row per sample.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace delayadm
