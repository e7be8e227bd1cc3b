#pragma once

// Finite-time admissibility of the control operator: the resolvent norm
// ‖(λ − 𝒜)⁻¹ℬ‖ in closed form and on the discretized generator, the Weiss
// sweep over a right half-plane, and the input-to-state constant c(τ).

#include <iosfwd>
#include <vector>

#include "delayadm/adjoint.hpp"
#include "delayadm/io.hpp"
#include "delayadm/semigroup.hpp"

namespace delayadm {

struct ResolventSample {
  enum class Method { analytic, discrete };

  cplx lambda;
  double norm = 0.0;
  /// √(Re λ − ω)·norm.
  double weighted = 0.0;
  Method method = Method::analytic;
};

const char* to_string(ResolventSample::Method m);

struct SweepRegion {
  std::vector<double> re_points;
  std::vector<double> im_points;
  double delta = 1e-3;
  double reach = 1e3;
  double im_max = 50.0;

  /// Re λ log-spaced over [ω + δ, ω + reach] with `re_count` points, Im λ on
  /// a symmetric linear grid of `im_count` points (odd counts include 0).
  static SweepRegion make(double omega, double delta = 1e-3, double reach = 1e3,
                          double im_max = 50.0, int re_count = 60, int im_count = 41);
};

/// Δ(λ) = λI − A − Σ_k A_k e^{−λ h_k}.
CMatrix characteristic_matrix(const DelaySystem& sys, cplx lambda);

/// σ_max(Δ(λ)⁻¹B)·√(1 + κ) with κ = (1 − e^{−2 Re λ})/(2 Re λ). Requires
/// Re λ > max(0, ω). Throws SingularityError (carrying λ) at a
/// characteristic root.
ResolventSample resolvent_norm_analytic(const DelaySystem& sys, cplx lambda, double omega_ref);

/// Same quantity from (λ − 𝒜_h)⁻¹(B; 0) on the discretized generator, with
/// the image measured in the generator metric.
ResolventSample resolvent_norm_discrete(const DelaySystem& sys, cplx lambda, const GridSpec& grid,
                                        double omega_ref);
ResolventSample resolvent_norm_discrete(const DelaySystem& sys, const DiscreteGenerator& gen,
                                        cplx lambda, double omega_ref);

struct WeissResult {
  double c_est = 0.0;
  cplx argmax;
  double omega_ref = 0.0;
  SweepRegion region;
  /// Grid samples in row order (Re outer, Im inner), then the refinement
  /// evaluations.
  std::vector<ResolventSample> samples;
  /// Grid points skipped because Δ(λ) was singular there.
  std::vector<cplx> skipped;
};

/// Max of the weighted analytic resolvent norm over the region grid,
/// followed by golden-section refinement along Re λ and then Im λ around the
/// grid maximizer.
WeissResult weiss_constant(const DelaySystem& sys, double omega_ref, const SweepRegion& region);

struct FiniteTimeConstant {
  double c_full = 0.0;
  double c_head = 0.0;
};

/// Norm of u ↦ ∫_0^τ T(τ − s)ℬu(s) ds from L²(0, τ; U) (nodal hats on the
/// time grid, lumped trapezoid metric) into the lifted space, and into X
/// alone. τ must be a positive multiple of the time step.
FiniteTimeConstant finite_time_constant(const DelaySystem& sys, double tau, const GridSpec& grid);

/// Columns re_lambda, im_lambda, norm, weighted, method.
void write_sweep_csv(std::ostream& os, const std::vector<ResolventSample>& samples);
/// {C_est, argmax_lambda, omega_ref, grid, skipped}.
Json weiss_summary_json(const WeissResult& r);

}  // namespace delayadm
