#pragma once

// Discretized lifted generator and its adjoint.
//
// Generator coordinates are (x, f_0, ..., f_{m-1}); the node f_m is fused
// with x. Adjoint coordinates are (y, g_1, ..., g_{m-1}); the end nodes g_0
// and g_m are fixed to zero. Tail derivatives use the forward (generator)
// and mirrored backward (adjoint) difference.

#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "delayadm/delay_state.hpp"
#include "delayadm/semigroup.hpp"

namespace delayadm {

struct DiscreteGenerator {
  enum class Side { generator, adjoint };

  Side side = Side::generator;
  int dim = 0;
  int m = 0;
  CMatrix matrix;
  /// Quadrature weight of every reduced coordinate.
  std::vector<double> metric;
  std::string boundary_spec;

  int size() const { return static_cast<int>(matrix.rows()); }

  /// Reduced coordinates of a full nodal state (drops the eliminated nodes).
  CVector reduce(const LiftedState& v) const;
  /// Full nodal state from reduced coordinates (restores the eliminated
  /// nodes: f_m = x, or g_0 = g_m = 0).
  LiftedState expand(const CVector& c) const;

  /// Σ metric_i conj(w_i) v_i.
  cplx inner(const CVector& v, const CVector& w) const;
  double norm(const CVector& v) const;
};

DiscreteGenerator assemble_generator(const DelaySystem& sys, const GridSpec& grid);
DiscreteGenerator assemble_adjoint(const DelaySystem& sys, const GridSpec& grid);

/// Generator action on a full nodal state. Node m of the input is replaced by
/// the head; node m of the output repeats the last difference.
LiftedState apply_generator(const DelaySystem& sys, const LiftedState& v);

/// Adjoint action on a full nodal state, using the nodal end values as given.
/// End nodes use the one-sided difference that stays inside the window.
LiftedState apply_adjoint(const DelaySystem& sys, const LiftedState& w);

/// |⟨𝒜v, w⟩ − ⟨v, 𝒜*w⟩| in the lifted metric. Throws DomainError when v
/// violates f(0) = x or w violates g(-1) = 0 or g(0) = 0 (relative tolerance
/// `tol`), or when either state is not on `grid`.
double pairing_defect(const DelaySystem& sys, const GridSpec& grid, const LiftedState& v,
                      const LiftedState& w, double tol = 1e-8);

/// Same pairing without boundary checks, for probing what the boundary
/// conditions buy.
double pairing_defect_unchecked(const DelaySystem& sys, const LiftedState& v, const LiftedState& w);

/// Eigenvalues of the reduced generator matrix.
CVector generator_eigenvalues(const DiscreteGenerator& gen);

/// Re⟨Gv, v⟩ / ⟨v, v⟩ in the generator metric.
double rayleigh_quotient(const DiscreteGenerator& gen, const CVector& v);

/// Smooth pair for the pairing check: v = (x, (σ+1)x + σ(σ+1)p) meets
/// f(0) = x and w = (y, σ(σ+1)q) vanishes at both ends. The same
/// coefficients can be sampled on any grid.
struct SmoothPair {
  CVector x;
  CVector p;
  CVector y;
  CVector q;

  LiftedState v(int m) const;
  LiftedState w(int m) const;
  /// Real and imaginary parts of every coefficient uniform on [-1, 1].
  static SmoothPair random(int dim, std::mt19937_64& rng);
};

void write_generator_csv(std::ostream& os, const DiscreteGenerator& gen);

}  // namespace delayadm
