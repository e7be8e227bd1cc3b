// Independent reference computations. Nothing here calls into the library's
// numerics; each oracle is a closed form or a direct brute-force evaluation.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "delayadm/semigroup.hpp"

namespace oracle {

using delayadm::CMatrix;
using delayadm::cplx;

// Method of steps for z' = a1·z(t−1) with z ≡ c on [−1, 0]. On each unit
// interval z is a polynomial; the next piece integrates the previous one
// shifted by one.
class MethodOfSteps {
public:
  MethodOfSteps(double a1, double c, int pieces) {
    std::vector<double> prev = {c};  // coefficients in τ = t − k on the piece
    for (int k = 0; k < pieces; ++k) {
      // z_k(τ) = z_{k−1}(1) + a1·∫_0^τ z_{k−1}(s) ds
      const double start = eval(prev, 1.0, k == 0);
      std::vector<double> next(prev.size() + 1, 0.0);
      next[0] = start;
      for (std::size_t i = 0; i < prev.size(); ++i) next[i + 1] = a1 * prev[i] / static_cast<double>(i + 1);
      pieces_.push_back(next);
      prev = next;
    }
  }

  double operator()(double t) const {
    if (t <= 0.0) return pieces_.empty() ? 0.0 : pieces_.front()[0];
    const int k = std::min(static_cast<int>(std::floor(t)), static_cast<int>(pieces_.size()) - 1);
    return eval(pieces_[k], t - k, false);
  }

private:
  static double eval(const std::vector<double>& p, double tau, bool history) {
    if (history) return p[0];
    double v = 0.0;
    for (std::size_t i = p.size(); i-- > 0;) v = v * tau + p[i];
    return v;
  }
  std::vector<std::vector<double>> pieces_;
};

// Real root of λ = e^{−λ} by Newton's method.
inline double omega_constant() {
  double x = 0.5;
  for (int i = 0; i < 100; ++i) {
    const double f = x - std::exp(-x);
    const double step = f / (1.0 + std::exp(-x));
    x -= step;
    if (std::abs(step) < 1e-16) break;
  }
  return x;
}

// Weighted resolvent for ż = −z + u on the lifted space, restricted to the
// real axis where |λ + 1| is smallest. Head 1/(λ+1), history e^{λσ}/(λ+1).
inline double scalar_weighted_resolvent(double r) {
  const double tail = (1.0 - std::exp(-2.0 * r)) / (2.0 * r);
  return std::sqrt(r) / (r + 1.0) * std::sqrt(1.0 + tail);
}

// Brute-force 1-D grid search of sup_r scalar_weighted_resolvent(r).
inline double scalar_weiss_constant() {
  double best = 0.0;
  for (int i = 1; i <= 200000; ++i) best = std::max(best, scalar_weighted_resolvent(i * 1e-5));
  return best;
}

// ‖∫_0^τ e^{−(τ−s)} u(s) ds‖ over unit-L² inputs: the L² norm of e^{−s} on [0, τ].
inline double scalar_head_admissibility(double tau) { return std::sqrt((1.0 - std::exp(-2.0 * tau)) / 2.0); }

// Extremal delayed-feedback integral: sup over unit-L² f of ∫_0^{t0}|f(s−1)|ds
// is √t0 by Cauchy–Schwarz.
inline double scalar_mv_extremal(double t0) { return std::sqrt(t0); }

// Least concave majorant of (t_i, y_i) by checking every chord: the value at
// i is the largest interpolant through a pair j ≤ i ≤ k.
inline std::vector<double> concave_majorant(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  std::vector<double> out(y);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      for (std::size_t k = i; k < n; ++k) {
        if (j == k) continue;
        const double w = (t[i] - t[j]) / (t[k] - t[j]);
        out[i] = std::max(out[i], (1.0 - w) * y[j] + w * y[k]);
      }
    }
  }
  return out;
}

inline CMatrix random_complex(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = cplx(g(rng), g(rng));
  }
  return m;
}

// Largest singular value from a dense eigensolve of M*M, independent of the
// library's power iteration.
inline double spectral_norm(const CMatrix& m) {
  const Eigen::MatrixXcd h = m.adjoint() * m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

// A = K − P with K skew-Hermitian and P positive semidefinite, so the
// Hermitian part of A is −P and the system is contraction-certified.
inline CMatrix random_dissipative(int n, std::mt19937_64& rng) {
  const CMatrix g = random_complex(n, n, rng);
  const CMatrix k = 0.5 * (g - g.adjoint());
  const CMatrix h = random_complex(n, n, rng);
  return k - 0.25 * h * h.adjoint();
}

// e^{tA}x through a complex eigendecomposition (A assumed diagonalizable).
inline delayadm::CVector expm_apply(const CMatrix& a, double t, const delayadm::CVector& x) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(a);
  const Eigen::MatrixXcd v = es.eigenvectors();
  const Eigen::VectorXcd c = v.partialPivLu().solve(x);
  return v * (c.array() * (t * es.eigenvalues().array()).exp()).matrix();
}

inline CMatrix with_norm(CMatrix m, double target) { return m * (target / spectral_norm(m)); }

}  // namespace oracle
