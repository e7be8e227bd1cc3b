#include "delayadm/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "delayadm/error.hpp"

namespace delayadm {

void require_square(const CMatrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + ": expected a nonempty square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

void require_finite(const CMatrix& m, const char* what) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const cplx v = m.data()[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw DomainError(std::string(what) + ": non-finite entry");
    }
  }
}

double inf_norm(const CMatrix& m) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) best = std::max(best, m.row(i).cwiseAbs().sum());
  return best;
}

namespace {

double one_norm(const CMatrix& m) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) best = std::max(best, m.col(j).cwiseAbs().sum());
  return best;
}

// Higham's degree-13 Pade coefficients and the matching 1-norm threshold.
constexpr double kPade13[14] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                670442572800.0,      33522128640.0,       1323241920.0,
                                40840800.0,          960960.0,            16380.0,
                                182.0,               1.0};
constexpr double kTheta13 = 5.371920351148152;
constexpr int kMaxSquarings = 64;

}  // namespace

CMatrix expm(const CMatrix& a, double t) {
  require_square(a, "expm");
  if (!(t >= 0.0) || !std::isfinite(t)) throw RangeError("expm: t must be a finite nonnegative number");
  const Eigen::Index n = a.rows();
  if (t == 0.0) return CMatrix::Identity(n, n);

  CMatrix ta = t * a;
  const double norm = one_norm(ta);
  if (!std::isfinite(norm)) throw RangeError("expm: non-finite ‖tA‖");
  if (norm == 0.0) return CMatrix::Identity(n, n);

  int s = 0;
  if (norm > kTheta13) s = static_cast<int>(std::ceil(std::log2(norm / kTheta13)));
  if (s > kMaxSquarings) {
    throw RangeError("expm: ‖tA‖₁ = " + std::to_string(norm) + " exceeds the scaling range");
  }
  ta /= std::ldexp(1.0, s);

  const CMatrix ident = CMatrix::Identity(n, n);
  const CMatrix a2 = ta * ta;
  const CMatrix a4 = a2 * a2;
  const CMatrix a6 = a4 * a2;
  const double* b = kPade13;
  CMatrix u_inner = b[13] * a6 + b[11] * a4 + b[9] * a2;
  CMatrix u = ta * (a6 * u_inner + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident);
  CMatrix v_inner = b[12] * a6 + b[10] * a4 + b[8] * a2;
  CMatrix v = a6 * v_inner + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;

  CMatrix r = solve(CMatrix(v - u), CMatrix(v + u));
  for (int i = 0; i < s; ++i) r = r * r;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (!std::isfinite(r.data()[i].real()) || !std::isfinite(r.data()[i].imag())) {
      throw RangeError("expm: overflow while squaring");
    }
  }
  return r;
}

CMatrix solve(const CMatrix& m, const CMatrix& b) {
  require_square(m, "solve");
  const Eigen::Index n = m.rows();
  if (b.rows() != n) {
    throw DimensionError("solve: right-hand side has " + std::to_string(b.rows()) +
                         " rows, matrix is " + std::to_string(n) + "x" + std::to_string(n));
  }
  const double scale = inf_norm(m);
  const double pivot_floor = 1e-14 * scale;

  CMatrix lu = m;
  CMatrix x = b;
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index p = k;
    double best = std::abs(lu(k, k));
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double v = std::abs(lu(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (!(best > pivot_floor) || scale == 0.0) {
      throw SingularityError("solve: pivot " + std::to_string(best) + " below 1e-14·‖M‖ at column " +
                             std::to_string(k));
    }
    if (p != k) {
      lu.row(p).swap(lu.row(k));
      x.row(p).swap(x.row(k));
    }
    const cplx piv = lu(k, k);
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const cplx f = lu(i, k) / piv;
      if (f == cplx{}) continue;
      lu(i, k) = f;
      lu.row(i).tail(n - k - 1) -= f * lu.row(k).tail(n - k - 1);
      x.row(i) -= f * x.row(k);
    }
  }
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    if (k + 1 < n) x.row(k) -= lu.row(k).tail(n - k - 1) * x.bottomRows(n - k - 1);
    x.row(k) /= lu(k, k);
  }
  return x;
}

CVector solve(const CMatrix& m, const CVector& b) {
  CMatrix rhs = b;
  CMatrix x = solve(m, rhs);
  return x.col(0);
}

double op_norm(const CMatrix& m, const OpNormOptions& opts) {
  if (m.size() == 0) throw DimensionError("op_norm: empty matrix");
  const Eigen::Index n = m.cols();

  CVector v = CVector::Constant(n, cplx(1.0 / std::sqrt(static_cast<double>(n)), 0.0));
  CVector w = m * v;
  if (w.norm() == 0.0) {
    // The all-ones start is in the kernel; restart from the heaviest column.
    Eigen::Index best = 0;
    double best_norm = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double c = m.col(j).norm();
      if (c > best_norm) {
        best_norm = c;
        best = j;
      }
    }
    if (best_norm == 0.0) return 0.0;
    v.setZero();
    v(best) = 1.0;
    w = m * v;
  }

  double sigma = w.norm();
  for (int it = 0; it < opts.max_iterations; ++it) {
    CVector y = m.adjoint() * w;
    const double ny = y.norm();
    if (ny == 0.0) break;
    v = y / ny;
    w = m * v;
    const double next = w.norm();
    const bool done = std::abs(next - sigma) <= opts.rel_tol * next;
    sigma = std::max(sigma, next);
    if (done) break;
  }
  return sigma;
}

double weighted_op_norm(const CMatrix& m, std::span<const double> in_w,
                        std::span<const double> out_w) {
  if (static_cast<Eigen::Index>(in_w.size()) != m.cols() ||
      static_cast<Eigen::Index>(out_w.size()) != m.rows()) {
    throw DimensionError("weighted_op_norm: weight vectors do not match matrix shape");
  }
  std::vector<SparseColumn> cols(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) != cplx{}) cols[j].emplace_back(static_cast<int>(i), m(i, j));
    }
  }
  return weighted_op_norm(cols, in_w, out_w);
}

double weighted_op_norm(std::span<const SparseColumn> cols, std::span<const double> in_w,
                        std::span<const double> out_w) {
  if (in_w.size() != cols.size()) {
    throw DimensionError("weighted_op_norm: input weights do not match column count");
  }
  const std::size_t rows = out_w.size();
  std::vector<int> row_count(rows, 0);
  for (const auto& col : cols) {
    for (const auto& [i, v] : col) {
      if (i < 0 || static_cast<std::size_t>(i) >= rows) {
        throw DimensionError("weighted_op_norm: row index out of range");
      }
      if (v != cplx{}) ++row_count[i];
    }
  }

  double best = 0.0;
  std::vector<std::size_t> coupled;
  std::vector<int> row_slot(rows, -1);
  int nrows = 0;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    int nnz = 0;
    int last = -1;
    cplx val{};
    for (const auto& [i, v] : cols[j]) {
      if (v != cplx{}) {
        ++nnz;
        last = i;
        val = v;
      }
    }
    if (nnz == 0) continue;
    if (nnz == 1 && row_count[last] == 1) {
      best = std::max(best, std::abs(val) * std::sqrt(out_w[last] / in_w[j]));
      continue;
    }
    coupled.push_back(j);
    for (const auto& [i, v] : cols[j]) {
      if (v != cplx{} && row_slot[i] < 0) row_slot[i] = nrows++;
    }
  }
  if (coupled.empty()) return best;

  CMatrix sub = CMatrix::Zero(nrows, static_cast<Eigen::Index>(coupled.size()));
  for (std::size_t b = 0; b < coupled.size(); ++b) {
    const std::size_t j = coupled[b];
    const double ci = 1.0 / std::sqrt(in_w[j]);
    for (const auto& [i, v] : cols[j]) {
      if (v != cplx{}) sub(row_slot[i], static_cast<Eigen::Index>(b)) += v * (std::sqrt(out_w[i]) * ci);
    }
  }
  return std::max(best, op_norm(sub));
}

double hermitian_max_eigenvalue(const CMatrix& h) {
  require_square(h, "hermitian_max_eigenvalue");
  const Eigen::MatrixXcd herm = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("hermitian_max_eigenvalue: eigensolver failed", 0.0);
  }
  return solver.eigenvalues().maxCoeff();
}

double numerical_abscissa(const CMatrix& a) { return hermitian_max_eigenvalue(a); }

}  // namespace delayadm
