#pragma once

// Dense complex linear algebra used by every other module.
//
// Storage and elementwise arithmetic come from Eigen; the matrix exponential,
// the LU solve and the operator norm are implemented here so that their
// accuracy contracts and failure modes are under our control.

#include <complex>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace delayadm {

using cplx = std::complex<double>;
using CMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CVector = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;
using RVector = Eigen::VectorXd;

/// Throws DimensionError unless `m` is nonempty and square.
void require_square(const CMatrix& m, const char* what);

/// Throws DomainError if any entry is NaN or infinite.
void require_finite(const CMatrix& m, const char* what);

/// e^{tA} by scaling and squaring around a degree-13 Pade approximant.
///
/// Throws RangeError for t < 0 or when ‖tA‖ is too large to scale safely,
/// DimensionError for non-square A.
CMatrix expm(const CMatrix& a, double t);

/// LU with partial pivoting. A pivot below 1e-14·‖M‖∞ is reported as
/// SingularityError.
CVector solve(const CMatrix& m, const CVector& b);
CMatrix solve(const CMatrix& m, const CMatrix& b);

struct OpNormOptions {
  int max_iterations = 20000;
  double rel_tol = 1e-14;
};

/// Largest singular value by power iteration on M*M, started from the
/// normalized all-ones vector.
double op_norm(const CMatrix& m, const OpNormOptions& opts = {});

/// Column of a sparse matrix as (row, value) pairs.
using SparseColumn = std::vector<std::pair<int, cplx>>;

/// Largest singular value of diag(sqrt(out_w))·M·diag(1/sqrt(in_w)), i.e. the
/// norm of M between the weighted Euclidean spaces. Isolated entries (the
/// only nonzero in both their row and their column) are split off first and
/// only the coupled remainder goes through op_norm.
double weighted_op_norm(const CMatrix& m, std::span<const double> in_w,
                        std::span<const double> out_w);
double weighted_op_norm(std::span<const SparseColumn> cols, std::span<const double> in_w,
                        std::span<const double> out_w);

/// Largest eigenvalue of a Hermitian matrix (only the Hermitian part of `h`
/// is used).
double hermitian_max_eigenvalue(const CMatrix& h);

/// max eig((A + A*)/2): the growth bound of e^{tA} in the Euclidean norm.
double numerical_abscissa(const CMatrix& a);

double inf_norm(const CMatrix& m);

}  // namespace delayadm
