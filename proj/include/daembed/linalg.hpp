#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <string>

namespace daembed {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigendecomposition of a symmetric matrix, eigenvalues non-increasing.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;  ///< column j pairs with values[j]
};

SymmetricEigen symmetric_eigen(const Matrix& symmetric);

/// Rank-limited thin SVD: a ~= u * diag(s) * v^T.
struct TruncatedSvd {
  Matrix u;  ///< rows(a) x rank
  Vector s;  ///< non-increasing, strictly positive
  Matrix v;  ///< cols(a) x rank
  /// Numerical rank of the input, which may exceed the number of kept triplets.
  Eigen::Index numerical_rank = 0;
};

/// Top-k singular triplets of a dense matrix.
///
/// The leading subspace comes from an eigensolve of the smaller Gram matrix
/// (a^T a or a a^T); a Jacobi SVD of a projected onto that subspace then
/// recovers orthonormal singular vectors and unsquared singular values.
/// Fewer than k triplets are returned when the numerical rank is lower.
/// Each left singular vector is sign-fixed so its largest-magnitude entry is
/// positive; the right vector is flipped with it.
TruncatedSvd truncated_svd(const Matrix& a, Eigen::Index k);

/// Flips columns of `primary` so the largest-magnitude entry (first on ties)
/// is positive. `tandem`, when given, receives the same column flips.
void fix_column_signs(Matrix& primary, Matrix* tandem = nullptr);

/// Decimal text with 17 significant digits; parses back to the same double.
std::string format_double(double value);

/// Worker count from DAEMBED_NUM_THREADS (default 1, clamped to >= 1).
unsigned worker_threads();

/// Runs body(i) for i in [0, n) across worker_threads() threads in contiguous
/// blocks. Each index is visited exactly once; callers must write disjoint
/// outputs so the result does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace daembed
