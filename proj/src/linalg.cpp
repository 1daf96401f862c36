#include "daembed/linalg.hpp"

#include "daembed/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <thread>
#include <vector>

namespace daembed {

SymmetricEigen symmetric_eigen(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric);
  if (solver.info() != Eigen::Success) {
    throw NumericError("symmetric eigensolver did not converge");
  }
  // Eigen returns ascending order.
  SymmetricEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

void fix_column_signs(Matrix& primary, Matrix* tandem) {
  for (Eigen::Index j = 0; j < primary.cols(); ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < primary.rows(); ++i) {
      const double a = std::abs(primary(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (primary.rows() > 0 && primary(arg, j) < 0.0) {
      primary.col(j) *= -1.0;
      if (tandem != nullptr) tandem->col(j) *= -1.0;
    }
  }
}

TruncatedSvd truncated_svd(const Matrix& a, Eigen::Index k) {
  if (k <= 0) throw DimensionError("truncated_svd: k must be positive");
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  TruncatedSvd out;
  if (m == 0 || n == 0) {
    out.u.resize(m, 0);
    out.s.resize(0);
    out.v.resize(n, 0);
    return out;
  }

  const bool gram_on_columns = n <= m;
  const Matrix gram = gram_on_columns ? Matrix(a.transpose() * a) : Matrix(a * a.transpose());
  const SymmetricEigen eig = symmetric_eigen(gram);

  const double lambda_max = std::max(eig.values(0), 0.0);
  const double tol = lambda_max * static_cast<double>(std::max(m, n)) *
                     std::numeric_limits<double>::epsilon() * 16.0;
  Eigen::Index rank = 0;
  while (rank < eig.values.size() && eig.values(rank) > tol) ++rank;
  out.numerical_rank = rank;

  const Eigen::Index keep = std::min(k, rank);
  if (keep == 0) {
    out.u.resize(m, 0);
    out.s.resize(0);
    out.v.resize(n, 0);
    return out;
  }

  const Matrix basis = eig.vectors.leftCols(keep);
  // Rayleigh-Ritz step: an SVD of `a` restricted to the dominant subspace.
  const Matrix projected = gram_on_columns ? Matrix(a * basis) : Matrix(a.transpose() * basis);
  Eigen::JacobiSVD<Matrix> svd(projected, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (gram_on_columns) {
    out.u = svd.matrixU();
    out.v = basis * svd.matrixV();
  } else {
    out.u = basis * svd.matrixV();
    out.v = svd.matrixU();
  }
  out.s = svd.singularValues();
  fix_column_signs(out.u, &out.v);
  return out;
}

std::string format_double(double value) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::general, 17);
  if (ec != std::errc{}) throw NumericError("cannot format value");
  return std::string(buf.data(), ptr);
}

unsigned worker_threads() {
  const char* env = std::getenv("DAEMBED_NUM_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  unsigned value = 0;
  const char* end = env + std::char_traits<char>::length(env);
  auto [ptr, ec] = std::from_chars(env, end, value);
  if (ec != std::errc{} || ptr != end || value == 0) return 1;
  return value;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(worker_threads(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t block = (n + workers - 1) / workers;
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * block;
      const std::size_t end = std::min(n, begin + block);
      if (begin >= end) break;
      threads.emplace_back([&body, &errors, w, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i) body(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  // Lowest block wins so the reported error matches the sequential run.
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
}

}  // namespace daembed
