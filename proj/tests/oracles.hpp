#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Each one is a plain, slow formulation that shares no code with the library.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd centered(const MatrixXd& x) { return x.rowwise() - x.colwise().mean(); }

// Canonical correlations from the block generalized eigenproblem
//   [0 Cxy; Cyx 0] v = rho [Cxx 0; 0 Cyy] v
// with the same trace-scaled ridge as the library.
inline VectorXd cca_correlations(const MatrixXd& x, const MatrixXd& y, int d, double ridge) {
  const MatrixXd xc = centered(x);
  const MatrixXd yc = centered(y);
  const double scale = 1.0 / static_cast<double>(x.rows() - 1);
  MatrixXd cxx = scale * xc.transpose() * xc;
  MatrixXd cyy = scale * yc.transpose() * yc;
  const MatrixXd cxy = scale * xc.transpose() * yc;
  cxx.diagonal().array() += ridge * cxx.trace() / static_cast<double>(cxx.rows());
  cyy.diagonal().array() += ridge * cyy.trace() / static_cast<double>(cyy.rows());
  const auto p = x.cols();
  const auto q = y.cols();
  MatrixXd a = MatrixXd::Zero(p + q, p + q);
  MatrixXd b = MatrixXd::Zero(p + q, p + q);
  a.topRightCorner(p, q) = cxy;
  a.bottomLeftCorner(q, p) = cxy.transpose();
  b.topLeftCorner(p, p) = cxx;
  b.bottomRightCorner(q, q) = cyy;
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(a, b);
  VectorXd values = es.eigenvalues().reverse();
  return values.head(d);
}

inline MatrixXd gram(const MatrixXd& x, double sigma) {
  MatrixXd k(x.rows(), x.rows());
  for (Eigen::Index a = 0; a < x.rows(); ++a) {
    for (Eigen::Index b = 0; b < x.rows(); ++b) {
      double sq = 0.0;
      for (Eigen::Index c = 0; c < x.cols(); ++c) sq += (x(a, c) - x(b, c)) * (x(a, c) - x(b, c));
      k(a, b) = std::exp(-sq / (2.0 * sigma * sigma));
    }
  }
  return k;
}

inline MatrixXd double_center(const MatrixXd& k) {
  const auto n = k.rows();
  const MatrixXd h = MatrixXd::Identity(n, n) - MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  return h * k * h;
}

// sqrt of the leading eigenvalues of (Kx + n kappa I)^-1 Ky (Ky + n kappa I)^-1 Kx,
// formed explicitly and handed to a general (non-symmetric) eigensolver.
inline VectorXd kcca_correlations(const MatrixXd& x, const MatrixXd& y, double sigma_x, double sigma_y,
                                  double kappa, int d) {
  const auto n = x.rows();
  const MatrixXd kx = double_center(gram(x, sigma_x));
  const MatrixXd ky = double_center(gram(y, sigma_y));
  const MatrixXd reg = static_cast<double>(n) * kappa * MatrixXd::Identity(n, n);
  const MatrixXd m = (kx + reg).fullPivLu().solve(ky) * (ky + reg).fullPivLu().solve(kx);
  Eigen::EigenSolver<MatrixXd> es(m, false);
  std::vector<double> values;
  for (Eigen::Index i = 0; i < n; ++i) values.push_back(es.eigenvalues()(i).real());
  std::sort(values.begin(), values.end(), std::greater<>());
  VectorXd out(d);
  for (int i = 0; i < d; ++i) out(i) = std::sqrt(std::clamp(values[i], 0.0, 1.0));
  return out;
}

inline double pearson(const VectorXd& a, const VectorXd& b) {
  const VectorXd ac = a.array() - a.mean();
  const VectorXd bc = b.array() - b.mean();
  return ac.dot(bc) / std::sqrt(ac.squaredNorm() * bc.squaredNorm());
}

// AUC by enumerating every positive/negative pair.
inline double auc_pairs(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

// (precision, F1) from an explicit confusion matrix.
inline std::pair<double, double> confusion(const std::vector<double>& s, const std::vector<int>& y, double t) {
  int tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool pred = s[i] >= t;
    if (pred && y[i] == 1) ++tp;
    if (pred && y[i] == 0) ++fp;
    if (!pred && y[i] == 1) ++fn;
  }
  const double precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
  const double recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
  const double f1 = precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
  return {precision, f1};
}

inline VectorXd central_difference(const std::function<double(const VectorXd&)>& f, const VectorXd& x, double h) {
  VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    VectorXd up = x;
    VectorXd down = x;
    up(i) += h;
    down(i) -= h;
    g(i) = (f(up) - f(down)) / (2.0 * h);
  }
  return g;
}

// Cosines of the principal angles between the column spaces of a and b.
inline VectorXd subspace_cosines(const MatrixXd& a, const MatrixXd& b) {
  const MatrixXd qa = Eigen::HouseholderQR<MatrixXd>(a).householderQ() * MatrixXd::Identity(a.rows(), a.cols());
  const MatrixXd qb = Eigen::HouseholderQR<MatrixXd>(b).householderQ() * MatrixXd::Identity(b.rows(), b.cols());
  return Eigen::JacobiSVD<MatrixXd>(qa.transpose() * qb).singularValues();
}

// Objective of the weighted combination: sum_i ||a w_ds + b w_g - w_ds||^2 + ||... - w_g||^2.
inline double combination_objective(const MatrixXd& p, const MatrixXd& q, double a, double b) {
  const MatrixXd mix = a * p + b * q;
  return (mix - p).squaredNorm() + (mix - q).squaredNorm();
}

inline MatrixXd random_orthogonal(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(gen);
  return Eigen::HouseholderQR<MatrixXd>(m).householderQ() * MatrixXd::Identity(n, n);
}

inline MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(gen);
  return m;
}

// Two views whose population canonical correlations are `rho`: independent
// pairs (u_k, v_k) with corr rho_k, mixed by fixed random invertible maps.
inline std::pair<MatrixXd, MatrixXd> two_view_gaussian(const std::vector<double>& rho, Eigen::Index n,
                                                       std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  const auto k = static_cast<Eigen::Index>(rho.size());
  MatrixXd u(n, k), v(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const double z = normal(gen);
      const double e = normal(gen);
      u(i, j) = z;
      v(i, j) = rho[static_cast<std::size_t>(j)] * z + std::sqrt(1.0 - rho[static_cast<std::size_t>(j)] * rho[static_cast<std::size_t>(j)]) * e;
    }
  }
  const MatrixXd a = random_matrix(k, k, gen) + 3.0 * MatrixXd::Identity(k, k);
  const MatrixXd b = random_matrix(k, k, gen) + 3.0 * MatrixXd::Identity(k, k);
  return {u * a, v * b};
}

}  // namespace oracle
