#pragma once

#include "daembed/cca_linear.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

namespace daembed {

enum class SigmaRule { median, twice_median, explicit_value };

SigmaRule parse_sigma_rule(std::string_view name);
const char* to_string(SigmaRule rule) noexcept;

/// Gaussian bandwidth and Hardoon-style regularizer for one view.
struct KernelConfig {
  double sigma = 1.0;
  SigmaRule sigma_rule = SigmaRule::explicit_value;
  double kappa = 0.1;

  /// Throws ConfigError unless sigma > 0 and kappa >= 0.
  void validate() const;
};

/// Lower median of pairwise Euclidean distances over min(n, sample_cap) rows.
/// When n exceeds the cap the rows are drawn without replacement from a
/// seeded shuffle. Throws NumericError when the median is 0.
double median_bandwidth(const Matrix& vectors, Eigen::Index sample_cap = 2000,
                        std::uint64_t seed = 0);

/// Lower median of the within-view pairwise distances of both views pooled;
/// used when one bandwidth is shared across views.
double pooled_median_bandwidth(const Matrix& first, const Matrix& second, Eigen::Index sample_cap = 2000,
                               std::uint64_t seed = 0);

/// Resolves sigma from a rule: mu, 2 mu, or `explicit_sigma` as given.
KernelConfig make_kernel_config(SigmaRule rule, double kappa, const Matrix& vectors,
                                double explicit_sigma = 0.0,
                                Eigen::Index sample_cap = 2000, std::uint64_t seed = 0);

/// K(a, b) = exp(-|a - b|^2 / (2 sigma^2)); unit diagonal, symmetric.
Matrix gaussian_gram(const Matrix& vectors, double sigma);

/// Double-centers a Gram matrix: H K H with H = I - 11^T / n.
Matrix center_gram(const Matrix& gram);

/// Column means and grand mean of the uncentered Gram matrix.
struct GramCentering {
  Vector column_means;
  double grand_mean = 0.0;
};

struct KccaModel {
  Matrix train_ds;      ///< n x d1
  Matrix train_g;       ///< n x d2
  Matrix alpha_ds;      ///< n x d dual coefficients
  Matrix alpha_g;       ///< n x d
  Vector correlations;  ///< length d, non-increasing, in [0, 1]
  KernelConfig config_ds;
  KernelConfig config_g;
  GramCentering centering_ds;
  GramCentering centering_g;

  Eigen::Index d() const noexcept { return correlations.size(); }
  Eigen::Index n() const noexcept { return train_ds.rows(); }
};

/// Regularized kernel CCA.
///
/// With centered Gram matrices Kx, Ky the canonical correlations are the
/// square roots of the leading eigenvalues of
///   (Kx + n kappa I)^-1 Ky (Ky + n kappa I)^-1 Kx,
/// computed through the equivalent symmetric problem
///   Rx^1/2 Ry Rx^1/2,  R = K (K + n kappa I)^-1.
/// Dual coefficients are scaled so every projected training variable has unit
/// sample variance; the projection of training row 0 in the DS view is made
/// non-negative for each dimension.
///
/// kappa == 0 is accepted only when each centered Gram has rank n - 1;
/// otherwise NumericError. d must satisfy 1 <= d <= n - 1.
KccaModel kcca_fit(const AlignedPairSet& pairs, Eigen::Index d, const KernelConfig& cfg_ds,
                   const KernelConfig& cfg_g);

KccaModel kcca_fit(const Matrix& ds, const Matrix& gen, Eigen::Index d,
                   const KernelConfig& cfg_ds, const KernelConfig& cfg_g);

/// Rows of (centered K_view) * alpha_view for the given training indices.
Matrix kcca_project(const KccaModel& model, View view, std::span<const Eigen::Index> indices);

/// Projection of every training row.
Matrix kcca_project_all(const KccaModel& model, View view);

KccaModel truncate(const KccaModel& model, Eigen::Index d);

void save_kcca_model(const KccaModel& model, const std::filesystem::path& path);
KccaModel load_kcca_model(const std::filesystem::path& path);

}  // namespace daembed
