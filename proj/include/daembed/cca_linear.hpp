#pragma once

#include "daembed/embedding_store.hpp"

#include <filesystem>

namespace daembed {

enum class View { ds, gen };

View parse_view(std::string_view name);

/// Linear CCA between the DS view (d1 columns) and the generic view (d2).
struct CcaModel {
  Matrix phi_ds;        ///< d1 x d
  Matrix phi_g;         ///< d2 x d
  Vector correlations;  ///< length d, non-increasing
  Vector mean_ds;       ///< length d1
  Vector mean_g;        ///< length d2
  double ridge = 0.0;

  Eigen::Index d() const noexcept { return correlations.size(); }
};

/// Fits CCA by whitening each centered view and taking the top-d singular
/// triplets of the whitened cross-covariance.
///
/// Each auto-covariance C gets ridge * trace(C) / dim added to its diagonal,
/// which keeps the fit invariant to rescaling either view. With ridge == 0 a
/// singular auto-covariance raises NumericError. d must satisfy
/// 1 <= d <= min(d1, d2) (DimensionError otherwise).
CcaModel cca_fit(const AlignedPairSet& pairs, Eigen::Index d, double ridge = 1e-3);

/// Lower-level overload on raw row-aligned views.
CcaModel cca_fit(const Matrix& ds, const Matrix& gen, Eigen::Index d, double ridge = 1e-3);

/// (vectors - mean_view) * phi_view.
Matrix cca_project(const CcaModel& model, const Matrix& vectors, View view);

/// Keeps the leading d canonical pairs. Canonical pairs are nested, so this
/// equals a fresh fit at d.
CcaModel truncate(const CcaModel& model, Eigen::Index d);

void save_cca_model(const CcaModel& model, const std::filesystem::path& path);
CcaModel load_cca_model(const std::filesystem::path& path);

}  // namespace daembed
