#include "daembed/cca_linear.hpp"

#include "daembed/error.hpp"
#include "json_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace daembed {
namespace {

constexpr int kCcaFormatVersion = 1;

/// Inverse square root of a regularized covariance.
Matrix whitening(const Matrix& cov, double ridge, const char* view) {
  const auto dim = cov.rows();
  const double trace = cov.trace();
  if (!(trace > 0.0)) {
    throw NumericError(std::string(view) + " view has zero variance; CCA is undefined");
  }
  Matrix reg = cov;
  reg.diagonal().array() += ridge * trace / static_cast<double>(dim);
  const SymmetricEigen eig = symmetric_eigen(reg);
  const double tol = eig.values(0) * static_cast<double>(dim) * std::numeric_limits<double>::epsilon() * 64.0;
  if (eig.values(dim - 1) <= tol) {
    throw NumericError(std::string(view) +
                       " auto-covariance is singular (fewer shared words than dimensions, or "
                       "collinear columns); use a nonzero ridge");
  }
  const Vector inv_sqrt = eig.values.array().rsqrt();
  return eig.vectors * inv_sqrt.asDiagonal() * eig.vectors.transpose();
}

}  // namespace

View parse_view(std::string_view name) {
  if (name == "ds") return View::ds;
  if (name == "gen" || name == "g" || name == "generic") return View::gen;
  throw ConfigError("unknown view '" + std::string(name) + "'");
}

CcaModel cca_fit(const AlignedPairSet& pairs, Eigen::Index d, double ridge) {
  return cca_fit(pairs.ds_vectors, pairs.gen_vectors, d, ridge);
}

CcaModel cca_fit(const Matrix& ds, const Matrix& gen, Eigen::Index d, double ridge) {
  const Eigen::Index n = ds.rows();
  if (gen.rows() != n) throw DimensionError("CCA views have different row counts");
  if (n < 2) throw DimensionError("CCA needs at least 2 aligned rows");
  const Eigen::Index d1 = ds.cols();
  const Eigen::Index d2 = gen.cols();
  if (d < 1 || d > std::min(d1, d2)) {
    throw DimensionError("CCA dimension d=" + std::to_string(d) + " must lie in [1, min(d1, d2)=" +
                         std::to_string(std::min(d1, d2)) + "]");
  }
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw ConfigError("ridge must be a non-negative number");

  CcaModel model;
  model.ridge = ridge;
  model.mean_ds = ds.colwise().mean().transpose();
  model.mean_g = gen.colwise().mean().transpose();
  const Matrix xc = ds.rowwise() - model.mean_ds.transpose();
  const Matrix yc = gen.rowwise() - model.mean_g.transpose();
  const double denom = static_cast<double>(n - 1);
  const Matrix cxx = (xc.transpose() * xc) / denom;
  const Matrix cyy = (yc.transpose() * yc) / denom;
  const Matrix cxy = (xc.transpose() * yc) / denom;

  const Matrix wx = whitening(cxx, ridge, "DS");
  const Matrix wy = whitening(cyy, ridge, "generic");
  const Matrix cross = wx * cxy * wy;
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeThinU | Eigen::ComputeThinV);

  model.phi_ds = wx * svd.matrixU().leftCols(d);
  model.phi_g = wy * svd.matrixV().leftCols(d);
  model.correlations = svd.singularValues().head(d);
  fix_column_signs(model.phi_ds, &model.phi_g);

  // In the regularized metric the canonical variables are exactly orthonormal
  // and pairwise uncorrelated across views for i != j.
  Matrix reg_xx = cxx;
  reg_xx.diagonal().array() += ridge * cxx.trace() / static_cast<double>(d1);
  const Matrix gram = model.phi_ds.transpose() * reg_xx * model.phi_ds;
  const Matrix cross_proj = model.phi_ds.transpose() * cxy * model.phi_g;
  const Matrix residual_gram = gram - Matrix::Identity(d, d);
  Matrix residual_cross = cross_proj;
  residual_cross.diagonal().setZero();
  if (residual_gram.cwiseAbs().maxCoeff() > 1e-6 || residual_cross.cwiseAbs().maxCoeff() > 1e-6) {
    throw NumericError("CCA canonical variables failed the decorrelation check; data is ill-conditioned");
  }
  return model;
}

Matrix cca_project(const CcaModel& model, const Matrix& vectors, View view) {
  const Matrix& phi = view == View::ds ? model.phi_ds : model.phi_g;
  const Vector& mean = view == View::ds ? model.mean_ds : model.mean_g;
  if (vectors.cols() != phi.rows()) {
    throw DimensionError("projection input has " + std::to_string(vectors.cols()) + " columns, model expects " +
                         std::to_string(phi.rows()));
  }
  return (vectors.rowwise() - mean.transpose()) * phi;
}

CcaModel truncate(const CcaModel& model, Eigen::Index d) {
  if (d < 1 || d > model.d()) throw DimensionError("cannot truncate CCA model to d=" + std::to_string(d));
  CcaModel out = model;
  out.phi_ds = model.phi_ds.leftCols(d);
  out.phi_g = model.phi_g.leftCols(d);
  out.correlations = model.correlations.head(d);
  return out;
}

void save_cca_model(const CcaModel& model, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = "daembed-cca";
  j["version"] = kCcaFormatVersion;
  j["d"] = model.d();
  j["ridge"] = model.ridge;
  j["correlations"] = detail::vector_to_json(model.correlations);
  j["mean_ds"] = detail::vector_to_json(model.mean_ds);
  j["mean_g"] = detail::vector_to_json(model.mean_g);
  j["phi_ds"] = detail::matrix_to_json(model.phi_ds);
  j["phi_g"] = detail::matrix_to_json(model.phi_g);
  detail::write_json(j, path);
}

CcaModel load_cca_model(const std::filesystem::path& path) {
  const nlohmann::json j = detail::read_json(path);
  try {
    if (j.at("format") != "daembed-cca") throw ParseError("not a CCA model file: " + path.string());
    if (j.at("version").get<int>() != kCcaFormatVersion) {
      throw ParseError("unsupported CCA model version in " + path.string());
    }
    CcaModel model;
    model.ridge = j.at("ridge").get<double>();
    model.correlations = detail::vector_from_json(j.at("correlations"));
    model.mean_ds = detail::vector_from_json(j.at("mean_ds"));
    model.mean_g = detail::vector_from_json(j.at("mean_g"));
    model.phi_ds = detail::matrix_from_json(j.at("phi_ds"));
    model.phi_g = detail::matrix_from_json(j.at("phi_g"));
    const auto d = j.at("d").get<Eigen::Index>();
    if (model.correlations.size() != d || model.phi_ds.cols() != d || model.phi_g.cols() != d ||
        model.phi_ds.rows() != model.mean_ds.size() || model.phi_g.rows() != model.mean_g.size()) {
      throw ParseError("inconsistent shapes in CCA model " + path.string());
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed CCA model " + path.string() + ": " + e.what());
  }
}

}  // namespace daembed
