#include "daembed/cca_kernel.hpp"

#include "daembed/error.hpp"
#include "daembed/random.hpp"
#include "json_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace daembed {
namespace {

constexpr int kKccaFormatVersion = 1;

double squared_distance(const Matrix& columns, Eigen::Index a, Eigen::Index b) {
  return (columns.col(a) - columns.col(b)).squaredNorm();
}

/// Spectral pieces of one centered Gram matrix.
struct KernelSpectrum {
  Matrix basis;           // eigenvectors
  Vector lambda;          // clipped eigenvalues, non-increasing
  Eigen::Index rank = 0;
};

KernelSpectrum spectrum(const Matrix& centered) {
  SymmetricEigen eig = symmetric_eigen(centered);
  KernelSpectrum out;
  out.basis = std::move(eig.vectors);
  out.lambda = eig.values.cwiseMax(0.0);
  const double tol = out.lambda(0) * static_cast<double>(centered.rows()) *
                     std::numeric_limits<double>::epsilon() * 64.0;
  while (out.rank < out.lambda.size() && out.lambda(out.rank) > tol) ++out.rank;
  return out;
}

/// basis * diag(f(lambda_i, i < rank)) * basis^T
template <typename F>
Matrix spectral_function(const KernelSpectrum& s, F f) {
  Vector values(s.lambda.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) values(i) = f(s.lambda(i), i < s.rank);
  return s.basis * values.asDiagonal() * s.basis.transpose();
}

nlohmann::json kernel_config_to_json(const KernelConfig& cfg) {
  return {{"sigma", cfg.sigma}, {"sigma_rule", to_string(cfg.sigma_rule)}, {"kappa", cfg.kappa}};
}

KernelConfig kernel_config_from_json(const nlohmann::json& j) {
  KernelConfig cfg;
  cfg.sigma = j.at("sigma").get<double>();
  cfg.sigma_rule = parse_sigma_rule(j.at("sigma_rule").get<std::string>());
  cfg.kappa = j.at("kappa").get<double>();
  return cfg;
}

nlohmann::json centering_to_json(const GramCentering& c) {
  return {{"column_means", detail::vector_to_json(c.column_means)}, {"grand_mean", c.grand_mean}};
}

GramCentering centering_from_json(const nlohmann::json& j) {
  return {detail::vector_from_json(j.at("column_means")), j.at("grand_mean").get<double>()};
}

}  // namespace

SigmaRule parse_sigma_rule(std::string_view name) {
  if (name == "median" || name == "mu") return SigmaRule::median;
  if (name == "twice-median" || name == "twice_median" || name == "2mu") return SigmaRule::twice_median;
  if (name == "explicit") return SigmaRule::explicit_value;
  throw ConfigError("unknown sigma rule '" + std::string(name) + "'");
}

const char* to_string(SigmaRule rule) noexcept {
  switch (rule) {
    case SigmaRule::median: return "median";
    case SigmaRule::twice_median: return "twice-median";
    case SigmaRule::explicit_value: return "explicit";
  }
  return "explicit";
}

void KernelConfig::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("kernel sigma must be positive and finite");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ConfigError("kernel kappa must be non-negative");
}

namespace {

std::vector<double> sampled_distances(const Matrix& vectors, Eigen::Index sample_cap, std::uint64_t seed) {
  const Eigen::Index n = vectors.rows();
  if (n < 2) throw DimensionError("median bandwidth needs at least 2 points");
  if (sample_cap < 2) throw ConfigError("median bandwidth sample cap must be >= 2");

  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  if (n > sample_cap) {
    Rng rng(seed);
    rng.shuffle(std::span<Eigen::Index>(rows));
    rows.resize(static_cast<std::size_t>(sample_cap));
    std::sort(rows.begin(), rows.end());
  }

  const Matrix columns = vectors.transpose();
  std::vector<double> distances;
  distances.reserve(rows.size() * (rows.size() - 1) / 2);
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = a + 1; b < rows.size(); ++b) {
      distances.push_back(std::sqrt(squared_distance(columns, rows[a], rows[b])));
    }
  }
  return distances;
}

double lower_median(std::vector<double> distances) {
  const auto lower = distances.begin() + static_cast<std::ptrdiff_t>((distances.size() - 1) / 2);
  std::nth_element(distances.begin(), lower, distances.end());
  const double mu = *lower;
  if (!(mu > 0.0)) {
    throw NumericError("median pairwise distance is 0 (points mostly identical); set an explicit sigma");
  }
  return mu;
}

}  // namespace

double median_bandwidth(const Matrix& vectors, Eigen::Index sample_cap, std::uint64_t seed) {
  return lower_median(sampled_distances(vectors, sample_cap, seed));
}

double pooled_median_bandwidth(const Matrix& first, const Matrix& second, Eigen::Index sample_cap,
                               std::uint64_t seed) {
  std::vector<double> distances = sampled_distances(first, sample_cap, seed);
  const std::vector<double> more = sampled_distances(second, sample_cap, seed);
  distances.insert(distances.end(), more.begin(), more.end());
  return lower_median(std::move(distances));
}

KernelConfig make_kernel_config(SigmaRule rule, double kappa, const Matrix& vectors, double explicit_sigma,
                                Eigen::Index sample_cap, std::uint64_t seed) {
  KernelConfig cfg;
  cfg.sigma_rule = rule;
  cfg.kappa = kappa;
  switch (rule) {
    case SigmaRule::median: cfg.sigma = median_bandwidth(vectors, sample_cap, seed); break;
    case SigmaRule::twice_median: cfg.sigma = 2.0 * median_bandwidth(vectors, sample_cap, seed); break;
    case SigmaRule::explicit_value: cfg.sigma = explicit_sigma; break;
  }
  cfg.validate();
  return cfg;
}

Matrix gaussian_gram(const Matrix& vectors, double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("kernel sigma must be positive");
  const Eigen::Index n = vectors.rows();
  const Matrix columns = vectors.transpose();
  const double scale = 1.0 / (2.0 * sigma * sigma);
  Matrix gram(n, n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t row) {
    const auto i = static_cast<Eigen::Index>(row);
    gram(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double k = std::exp(-squared_distance(columns, i, j) * scale);
      gram(i, j) = k;
      gram(j, i) = k;
    }
  });
  return gram;
}

Matrix center_gram(const Matrix& gram) {
  const Vector col_means = gram.colwise().mean().transpose();
  const double grand = col_means.mean();
  Matrix out = gram;
  out.rowwise() -= col_means.transpose();
  out.colwise() -= col_means;
  out.array() += grand;
  return out;
}

KccaModel kcca_fit(const AlignedPairSet& pairs, Eigen::Index d, const KernelConfig& cfg_ds,
                   const KernelConfig& cfg_g) {
  return kcca_fit(pairs.ds_vectors, pairs.gen_vectors, d, cfg_ds, cfg_g);
}

KccaModel kcca_fit(const Matrix& ds, const Matrix& gen, Eigen::Index d, const KernelConfig& cfg_ds,
                   const KernelConfig& cfg_g) {
  const Eigen::Index n = ds.rows();
  if (gen.rows() != n) throw DimensionError("KCCA views have different row counts");
  if (n < 2) throw DimensionError("KCCA needs at least 2 aligned rows");
  if (d < 1 || d > n - 1) {
    throw DimensionError("KCCA dimension d=" + std::to_string(d) + " must lie in [1, n-1=" +
                         std::to_string(n - 1) + "]");
  }
  cfg_ds.validate();
  cfg_g.validate();
  if (cfg_ds.kappa != cfg_g.kappa) throw ConfigError("KCCA views must share one kappa");
  const double shift = static_cast<double>(n) * cfg_ds.kappa;

  KccaModel model;
  model.train_ds = ds;
  model.train_g = gen;
  model.config_ds = cfg_ds;
  model.config_g = cfg_g;

  const Matrix raw_x = gaussian_gram(ds, cfg_ds.sigma);
  const Matrix raw_y = gaussian_gram(gen, cfg_g.sigma);
  model.centering_ds.column_means = raw_x.colwise().mean().transpose();
  model.centering_ds.grand_mean = model.centering_ds.column_means.mean();
  model.centering_g.column_means = raw_y.colwise().mean().transpose();
  model.centering_g.grand_mean = model.centering_g.column_means.mean();
  const Matrix kx = center_gram(raw_x);
  const Matrix ky = center_gram(raw_y);

  const KernelSpectrum sx = spectrum(kx);
  const KernelSpectrum sy = spectrum(ky);
  if (shift == 0.0 && (sx.rank < n - 1 || sy.rank < n - 1)) {
    throw NumericError("centered Gram matrix is rank-deficient (rank " + std::to_string(std::min(sx.rank, sy.rank)) +
                       " < n-1); use kappa > 0");
  }

  // R = K (K + n kappa I)^-1 on the centered range; with kappa == 0 this is
  // the projector onto that range.
  auto ratio = [shift](double l, bool in_range) { return in_range ? l / (l + shift) : 0.0; };
  auto inverse = [shift](double l, bool in_range) {
    if (shift > 0.0) return 1.0 / (l + shift);
    return in_range ? 1.0 / l : 0.0;
  };
  const Matrix rx_half = spectral_function(sx, [&](double l, bool r) { return std::sqrt(ratio(l, r)); });
  const Matrix ry = spectral_function(sy, ratio);
  Matrix system = rx_half * ry * rx_half;
  system = 0.5 * (system + system.transpose()).eval();
  const SymmetricEigen eig = symmetric_eigen(system);

  const Matrix kx_inv = spectral_function(sx, inverse);
  const Matrix ky_inv = spectral_function(sy, inverse);

  model.correlations.resize(d);
  model.alpha_ds.resize(n, d);
  model.alpha_g.resize(n, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double rho2 = std::clamp(eig.values(i), 0.0, 1.0);
    const double rho = std::sqrt(rho2);
    if (rho <= 1e-10) {
      throw NumericError("KCCA dimension " + std::to_string(i + 1) +
                         " has zero canonical correlation; reduce d");
    }
    model.correlations(i) = rho;
    const Vector a = rx_half * eig.vectors.col(i);  // DS scores
    const Vector b = ry * a / rho;                  // generic scores
    model.alpha_ds.col(i) = kx_inv * b / rho;
    model.alpha_g.col(i) = ky_inv * a / rho;
  }

  // Unit sample variance of every projected training variable.
  Matrix proj_x = kx * model.alpha_ds;
  Matrix proj_y = ky * model.alpha_g;
  const double denom = static_cast<double>(n - 1);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double sdx = std::sqrt(proj_x.col(i).squaredNorm() / denom);
    const double sdy = std::sqrt(proj_y.col(i).squaredNorm() / denom);
    if (!(sdx > 1e-12) || !(sdy > 1e-12)) {
      throw NumericError("KCCA dimension " + std::to_string(i + 1) + " projects to a constant; reduce d");
    }
    model.alpha_ds.col(i) /= sdx;
    model.alpha_g.col(i) /= sdy;
    proj_x.col(i) /= sdx;

    // Sign: DS projection of training row 0 non-negative; fall back to the
    // largest-magnitude entry when row 0 projects to ~0.
    Eigen::Index pivot = 0;
    if (std::abs(proj_x(0, i)) <= 1e-12 * proj_x.col(i).cwiseAbs().maxCoeff()) {
      proj_x.col(i).cwiseAbs().maxCoeff(&pivot);
    }
    if (proj_x(pivot, i) < 0.0) {
      model.alpha_ds.col(i) *= -1.0;
      model.alpha_g.col(i) *= -1.0;
    }
  }
  return model;
}

Matrix kcca_project(const KccaModel& model, View view, std::span<const Eigen::Index> indices) {
  const Matrix& train = view == View::ds ? model.train_ds : model.train_g;
  const Matrix& alpha = view == View::ds ? model.alpha_ds : model.alpha_g;
  const GramCentering& c = view == View::ds ? model.centering_ds : model.centering_g;
  const double sigma = view == View::ds ? model.config_ds.sigma : model.config_g.sigma;
  const Eigen::Index n = model.n();
  for (const auto i : indices) {
    if (i < 0 || i >= n) {
      throw DimensionError("training index " + std::to_string(i) + " out of range [0, " + std::to_string(n) + ")");
    }
  }

  const Matrix columns = train.transpose();
  const double scale = 1.0 / (2.0 * sigma * sigma);
  Matrix out(static_cast<Eigen::Index>(indices.size()), alpha.cols());
  parallel_for(indices.size(), [&](std::size_t r) {
    const Eigen::Index i = indices[r];
    Eigen::RowVectorXd row(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double k = i == j ? 1.0 : std::exp(-squared_distance(columns, i, j) * scale);
      row(j) = k - c.column_means(j) - c.column_means(i) + c.grand_mean;
    }
    out.row(static_cast<Eigen::Index>(r)) = row * alpha;
  });
  return out;
}

Matrix kcca_project_all(const KccaModel& model, View view) {
  std::vector<Eigen::Index> all(static_cast<std::size_t>(model.n()));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  return kcca_project(model, view, all);
}

KccaModel truncate(const KccaModel& model, Eigen::Index d) {
  if (d < 1 || d > model.d()) throw DimensionError("cannot truncate KCCA model to d=" + std::to_string(d));
  KccaModel out = model;
  out.alpha_ds = model.alpha_ds.leftCols(d);
  out.alpha_g = model.alpha_g.leftCols(d);
  out.correlations = model.correlations.head(d);
  return out;
}

void save_kcca_model(const KccaModel& model, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = "daembed-kcca";
  j["version"] = kKccaFormatVersion;
  j["d"] = model.d();
  j["n"] = model.n();
  j["correlations"] = detail::vector_to_json(model.correlations);
  j["config_ds"] = kernel_config_to_json(model.config_ds);
  j["config_g"] = kernel_config_to_json(model.config_g);
  j["centering_ds"] = centering_to_json(model.centering_ds);
  j["centering_g"] = centering_to_json(model.centering_g);
  j["train_ds"] = detail::matrix_to_json(model.train_ds);
  j["train_g"] = detail::matrix_to_json(model.train_g);
  j["alpha_ds"] = detail::matrix_to_json(model.alpha_ds);
  j["alpha_g"] = detail::matrix_to_json(model.alpha_g);
  detail::write_json(j, path);
}

KccaModel load_kcca_model(const std::filesystem::path& path) {
  const nlohmann::json j = detail::read_json(path);
  try {
    if (j.at("format") != "daembed-kcca") throw ParseError("not a KCCA model file: " + path.string());
    if (j.at("version").get<int>() != kKccaFormatVersion) {
      throw ParseError("unsupported KCCA model version in " + path.string());
    }
    KccaModel model;
    model.correlations = detail::vector_from_json(j.at("correlations"));
    model.config_ds = kernel_config_from_json(j.at("config_ds"));
    model.config_g = kernel_config_from_json(j.at("config_g"));
    model.centering_ds = centering_from_json(j.at("centering_ds"));
    model.centering_g = centering_from_json(j.at("centering_g"));
    model.train_ds = detail::matrix_from_json(j.at("train_ds"));
    model.train_g = detail::matrix_from_json(j.at("train_g"));
    model.alpha_ds = detail::matrix_from_json(j.at("alpha_ds"));
    model.alpha_g = detail::matrix_from_json(j.at("alpha_g"));
    const auto d = j.at("d").get<Eigen::Index>();
    const auto n = j.at("n").get<Eigen::Index>();
    if (model.correlations.size() != d || model.train_ds.rows() != n || model.train_g.rows() != n ||
        model.alpha_ds.rows() != n || model.alpha_g.rows() != n || model.alpha_ds.cols() != d ||
        model.alpha_g.cols() != d || model.centering_ds.column_means.size() != n ||
        model.centering_g.column_means.size() != n) {
      throw ParseError("inconsistent shapes in KCCA model " + path.string());
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed KCCA model " + path.string() + ": " + e.what());
  }
}

}  // namespace daembed
