#include "daembed/encode_eval.hpp"

#include "daembed/error.hpp"
#include "daembed/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace daembed {
namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void check_labels(std::span<const int> labels, std::size_t rows) {
  if (labels.size() != rows) throw DimensionError("label count does not match feature rows");
  std::size_t positives = 0;
  for (const int y : labels) {
    if (y != 0 && y != 1) throw DataError("labels must be 0 or 1");
    positives += static_cast<std::size_t>(y);
  }
  if (positives == 0 || positives == labels.size()) {
    throw DataError("labels contain a single class; both classes are required");
  }
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

void LabeledDataset::validate() const {
  if (documents.size() != labels.size()) throw DataError("dataset has mismatched documents and labels");
  std::size_t positives = 0;
  for (const int y : labels) {
    if (y != 0 && y != 1) throw DataError("dataset labels must be 0 or 1");
    positives += static_cast<std::size_t>(y);
  }
  if (positives == 0 || positives == labels.size()) {
    throw DataError("dataset '" + name + "' needs at least one document of each class");
  }
}

LabeledDataset load_labeled_dataset(const std::filesystem::path& path, std::string name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path.string());
  LabeledDataset out;
  out.name = name.empty() ? path.stem().string() : std::move(name);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw ParseError("expected 'text<TAB>label'", line_no);
    const std::string label = trim(std::string_view(line).substr(tab + 1));
    if (label != "0" && label != "1") throw ParseError("label '" + label + "' is not 0 or 1", line_no);
    out.documents.push_back(tokenize_line(std::string_view(line).substr(0, tab)));
    out.labels.push_back(label == "1" ? 1 : 0);
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
  if (out.documents.empty()) throw DataError("dataset " + path.string() + " is empty");
  out.validate();
  return out;
}

DocWeighting parse_doc_weighting(std::string_view name) {
  if (name == "uniform") return DocWeighting::uniform;
  if (name == "tf-idf" || name == "tfidf" || name == "tf_idf") return DocWeighting::tf_idf;
  throw ConfigError("unknown document weighting '" + std::string(name) + "'");
}

OovPolicy parse_oov_policy(std::string_view name) {
  if (name == "skip") return OovPolicy::skip;
  if (name == "zero") return OovPolicy::zero;
  throw ConfigError("unknown OOV policy '" + std::string(name) + "'");
}

const char* to_string(DocWeighting weighting) noexcept {
  return weighting == DocWeighting::uniform ? "uniform" : "tf-idf";
}

const char* to_string(OovPolicy policy) noexcept { return policy == OovPolicy::skip ? "skip" : "zero"; }

EncodedDocuments encode_documents(const LabeledDataset& dataset, const EmbeddingTable& table,
                                  DocWeighting weighting, OovPolicy oov) {
  const auto n_docs = dataset.documents.size();
  std::unordered_map<std::string, double> idf;
  if (weighting == DocWeighting::tf_idf) {
    std::unordered_map<std::string, std::size_t> df;
    for (const auto& doc : dataset.documents) {
      std::vector<std::string> distinct(doc.begin(), doc.end());
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      for (auto& t : distinct) ++df[t];
    }
    for (const auto& [token, count] : df) {
      idf[token] = std::log(static_cast<double>(n_docs) / static_cast<double>(count));
    }
  }

  EncodedDocuments out;
  out.features = Matrix::Zero(static_cast<Eigen::Index>(n_docs), table.dim());
  struct Term {
    Eigen::Index row;  // -1 for a zero-vector OOV occurrence
    double weight;
  };
  std::vector<Term> terms;
  for (std::size_t d = 0; d < n_docs; ++d) {
    terms.clear();
    bool any_in_vocab = false;
    for (const auto& token : dataset.documents[d]) {
      const auto row = table.vocab().find(token);
      if (!row && oov == OovPolicy::skip) continue;
      const double w = weighting == DocWeighting::uniform ? 1.0 : idf.at(token);
      terms.push_back({row ? static_cast<Eigen::Index>(*row) : Eigen::Index{-1}, w});
      any_in_vocab = any_in_vocab || row.has_value();
    }
    if (!any_in_vocab) {
      out.empty.push_back(d);
      continue;
    }
    double total = 0.0;
    for (const auto& t : terms) total += t.weight;
    if (!(total > 0.0)) {
      for (auto& t : terms) t.weight = 1.0;
      total = static_cast<double>(terms.size());
    }
    auto dst = out.features.row(static_cast<Eigen::Index>(d));
    for (const auto& t : terms) {
      if (t.row >= 0) dst += (t.weight / total) * table.vectors().row(t.row);
    }
  }
  if (out.empty.size() == n_docs) {
    throw DataError("no document in '" + dataset.name + "' has a token in the embedding vocabulary");
  }
  return out;
}

Vector ClassifierModel::predict_proba(const Matrix& features) const {
  if (features.cols() != weights.size()) throw DimensionError("feature width does not match classifier");
  Vector z = (features * weights).array() + bias;
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

double logistic_objective(const Matrix& features, std::span<const int> labels, const Vector& weights, double bias,
                          double l2_lambda) {
  const Vector z = (features * weights).array() + bias;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += softplus(z(i)) - static_cast<double>(labels[static_cast<std::size_t>(i)]) * z(i);
  }
  return loss / static_cast<double>(z.size()) + 0.5 * l2_lambda * weights.squaredNorm();
}

Vector logistic_gradient(const Matrix& features, std::span<const int> labels, const Vector& weights, double bias,
                         double l2_lambda) {
  const Eigen::Index n = features.rows();
  const Eigen::Index dim = features.cols();
  Vector residual(n);
  const Vector z = (features * weights).array() + bias;
  for (Eigen::Index i = 0; i < n; ++i) {
    residual(i) = sigmoid(z(i)) - static_cast<double>(labels[static_cast<std::size_t>(i)]);
  }
  Vector grad(dim + 1);
  grad.head(dim) = features.transpose() * residual / static_cast<double>(n) + l2_lambda * weights;
  grad(dim) = residual.sum() / static_cast<double>(n);
  return grad;
}

ClassifierModel train_logreg(const Matrix& features, std::span<const int> labels, const LogregOptions& options) {
  check_labels(labels, static_cast<std::size_t>(features.rows()));
  if (!features.allFinite()) throw NumericError("features contain NaN or Inf");
  if (!(options.l2_lambda >= 0.0)) throw ConfigError("l2 lambda must be non-negative");
  if (!(options.tol > 0.0) || options.max_iter < 1) throw ConfigError("tol must be > 0 and max_iter >= 1");

  const Eigen::Index n = features.rows();
  const Eigen::Index dim = features.cols();
  Matrix augmented(n, dim + 1);
  augmented.leftCols(dim) = features;
  augmented.col(dim).setOnes();

  ClassifierModel model;
  model.l2_lambda = options.l2_lambda;
  model.weights = Vector::Zero(dim);
  Vector theta = Vector::Zero(dim + 1);
  auto objective = [&](const Vector& t) {
    return logistic_objective(features, labels, t.head(dim), t(dim), options.l2_lambda);
  };
  auto gradient = [&](const Vector& t) {
    return logistic_gradient(features, labels, t.head(dim), t(dim), options.l2_lambda);
  };

  double f = objective(theta);
  model.loss_history.push_back(f);
  Vector g = gradient(theta);
  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() < options.tol) break;

    const Vector z = augmented * theta;
    Vector curvature(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = sigmoid(z(i));
      curvature(i) = p * (1.0 - p);
    }
    Matrix hessian = augmented.transpose() * curvature.asDiagonal() * augmented / static_cast<double>(n);
    hessian.diagonal().head(dim).array() += options.l2_lambda;

    Vector step;
    double damping = 0.0;
    for (int attempt = 0; attempt < 20; ++attempt) {
      Matrix h = hessian;
      h.diagonal().array() += damping;
      Eigen::LDLT<Matrix> ldlt(h);
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        step = -ldlt.solve(g);
        if (step.allFinite() && g.dot(step) < 0.0) break;
      }
      step.resize(0);
      damping = damping == 0.0 ? 1e-10 * std::max(1.0, hessian.diagonal().maxCoeff()) : damping * 10.0;
    }
    if (step.size() == 0) step = -g;

    // Backtracking with the Armijo condition.
    const double slope = g.dot(step);
    double t = 1.0;
    bool accepted = false;
    Vector candidate;
    double f_new = f;
    for (int k = 0; k < 60; ++k) {
      candidate = theta + t * step;
      f_new = objective(candidate);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * t * slope && f_new < f) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // no representable decrease left
    theta = std::move(candidate);
    f = f_new;
    model.loss_history.push_back(f);
    g = gradient(theta);
  }

  model.weights = theta.head(dim);
  model.bias = theta(dim);
  model.gradient_norm = g.lpNorm<Eigen::Infinity>();
  model.converged = model.gradient_norm < options.tol;
  model.iterations = iter;
  return model;
}

std::pair<double, double> precision_f_score(std::span<const double> scores, std::span<const int> labels,
                                            double threshold) {
  if (scores.size() != labels.size()) throw DimensionError("scores and labels differ in length");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    const bool actual = labels[i] == 1;
    if (predicted && actual) ++tp;
    else if (predicted) ++fp;
    else if (actual) ++fn;
  }
  const double precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double f_score = tp == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
  return {precision, f_score};
}

double auc_score(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("scores and labels differ in length");
  std::size_t positives = 0;
  for (const int y : labels) positives += y == 1 ? 1 : 0;
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw DataError("AUC is undefined when labels contain a single class");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of midranks of the positives (ranks are 1-based; doubled to stay integral).
  double doubled_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double doubled_midrank = static_cast<double>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) doubled_rank_sum += doubled_midrank;
    }
    i = j + 1;
  }
  const double p = static_cast<double>(positives);
  const double u = 0.5 * doubled_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

Metrics compute_metrics(std::span<const double> scores, std::span<const int> labels, double threshold) {
  Metrics m;
  m.auc = auc_score(scores, labels);
  std::tie(m.precision, m.f_score) = precision_f_score(scores, labels, threshold);
  return m;
}

std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (static_cast<std::size_t>(folds) > n) throw DataError("more folds than examples");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw DataError("labels must be 0 or 1");
    by_class[labels[i]].push_back(i);
  }
  const bool leave_one_out = static_cast<std::size_t>(folds) == n;
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].empty()) throw DataError("class " + std::to_string(c) + " has no examples");
    if (!leave_one_out && by_class[c].size() < static_cast<std::size_t>(folds)) {
      throw DataError("class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                      " examples, fewer than the " + std::to_string(folds) + " folds");
    }
  }

  Rng rng(seed);
  std::vector<int> assignment(n, -1);
  std::size_t position = 0;
  for (auto& members : by_class) {
    rng.shuffle(std::span<std::size_t>(members));
    for (const std::size_t i : members) {
      assignment[i] = static_cast<int>(position % static_cast<std::size_t>(folds));
      ++position;
    }
  }
  return assignment;
}

MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (const double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (const double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

EvalReport cross_validate_features(const Matrix& features, std::span<const int> labels, const EvalOptions& options) {
  check_labels(labels, static_cast<std::size_t>(features.rows()));
  const std::vector<int> assignment = stratified_folds(labels, options.folds, options.seed);

  EvalReport report;
  report.folds.resize(static_cast<std::size_t>(options.folds));
  parallel_for(report.folds.size(), [&](std::size_t f) {
    std::vector<Eigen::Index> train_rows;
    std::vector<int> train_labels;
    FoldResult& fold = report.folds[f];
    std::vector<int> test_labels;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (assignment[i] == static_cast<int>(f)) {
        fold.test_indices.push_back(i);
        test_labels.push_back(labels[i]);
      } else {
        train_rows.push_back(static_cast<Eigen::Index>(i));
        train_labels.push_back(labels[i]);
      }
    }
    const Matrix train = features(train_rows, Eigen::all);
    const ClassifierModel model = train_logreg(train, train_labels, options.logreg);
    fold.converged = model.converged;
    std::vector<Eigen::Index> test_rows(fold.test_indices.begin(), fold.test_indices.end());
    const Vector proba = model.predict_proba(features(test_rows, Eigen::all));
    fold.scores.assign(proba.data(), proba.data() + proba.size());
    std::tie(fold.precision, fold.f_score) = precision_f_score(fold.scores, test_labels, options.threshold);
    const bool both = std::find(test_labels.begin(), test_labels.end(), 0) != test_labels.end() &&
                      std::find(test_labels.begin(), test_labels.end(), 1) != test_labels.end();
    if (both) fold.auc = auc_score(fold.scores, test_labels);
  });

  std::vector<double> precision, f_score, auc;
  std::vector<double> pooled_scores(labels.size());
  for (const auto& fold : report.folds) {
    precision.push_back(fold.precision);
    f_score.push_back(fold.f_score);
    if (fold.auc) auc.push_back(*fold.auc);
    for (std::size_t k = 0; k < fold.test_indices.size(); ++k) pooled_scores[fold.test_indices[k]] = fold.scores[k];
  }
  report.precision = summarize(precision);
  report.f_score = summarize(f_score);
  report.auc = summarize(auc);
  report.pooled_auc = auc_score(pooled_scores, labels);
  return report;
}

EvalReport cross_validate(const LabeledDataset& dataset, const EmbeddingTable& table, const EvalOptions& options) {
  dataset.validate();
  const EncodedDocuments encoded = encode_documents(dataset, table, options.weighting, options.oov);
  EvalReport report = cross_validate_features(encoded.features, dataset.labels, options);
  report.empty_documents = encoded.empty.size();
  return report;
}

std::string format_eval_report(const EvalReport& report) {
  std::ostringstream out;
  out << "fold\tprecision\tf_score\tauc\n";
  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    const auto& fold = report.folds[f];
    out << f << '\t' << format_double(fold.precision) << '\t' << format_double(fold.f_score) << '\t'
        << (fold.auc ? format_double(*fold.auc) : std::string("NA")) << '\n';
  }
  out << "mean\t" << format_double(report.precision.mean) << '\t' << format_double(report.f_score.mean) << '\t'
      << format_double(report.auc.mean) << '\n';
  out << "std\t" << format_double(report.precision.std) << '\t' << format_double(report.f_score.std) << '\t'
      << format_double(report.auc.std) << '\n';
  out << "pooled_auc\t" << format_double(report.pooled_auc) << '\n';
  return out.str();
}

}  // namespace daembed
