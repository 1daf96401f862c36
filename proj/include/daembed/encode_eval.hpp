#pragma once

#include "daembed/embedding_store.hpp"
#include "daembed/lsa.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace daembed {

/// Binary-labeled tokenized documents.
struct LabeledDataset {
  std::vector<Document> documents;
  std::vector<int> labels;  ///< 0 or 1
  std::string name;

  /// Throws DataError on length mismatch, labels outside {0,1} or a missing class.
  void validate() const;
  std::size_t size() const noexcept { return documents.size(); }
};

/// Reads "text<TAB>label" lines and tokenizes the text with tokenize_line().
/// Documents that tokenize to nothing are kept (they encode to zero vectors).
LabeledDataset load_labeled_dataset(const std::filesystem::path& path, std::string name = {});

enum class DocWeighting { uniform, tf_idf };
enum class OovPolicy { skip, zero };

DocWeighting parse_doc_weighting(std::string_view name);
OovPolicy parse_oov_policy(std::string_view name);
const char* to_string(DocWeighting weighting) noexcept;
const char* to_string(OovPolicy policy) noexcept;

struct EncodedDocuments {
  Matrix features;                    ///< |D| x dim
  std::vector<std::size_t> empty;     ///< documents with no in-vocabulary token
};

/// Weighted mean of each document's token vectors, weights renormalized over
/// the tokens that contribute. Uniform weights count every occurrence once;
/// tf-idf weights each occurrence by ln(|D| / df) computed over the dataset.
/// If every contributing weight is zero the uniform mean is used instead.
/// With OovPolicy::zero, OOV occurrences add a zero vector but keep their weight.
/// Throws DataError when no document has an in-vocabulary token.
EncodedDocuments encode_documents(const LabeledDataset& dataset, const EmbeddingTable& table,
                                  DocWeighting weighting = DocWeighting::uniform,
                                  OovPolicy oov = OovPolicy::skip);

struct ClassifierModel {
  Vector weights;
  double bias = 0.0;
  double l2_lambda = 0.0;
  double gradient_norm = 0.0;  ///< infinity norm at termination
  int iterations = 0;
  bool converged = false;
  std::vector<double> loss_history;  ///< objective after each accepted step, starting at w = 0

  /// Probability of the positive class for each row.
  Vector predict_proba(const Matrix& features) const;
};

struct LogregOptions {
  double l2_lambda = 1.0;
  double tol = 1e-6;
  int max_iter = 500;
};

/// Objective: mean logistic loss + (lambda / 2) |w|^2, bias unpenalized.
double logistic_objective(const Matrix& features, std::span<const int> labels, const Vector& weights,
                          double bias, double l2_lambda);

/// Gradient of logistic_objective(); the last entry is the bias component.
Vector logistic_gradient(const Matrix& features, std::span<const int> labels, const Vector& weights,
                         double bias, double l2_lambda);

/// Damped Newton iterations with backtracking from w = 0, b = 0.
/// Throws DataError for single-class labels and NumericError for non-finite features.
ClassifierModel train_logreg(const Matrix& features, std::span<const int> labels,
                             const LogregOptions& options = {});

struct Metrics {
  double precision = 0.0;
  double f_score = 0.0;
  double auc = 0.0;
};

/// Positive-class precision and F1 at `score >= threshold` (0 when no positive
/// prediction / no true positive), and AUC as the Mann-Whitney statistic with
/// ties counted 1/2. Throws DataError when labels hold a single class.
Metrics compute_metrics(std::span<const double> scores, std::span<const int> labels,
                        double threshold = 0.5);

/// Precision and F1 only; defined for single-class labels too.
std::pair<double, double> precision_f_score(std::span<const double> scores,
                                            std::span<const int> labels, double threshold = 0.5);

/// Mann-Whitney AUC with midranks.
double auc_score(std::span<const double> scores, std::span<const int> labels);

/// Fold id per example from a seeded per-class shuffle, dealt round-robin with
/// the dealing position carried from one class to the next. Requires every
/// class to have at least `folds` examples, unless folds == n (leave-one-out).
std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed);

struct EvalOptions {
  int folds = 10;
  std::uint64_t seed = 0;
  DocWeighting weighting = DocWeighting::uniform;
  OovPolicy oov = OovPolicy::skip;
  LogregOptions logreg;
  double threshold = 0.5;
};

struct FoldResult {
  std::vector<std::size_t> test_indices;
  std::vector<double> scores;  ///< predicted probabilities, aligned with test_indices
  double precision = 0.0;
  double f_score = 0.0;
  std::optional<double> auc;   ///< absent when the held-out fold has one class
  bool converged = true;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  ///< sample (n - 1) standard deviation; 0 for one value
};

struct EvalReport {
  std::vector<FoldResult> folds;
  MetricSummary precision;
  MetricSummary f_score;
  MetricSummary auc;        ///< over folds with a defined AUC
  double pooled_auc = 0.0;  ///< AUC of all out-of-fold scores together
  std::size_t empty_documents = 0;
};

MetricSummary summarize(std::span<const double> values);

/// Encodes the dataset with `table`, then runs stratified k-fold CV of the
/// logistic regression. Deterministic for a fixed seed.
EvalReport cross_validate(const LabeledDataset& dataset, const EmbeddingTable& table,
                          const EvalOptions& options = {});

/// CV on precomputed features.
EvalReport cross_validate_features(const Matrix& features, std::span<const int> labels,
                                   const EvalOptions& options = {});

/// One line per fold (fold, precision, f_score, auc) followed by mean/std rows.
std::string format_eval_report(const EvalReport& report);

}  // namespace daembed
