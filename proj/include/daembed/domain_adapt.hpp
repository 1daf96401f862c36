#pragma once

#include "daembed/cca_kernel.hpp"
#include "daembed/cca_linear.hpp"
#include "daembed/embedding_store.hpp"
#include "daembed/encode_eval.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace daembed {

/// Weights of the DA combination alpha * proj_ds + beta * proj_g.
struct DaCombiner {
  double alpha = 0.5;
  double beta = 0.5;
};

/// Row-wise alpha * proj_ds + beta * proj_g. Throws DimensionError on shape mismatch.
Matrix combine(const Matrix& proj_ds, const Matrix& proj_g, const DaCombiner& combiner = {});

/// |P - (aP + bQ)|^2 + |Q - (aP + bQ)|^2 summed over rows (Frobenius norms).
double combination_objective(const Matrix& proj_ds, const Matrix& proj_g, double alpha, double beta);

/// Closed-form minimizer of combination_objective() from its 2x2 normal
/// equations. When the system is singular (collinear or zero inputs) the
/// minimizers form a line containing (1/2, 1/2), which is returned.
/// Raises NumericError if the solve drifts more than 1e-9 from (1/2, 1/2).
DaCombiner solve_combination_weights(const Matrix& proj_ds, const Matrix& proj_g);

/// Concatenation baseline: [ds | gen] rows, column-centered, truncated to the
/// d leading singular directions; word vectors are U_d S_d.
EmbeddingTable concsvd(const AlignedPairSet& pairs, Eigen::Index d);

enum class AdaptMethod { cca, kcca, concsvd };

AdaptMethod parse_adapt_method(std::string_view name);
const char* to_string(AdaptMethod method) noexcept;

enum class SelectionMetric { f_score, auc };

SelectionMetric parse_selection_metric(std::string_view name);
const char* to_string(SelectionMetric metric) noexcept;

/// One bandwidth candidate for KCCA. `value` is used only for explicit_value.
struct SigmaChoice {
  SigmaRule rule = SigmaRule::median;
  double value = 0.0;

  std::string label() const;
};

struct AdaptConfig {
  AdaptMethod method = AdaptMethod::cca;
  /// Candidate projection dimensions; nullopt selects default_d_grid().
  std::optional<std::vector<Eigen::Index>> d_grid;
  std::vector<SigmaChoice> sigma_choices{{SigmaRule::median, 0.0}, {SigmaRule::twice_median, 0.0}};
  bool shared_sigma = false;  ///< one sigma from the stacked views instead of one per view
  double ridge = 1e-3;
  double kappa = 0.1;
  Eigen::Index sigma_sample_cap = 2000;
  SelectionMetric selection = SelectionMetric::f_score;
  EvalOptions eval;  ///< folds (default 10) and seed used for scoring

  void validate() const;
};

/// {8, 16, 32, 48, 64, bound} restricted to values <= bound, ascending, unique.
std::vector<Eigen::Index> default_d_grid(Eigen::Index bound);

/// One scored candidate.
struct CandidateResult {
  AdaptMethod method = AdaptMethod::cca;
  Eigen::Index d = 0;
  std::string sigma_rule;       ///< "-" for methods without a bandwidth
  double sigma_ds = 0.0;
  double sigma_g = 0.0;
  std::vector<double> fold_scores;
  double mean = 0.0;
  double std = 0.0;
  std::string failure;          ///< empty on success

  bool ok() const noexcept { return failure.empty(); }
};

struct SelectionReport {
  std::vector<CandidateResult> candidates;
  std::size_t selected = 0;  ///< index into candidates
  std::size_t shared_vocab = 0;
  std::size_t ds_only = 0;
  std::size_t gen_only = 0;
  SelectionMetric metric = SelectionMetric::f_score;
};

/// Tab-separated: method, d, sigma_rule, sigma_ds, sigma_g, fold scores,
/// mean, std, status. `header_comment` lines are written first, each
/// prefixed with "# ".
std::string format_selection_report(const SelectionReport& report,
                                    const std::vector<std::string>& header_comment = {});

struct AdaptResult {
  EmbeddingTable table;
  SelectionReport report;
};

/// Builds the DA vectors for the shared vocabulary from an already-fitted
/// alignment.
EmbeddingTable da_table_from_cca(const AlignedPairSet& pairs, const CcaModel& model);
EmbeddingTable da_table_from_kcca(const AlignedPairSet& pairs, const KccaModel& model);

/// Fits every (d, sigma) candidate, scores each DA table by cross-validation
/// on `dataset`, and returns the best one. Candidates are ordered by d then by
/// sigma_choices order; only a strictly better score replaces the incumbent.
/// A candidate whose fit throws is recorded as failed. Throws when all fail.
AdaptResult adapt(const EmbeddingTable& ds, const EmbeddingTable& gen, const AdaptConfig& config,
                  const LabeledDataset& dataset);

}  // namespace daembed
