#pragma once

#include "daembed/domain_adapt.hpp"
#include "daembed/encode_eval.hpp"
#include "daembed/lsa.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace daembed {

struct EmbeddingSource {
  std::string name;  ///< short label used in file names and table rows, e.g. "glv"
  std::filesystem::path path;
};

/// Everything the lsa / adapt / eval / pipeline commands read.
///
/// Parsed from one JSON document:
///
///   {
///     "seed": 13, "output_dir": "out",
///     "dataset": {"path": "yelp_labelled.txt", "name": "yelp"},
///     "generic": [{"name": "glv", "path": "glove.6B.100d.txt"}],
///     "ds_source": {"type": "lsa"}  |  {"type": "file", "name": "dsw2v", "path": "..."},
///     "methods": ["cca", "kcca", "concsvd", "generic-only", "ds-only"],
///     "lowercase_embeddings": false,
///     "lsa": {"k": 70, "weighting": "tf-idf", "scaling_power": 1.0},
///     "adapt": {"d_grid": [8, 16], "ridge": 1e-3, "kappa": 0.1,
///               "sigma_rules": ["median", "twice-median", 2.5], "shared_sigma": false,
///               "sigma_sample_cap": 2000, "selection_metric": "f_score"},
///     "eval": {"folds": 10, "weighting": "uniform", "oov": "skip", "l2_lambda": 1.0,
///              "tol": 1e-6, "max_iter": 500, "threshold": 0.5,
///              "embeddings": [{"name": "...", "path": "..."}]}
///   }
///
/// Relative paths resolve against the config file's directory. Every key
/// except dataset.path has a default.
struct PipelineConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  std::filesystem::path dataset_path;
  std::string dataset_name;
  std::vector<EmbeddingSource> generic;
  bool ds_from_lsa = true;
  EmbeddingSource ds_file;  ///< used when !ds_from_lsa
  std::vector<std::string> methods{"cca", "kcca", "concsvd", "generic-only", "ds-only"};
  bool lowercase_embeddings = false;

  Eigen::Index lsa_k = 70;
  TermWeighting lsa_weighting = TermWeighting::tf_idf;
  double lsa_scaling_power = 1.0;

  std::optional<std::vector<Eigen::Index>> d_grid;
  double ridge = 1e-3;
  double kappa = 0.1;
  std::vector<SigmaChoice> sigma_choices{{SigmaRule::median, 0.0}, {SigmaRule::twice_median, 0.0}};
  bool shared_sigma = false;
  Eigen::Index sigma_sample_cap = 2000;
  SelectionMetric selection = SelectionMetric::f_score;

  EvalOptions eval;  ///< eval.seed is kept equal to seed
  std::vector<EmbeddingSource> extra_embeddings;

  /// Name of the DS embedding: "lsa" or ds_file.name.
  std::string ds_name() const;

  /// Canonical JSON of the effective settings (after overrides).
  nlohmann::json to_json() const;

  /// 16 hex digits of FNV-1a over to_json() without output_dir.
  std::string hash() const;

  /// Checks names, ranges and that referenced input files exist.
  void validate() const;
};

/// Throws ConfigError for unknown keys' values, bad types or unknown method names.
PipelineConfig parse_pipeline_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Output locations inside output_dir.
std::filesystem::path lsa_embedding_path(const PipelineConfig& cfg);
std::filesystem::path da_embedding_path(const PipelineConfig& cfg, AdaptMethod method, const std::string& generic);
std::filesystem::path eval_table_path(const PipelineConfig& cfg);
std::filesystem::path eval_summary_path(const PipelineConfig& cfg);

/// Tokenizes the dataset, trains LSA and writes the DS embedding file plus a
/// .meta.json sidecar (vocab size, dim, singular values, config hash, seed).
std::filesystem::path cmd_lsa(const PipelineConfig& cfg);

struct AdaptOutput {
  std::filesystem::path embeddings;
  std::filesystem::path report;
};

/// Runs adapt() for every DA method in cfg.methods and every generic source.
std::vector<AdaptOutput> cmd_adapt(const PipelineConfig& cfg);

/// One evaluated embedding source.
struct EvalRow {
  std::string name;
  EvalReport report;
};

/// Cross-validates every configured embedding source with shared folds and
/// writes a tab-separated table and a human-readable summary.
std::vector<EvalRow> cmd_eval(const PipelineConfig& cfg);

/// lsa (when the DS source is LSA), then adapt, then eval.
std::vector<EvalRow> cmd_pipeline(const PipelineConfig& cfg);

/// "Embedding  Avg Precision  Avg F-score  Avg AUC" with mean +- std in percent.
std::string format_eval_summary(const std::vector<EvalRow>& rows, const std::string& dataset_name,
                                const std::vector<std::string>& header_comment = {});

/// Machine-readable counterpart of format_eval_summary().
std::string format_eval_table(const std::vector<EvalRow>& rows, const std::vector<std::string>& header_comment = {});

}  // namespace daembed
