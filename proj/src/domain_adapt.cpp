#include "daembed/domain_adapt.hpp"

#include "daembed/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace daembed {

Matrix combine(const Matrix& proj_ds, const Matrix& proj_g, const DaCombiner& combiner) {
  if (proj_ds.rows() != proj_g.rows() || proj_ds.cols() != proj_g.cols()) {
    throw DimensionError("cannot combine projections of different shapes");
  }
  if (!std::isfinite(combiner.alpha) || !std::isfinite(combiner.beta)) {
    throw ConfigError("combination weights must be finite");
  }
  return combiner.alpha * proj_ds + combiner.beta * proj_g;
}

double combination_objective(const Matrix& proj_ds, const Matrix& proj_g, double alpha, double beta) {
  if (proj_ds.rows() != proj_g.rows() || proj_ds.cols() != proj_g.cols()) {
    throw DimensionError("cannot combine projections of different shapes");
  }
  const Matrix mix = alpha * proj_ds + beta * proj_g;
  return (proj_ds - mix).squaredNorm() + (proj_g - mix).squaredNorm();
}

DaCombiner solve_combination_weights(const Matrix& proj_ds, const Matrix& proj_g) {
  if (proj_ds.rows() != proj_g.rows() || proj_ds.cols() != proj_g.cols()) {
    throw DimensionError("cannot combine projections of different shapes");
  }
  // Setting the gradient to zero gives
  //   [pp pq; pq qq] [alpha; beta] = 1/2 [pp + pq; pq + qq].
  const double pp = proj_ds.squaredNorm();
  const double qq = proj_g.squaredNorm();
  const double pq = (proj_ds.array() * proj_g.array()).sum();
  const double det = pp * qq - pq * pq;
  if (!(det > 1e-6 * pp * qq)) return {};  // collinear or zero: (1/2, 1/2) is on the minimizing line

  const double r1 = 0.5 * (pp + pq);
  const double r2 = 0.5 * (pq + qq);
  DaCombiner out{(r1 * qq - pq * r2) / det, (pp * r2 - pq * r1) / det};
  if (std::abs(out.alpha - 0.5) > 1e-9 || std::abs(out.beta - 0.5) > 1e-9) {
    throw NumericError("combination weight solve drifted from (1/2, 1/2)");
  }
  return out;
}

EmbeddingTable concsvd(const AlignedPairSet& pairs, Eigen::Index d) {
  const Eigen::Index d1 = pairs.ds_vectors.cols();
  const Eigen::Index d2 = pairs.gen_vectors.cols();
  if (d < 1 || d > d1 + d2) {
    throw DimensionError("concSVD dimension d=" + std::to_string(d) + " must lie in [1, d1+d2=" +
                         std::to_string(d1 + d2) + "]");
  }
  Matrix joined(pairs.ds_vectors.rows(), d1 + d2);
  joined << pairs.ds_vectors, pairs.gen_vectors;
  joined.rowwise() -= joined.colwise().mean();
  const TruncatedSvd svd = truncated_svd(joined, d);
  if (svd.s.size() < d) {
    throw NumericError("concatenated matrix has rank " + std::to_string(svd.s.size()) + " < d=" + std::to_string(d));
  }
  return EmbeddingTable(pairs.vocab, svd.u * svd.s.asDiagonal());
}

AdaptMethod parse_adapt_method(std::string_view name) {
  if (name == "cca") return AdaptMethod::cca;
  if (name == "kcca") return AdaptMethod::kcca;
  if (name == "concsvd") return AdaptMethod::concsvd;
  throw ConfigError("unknown adaptation method '" + std::string(name) + "'");
}

const char* to_string(AdaptMethod method) noexcept {
  switch (method) {
    case AdaptMethod::cca: return "cca";
    case AdaptMethod::kcca: return "kcca";
    case AdaptMethod::concsvd: return "concsvd";
  }
  return "cca";
}

SelectionMetric parse_selection_metric(std::string_view name) {
  if (name == "f_score" || name == "f-score" || name == "f1") return SelectionMetric::f_score;
  if (name == "auc") return SelectionMetric::auc;
  throw ConfigError("unknown selection metric '" + std::string(name) + "'");
}

const char* to_string(SelectionMetric metric) noexcept {
  return metric == SelectionMetric::f_score ? "f_score" : "auc";
}

std::string SigmaChoice::label() const {
  if (rule == SigmaRule::explicit_value) return "explicit:" + format_double(value);
  return to_string(rule);
}

void AdaptConfig::validate() const {
  if (d_grid) {
    if (d_grid->empty()) throw ConfigError("d_grid is empty");
    for (const auto d : *d_grid) {
      if (d < 1) throw ConfigError("d_grid entries must be positive");
    }
  }
  if (eval.folds < 2) throw ConfigError("cv_folds must be >= 2");
  if (!(ridge >= 0.0)) throw ConfigError("ridge must be non-negative");
  if (!(kappa >= 0.0)) throw ConfigError("kappa must be non-negative");
  if (method == AdaptMethod::kcca) {
    if (sigma_choices.empty()) throw ConfigError("KCCA needs at least one sigma choice");
    for (const auto& c : sigma_choices) {
      if (c.rule == SigmaRule::explicit_value && !(c.value > 0.0)) {
        throw ConfigError("explicit sigma must be positive");
      }
    }
  }
}

std::vector<Eigen::Index> default_d_grid(Eigen::Index bound) {
  std::vector<Eigen::Index> grid;
  for (const Eigen::Index d : {Eigen::Index{8}, Eigen::Index{16}, Eigen::Index{32}, Eigen::Index{48},
                               Eigen::Index{64}, bound}) {
    if (d >= 1 && d <= bound) grid.push_back(d);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::string format_selection_report(const SelectionReport& report, const std::vector<std::string>& header_comment) {
  std::ostringstream out;
  for (const auto& line : header_comment) out << "# " << line << '\n';
  out << "# shared_vocab=" << report.shared_vocab << " ds_only=" << report.ds_only << " gen_only=" << report.gen_only
      << " metric=" << to_string(report.metric) << '\n';
  out << "method\td\tsigma_rule\tsigma_ds\tsigma_g\tfold_scores\tmean\tstd\tstatus\tselected\n";
  for (std::size_t i = 0; i < report.candidates.size(); ++i) {
    const auto& c = report.candidates[i];
    out << to_string(c.method) << '\t' << c.d << '\t' << c.sigma_rule << '\t';
    if (c.method == AdaptMethod::kcca && c.sigma_ds > 0.0) {
      out << format_double(c.sigma_ds) << '\t' << format_double(c.sigma_g) << '\t';
    } else {
      out << "-\t-\t";
    }
    for (std::size_t f = 0; f < c.fold_scores.size(); ++f) {
      out << (f ? "," : "") << format_double(c.fold_scores[f]);
    }
    if (c.fold_scores.empty()) out << '-';
    if (c.ok()) {
      out << '\t' << format_double(c.mean) << '\t' << format_double(c.std) << "\tok";
    } else {
      std::string reason = c.failure;
      std::replace(reason.begin(), reason.end(), '\t', ' ');
      std::replace(reason.begin(), reason.end(), '\n', ' ');
      out << "\t-\t-\tfailed: " << reason;
    }
    out << '\t' << (i == report.selected && c.ok() ? "*" : "") << '\n';
  }
  return out.str();
}

EmbeddingTable da_table_from_cca(const AlignedPairSet& pairs, const CcaModel& model) {
  const Matrix proj_ds = cca_project(model, pairs.ds_vectors, View::ds);
  const Matrix proj_g = cca_project(model, pairs.gen_vectors, View::gen);
  return EmbeddingTable(pairs.vocab, combine(proj_ds, proj_g, solve_combination_weights(proj_ds, proj_g)));
}

EmbeddingTable da_table_from_kcca(const AlignedPairSet& pairs, const KccaModel& model) {
  const Matrix proj_ds = kcca_project_all(model, View::ds);
  const Matrix proj_g = kcca_project_all(model, View::gen);
  return EmbeddingTable(pairs.vocab, combine(proj_ds, proj_g, solve_combination_weights(proj_ds, proj_g)));
}

namespace {

/// Fits for one bandwidth setting at the largest d and truncates for the
/// rest; falls back to per-d fits if the large fit fails.
template <typename Model, typename Fit>
std::map<Eigen::Index, Model> fit_nested(const std::vector<Eigen::Index>& grid, Fit fit,
                                         std::map<Eigen::Index, std::string>& failures) {
  std::map<Eigen::Index, Model> models;
  try {
    const Model full = fit(grid.back());
    for (const auto d : grid) models.emplace(d, truncate(full, d));
    return models;
  } catch (const Error&) {
  }
  for (const auto d : grid) {
    try {
      models.emplace(d, fit(d));
    } catch (const Error& e) {
      failures[d] = e.what();
    }
  }
  return models;
}

void score_candidate(CandidateResult& c, const EmbeddingTable& table, const AdaptConfig& config,
                     const LabeledDataset& dataset) {
  const EvalReport report = cross_validate(dataset, table, config.eval);
  for (const auto& fold : report.folds) {
    if (config.selection == SelectionMetric::f_score) {
      c.fold_scores.push_back(fold.f_score);
    } else if (fold.auc) {
      c.fold_scores.push_back(*fold.auc);
    }
  }
  const MetricSummary s = summarize(c.fold_scores);
  c.mean = s.mean;
  c.std = s.std;
}

}  // namespace

AdaptResult adapt(const EmbeddingTable& ds, const EmbeddingTable& gen, const AdaptConfig& config,
                  const LabeledDataset& dataset) {
  config.validate();
  dataset.validate();
  const AlignedPairSet pairs = intersect(ds, gen);
  const auto n = static_cast<Eigen::Index>(pairs.size());
  const Eigen::Index d1 = ds.dim();
  const Eigen::Index d2 = gen.dim();

  Eigen::Index bound = std::min(d1, d2);
  if (config.method == AdaptMethod::concsvd) bound = d1 + d2;
  if (config.method == AdaptMethod::kcca) bound = std::min(bound, n - 1);

  std::vector<Eigen::Index> grid = config.d_grid ? *config.d_grid : default_d_grid(bound);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (const auto d : grid) {
    if (d > bound) {
      throw DimensionError("d=" + std::to_string(d) + " exceeds the bound " + std::to_string(bound) + " for " +
                           to_string(config.method));
    }
  }
  if (grid.empty()) throw ConfigError("d_grid is empty after applying the bound " + std::to_string(bound));

  AdaptResult result;
  SelectionReport& report = result.report;
  report.shared_vocab = pairs.size();
  report.ds_only = pairs.ds_only;
  report.gen_only = pairs.gen_only;
  report.metric = config.selection;

  std::optional<EmbeddingTable> best;
  auto consider = [&](CandidateResult c, const EmbeddingTable* table) {
    if (table != nullptr) {
      try {
        score_candidate(c, *table, config, dataset);
      } catch (const Error& e) {
        c.failure = e.what();
      }
    }
    report.candidates.push_back(std::move(c));
    const auto& added = report.candidates.back();
    if (!added.ok()) return;
    if (!best || added.mean > report.candidates[report.selected].mean) {
      report.selected = report.candidates.size() - 1;
      best = *table;
    }
  };

  // Per d, candidates follow sigma_choices order; ties keep the earlier one.
  switch (config.method) {
    case AdaptMethod::cca: {
      std::map<Eigen::Index, std::string> failures;
      const auto models = fit_nested<CcaModel>(
          grid, [&](Eigen::Index d) { return cca_fit(pairs, d, config.ridge); }, failures);
      for (const auto d : grid) {
        CandidateResult c;
        c.method = AdaptMethod::cca;
        c.d = d;
        c.sigma_rule = "-";
        if (const auto it = models.find(d); it != models.end()) {
          try {
            const EmbeddingTable table = da_table_from_cca(pairs, it->second);
            consider(c, &table);
          } catch (const Error& e) {
            c.failure = e.what();
            consider(c, nullptr);
          }
        } else {
          c.failure = failures[d];
          consider(c, nullptr);
        }
      }
      break;
    }
    case AdaptMethod::kcca: {
      struct Fitted {
        SigmaChoice choice;
        KernelConfig cfg_ds, cfg_g;
        std::map<Eigen::Index, KccaModel> models;
        std::map<Eigen::Index, std::string> failures;
      };
      std::vector<Fitted> fitted;
      for (const auto& choice : config.sigma_choices) {
        Fitted f{choice, {}, {}, {}, {}};
        try {
          if (config.shared_sigma && choice.rule != SigmaRule::explicit_value) {
            double mu = pooled_median_bandwidth(pairs.ds_vectors, pairs.gen_vectors, config.sigma_sample_cap,
                                                config.eval.seed);
            if (choice.rule == SigmaRule::twice_median) mu *= 2.0;
            f.cfg_ds = {mu, choice.rule, config.kappa};
            f.cfg_g = f.cfg_ds;
          } else {
            f.cfg_ds = make_kernel_config(choice.rule, config.kappa, pairs.ds_vectors, choice.value,
                                          config.sigma_sample_cap, config.eval.seed);
            f.cfg_g = make_kernel_config(choice.rule, config.kappa, pairs.gen_vectors, choice.value,
                                         config.sigma_sample_cap, config.eval.seed);
          }
          f.models = fit_nested<KccaModel>(
              grid, [&](Eigen::Index d) { return kcca_fit(pairs, d, f.cfg_ds, f.cfg_g); }, f.failures);
        } catch (const Error& e) {
          for (const auto d : grid) f.failures[d] = e.what();
        }
        fitted.push_back(std::move(f));
      }
      for (const auto d : grid) {
        for (auto& f : fitted) {
          CandidateResult c;
          c.method = AdaptMethod::kcca;
          c.d = d;
          c.sigma_rule = f.choice.label();
          c.sigma_ds = f.cfg_ds.sigma;
          c.sigma_g = f.cfg_g.sigma;
          if (const auto it = f.models.find(d); it != f.models.end()) {
            try {
              const EmbeddingTable table = da_table_from_kcca(pairs, it->second);
              consider(c, &table);
            } catch (const Error& e) {
              c.failure = e.what();
              consider(c, nullptr);
            }
          } else {
            c.failure = f.failures[d];
            consider(c, nullptr);
          }
        }
      }
      break;
    }
    case AdaptMethod::concsvd: {
      for (const auto d : grid) {
        CandidateResult c;
        c.method = AdaptMethod::concsvd;
        c.d = d;
        c.sigma_rule = "-";
        try {
          const EmbeddingTable table = concsvd(pairs, d);
          consider(c, &table);
        } catch (const Error& e) {
          c.failure = e.what();
          consider(c, nullptr);
        }
      }
      break;
    }
  }

  if (!best) {
    std::string reasons;
    for (const auto& c : report.candidates) reasons += "\n  d=" + std::to_string(c.d) + " " + c.sigma_rule + ": " + c.failure;
    throw NumericError(std::string("every ") + to_string(config.method) + " candidate failed:" + reasons);
  }
  result.table = std::move(*best);
  return result;
}

}  // namespace daembed
