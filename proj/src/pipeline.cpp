#include "daembed/pipeline.hpp"

#include "daembed/error.hpp"
#include "json_matrix.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace daembed {
namespace {

namespace fs = std::filesystem;

const std::array<std::string_view, 5> kMethods{"cca", "kcca", "concsvd", "generic-only", "ds-only"};
const std::array<AdaptMethod, 3> kAdaptMethods{AdaptMethod::cca, AdaptMethod::kcca, AdaptMethod::concsvd};

[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context) {
  throw Error(e.category(), context + ": " + e.what());
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

EmbeddingSource parse_source(const nlohmann::json& j, const fs::path& base, const std::string& where) {
  check_keys(j, {"name", "path", "type"}, where);
  EmbeddingSource s;
  s.name = j.at("name").get<std::string>();
  s.path = resolve(base, j.at("path").get<std::string>());
  if (s.name.empty() || s.name.find_first_of(" \t/\\") != std::string::npos) {
    throw ConfigError(where + ": name must be non-empty without spaces or slashes");
  }
  return s;
}

bool has_method(const PipelineConfig& cfg, std::string_view m) {
  return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end();
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string> provenance(const PipelineConfig& cfg) {
  return {"daembed config_hash=" + cfg.hash() + " seed=" + std::to_string(cfg.seed)};
}

EmbeddingTable load_source(const EmbeddingSource& src, bool lowercase) {
  try {
    EmbeddingTable table = load_embeddings(src.path);
    return lowercase ? lowercase_tokens(table) : table;
  } catch (const Error& e) {
    rethrow_with_context(e, "embedding '" + src.name + "'");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failure on " + path.string());
}

fs::path meta_path(const fs::path& embedding_path) {
  fs::path p = embedding_path;
  p.replace_extension(".meta.json");
  return p;
}

void ensure_output_dir(const PipelineConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.output_dir.string() + ": " + ec.message());
}

LabeledDataset load_dataset(const PipelineConfig& cfg) {
  try {
    return load_labeled_dataset(cfg.dataset_path, cfg.dataset_name);
  } catch (const Error& e) {
    rethrow_with_context(e, cfg.dataset_path.string());
  }
}

EmbeddingTable load_ds_table(const PipelineConfig& cfg) {
  if (!cfg.ds_from_lsa) return load_source(cfg.ds_file, cfg.lowercase_embeddings);
  const fs::path path = lsa_embedding_path(cfg);
  if (!fs::exists(path)) throw ConfigError("LSA embeddings " + path.string() + " not found; run 'lsa' first");
  return load_source({"lsa", path}, false);
}

std::string percent(const MetricSummary& m) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.2f \xC2\xB1 %.2f", 100.0 * m.mean, 100.0 * m.std);
  return buf.data();
}

}  // namespace

std::string PipelineConfig::ds_name() const { return ds_from_lsa ? "lsa" : ds_file.name; }

nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["output_dir"] = output_dir.generic_string();
  j["dataset"] = {{"path", dataset_path.generic_string()}, {"name", dataset_name}};
  j["generic"] = nlohmann::json::array();
  for (const auto& g : generic) j["generic"].push_back({{"name", g.name}, {"path", g.path.generic_string()}});
  if (ds_from_lsa) {
    j["ds_source"] = {{"type", "lsa"}};
  } else {
    j["ds_source"] = {{"type", "file"}, {"name", ds_file.name}, {"path", ds_file.path.generic_string()}};
  }
  j["methods"] = methods;
  j["lowercase_embeddings"] = lowercase_embeddings;
  j["lsa"] = {{"k", lsa_k}, {"weighting", to_string(lsa_weighting)}, {"scaling_power", lsa_scaling_power}};
  nlohmann::json adapt_j;
  if (d_grid) adapt_j["d_grid"] = *d_grid;
  adapt_j["ridge"] = ridge;
  adapt_j["kappa"] = kappa;
  adapt_j["sigma_rules"] = nlohmann::json::array();
  for (const auto& c : sigma_choices) {
    if (c.rule == SigmaRule::explicit_value) {
      adapt_j["sigma_rules"].push_back(c.value);
    } else {
      adapt_j["sigma_rules"].push_back(to_string(c.rule));
    }
  }
  adapt_j["shared_sigma"] = shared_sigma;
  adapt_j["sigma_sample_cap"] = sigma_sample_cap;
  adapt_j["selection_metric"] = to_string(selection);
  j["adapt"] = adapt_j;
  nlohmann::json eval_j = {{"folds", eval.folds},
                           {"weighting", to_string(eval.weighting)},
                           {"oov", to_string(eval.oov)},
                           {"l2_lambda", eval.logreg.l2_lambda},
                           {"tol", eval.logreg.tol},
                           {"max_iter", eval.logreg.max_iter},
                           {"threshold", eval.threshold}};
  eval_j["embeddings"] = nlohmann::json::array();
  for (const auto& e : extra_embeddings) {
    eval_j["embeddings"].push_back({{"name", e.name}, {"path", e.path.generic_string()}});
  }
  j["eval"] = eval_j;
  return j;
}

std::string PipelineConfig::hash() const {
  // Where the outputs go does not change what they contain.
  nlohmann::json j = to_json();
  j.erase("output_dir");
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf.data();
}

void PipelineConfig::validate() const {
  if (methods.empty()) throw ConfigError("method list is empty");
  for (const auto& m : methods) {
    if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end()) {
      throw ConfigError("unknown method '" + m + "'");
    }
  }
  if (dataset_path.empty()) throw ConfigError("dataset.path is required");
  if (!fs::exists(dataset_path)) throw ConfigError("dataset " + dataset_path.string() + " does not exist");
  std::set<std::string> names;
  for (const auto& g : generic) {
    if (!fs::exists(g.path)) throw ConfigError("generic embedding " + g.path.string() + " does not exist");
    if (!names.insert(g.name).second) throw ConfigError("duplicate embedding name '" + g.name + "'");
  }
  if (!ds_from_lsa && !fs::exists(ds_file.path)) {
    throw ConfigError("DS embedding " + ds_file.path.string() + " does not exist");
  }
  for (const auto& e : extra_embeddings) {
    if (!fs::exists(e.path)) throw ConfigError("embedding " + e.path.string() + " does not exist");
  }
  if (lsa_k < 1) throw ConfigError("lsa.k must be positive");
  if (!(lsa_scaling_power >= 0.0 && lsa_scaling_power <= 1.0)) throw ConfigError("lsa.scaling_power must lie in [0, 1]");
  if (eval.folds < 2) throw ConfigError("eval.folds must be >= 2");
  if (!(ridge >= 0.0) || !(kappa >= 0.0)) throw ConfigError("ridge and kappa must be non-negative");
  if (d_grid) {
    if (d_grid->empty()) throw ConfigError("adapt.d_grid is empty");
    for (const auto d : *d_grid) {
      if (d < 1) throw ConfigError("adapt.d_grid entries must be positive");
    }
  }
}

PipelineConfig parse_pipeline_config(const nlohmann::json& j, const fs::path& base_dir) {
  PipelineConfig cfg;
  try {
    check_keys(j, {"seed", "output_dir", "dataset", "generic", "ds_source", "methods", "lowercase_embeddings", "lsa",
                   "adapt", "eval"},
               "config");
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.output_dir = resolve(base_dir, j.value("output_dir", std::string("out")));
    const auto& ds = j.at("dataset");
    check_keys(ds, {"path", "name"}, "dataset");
    cfg.dataset_path = resolve(base_dir, ds.at("path").get<std::string>());
    cfg.dataset_name = ds.value("name", cfg.dataset_path.stem().string());
    if (j.contains("generic")) {
      for (const auto& g : j.at("generic")) cfg.generic.push_back(parse_source(g, base_dir, "generic"));
    }
    if (j.contains("ds_source")) {
      const auto& src = j.at("ds_source");
      const auto type = src.at("type").get<std::string>();
      if (type == "lsa") {
        check_keys(src, {"type"}, "ds_source");
        cfg.ds_from_lsa = true;
      } else if (type == "file") {
        cfg.ds_from_lsa = false;
        cfg.ds_file = parse_source(src, base_dir, "ds_source");
      } else {
        throw ConfigError("ds_source.type must be 'lsa' or 'file'");
      }
    }
    if (j.contains("methods")) cfg.methods = j.at("methods").get<std::vector<std::string>>();
    cfg.lowercase_embeddings = j.value("lowercase_embeddings", false);
    if (j.contains("lsa")) {
      const auto& l = j.at("lsa");
      check_keys(l, {"k", "weighting", "scaling_power"}, "lsa");
      cfg.lsa_k = l.value("k", cfg.lsa_k);
      cfg.lsa_weighting = parse_term_weighting(l.value("weighting", std::string("tf-idf")));
      cfg.lsa_scaling_power = l.value("scaling_power", cfg.lsa_scaling_power);
    }
    if (j.contains("adapt")) {
      const auto& a = j.at("adapt");
      check_keys(a, {"d_grid", "ridge", "kappa", "sigma_rules", "shared_sigma", "sigma_sample_cap", "selection_metric"},
                 "adapt");
      if (a.contains("d_grid")) cfg.d_grid = a.at("d_grid").get<std::vector<Eigen::Index>>();
      cfg.ridge = a.value("ridge", cfg.ridge);
      cfg.kappa = a.value("kappa", cfg.kappa);
      if (a.contains("sigma_rules")) {
        cfg.sigma_choices.clear();
        for (const auto& r : a.at("sigma_rules")) {
          if (r.is_number()) {
            cfg.sigma_choices.push_back({SigmaRule::explicit_value, r.get<double>()});
          } else {
            const SigmaRule rule = parse_sigma_rule(r.get<std::string>());
            if (rule == SigmaRule::explicit_value) throw ConfigError("give explicit sigmas as numbers");
            cfg.sigma_choices.push_back({rule, 0.0});
          }
        }
      }
      cfg.shared_sigma = a.value("shared_sigma", cfg.shared_sigma);
      cfg.sigma_sample_cap = a.value("sigma_sample_cap", cfg.sigma_sample_cap);
      cfg.selection = parse_selection_metric(a.value("selection_metric", std::string("f_score")));
    }
    if (j.contains("eval")) {
      const auto& e = j.at("eval");
      check_keys(e, {"folds", "weighting", "oov", "l2_lambda", "tol", "max_iter", "threshold", "embeddings"}, "eval");
      cfg.eval.folds = e.value("folds", cfg.eval.folds);
      cfg.eval.weighting = parse_doc_weighting(e.value("weighting", std::string("uniform")));
      cfg.eval.oov = parse_oov_policy(e.value("oov", std::string("skip")));
      cfg.eval.logreg.l2_lambda = e.value("l2_lambda", cfg.eval.logreg.l2_lambda);
      cfg.eval.logreg.tol = e.value("tol", cfg.eval.logreg.tol);
      cfg.eval.logreg.max_iter = e.value("max_iter", cfg.eval.logreg.max_iter);
      cfg.eval.threshold = e.value("threshold", cfg.eval.threshold);
      if (e.contains("embeddings")) {
        for (const auto& x : e.at("embeddings")) cfg.extra_embeddings.push_back(parse_source(x, base_dir, "eval.embeddings"));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  cfg.eval.seed = cfg.seed;
  for (const auto& m : cfg.methods) {
    if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end()) {
      throw ConfigError("unknown method '" + m + "' (expected cca, kcca, concsvd, generic-only, ds-only)");
    }
  }
  return cfg;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_pipeline_config(j, path.parent_path());
}

fs::path lsa_embedding_path(const PipelineConfig& cfg) { return cfg.output_dir / ("lsa-" + cfg.dataset_name + ".txt"); }

fs::path da_embedding_path(const PipelineConfig& cfg, AdaptMethod method, const std::string& generic) {
  return cfg.output_dir / (std::string(to_string(method)) + "-" + generic + "-" + cfg.ds_name() + ".txt");
}

fs::path eval_table_path(const PipelineConfig& cfg) { return cfg.output_dir / ("eval-" + cfg.dataset_name + ".tsv"); }

fs::path eval_summary_path(const PipelineConfig& cfg) { return cfg.output_dir / ("eval-" + cfg.dataset_name + ".txt"); }

fs::path cmd_lsa(const PipelineConfig& cfg) {
  if (cfg.dataset_path.empty()) throw ConfigError("dataset.path is required");
  LsaResult lsa;
  Corpus corpus;
  try {
    corpus = tokenize(read_corpus_lines(cfg.dataset_path));
    lsa = lsa_train(build_term_doc(corpus, cfg.lsa_weighting), corpus.vocab, cfg.lsa_k, cfg.lsa_scaling_power);
  } catch (const Error& e) {
    rethrow_with_context(e, cfg.dataset_path.string());
  }
  ensure_output_dir(cfg);
  const fs::path out = lsa_embedding_path(cfg);
  save_embeddings(lsa.table, out);

  nlohmann::json meta;
  meta["config_hash"] = cfg.hash();
  meta["seed"] = cfg.seed;
  meta["dataset"] = cfg.dataset_name;
  meta["documents"] = corpus.documents.size();
  meta["dropped_documents"] = corpus.dropped_documents;
  meta["vocab_size"] = lsa.table.size();
  meta["dim"] = lsa.table.dim();
  meta["requested_k"] = lsa.requested_k;
  meta["rank_limited"] = lsa.rank_limited;
  meta["weighting"] = to_string(cfg.lsa_weighting);
  meta["scaling_power"] = cfg.lsa_scaling_power;
  meta["singular_values"] = detail::vector_to_json(lsa.singular_values);
  detail::write_json(meta, meta_path(out));
  return out;
}

std::vector<AdaptOutput> cmd_adapt(const PipelineConfig& cfg) {
  std::vector<AdaptMethod> methods;
  for (const auto m : kAdaptMethods) {
    if (has_method(cfg, to_string(m))) methods.push_back(m);
  }
  std::vector<AdaptOutput> outputs;
  if (methods.empty()) return outputs;
  if (cfg.generic.empty()) throw ConfigError("adaptation needs at least one generic embedding");

  const LabeledDataset dataset = load_dataset(cfg);
  const EmbeddingTable ds = load_ds_table(cfg);
  ensure_output_dir(cfg);
  for (const auto& g : cfg.generic) {
    const EmbeddingTable gen = load_source(g, cfg.lowercase_embeddings);
    for (const auto method : methods) {
      AdaptConfig ac;
      ac.method = method;
      ac.d_grid = cfg.d_grid;
      if (ac.d_grid && method != AdaptMethod::concsvd) {
        // A shared grid may list d values only concSVD can reach.
        const Eigen::Index bound = std::min(ds.dim(), gen.dim());
        std::erase_if(*ac.d_grid, [bound](Eigen::Index d) { return d > bound; });
        if (ac.d_grid->empty()) ac.d_grid = std::vector<Eigen::Index>{bound};
      }
      ac.sigma_choices = cfg.sigma_choices;
      ac.shared_sigma = cfg.shared_sigma;
      ac.ridge = cfg.ridge;
      ac.kappa = cfg.kappa;
      ac.sigma_sample_cap = cfg.sigma_sample_cap;
      ac.selection = cfg.selection;
      ac.eval = cfg.eval;
      const std::string label = std::string(to_string(method)) + "(" + g.name + ", " + cfg.ds_name() + ")";
      AdaptResult result;
      try {
        result = adapt(ds, gen, ac, dataset);
      } catch (const Error& e) {
        rethrow_with_context(e, label);
      }
      AdaptOutput out;
      out.embeddings = da_embedding_path(cfg, method, g.name);
      out.report = out.embeddings;
      out.report.replace_extension(".selection.tsv");
      save_embeddings(result.table, out.embeddings);
      std::vector<std::string> header = provenance(cfg);
      header.push_back("embedding " + label + " dataset=" + cfg.dataset_name);
      write_text(out.report, format_selection_report(result.report, header));

      const auto& chosen = result.report.candidates[result.report.selected];
      nlohmann::json meta;
      meta["config_hash"] = cfg.hash();
      meta["seed"] = cfg.seed;
      meta["method"] = to_string(method);
      meta["generic"] = g.name;
      meta["ds"] = cfg.ds_name();
      meta["dataset"] = cfg.dataset_name;
      meta["shared_vocab"] = result.report.shared_vocab;
      meta["d"] = chosen.d;
      meta["sigma_rule"] = chosen.sigma_rule;
      meta["selection_metric"] = to_string(cfg.selection);
      meta["score"] = chosen.mean;
      detail::write_json(meta, meta_path(out.embeddings));
      outputs.push_back(std::move(out));
    }
  }
  return outputs;
}

std::vector<EvalRow> cmd_eval(const PipelineConfig& cfg) {
  std::vector<EmbeddingSource> sources;
  for (const auto m : kAdaptMethods) {
    if (!has_method(cfg, to_string(m))) continue;
    for (const auto& g : cfg.generic) {
      const fs::path path = da_embedding_path(cfg, m, g.name);
      if (!fs::exists(path)) throw ConfigError("DA embeddings " + path.string() + " not found; run 'adapt' first");
      sources.push_back({path.stem().string(), path});
    }
  }
  if (has_method(cfg, "generic-only")) {
    for (const auto& g : cfg.generic) sources.push_back(g);
  }
  if (has_method(cfg, "ds-only")) {
    sources.push_back(cfg.ds_from_lsa ? EmbeddingSource{"lsa", lsa_embedding_path(cfg)} : cfg.ds_file);
  }
  sources.insert(sources.end(), cfg.extra_embeddings.begin(), cfg.extra_embeddings.end());
  if (sources.empty()) throw ConfigError("no embedding sources to evaluate");

  const LabeledDataset dataset = load_dataset(cfg);
  std::vector<EvalRow> rows;
  for (const auto& src : sources) {
    if (!fs::exists(src.path)) throw ConfigError("embedding " + src.path.string() + " not found");
    // DA and LSA files are written with their final tokens; only external
    // generic files are case-folded.
    const bool fold = cfg.lowercase_embeddings && src.path.parent_path() != cfg.output_dir;
    const EmbeddingTable table = load_source(src, fold);
    try {
      rows.push_back({src.name, cross_validate(dataset, table, cfg.eval)});
    } catch (const Error& e) {
      rethrow_with_context(e, "evaluating '" + src.name + "'");
    }
  }
  ensure_output_dir(cfg);
  write_text(eval_table_path(cfg), format_eval_table(rows, provenance(cfg)));
  write_text(eval_summary_path(cfg), format_eval_summary(rows, cfg.dataset_name, provenance(cfg)));
  return rows;
}

std::vector<EvalRow> cmd_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  if (cfg.ds_from_lsa) cmd_lsa(cfg);
  cmd_adapt(cfg);
  return cmd_eval(cfg);
}

std::string format_eval_summary(const std::vector<EvalRow>& rows, const std::string& dataset_name,
                                const std::vector<std::string>& header_comment) {
  std::ostringstream out;
  for (const auto& line : header_comment) out << "# " << line << '\n';
  std::size_t width = 9;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  auto pad = [](std::string s, std::size_t w) {
    // "±" is two bytes but one column.
    const std::size_t shown = s.size() - static_cast<std::size_t>(std::count(s.begin(), s.end(), '\xC2'));
    if (shown < w) s.append(w - shown, ' ');
    return s;
  };
  out << "Data set: " << dataset_name << '\n';
  out << pad("Embedding", width) << "  " << pad("Avg Precision", 16) << pad("Avg F-score", 16) << "Avg AUC\n";
  for (const auto& r : rows) {
    out << pad(r.name, width) << "  " << pad(percent(r.report.precision), 16) << pad(percent(r.report.f_score), 16)
        << percent(r.report.auc) << '\n';
  }
  return out.str();
}

std::string format_eval_table(const std::vector<EvalRow>& rows, const std::vector<std::string>& header_comment) {
  std::ostringstream out;
  for (const auto& line : header_comment) out << "# " << line << '\n';
  out << "embedding\tprecision_mean\tprecision_std\tf_score_mean\tf_score_std\tauc_mean\tauc_std\tpooled_auc\tfolds\t"
         "empty_documents\tfold_f_scores\n";
  for (const auto& r : rows) {
    const auto& e = r.report;
    out << r.name << '\t' << format_double(e.precision.mean) << '\t' << format_double(e.precision.std) << '\t'
        << format_double(e.f_score.mean) << '\t' << format_double(e.f_score.std) << '\t' << format_double(e.auc.mean)
        << '\t' << format_double(e.auc.std) << '\t' << format_double(e.pooled_auc) << '\t' << e.folds.size() << '\t'
        << e.empty_documents << '\t';
    for (std::size_t f = 0; f < e.folds.size(); ++f) out << (f ? "," : "") << format_double(e.folds[f].f_score);
    out << '\n';
  }
  return out.str();
}

}  // namespace daembed
