#include "daembed/error.hpp"
#include "daembed/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> methods;
  std::optional<std::string> d_grid;
  std::optional<int> folds;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

daembed::PipelineConfig resolve_config(const Overrides& o) {
  daembed::PipelineConfig cfg = daembed::load_pipeline_config(o.config);
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.eval.seed = *o.seed;
  }
  if (o.out) cfg.output_dir = *o.out;
  if (o.methods) cfg.methods = split_list(*o.methods);
  if (o.folds) cfg.eval.folds = *o.folds;
  if (o.d_grid) {
    std::vector<Eigen::Index> grid;
    for (const auto& item : split_list(*o.d_grid)) {
      try {
        grid.push_back(std::stol(item));
      } catch (const std::exception&) {
        throw daembed::ConfigError("--d-grid: '" + item + "' is not an integer");
      }
    }
    cfg.d_grid = grid;
  }
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* cmd, Overrides& o, bool adapt_flags) {
  cmd->add_option("-c,--config", o.config, "JSON config file")->required();
  cmd->add_option("--seed", o.seed, "override the config seed");
  cmd->add_option("-o,--out", o.out, "override the output directory");
  cmd->add_option("--methods", o.methods, "comma-separated methods: cca,kcca,concsvd,generic-only,ds-only");
  cmd->add_option("--folds", o.folds, "cross-validation folds");
  if (adapt_flags) cmd->add_option("--d-grid", o.d_grid, "comma-separated CCA dimensions");
}

void print_rows(const std::vector<daembed::EvalRow>& rows, const daembed::PipelineConfig& cfg) {
  std::cout << daembed::format_eval_summary(rows, cfg.dataset_name);
  std::cout << "wrote " << daembed::eval_table_path(cfg).string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Domain-adapted word embeddings via CCA / kernel CCA"};
  app.require_subcommand(1);
  Overrides o;
  auto* lsa = app.add_subcommand("lsa", "train LSA embeddings on the dataset sentences");
  auto* adapt = app.add_subcommand("adapt", "fit CCA/KCCA/concSVD and write DA embeddings");
  auto* eval = app.add_subcommand("eval", "cross-validate every configured embedding source");
  auto* pipeline = app.add_subcommand("pipeline", "run lsa, adapt and eval in sequence");
  add_common(lsa, o, false);
  add_common(adapt, o, true);
  add_common(eval, o, false);
  add_common(pipeline, o, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : daembed::exit_code(daembed::ErrorCategory::config);
  }

  try {
    const daembed::PipelineConfig cfg = resolve_config(o);
    if (lsa->parsed()) {
      if (!cfg.ds_from_lsa) throw daembed::ConfigError("ds_source is not 'lsa'");
      std::cout << "wrote " << daembed::cmd_lsa(cfg).string() << "\n";
    } else if (adapt->parsed()) {
      for (const auto& out : daembed::cmd_adapt(cfg)) {
        std::cout << "wrote " << out.embeddings.string() << " (" << out.report.filename().string() << ")\n";
      }
    } else if (eval->parsed()) {
      print_rows(daembed::cmd_eval(cfg), cfg);
    } else if (pipeline->parsed()) {
      print_rows(daembed::cmd_pipeline(cfg), cfg);
    }
  } catch (const daembed::Error& e) {
    std::cerr << "daembed: " << to_string(e.category()) << " error: " << e.what() << "\n";
    return daembed::exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "daembed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
