#include "daembed/cca_kernel.hpp"
#include "daembed/cca_linear.hpp"
#include "daembed/domain_adapt.hpp"
#include "daembed/encode_eval.hpp"
#include "daembed/error.hpp"
#include "daembed/lsa.hpp"
#include "daembed/pipeline.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace daembed;

namespace {

EmbeddingTable make_table(const std::vector<std::string>& tokens, const Matrix& vectors) {
  return EmbeddingTable(Vocabulary(tokens), vectors);
}

py::dict report_to_dict(const EvalReport& r) {
  py::dict d;
  d["precision"] = py::make_tuple(r.precision.mean, r.precision.std);
  d["f_score"] = py::make_tuple(r.f_score.mean, r.f_score.std);
  d["auc"] = py::make_tuple(r.auc.mean, r.auc.std);
  d["pooled_auc"] = r.pooled_auc;
  d["empty_documents"] = r.empty_documents;
  py::list folds;
  for (const auto& f : r.folds) {
    py::dict fd;
    fd["test_indices"] = f.test_indices;
    fd["precision"] = f.precision;
    fd["f_score"] = f.f_score;
    fd["auc"] = f.auc ? py::cast(*f.auc) : py::none();
    folds.append(fd);
  }
  d["folds"] = folds;
  return d;
}

EvalOptions eval_options(int folds, std::uint64_t seed, const std::string& weighting, double l2_lambda) {
  EvalOptions o;
  o.folds = folds;
  o.seed = seed;
  o.weighting = parse_doc_weighting(weighting);
  o.logreg.l2_lambda = l2_lambda;
  return o;
}

}  // namespace

PYBIND11_MODULE(_daembed, m) {
  m.doc() = "Domain-adapted word embeddings via CCA and kernel CCA";

  // Every library error becomes a subclass of daembed.Error carrying its category.
  static py::exception<Error> base(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::module_::import("daembed._daembed").attr("Error")(e.what());
      err.attr("category") = to_string(e.category());
      err.attr("exit_code") = exit_code(e.category());
      PyErr_SetObject(base.ptr(), err.ptr());
    }
  });

  py::class_<EmbeddingTable>(m, "EmbeddingTable")
      .def(py::init(&make_table), py::arg("tokens"), py::arg("vectors"))
      .def_property_readonly("tokens", [](const EmbeddingTable& t) { return t.vocab().tokens(); })
      .def_property_readonly("vectors", &EmbeddingTable::vectors)
      .def_property_readonly("dim", &EmbeddingTable::dim)
      .def("__len__", &EmbeddingTable::size)
      .def("__contains__", [](const EmbeddingTable& t, const std::string& w) { return t.vocab().contains(w); })
      .def("row", [](const EmbeddingTable& t, const std::string& w) -> std::optional<Vector> {
        if (const auto r = t.row(w)) return Vector(r->transpose());
        return std::nullopt;
      });

  m.def("load_embeddings", [](const std::filesystem::path& p) { return load_embeddings(p); }, py::arg("path"));
  m.def("save_embeddings", &save_embeddings, py::arg("table"), py::arg("path"));

  m.def(
      "lsa",
      [](const std::vector<std::string>& lines, Eigen::Index k, const std::string& weighting, double power) {
        const Corpus corpus = tokenize(lines);
        LsaResult r = lsa_train(build_term_doc(corpus, parse_term_weighting(weighting)), corpus.vocab, k, power);
        return py::make_tuple(std::move(r.table), r.singular_values);
      },
      py::arg("lines"), py::arg("k"), py::arg("weighting") = "tf-idf", py::arg("scaling_power") = 1.0,
      "Train LSA word vectors on raw sentences; returns (table, singular_values).");
  m.def("tokenize", &tokenize_line, py::arg("line"));

  py::class_<CcaModel>(m, "CcaModel")
      .def_readonly("phi_ds", &CcaModel::phi_ds)
      .def_readonly("phi_g", &CcaModel::phi_g)
      .def_readonly("correlations", &CcaModel::correlations)
      .def_readonly("mean_ds", &CcaModel::mean_ds)
      .def_readonly("mean_g", &CcaModel::mean_g)
      .def_property_readonly("d", &CcaModel::d)
      .def("project", [](const CcaModel& mdl, const Matrix& x, const std::string& view) {
        return cca_project(mdl, x, parse_view(view));
      }, py::arg("vectors"), py::arg("view"));
  m.def("cca_fit", py::overload_cast<const Matrix&, const Matrix&, Eigen::Index, double>(&cca_fit), py::arg("ds"),
        py::arg("gen"), py::arg("d"), py::arg("ridge") = 1e-3);

  py::class_<KccaModel>(m, "KccaModel")
      .def_readonly("alpha_ds", &KccaModel::alpha_ds)
      .def_readonly("alpha_g", &KccaModel::alpha_g)
      .def_readonly("correlations", &KccaModel::correlations)
      .def_property_readonly("sigma_ds", [](const KccaModel& k) { return k.config_ds.sigma; })
      .def_property_readonly("sigma_g", [](const KccaModel& k) { return k.config_g.sigma; })
      .def_property_readonly("d", &KccaModel::d)
      .def("project", [](const KccaModel& mdl, const std::string& view) {
        return kcca_project_all(mdl, parse_view(view));
      }, py::arg("view"), "Projections of the training rows.");
  m.def(
      "kcca_fit",
      [](const Matrix& ds, const Matrix& gen, Eigen::Index d, double sigma_ds, double sigma_g, double kappa) {
        KernelConfig cx{sigma_ds, SigmaRule::explicit_value, kappa};
        KernelConfig cy{sigma_g, SigmaRule::explicit_value, kappa};
        return kcca_fit(ds, gen, d, cx, cy);
      },
      py::arg("ds"), py::arg("gen"), py::arg("d"), py::arg("sigma_ds"), py::arg("sigma_g"), py::arg("kappa") = 0.1);
  m.def("median_bandwidth", &median_bandwidth, py::arg("vectors"), py::arg("sample_cap") = 2000,
        py::arg("seed") = 0);
  m.def("gaussian_gram", &gaussian_gram, py::arg("vectors"), py::arg("sigma"));

  m.def(
      "combine",
      [](const Matrix& a, const Matrix& b, double alpha, double beta) { return combine(a, b, DaCombiner{alpha, beta}); },
      py::arg("proj_ds"), py::arg("proj_g"), py::arg("alpha") = 0.5, py::arg("beta") = 0.5);
  m.def(
      "solve_combination_weights",
      [](const Matrix& a, const Matrix& b) {
        const DaCombiner c = solve_combination_weights(a, b);
        return py::make_tuple(c.alpha, c.beta);
      },
      py::arg("proj_ds"), py::arg("proj_g"));
  m.def(
      "concsvd", [](const EmbeddingTable& ds, const EmbeddingTable& gen, Eigen::Index d) {
        return concsvd(intersect(ds, gen), d);
      },
      py::arg("ds"), py::arg("gen"), py::arg("d"));
  m.def(
      "adapt",
      [](const EmbeddingTable& ds, const EmbeddingTable& gen, const std::vector<std::string>& texts,
         const std::vector<int>& labels, const std::string& method, std::optional<std::vector<Eigen::Index>> d_grid,
         double kappa, int folds, std::uint64_t seed) {
        LabeledDataset data;
        for (const auto& t : texts) data.documents.push_back(tokenize_line(t));
        data.labels = labels;
        data.validate();
        AdaptConfig cfg;
        cfg.method = parse_adapt_method(method);
        cfg.d_grid = std::move(d_grid);
        cfg.kappa = kappa;
        cfg.eval.folds = folds;
        cfg.eval.seed = seed;
        AdaptResult r = adapt(ds, gen, cfg, data);
        return py::make_tuple(std::move(r.table), format_selection_report(r.report, {}));
      },
      py::arg("ds"), py::arg("gen"), py::arg("texts"), py::arg("labels"), py::arg("method") = "kcca",
      py::arg("d_grid") = py::none(), py::arg("kappa") = 0.1, py::arg("folds") = 10, py::arg("seed") = 0,
      "Grid-search d (and sigma for kcca) by CV score; returns (table, selection_report).");

  m.def(
      "train_logreg",
      [](const Matrix& x, const std::vector<int>& y, double l2_lambda) {
        LogregOptions o;
        o.l2_lambda = l2_lambda;
        const ClassifierModel c = train_logreg(x, y, o);
        return py::make_tuple(c.weights, c.bias, c.converged);
      },
      py::arg("features"), py::arg("labels"), py::arg("l2_lambda") = 1.0);
  m.def(
      "metrics",
      [](const std::vector<double>& scores, const std::vector<int>& labels, double threshold) {
        const Metrics mt = compute_metrics(scores, labels, threshold);
        return py::make_tuple(mt.precision, mt.f_score, mt.auc);
      },
      py::arg("scores"), py::arg("labels"), py::arg("threshold") = 0.5, "Returns (precision, f_score, auc).");
  m.def(
      "stratified_folds",
      [](const std::vector<int>& labels, int folds, std::uint64_t seed) { return stratified_folds(labels, folds, seed); },
      py::arg("labels"), py::arg("folds"), py::arg("seed") = 0);
  m.def(
      "cross_validate",
      [](const EmbeddingTable& table, const std::vector<std::string>& texts, const std::vector<int>& labels, int folds,
         std::uint64_t seed, const std::string& weighting, double l2_lambda) {
        LabeledDataset data;
        for (const auto& t : texts) data.documents.push_back(tokenize_line(t));
        data.labels = labels;
        return report_to_dict(cross_validate(data, table, eval_options(folds, seed, weighting, l2_lambda)));
      },
      py::arg("table"), py::arg("texts"), py::arg("labels"), py::arg("folds") = 10, py::arg("seed") = 0,
      py::arg("weighting") = "uniform", py::arg("l2_lambda") = 1.0);

  m.def(
      "run_pipeline",
      [](const std::filesystem::path& config, std::optional<std::string> command) {
        const PipelineConfig cfg = load_pipeline_config(config);
        cfg.validate();
        const std::string cmd = command.value_or("pipeline");
        py::list rows;
        std::vector<EvalRow> result;
        if (cmd == "lsa") {
          return py::object(py::cast(cmd_lsa(cfg)));
        } else if (cmd == "adapt") {
          py::list paths;
          for (const auto& o : cmd_adapt(cfg)) paths.append(o.embeddings);
          return py::object(paths);
        } else if (cmd == "eval") {
          result = cmd_eval(cfg);
        } else if (cmd == "pipeline") {
          result = cmd_pipeline(cfg);
        } else {
          throw ConfigError("unknown command '" + cmd + "'");
        }
        py::dict out;
        for (const auto& r : result) out[py::str(r.name)] = report_to_dict(r.report);
        return py::object(out);
      },
      py::arg("config"), py::arg("command") = py::none());
}
