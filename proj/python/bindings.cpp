#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "gnbn/averaging.hpp"
#include "gnbn/cv.hpp"
#include "gnbn/dataset.hpp"
#include "gnbn/errors.hpp"
#include "gnbn/fit.hpp"
#include "gnbn/inference.hpp"
#include "gnbn/model_io.hpp"
#include "gnbn/simulate.hpp"
#include "gnbn/structure.hpp"

namespace py = pybind11;
using namespace gnbn;

namespace {

ModelFile learn_model(const Dataset& d, double alpha, int max_cond_size, int restarts,
                      std::uint64_t seed, const std::string& fit_method, double fixed_lambda) {
    SearchConfig cfg{alpha, max_cond_size, restarts, seed};
    const auto retained = mb_filter(d, cfg);
    const Dag dag = hill_climb(d, retained, cfg);
    ModelFile m;
    if (fit_method == "ols") {
        m.bn = fit_ols(dag, d);
    } else {
        const auto policy =
            fixed_lambda >= 0.0 ? LambdaPolicy::fixed(fixed_lambda) : LambdaPolicy::gcv();
        m.bn = fit_ridge(dag, d, policy);
    }
    m.metadata.fit_method = fit_method;
    m.metadata.alpha = alpha;
    m.metadata.seed = seed;
    return m;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
    mod.doc() = "Gaussian Bayesian networks over genotypes and quantitative traits";

    py::register_exception<UsageError>(mod, "UsageError");
    py::register_exception<DataError>(mod, "DataError");
    py::register_exception<NumericalError>(mod, "NumericalError");

    py::class_<GenotypeMatrix>(mod, "GenotypeMatrix")
        .def(py::init<>())
        .def_readwrite("individual_ids", &GenotypeMatrix::individual_ids)
        .def_readwrite("snp_ids", &GenotypeMatrix::snp_ids)
        .def_readwrite("counts", &GenotypeMatrix::counts);

    py::class_<TraitMatrix>(mod, "TraitMatrix")
        .def(py::init<>())
        .def_readwrite("individual_ids", &TraitMatrix::individual_ids)
        .def_readwrite("trait_ids", &TraitMatrix::trait_ids)
        .def_readwrite("values", &TraitMatrix::values)
        .def_readwrite("tiers", &TraitMatrix::tiers);

    py::class_<Dataset>(mod, "Dataset")
        .def(py::init<>())
        .def_readwrite("genotypes", &Dataset::genotypes)
        .def_readwrite("traits", &Dataset::traits)
        .def_readonly("dropped_individuals", &Dataset::dropped_individuals)
        .def_property_readonly("n", &Dataset::n)
        .def("column_ids", &Dataset::column_ids)
        .def("column", &Dataset::column)
        .def("joint_matrix", &Dataset::joint_matrix);

    py::class_<Node>(mod, "Node")
        .def_readonly("id", &Node::id)
        .def_readonly("tier", &Node::tier)
        .def_property_readonly("is_trait",
                               [](const Node& n) { return n.kind == NodeKind::Trait; });

    py::class_<Dag>(mod, "Dag")
        .def("nodes", &Dag::nodes)
        .def("arcs", &Dag::arcs)
        .def("topological_order", &Dag::topological_order)
        .def("parents", &Dag::parents)
        .def("children", &Dag::children)
        .def("markov_blanket", &Dag::markov_blanket)
        .def("d_separated", &Dag::d_separated);

    py::class_<LocalDistribution>(mod, "LocalDistribution")
        .def_readonly("node", &LocalDistribution::node)
        .def_readonly("intercept", &LocalDistribution::intercept)
        .def_readonly("coefficients", &LocalDistribution::coefficients)
        .def_readonly("residual_variance", &LocalDistribution::residual_variance);

    py::class_<GaussianBn>(mod, "GaussianBn")
        .def_readonly("dag", &GaussianBn::dag)
        .def_readonly("locals", &GaussianBn::locals);

    py::class_<ModelMetadata>(mod, "ModelMetadata")
        .def_readwrite("fit_method", &ModelMetadata::fit_method)
        .def_readwrite("alpha", &ModelMetadata::alpha)
        .def_readwrite("seed", &ModelMetadata::seed);

    py::class_<ModelFile>(mod, "Model")
        .def_readonly("bn", &ModelFile::bn)
        .def_readonly("metadata", &ModelFile::metadata)
        .def_readonly("arc_strengths", &ModelFile::arc_strengths)
        .def("to_json", [](const ModelFile& m) { return serialize_model(m); })
        .def("to_dot", [](const ModelFile& m) { return to_dot(m); })
        .def("save", [](const ModelFile& m, const std::string& path) { write_model(m, path); });

    py::class_<JointGaussian>(mod, "JointGaussian")
        .def_readonly("order", &JointGaussian::order)
        .def_readonly("mean", &JointGaussian::mean)
        .def_readonly("covariance", &JointGaussian::covariance);

    py::class_<TargetSummary>(mod, "TargetSummary")
        .def_readonly("mean", &TargetSummary::mean)
        .def_readonly("sd", &TargetSummary::sd)
        .def_readonly("monte_carlo_se", &TargetSummary::monte_carlo_se);

    py::class_<QueryResult>(mod, "QueryResult")
        .def_readonly("targets", &QueryResult::targets)
        .def_readonly("effective_sample_size", &QueryResult::effective_sample_size);

    py::class_<TraitPredictions>(mod, "TraitPredictions")
        .def_readonly("individual_ids", &TraitPredictions::individual_ids)
        .def_readonly("trait_ids", &TraitPredictions::trait_ids)
        .def_readonly("values", &TraitPredictions::values);

    py::class_<TraitCvSummary>(mod, "TraitCvSummary")
        .def_readonly("rho_g_mean", &TraitCvSummary::rho_g_mean)
        .def_readonly("rho_g_sd", &TraitCvSummary::rho_g_sd)
        .def_readonly("rho_c_mean", &TraitCvSummary::rho_c_mean)
        .def_readonly("rho_c_sd", &TraitCvSummary::rho_c_sd);

    py::class_<CvReport>(mod, "CvReport")
        .def_readonly("traits", &CvReport::traits)
        .def_readonly("warnings", &CvReport::warnings)
        .def_readonly("elapsed_seconds", &CvReport::elapsed_seconds)
        .def_property_readonly("network_count",
                               [](const CvReport& r) { return r.networks.size(); });

    mod.def("load_dataset", &load_dataset, py::arg("genotype_path"), py::arg("trait_path"),
            py::arg("tiers"), py::arg("mean_impute") = false);
    mod.def("load_genotype_matrix", &load_genotype_matrix);
    mod.def("load_trait_matrix", &load_trait_matrix);
    mod.def(
        "filter_maf",
        [](const Dataset& d, double min_maf) {
            Dataset out = d;
            out.genotypes = filter_maf(d.genotypes, min_maf);
            return out;
        },
        py::arg("dataset"), py::arg("min_maf") = 0.01);
    mod.def(
        "prune_correlated",
        [](const Dataset& d, double r_max) {
            Dataset out = d;
            out.genotypes = prune_correlated(d.genotypes, r_max);
            return out;
        },
        py::arg("dataset"), py::arg("r_max") = 0.95);

    mod.def("learn", &learn_model, py::arg("dataset"), py::arg("alpha") = 0.01,
            py::arg("max_cond_size") = 3, py::arg("restarts") = 0, py::arg("seed") = 0,
            py::arg("fit_method") = "ridge", py::arg("fixed_lambda") = -1.0,
            py::call_guard<py::gil_scoped_release>());

    mod.def(
        "predict",
        [](const ModelFile& m, const GenotypeMatrix& g, const std::string& mode,
           const TraitMatrix* observed) {
            const auto pm = mode == "causal" ? PredictionMode::Causal : PredictionMode::Genetic;
            return predict(m.bn, g, pm, observed);
        },
        py::arg("model"), py::arg("genotypes"), py::arg("mode") = "genetic",
        py::arg("observed_traits") = nullptr);

    mod.def(
        "query",
        [](const ModelFile& m, const std::set<std::string>& targets,
           const std::map<std::string, std::pair<double, double>>& evidence,
           const std::string& engine, Eigen::Index samples, std::uint64_t seed) {
            Evidence e;
            for (const auto& [k, v] : evidence) {
                e[k] = v.first == v.second ? EvidenceValue::point(v.first)
                                           : EvidenceValue::interval(v.first, v.second);
            }
            QueryEngine qe = QueryEngine::Exact;
            if (engine == "logic") qe = QueryEngine::LogicSampling;
            if (engine == "lw") qe = QueryEngine::LikelihoodWeighting;
            return query(m.bn, targets, e, qe, samples, seed);
        },
        py::arg("model"), py::arg("targets"), py::arg("evidence"), py::arg("engine") = "exact",
        py::arg("samples") = 1000000, py::arg("seed") = 0);

    mod.def("to_joint", [](const ModelFile& m) { return to_joint(m.bn); });

    mod.def(
        "cross_validate",
        [](const Dataset& d, int runs, int folds, double alpha, int max_cond_size, int restarts,
           const std::string& fit_method, std::uint64_t seed, int threads) {
            CvConfig cfg;
            cfg.runs = runs;
            cfg.folds = folds;
            cfg.alpha = alpha;
            cfg.max_cond_size = max_cond_size;
            cfg.restarts = restarts;
            cfg.fit_method = fit_method == "ols" ? FitMethod::Ols : FitMethod::Ridge;
            cfg.seed = seed;
            cfg.threads = threads;
            return run_cv(d, cfg);
        },
        py::arg("dataset"), py::arg("runs") = 10, py::arg("folds") = 10, py::arg("alpha") = 0.01,
        py::arg("max_cond_size") = 3, py::arg("restarts") = 0, py::arg("fit_method") = "ridge",
        py::arg("seed") = 0, py::arg("threads") = 1,
        py::call_guard<py::gil_scoped_release>());

    mod.def(
        "simulate",
        [](const std::string& spec_json) {
            // spec comes in as the same JSON accepted by the CLI
            const auto j = nlohmann::json::parse(spec_json);
            SimSpec spec;
            spec.n = j.value("n", 100);
            spec.s = j.value("snps", 10);
            if (j.contains("maf")) {
                spec.maf_lo = j["maf"].at(0).get<double>();
                spec.maf_hi = j["maf"].at(1).get<double>();
            }
            spec.ld_rho = j.value("ld_rho", 0.0);
            spec.seed = j.value("seed", 0);
            for (const auto& jt : j.value("traits", nlohmann::json::array())) {
                TraitSpec ts;
                ts.id = jt.at("id").get<std::string>();
                ts.tier = jt.value("tier", 0);
                ts.residual_variance = jt.value("residual_variance", 1.0);
                ts.intercept = jt.value("intercept", 0.0);
                const nlohmann::json parents = jt.value("parents", nlohmann::json::object());
                for (const auto& [p, b] : parents.items()) {
                    ts.parents.emplace_back(p, b.get<double>());
                }
                spec.traits.push_back(ts);
            }
            const auto sim = simulate(spec);
            ModelFile truth;
            truth.bn = sim.truth;
            truth.metadata.fit_method = "truth";
            truth.metadata.seed = spec.seed;
            return std::make_pair(sim.data, truth);
        },
        py::arg("spec_json"));

    mod.def("read_model", &read_model);
    mod.def("parse_model", &parse_model);

    mod.def("average", [](const std::vector<ModelFile>& models) {
        std::vector<Dag> dags;
        for (const auto& m : models) dags.push_back(m.bn.dag);
        const auto table = arc_strengths(dags);
        const double threshold = estimate_threshold(table);
        const auto dag = averaged_network(table, threshold, dags.front().nodes());
        return py::make_tuple(dag, threshold, table.arcs);
    });
}
