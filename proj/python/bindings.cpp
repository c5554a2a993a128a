#include "mfpred/bench.hpp"
#include "mfpred/causal.hpp"
#include "mfpred/core.hpp"
#include "mfpred/forecast.hpp"
#include "mfpred/infotheory.hpp"
#include "mfpred/selection.hpp"
#include "mfpred/synth.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace mfp;

namespace {

py::list lagged_list(const std::vector<LaggedVariable>& vars) {
    py::list out;
    for (const auto& v : vars) out.append(py::make_tuple(v.var, v.lag));
    return out;
}

std::vector<LaggedVariable> from_pairs(const std::vector<std::pair<int, int>>& pairs) {
    std::vector<LaggedVariable> out;
    for (const auto& [var, lag] : pairs) out.push_back({var, lag});
    return out;
}

py::dict truth_dict(const GroundTruth& t) {
    py::dict d;
    d["model"] = t.model;
    d["target"] = t.target;
    d["true_drivers"] = lagged_list(t.true_drivers);
    d["synergetic_drivers"] = lagged_list(t.synergetic_drivers);
    d["structure_seed"] = t.structure_seed;
    d["noise_seed"] = t.noise_seed;
    return d;
}

py::tuple series_tuple(const SyntheticSeries& s) {
    return py::make_tuple(s.panel.values(), s.panel.names(), truth_dict(s.truth));
}

Cutoff make_cutoff(const std::string& name, double lambda, int folds) {
    if (name == "heuristic") return HeuristicCutoff{lambda};
    if (name == "cv" || name == "cross_validation") return CrossValidationCutoff{folds};
    if (name == "mmi_max") return MmiMaxCutoff{};
    if (name == "mmi_max_plus_cv") return MmiMaxPlusCvCutoff{folds};
    throw ValidationError("unknown cutoff '" + name + "'");
}

py::dict run_select(const Eigen::MatrixXd& values, std::vector<std::string> names, int target, const std::string& scheme,
                const std::string& cutoff, int h, int tau_max, int k, int k_algo, double threshold, double lambda,
                int folds, int p_max, std::uint64_t seed) {
    if (names.empty())
        for (Eigen::Index j = 0; j < values.cols(); ++j) names.push_back("X" + std::to_string(j + 1));
    const TimeSeriesPanel raw(values, names);
    const auto panel = Standardizer::fit(raw, raw.length()).apply(raw);
    const PredictionTask task{target, h, tau_max};
    task.validate(panel.n_vars());
    EstimatorConfig est = EstimatorConfig::with_k(k_algo, k);
    AlgorithmConfig algo;
    algo.significance = FixedThreshold{threshold};
    SchemeConfig cfg;
    cfg.scheme = scheme_from_string(scheme);
    cfg.cutoff = make_cutoff(cutoff.empty() ? (cfg.scheme == Scheme::optimal ? "mmi_max" : "cv") : cutoff, lambda, folds);
    cfg.p_max = p_max;
    const auto r = run_scheme(panel, task, est, algo, cfg, seed);
    py::dict d;
    d["scheme"] = to_string(r.scheme);
    d["chosen_p"] = r.chosen_p;
    d["chosen_set"] = lagged_list(variables_of(r.chosen_set));
    py::list per_p;
    for (const auto& s : r.per_p_sets) per_p.append(lagged_list(variables_of(s)));
    d["per_p_sets"] = per_p;
    d["per_p_scores"] = r.per_p_scores;
    d["cost"] = r.cost.weighted_cost;
    d["n_estimates"] = r.cost.n_estimates;
    if (r.preselection) d["causal"] = lagged_list(variables_of(r.preselection->predictors));
    d["warnings"] = r.warnings;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Model-free prediction: kNN information estimators, predictor selection and forecasting";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);

    m.def(
        "estimate_cmi",
        [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::MatrixXd& z, int k) {
            return estimate_cmi(x, y, z, k).value;
        },
        py::arg("x"), py::arg("y"), py::arg("z"), py::arg("k") = 10);
    m.def(
        "estimate_mi", [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int k) { return estimate_mi(x, y, k).value; },
        py::arg("x"), py::arg("y"), py::arg("k") = 10);
    m.def(
        "shuffle_test",
        [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::MatrixXd& z, int k, int surrogates,
           double alpha, std::uint64_t seed) {
            const auto r = shuffle_test(x, y, z, k, surrogates, alpha, seed);
            py::dict d;
            d["observed"] = r.observed;
            d["threshold"] = r.threshold;
            d["significant"] = r.significant;
            d["surrogates"] = r.surrogates;
            return d;
        },
        py::arg("x"), py::arg("y"), py::arg("z"), py::arg("k") = 10, py::arg("surrogates") = 100,
        py::arg("alpha") = 0.05, py::arg("seed") = 0);

    m.def(
        "gen_fixed_model", [](int length, std::uint64_t seed) { return series_tuple(gen_fixed_model(length, seed)); },
        py::arg("length"), py::arg("seed") = 0);
    m.def(
        "gen_synergetic_member",
        [](int n_vars, int length, std::uint64_t seed) {
            return series_tuple(gen_synergetic_member(n_vars, length, seed));
        },
        py::arg("n_vars"), py::arg("length"), py::arg("seed") = 0);
    m.def(
        "gen_gam_member",
        [](int n_vars, int length, std::uint64_t seed) { return series_tuple(gen_gam_member(n_vars, length, seed)); },
        py::arg("n_vars"), py::arg("length"), py::arg("seed") = 0);

    m.def("select", &run_select, py::arg("values"), py::arg("names") = std::vector<std::string>{}, py::arg("target") = 0,
          py::arg("scheme") = "optimal", py::arg("cutoff") = "", py::arg("h") = 1, py::arg("tau_max") = 2,
          py::arg("k") = 10, py::arg("k_algo") = 50, py::arg("threshold") = 0.004, py::arg("lambda_") = 0.2,
          py::arg("folds") = 5, py::arg("p_max") = 8, py::arg("seed") = 0);

    m.def(
        "knn_forecast",
        [](const Eigen::MatrixXd& learn_x, const Eigen::VectorXd& learn_y, const Eigen::MatrixXd& query_x, int k) {
            DesignMatrix learn{learn_x, learn_y, {}};
            DesignMatrix query{query_x, Eigen::VectorXd::Zero(query_x.rows()), {}};
            for (int i = 0; i < learn.rows(); ++i) learn.target_times.push_back(i);
            for (int i = 0; i < query.rows(); ++i) query.target_times.push_back(-1 - i);
            const auto r = knn_predict(learn, query, k);
            return py::make_tuple(r.predictions, r.sigmas);
        },
        py::arg("learn_x"), py::arg("learn_y"), py::arg("query_x"), py::arg("k") = 10);
    m.def(
        "srmse", [](const Eigen::VectorXd& p, const Eigen::VectorXd& t) { return srmse(p, t); }, py::arg("predictions"),
        py::arg("truth"));

    m.def(
        "complexity",
        [](int n_vars, int tau_max, int p_max, int causal_size, int n0, int n_max, int n_i, std::int64_t length) {
            ComplexityInputs in{n_vars, tau_max, p_max, causal_size, n0, n_max, n_i, length};
            const auto t = complexity_formulas(in);
            py::dict d;
            d["mi"] = t.mi;
            d["cmi_forward"] = t.cmi_forward;
            d["causal_cmi"] = t.causal_cmi;
            d["optimal"] = t.optimal;
            d["algo_typical"] = t.algo_typical;
            d["algo_worst"] = t.algo_worst;
            d["cv_extra"] = t.cv_extra;
            return d;
        },
        py::arg("n_vars") = 10, py::arg("tau_max") = 2, py::arg("p_max") = 8, py::arg("causal_size") = 7,
        py::arg("n0") = 2, py::arg("n_max") = 3, py::arg("n_i") = 3, py::arg("length") = 0);
}
