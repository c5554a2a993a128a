#include "mfpred/bench.hpp"
#include "mfpred/causal.hpp"
#include "mfpred/core.hpp"
#include "mfpred/forecast.hpp"
#include "mfpred/selection.hpp"
#include "mfpred/synth.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace mfp;

struct TaskOptions {
    std::string data;
    std::string target;
    std::string scheme = "optimal";
    std::string cutoff;
    int h = 1;
    int tau_max = 2;
    std::optional<int> k;
    int k_algo = 50;
    std::optional<double> lambda;
    std::optional<double> threshold;
    std::optional<int> folds;
    int p_max = 8;
    int subset_cap = 20;
    int n0 = 2;
    int n_max = 3;
    int n_i = 3;
    std::optional<int> surrogates;
    double alpha = 0.05;
    std::optional<int> learn;
    std::uint64_t seed = 0;
    std::string out;
};

void add_task_options(CLI::App* cmd, TaskOptions& o) {
    cmd->add_option("data", o.data, "Input CSV (header row of names)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--target", o.target, "Target variable name (default: first column)");
    cmd->add_option("--scheme", o.scheme, "mi_rank | cmi_forward | causal_cmi_forward | optimal");
    cmd->add_option("--cutoff", o.cutoff, "heuristic | cv | mmi_max | mmi_max_plus_cv");
    cmd->add_option("--h", o.h, "Prediction step");
    cmd->add_option("--tau-max", o.tau_max, "Maximum lag");
    cmd->add_option("--k", o.k, "Neighbors for selection estimates and prediction");
    cmd->add_option("--k-algo", o.k_algo, "Neighbors in the pre-selection tests");
    cmd->add_option("--lambda", o.lambda, "Heuristic cutoff fraction (implies --cutoff heuristic)");
    cmd->add_option("--threshold", o.threshold, "Fixed pre-selection threshold I*");
    cmd->add_option("--folds", o.folds, "Cross-validation folds (implies a CV cutoff)");
    cmd->add_option("--p-max", o.p_max, "Maximum number of predictors");
    cmd->add_option("--subset-cap", o.subset_cap, "Largest causal set searched exhaustively");
    cmd->add_option("--n0", o.n0, "Initial condition-set size");
    cmd->add_option("--n-max", o.n_max, "Largest condition-set size");
    cmd->add_option("--n-i", o.n_i, "Condition combinations per size");
    cmd->add_option("--shuffle", o.surrogates, "Use a shuffle test with this many surrogates");
    cmd->add_option("--alpha", o.alpha, "Shuffle test level");
    cmd->add_option("--learn", o.learn, "Number of leading rows used for learning (default: all)");
    cmd->add_option("--seed", o.seed, "Seed for shuffle tests");
    cmd->add_option("--out", o.out, "Directory for CSV outputs");
}

Cutoff resolve_cutoff(const TaskOptions& o, Scheme scheme) {
    std::string name = o.cutoff;
    if (name.empty()) {
        if (o.lambda && o.folds) throw ValidationError("--lambda and --folds select different cutoffs; pass only one");
        if (o.lambda) name = "heuristic";
        else if (o.folds) name = scheme == Scheme::optimal ? "mmi_max_plus_cv" : "cv";
        else name = scheme == Scheme::optimal ? "mmi_max" : "cv";
    }
    const int folds = o.folds.value_or(5);
    if (name == "heuristic") {
        if (o.folds) throw ValidationError("--folds conflicts with --cutoff heuristic");
        return HeuristicCutoff{o.lambda.value_or(0.2)};
    }
    if (o.lambda) throw ValidationError("--lambda conflicts with --cutoff " + name);
    if (name == "cv" || name == "cross_validation") return CrossValidationCutoff{folds};
    if (name == "mmi_max") {
        if (o.folds) throw ValidationError("--folds conflicts with --cutoff mmi_max");
        return MmiMaxCutoff{};
    }
    if (name == "mmi_max_plus_cv") return MmiMaxPlusCvCutoff{folds};
    throw ValidationError("unknown cutoff '" + name + "'");
}

struct Prepared {
    TimeSeriesPanel raw;
    TimeSeriesPanel standardized;
    PredictionTask task;
    EstimatorConfig est;
    AlgorithmConfig algo;
    SchemeConfig scheme;
    int learn_rows = 0;
};

Prepared prepare(const TaskOptions& o, bool need_test) {
    auto raw = read_panel_csv_file(o.data);
    PredictionTask task{o.target.empty() ? 0 : raw.index_of(o.target), o.h, o.tau_max};
    task.validate(raw.n_vars());
    const int learn_rows = o.learn.value_or(need_test ? raw.length() * 4 / 5 : raw.length());
    if (learn_rows < 2 || learn_rows > raw.length())
        throw ValidationError("--learn must lie in [2, " + std::to_string(raw.length()) + "]");
    if (need_test && learn_rows == raw.length()) throw ValidationError("no rows left for the test segment");
    auto standardized = Standardizer::fit(raw, learn_rows).apply(raw);

    EstimatorConfig est;
    est.k_algo = o.k_algo;
    if (o.k) est.k_cmi_mmi = est.k_predict = *o.k;
    est.validate();

    AlgorithmConfig algo;
    algo.n0 = o.n0;
    algo.n_max = o.n_max;
    algo.n_i = o.n_i;
    if (o.surrogates && o.threshold) throw ValidationError("--shuffle and --threshold select different significance rules");
    if (o.surrogates) algo.significance = ShuffleSignificance{*o.surrogates, o.alpha};
    else algo.significance = FixedThreshold{o.threshold.value_or(0.004)};
    algo.validate();

    SchemeConfig scheme;
    scheme.scheme = scheme_from_string(o.scheme);
    scheme.cutoff = resolve_cutoff(o, scheme.scheme);
    scheme.p_max = o.p_max;
    scheme.subset_cap = o.subset_cap;
    scheme.validate();
    return {std::move(raw), std::move(standardized), task, est, algo, scheme, learn_rows};
}

std::string join(const PredictorSet& set, const std::vector<std::string>& names) {
    std::string out;
    for (const auto& sp : set) out += (out.empty() ? "" : ", ") + describe(sp.variable, names);
    return out;
}

void print_selection(std::ostream& os, const SelectionResult& r, const SchemeConfig& cfg,
                     const std::vector<std::string>& names) {
    os << "scheme: " << scheme_label(cfg) << '\n';
    if (r.preselection) {
        os << "causal predictors (" << r.preselection->predictors.size() << "):";
        for (const auto& sp : r.preselection->predictors)
            os << ' ' << describe(sp.variable, names) << '=' << std::setprecision(4) << sp.score;
        os << '\n';
    }
    os << "p  score      predictors\n";
    for (std::size_t p = 1; p <= r.per_p_sets.size(); ++p) {
        os << std::left << std::setw(3) << p << std::setw(11) << std::setprecision(5) << r.per_p_scores[p - 1]
           << join(r.per_p_sets[p - 1], names) << (static_cast<int>(p) == r.chosen_p ? "  <- chosen" : "") << '\n';
    }
    if (r.cv_errors) {
        os << "cv errors:";
        for (const auto& e : *r.cv_errors) os << " p" << e.p << '=' << std::setprecision(4) << e.mean_srmse;
        os << '\n';
    }
    os << "chosen p = " << r.chosen_p << ": " << join(r.chosen_set, names) << '\n';
    os << "cost: " << r.cost.n_estimates << " estimates, weighted " << r.cost.weighted_cost << '\n';
    for (const auto& w : r.warnings) os << "warning: " << w << '\n';
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream f(std::filesystem::path(dir) / name);
    if (!f) throw DataError("cannot write " + (std::filesystem::path(dir) / name).string());
    return f;
}

int cmd_select(const TaskOptions& o) {
    auto pr = prepare(o, false);
    const auto learn = pr.standardized.slice(0, pr.learn_rows);
    const auto result = run_scheme(learn, pr.task, pr.est, pr.algo, pr.scheme, o.seed);
    print_selection(std::cout, result, pr.scheme, pr.raw.names());
    if (!o.out.empty()) {
        auto f = open_out(o.out, "selection.csv");
        write_selection_csv(f, result, pr.raw.names());
        if (result.preselection) {
            auto g = open_out(o.out, "iteration_log.csv");
            write_iteration_log_csv(g, result.preselection->iteration_log, pr.raw.names());
        }
    }
    return 0;
}

int cmd_forecast(const TaskOptions& o, const std::string& predictor) {
    if (predictor != "knn" && predictor != "linear") throw ValidationError("--predictor must be knn or linear");
    auto pr = prepare(o, true);
    const auto learn_panel = pr.standardized.slice(0, pr.learn_rows);
    const auto sel = run_scheme(learn_panel, pr.task, pr.est, pr.algo, pr.scheme, o.seed);
    const auto set = variables_of(sel.chosen_set);
    const TimeRange learn{pr.task.first_target_time(), pr.learn_rows};
    const TimeRange test{std::max(pr.learn_rows, pr.task.first_target_time()), pr.raw.length()};
    const auto query = design_matrix(pr.standardized, set, pr.task, test);
    ForecastResult fc;
    if (predictor == "knn") {
        fc = knn_predict(design_matrix(pr.standardized, set, pr.task, learn), query, pr.est.k_predict);
    } else {
        fc = linear_predict(fit_linear(pr.standardized, set, pr.task, learn), query);
    }
    if (query.target.size() > 1 && query.target.maxCoeff() > query.target.minCoeff())
        fc.srmse = srmse(fc.predictions, query.target);
    // Report in the units of the input.
    const int y = pr.task.target;
    Eigen::VectorXd truth(query.rows());
    const auto st = Standardizer::fit(pr.raw, pr.learn_rows);
    for (Eigen::Index i = 0; i < fc.predictions.size(); ++i) {
        truth(i) = pr.raw.at(fc.target_times[static_cast<std::size_t>(i)], y);
        fc.predictions(i) = st.restore(y, fc.predictions(i));
        fc.sigmas(i) *= st.scale(y);
    }
    std::cerr << "predictors: " << join(sel.chosen_set, pr.raw.names()) << '\n';
    if (fc.srmse) std::cerr << "test SRMSE: " << format_real(*fc.srmse) << '\n';
    if (o.out.empty()) {
        write_forecast_csv(std::cout, fc, &truth);
    } else {
        auto f = open_out(o.out, "forecast.csv");
        write_forecast_csv(f, fc, &truth);
        auto g = open_out(o.out, "selection.csv");
        write_selection_csv(g, sel, pr.raw.names());
    }
    return 0;
}

struct BenchOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<int> members;
    std::string out;
};

ExperimentConfig load_bench_config(const BenchOptions& o) {
    auto cfg = load_experiment_config(o.config);
    if (o.seed) cfg.seed_base = *o.seed;
    if (o.workers) cfg.workers = *o.workers;
    if (o.members) cfg.ensemble_size = *o.members;
    if (!o.out.empty()) cfg.output_dir = o.out;
    cfg.validate();
    return cfg;
}

void print_summary(const ExperimentReport& report) {
    for (const auto& row : report.summary) {
        if (row.statistic == "members" || row.statistic == "failed" || row.statistic.ends_with("_q50"))
            std::cout << row.scheme << ' ' << row.statistic << ' ' << format_real(row.value) << '\n';
    }
}

int cmd_bench(const BenchOptions& o) {
    auto cfg = load_bench_config(o);
    const auto report = run_experiment(cfg);
    print_summary(report);
    std::cout << "wrote " << cfg.output_dir << "/{members,summary,selection_log}.csv\n";
    return 0;
}

int cmd_sweep(const BenchOptions& o, const std::string& parameter, const std::vector<double>& values) {
    auto cfg = load_bench_config(o);
    if (!parameter.empty() || !values.empty()) {
        if (parameter.empty() || values.empty()) throw ValidationError("--parameter and --values go together");
        cfg.sweep = SweepSpec{sweep_parameter_from_string(parameter), values};
    }
    const auto points = run_sweep(cfg);
    for (const auto& pt : points) {
        std::cout << "== " << to_string(cfg.sweep->parameter) << " = " << format_real(pt.value) << '\n';
        print_summary(pt.report);
    }
    std::cout << "wrote " << cfg.output_dir << "/sweep.csv\n";
    return 0;
}

int cmd_complexity(const ComplexityInputs& in) {
    const auto t = complexity_formulas(in);
    std::cout << "mi           " << t.mi << '\n'
              << "cmi_forward  " << t.cmi_forward << '\n'
              << "causal_cmi   " << t.causal_cmi << '\n'
              << "optimal      " << t.optimal << '\n'
              << "algo_typical " << t.algo_typical << '\n'
              << "algo_worst   " << t.algo_worst << '\n'
              << "cv_extra     " << t.cv_extra << '\n';
    return 0;
}

struct GenerateOptions {
    std::string model = "fixed_model";
    int n_vars = 10;
    int length = 625;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> structure_seed;
    std::string out;
};

int cmd_generate(const GenerateOptions& o) {
    SyntheticSeries s = [&] {
        if (o.model == "fixed_model") return gen_fixed_model(o.length, o.seed);
        if (o.model == "synergetic") return gen_synergetic_member(o.n_vars, o.length, o.seed, {}, o.structure_seed);
        if (o.model == "gam") return gen_gam_member(o.n_vars, o.length, o.seed, o.structure_seed);
        throw ValidationError("unknown model '" + o.model + "' (fixed_model, synergetic, gam)");
    }();
    if (o.out.empty()) {
        write_panel_csv(std::cout, s.panel);
        return 0;
    }
    std::ofstream f(o.out);
    if (!f) throw DataError("cannot write " + o.out);
    write_panel_csv(f, s.panel);
    std::ofstream g(o.out + ".truth");
    if (!g) throw DataError("cannot write " + o.out + ".truth");
    write_ground_truth(g, s.truth, s.panel.names());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Model-free prediction: causal pre-selection, optimal predictor subsets, kNN and linear forecasts"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);

    TaskOptions sel_opts;
    auto* select = app.add_subcommand("select", "Run one selection scheme on a CSV panel");
    add_task_options(select, sel_opts);

    TaskOptions fc_opts;
    std::string predictor = "knn";
    auto* forecast = app.add_subcommand("forecast", "Select predictors on the learning rows and forecast the rest");
    add_task_options(forecast, fc_opts);
    forecast->add_option("--predictor", predictor, "knn | linear");

    BenchOptions bench_opts;
    auto* bench = app.add_subcommand("bench", "Run an ensemble experiment from a config file");
    bench->add_option("--config", bench_opts.config, "Experiment config")->required();
    bench->add_option("--seed", bench_opts.seed, "Override seed_base");
    bench->add_option("--workers", bench_opts.workers, "Concurrent members");
    bench->add_option("--members", bench_opts.members, "Override ensemble_size");
    bench->add_option("--out", bench_opts.out, "Override output_dir");

    BenchOptions sweep_opts;
    std::string sweep_param;
    std::vector<double> sweep_values;
    auto* sweep = app.add_subcommand("sweep", "Repeat an experiment over a parameter grid");
    sweep->add_option("--config", sweep_opts.config, "Experiment config")->required();
    sweep->add_option("--seed", sweep_opts.seed, "Override seed_base");
    sweep->add_option("--workers", sweep_opts.workers, "Concurrent members");
    sweep->add_option("--members", sweep_opts.members, "Override ensemble_size");
    sweep->add_option("--out", sweep_opts.out, "Override output_dir");
    sweep->add_option("--parameter", sweep_param, "threshold | T | k | lambda");
    sweep->add_option("--values", sweep_values, "Comma-separated values")->delimiter(',');

    ComplexityInputs cin;
    auto* complexity = app.add_subcommand("complexity", "Print the closed-form cost table");
    complexity->add_option("--n", cin.n_vars, "Number of variables");
    complexity->add_option("--tau-max", cin.tau_max, "Maximum lag");
    complexity->add_option("--p-max", cin.p_max, "Maximum predictors");
    complexity->add_option("--p-size", cin.causal_size, "Causal set size |P|");
    complexity->add_option("--n0", cin.n0, "Initial condition-set size");
    complexity->add_option("--n-max", cin.n_max, "Largest condition-set size");
    complexity->add_option("--n-i", cin.n_i, "Combinations per size");
    complexity->add_option("--T", cin.series_length, "Series length for the CV term");

    GenerateOptions gen_opts;
    auto* generate = app.add_subcommand("generate", "Write a synthetic panel and its ground truth");
    generate->add_option("--model", gen_opts.model, "fixed_model | synergetic | gam");
    generate->add_option("--n", gen_opts.n_vars, "Number of variables (synergetic, gam)");
    generate->add_option("--length", gen_opts.length, "Samples after burn-in");
    generate->add_option("--seed", gen_opts.seed, "Noise seed");
    generate->add_option("--structure-seed", gen_opts.structure_seed, "Structure seed (default: --seed)");
    generate->add_option("--out", gen_opts.out, "Output CSV (ground truth goes to <out>.truth)");

    for (auto* sub : {select, forecast, bench, sweep, complexity, generate})
        sub->set_help_flag("--help", "Print this help message and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*select) return cmd_select(sel_opts);
        if (*forecast) return cmd_forecast(fc_opts, predictor);
        if (*bench) return cmd_bench(bench_opts);
        if (*sweep) return cmd_sweep(sweep_opts, sweep_param, sweep_values);
        if (*complexity) return cmd_complexity(cin);
        if (*generate) return cmd_generate(gen_opts);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
