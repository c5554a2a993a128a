#include "mfpred/bench.hpp"

#include "mfpred/forecast.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace mfp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct MemberData {
    TimeSeriesPanel panel;
    std::optional<GroundTruth> truth;
    int target = 0;
};

MemberData member_data(const ExperimentConfig& cfg, std::uint64_t seed) {
    const int length = cfg.T_learn + cfg.T_test;
    const auto& m = cfg.model;
    switch (m.kind) {
        case ModelKind::fixed_model: {
            auto s = gen_fixed_model(length, seed, m.params);
            return {std::move(s.panel), std::move(s.truth), 0};
        }
        case ModelKind::synergetic: {
            auto s = gen_synergetic_member(m.n_vars, length, seed, m.params, m.structure_seed);
            return {std::move(s.panel), std::move(s.truth), 0};
        }
        case ModelKind::gam: {
            auto s = gen_gam_member(m.n_vars, length, seed, m.structure_seed);
            const int target = s.truth.target;
            return {std::move(s.panel), std::move(s.truth), target};
        }
        case ModelKind::csv: {
            auto panel = read_panel_csv_file(m.path);
            if (panel.length() < length)
                throw InsufficientSamplesError(m.path + ": " + std::to_string(panel.length()) +
                                               " rows, T_learn + T_test = " + std::to_string(length));
            const int target = panel.index_of(m.target);
            return {panel.slice(0, length), std::nullopt, target};
        }
    }
    throw ValidationError("unknown model kind");
}

struct Overlap {
    double tpr = kNaN;
    double fdr = kNaN;
};

Overlap overlap(const std::vector<LaggedVariable>& chosen, const std::vector<LaggedVariable>& truth) {
    if (chosen.empty() || truth.empty()) return {};
    const std::set<LaggedVariable> t(truth.begin(), truth.end());
    const auto hits = std::count_if(chosen.begin(), chosen.end(), [&](const auto& v) { return t.count(v) > 0; });
    return {static_cast<double>(hits) / static_cast<double>(t.size()),
            static_cast<double>(static_cast<long>(chosen.size()) - hits) / static_cast<double>(chosen.size())};
}

double linear_srmse(const TimeSeriesPanel& panel, const std::vector<LaggedVariable>& set, const PredictionTask& task,
                    TimeRange learn, TimeRange test) {
    try {
        const auto model = fit_linear(panel, set, task, learn);
        const auto fc = linear_predict(model, design_matrix(panel, set, task, test));
        return fc.srmse.value_or(kNaN);
    } catch (const DataError&) {
        return kNaN;
    }
}

double knn_srmse(const TimeSeriesPanel& panel, const std::vector<LaggedVariable>& set, const PredictionTask& task,
                 int k, TimeRange learn, TimeRange test) {
    return knn_predict(panel, set, task, k, learn, test).srmse.value_or(kNaN);
}

}  // namespace

std::string scheme_label(const SchemeConfig& scheme) {
    return to_string(scheme.scheme) + "/" + to_string(scheme.cutoff);
}

MemberOutcome run_member(const ExperimentConfig& cfg, int member) {
    MemberOutcome out;
    out.member = member;
    out.seed = cfg.seed_base + static_cast<std::uint64_t>(member);
    auto data = member_data(cfg, out.seed);
    out.names = data.panel.names();

    const PredictionTask task{data.target, cfg.h, cfg.tau_max};
    task.validate(data.panel.n_vars());
    const auto standardized = Standardizer::fit(data.panel, cfg.T_learn).apply(data.panel);
    const auto learn_panel = standardized.slice(0, cfg.T_learn);
    const TimeRange learn{task.first_target_time(), cfg.T_learn};
    const TimeRange test{std::max(cfg.T_learn, task.first_target_time()), cfg.T_learn + cfg.T_test};

    // Ground-truth lags refer to a one-step forecast within the candidate grid.
    bool truth_usable = data.truth && cfg.h == 1;
    if (truth_usable)
        for (const auto& d : data.truth->true_drivers) truth_usable = truth_usable && d.lag <= cfg.tau_max;
    std::vector<LaggedVariable> true_drivers;
    double oracle_min = kNaN;
    if (truth_usable) {
        true_drivers = data.truth->true_drivers;
        if (cfg.oracle) {
            out.oracle = minimal_error_oracle(standardized, *data.truth, task, cfg.est.k_predict, learn, test);
            oracle_min = oracle_minimum(out.oracle);
        }
    }
    out.truth = std::move(data.truth);

    auto relative = [&](double s) { return std::isfinite(oracle_min) ? s / oracle_min - 1.0 : kNaN; };

    if (!out.oracle.empty()) {
        int best_p = 0;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [p, e] : out.oracle)
            if (e.srmse < best) {
                best = e.srmse;
                best_p = p;
            }
        const int p_eval = std::min(static_cast<int>(true_drivers.size()), out.oracle.rbegin()->first);
        for (const auto& [p, e] : out.oracle) {
            MemberRow row;
            row.member = member;
            row.scheme = "oracle";
            row.predictor = "knn";
            row.p = p;
            row.chosen = p == best_p;
            row.srmse = e.srmse;
            row.rel_srmse = relative(e.srmse);
            const auto ov = overlap(e.subset, true_drivers);
            row.tpr = ov.tpr;
            row.fdr = ov.fdr;
            row.eval_row = p == p_eval;
            out.rows.push_back(row);
        }
    }

    std::vector<std::string> predictors;
    if (cfg.predictor != PredictorMode::linear) predictors.push_back("knn");
    if (cfg.predictor != PredictorMode::knn) predictors.push_back("linear");

    SelectionCache cache;
    for (const auto& scheme : cfg.schemes) {
        SchemeOutcome so;
        so.label = scheme_label(scheme);
        try {
            so.selection = run_scheme(learn_panel, task, cfg.est, cfg.algo, scheme, out.seed, &cache);
        } catch (const Error& e) {
            so.error = e.what();
        }
        for (const auto& mode : predictors) {
            const std::string label = mode == "knn" ? so.label : so.label + ":" + mode;
            if (!so.selection) {
                MemberRow row;
                row.member = member;
                row.scheme = label;
                row.predictor = mode;
                row.chosen = true;
                row.srmse = row.rel_srmse = row.tpr = row.fdr = kNaN;
                out.rows.push_back(row);
                continue;
            }
            const auto& sel = *so.selection;
            const int available = static_cast<int>(sel.per_p_sets.size());
            const int p_eval = true_drivers.empty() ? 0 : std::min(static_cast<int>(true_drivers.size()), available);
            const int causal_size = sel.preselection ? static_cast<int>(sel.preselection->predictors.size()) : -1;
            for (int p = 1; p <= available; ++p) {
                const auto set = variables_of(sel.per_p_sets[static_cast<std::size_t>(p - 1)]);
                MemberRow row;
                row.member = member;
                row.scheme = label;
                row.predictor = mode;
                row.p = p;
                row.chosen = p == sel.chosen_p;
                row.srmse = mode == "knn" ? knn_srmse(standardized, set, task, cfg.est.k_predict, learn, test)
                                          : linear_srmse(standardized, set, task, learn, test);
                row.rel_srmse = relative(row.srmse);
                const auto ov = overlap(set, true_drivers);
                row.tpr = ov.tpr;
                row.fdr = ov.fdr;
                row.cost = sel.cost.weighted_cost;
                row.causal_size = causal_size;
                row.eval_row = p == p_eval;
                out.rows.push_back(row);
            }
        }
        out.schemes.push_back(std::move(so));
    }
    return out;
}

double quantile(std::vector<double> values, double q) {
    values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return !std::isfinite(v); }),
                 values.end());
    if (values.empty()) return kNaN;
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<SummaryRow> summarize(const std::vector<MemberRow>& rows, int ensemble_size) {
    std::vector<std::string> labels;
    for (const auto& r : rows)
        if (std::find(labels.begin(), labels.end(), r.scheme) == labels.end()) labels.push_back(r.scheme);

    static constexpr std::pair<const char*, double> kQuantiles[] = {
        {"q05", 0.05}, {"q25", 0.25}, {"q50", 0.50}, {"q75", 0.75}, {"q95", 0.95}};
    std::vector<SummaryRow> out;
    for (const auto& label : labels) {
        std::vector<double> srmse, rel, p_hat, cost, causal, tpr, fdr;
        int n_ok = 0;
        for (const auto& r : rows) {
            if (r.scheme != label) continue;
            if (r.chosen) {
                if (std::isfinite(r.srmse)) ++n_ok;
                srmse.push_back(r.srmse);
                rel.push_back(r.rel_srmse);
                p_hat.push_back(std::isfinite(r.srmse) ? r.p : kNaN);
                cost.push_back(static_cast<double>(r.cost));
                if (r.causal_size >= 0) causal.push_back(r.causal_size);
            }
            if (r.eval_row) {
                tpr.push_back(r.tpr);
                fdr.push_back(r.fdr);
            }
        }
        out.push_back({label, "members", static_cast<double>(n_ok)});
        out.push_back({label, "failed", static_cast<double>(ensemble_size - n_ok)});
        auto emit = [&](const std::string& name, const std::vector<double>& v) {
            if (std::none_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); })) return;
            for (const auto& [suffix, q] : kQuantiles) out.push_back({label, name + "_" + suffix, quantile(v, q)});
            double sum = 0.0;
            int n = 0;
            for (double x : v)
                if (std::isfinite(x)) {
                    sum += x;
                    ++n;
                }
            out.push_back({label, name + "_mean", sum / n});
        };
        emit("srmse", srmse);
        emit("rel_srmse", rel);
        emit("p_hat", p_hat);
        emit("tpr", tpr);
        emit("fdr", fdr);
        emit("cost", cost);
        emit("causal_size", causal);
        if (!rel.empty()) {
            int below = 0;
            for (double x : rel) below += std::isfinite(x) && x < 0.05;
            out.push_back({label, "frac_rel_srmse_below_0.05", static_cast<double>(below) / ensemble_size});
        }
    }
    return out;
}

double ExperimentReport::statistic(const std::string& scheme, const std::string& name) const {
    for (const auto& r : summary)
        if (r.scheme == scheme && r.statistic == name) return r.value;
    return kNaN;
}

void write_members_csv(std::ostream& out, const std::vector<MemberRow>& rows) {
    out << "member,scheme,p,srmse,rel_srmse,tpr,fdr,cost,predictor,chosen,causal_size\n";
    for (const auto& r : rows) {
        out << r.member << ',' << r.scheme << ',' << r.p << ',' << format_real(r.srmse) << ','
            << format_real(r.rel_srmse) << ',' << format_real(r.tpr) << ',' << format_real(r.fdr) << ',' << r.cost
            << ',' << r.predictor << ',' << (r.chosen ? 1 : 0) << ',' << r.causal_size << '\n';
    }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "scheme,statistic,value\n";
    for (const auto& r : rows) out << r.scheme << ',' << r.statistic << ',' << format_real(r.value) << '\n';
}

void write_selection_log_csv(std::ostream& out, const std::vector<MemberOutcome>& members) {
    out << "member,label,scheme,step,vars,lags,score,chosen,cost\n";
    for (const auto& m : members) {
        for (const auto& s : m.schemes) {
            if (!s.selection) continue;
            std::ostringstream body;
            write_selection_csv(body, *s.selection, m.names);
            std::istringstream lines(body.str());
            std::string line;
            std::getline(lines, line);  // header
            while (std::getline(lines, line)) out << m.member << ',' << s.label << ',' << line << '\n';
        }
    }
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, bool write_files) {
    cfg.validate();
    ExperimentReport report;
    report.members.resize(static_cast<std::size_t>(cfg.ensemble_size));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (int m = next++; m < cfg.ensemble_size; m = next++) {
            try {
                report.members[static_cast<std::size_t>(m)] = run_member(cfg, m);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = cfg.ensemble_size;
            }
        }
    };
    const int workers = std::min(cfg.workers, cfg.ensemble_size);
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    for (const auto& m : report.members) report.rows.insert(report.rows.end(), m.rows.begin(), m.rows.end());
    report.summary = summarize(report.rows, cfg.ensemble_size);

    if (write_files) {
        const std::filesystem::path dir(cfg.output_dir);
        std::filesystem::create_directories(dir);
        auto open = [&](const char* name) {
            std::ofstream f(dir / name);
            if (!f) throw DataError("cannot write " + (dir / name).string());
            return f;
        };
        auto members = open("members.csv");
        write_members_csv(members, report.rows);
        auto summary = open("summary.csv");
        write_summary_csv(summary, report.summary);
        auto log = open("selection_log.csv");
        write_selection_log_csv(log, report.members);
    }
    return report;
}

ExperimentConfig apply_sweep_value(const ExperimentConfig& cfg, SweepParameter parameter, double value) {
    ExperimentConfig out = cfg;
    out.sweep.reset();
    auto as_int = [&](const char* what) {
        if (value != std::floor(value) || value < 1) throw ValidationError(std::string(what) + " sweep values must be positive integers");
        return static_cast<int>(value);
    };
    switch (parameter) {
        case SweepParameter::threshold:
            if (value < 0) throw ValidationError("threshold sweep values must be nonnegative");
            out.algo.significance = FixedThreshold{value};
            break;
        case SweepParameter::length:
            out.T_learn = as_int("T");
            out.T_test = std::max(1, out.T_learn / 4);
            break;
        case SweepParameter::k:
            out.est.k_cmi_mmi = out.est.k_predict = as_int("k");
            break;
        case SweepParameter::lambda:
            for (auto& s : out.schemes)
                if (std::holds_alternative<HeuristicCutoff>(s.cutoff)) s.cutoff = HeuristicCutoff{value};
            break;
    }
    out.validate();
    return out;
}

std::vector<SweepPoint> run_sweep(const ExperimentConfig& cfg, bool write_files) {
    if (!cfg.sweep) throw ValidationError("config has no [sweep] section");
    const auto parameter = cfg.sweep->parameter;
    std::vector<SweepPoint> points;
    for (double v : cfg.sweep->values) {
        auto point_cfg = apply_sweep_value(cfg, parameter, v);
        std::ostringstream name;
        name << to_string(parameter) << '_' << v;
        point_cfg.output_dir = (std::filesystem::path(cfg.output_dir) / name.str()).string();
        points.push_back({v, run_experiment(point_cfg, write_files)});
    }
    if (write_files) {
        std::filesystem::create_directories(cfg.output_dir);
        std::ofstream f(std::filesystem::path(cfg.output_dir) / "sweep.csv");
        if (!f) throw DataError("cannot write sweep.csv");
        f << "parameter,value,scheme,statistic,stat_value\n";
        for (const auto& pt : points)
            for (const auto& r : pt.report.summary)
                f << to_string(parameter) << ',' << format_real(pt.value) << ',' << r.scheme << ',' << r.statistic
                  << ',' << format_real(r.value) << '\n';
    }
    return points;
}

}  // namespace mfp
