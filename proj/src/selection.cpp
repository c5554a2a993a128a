#include "mfpred/selection.hpp"

#include "mfpred/forecast.hpp"
#include "mfpred/infotheory.hpp"

#include <algorithm>
#include <ostream>
#include <set>

namespace mfp {

namespace {

void check_candidates(const std::vector<LaggedVariable>& candidates) {
    if (candidates.empty()) throw ValidationError("candidate predictor set is empty");
    std::set<LaggedVariable> seen(candidates.begin(), candidates.end());
    if (seen.size() != candidates.size()) throw ValidationError("candidate predictor set contains duplicates");
}

Eigen::MatrixXd columns(const DesignMatrix& dm, const std::vector<int>& cols) {
    Eigen::MatrixXd out(dm.predictors.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = dm.predictors.col(cols[c]);
    return out;
}

DesignMatrix rows_of(const DesignMatrix& dm, const std::vector<int>& rows) {
    DesignMatrix out;
    out.predictors.resize(static_cast<Eigen::Index>(rows.size()), dm.predictors.cols());
    out.target.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.predictors.row(static_cast<Eigen::Index>(r)) = dm.predictors.row(rows[r]);
        out.target(static_cast<Eigen::Index>(r)) = dm.target(rows[r]);
        out.target_times.push_back(dm.target_times[static_cast<std::size_t>(rows[r])]);
    }
    return out;
}

bool better_scored(const ScoredPredictor& a, const ScoredPredictor& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.variable < b.variable;
}

void check_samples(const DesignMatrix& dm, int k) {
    if (dm.rows() <= k)
        throw InsufficientSamplesError("selection: " + std::to_string(dm.rows()) +
                                       " aligned samples do not exceed k = " + std::to_string(k));
}

std::vector<PredictorSet> prefixes(const PredictorSet& ranked) {
    std::vector<PredictorSet> out;
    for (std::size_t p = 1; p <= ranked.size(); ++p) out.emplace_back(ranked.begin(), ranked.begin() + p);
    return out;
}

}  // namespace

SelectionResult rank_mi(const TimeSeriesPanel& panel, const PredictionTask& task, const EstimatorConfig& est,
                        const std::vector<LaggedVariable>& candidates) {
    check_candidates(candidates);
    est.validate();
    const auto dm = design_matrix(panel, candidates, task, valid_targets(panel, task));
    check_samples(dm, est.k_cmi_mmi);

    SelectionResult out;
    out.scheme = Scheme::mi_rank;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const double mi = estimate_mi(dm.predictors.col(static_cast<Eigen::Index>(c)), dm.target, est.k_cmi_mmi).value;
        out.cost.add(1, 1, 0);
        out.ranked.push_back({candidates[c], mi});
    }
    std::sort(out.ranked.begin(), out.ranked.end(), better_scored);
    out.per_p_sets = prefixes(out.ranked);
    for (const auto& r : out.ranked) out.per_p_scores.push_back(r.score);
    out.chosen_p = static_cast<int>(out.ranked.size());
    out.chosen_set = out.ranked;
    return out;
}

SelectionResult forward_cmi(const TimeSeriesPanel& panel, const PredictionTask& task, const EstimatorConfig& est,
                            const std::vector<LaggedVariable>& candidates, int p_max) {
    check_candidates(candidates);
    est.validate();
    if (p_max < 1) throw ValidationError("forward_cmi: p_max must be >= 1");
    SelectionResult out;
    out.scheme = Scheme::cmi_forward;
    if (p_max > static_cast<int>(candidates.size())) {
        out.warnings.push_back("p_max " + std::to_string(p_max) + " exceeds the " + std::to_string(candidates.size()) +
                               " candidates; truncated");
        p_max = static_cast<int>(candidates.size());
    }
    const auto dm = design_matrix(panel, candidates, task, valid_targets(panel, task));
    check_samples(dm, est.k_cmi_mmi);

    std::vector<int> chosen;
    std::vector<bool> used(candidates.size(), false);
    for (int step = 0; step < p_max; ++step) {
        const Eigen::MatrixXd z = columns(dm, chosen);
        int best = -1;
        double best_value = 0.0;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if (used[c]) continue;
            const double value =
                estimate_cmi(dm.predictors.col(static_cast<Eigen::Index>(c)), dm.target, z, est.k_cmi_mmi).value;
            out.cost.add(1, 1, step);
            if (best < 0 || value > best_value ||
                (value == best_value && candidates[c] < candidates[static_cast<std::size_t>(best)])) {
                best = static_cast<int>(c);
                best_value = value;
            }
        }
        used[static_cast<std::size_t>(best)] = true;
        chosen.push_back(best);
        out.ranked.push_back({candidates[static_cast<std::size_t>(best)], best_value});
        out.cumulative_mmi.push_back(step == 0 ? best_value : out.cumulative_mmi.back() + best_value);
        out.per_p_scores.push_back(best_value);
    }
    out.per_p_sets = prefixes(out.ranked);
    out.chosen_p = p_max;
    out.chosen_set = out.ranked;
    return out;
}

int heuristic_cutoff(const SelectionResult& result, double lambda) {
    if (result.ranked.empty()) throw ValidationError("heuristic_cutoff: empty ranking");
    if (!(lambda >= 0.0 && lambda < 1.0)) throw ValidationError("heuristic_cutoff: lambda must lie in [0, 1)");
    if (result.scheme == Scheme::optimal) throw ValidationError("heuristic_cutoff: not defined for the optimal scheme");
    const bool forward = !result.cumulative_mmi.empty();
    int p = 1;
    for (std::size_t q = 1; q < result.ranked.size(); ++q) {
        const double reference = forward ? result.cumulative_mmi[q - 1] : result.ranked[q - 1].score;
        if (!(result.ranked[q].score > lambda * reference)) break;
        p = static_cast<int>(q) + 1;
    }
    return p;
}

SelectionResult optimal_subsets(const TimeSeriesPanel& panel, const PredictionTask& task, const EstimatorConfig& est,
                                const PredictorSet& causal, int subset_cap) {
    est.validate();
    if (causal.empty()) throw ValidationError("optimal_subsets: no causal predictors");
    if (static_cast<int>(causal.size()) > subset_cap)
        throw ValidationError("optimal_subsets: " + std::to_string(causal.size()) + " causal predictors exceed the cap of " +
                              std::to_string(subset_cap) +
                              "; raise the pre-selection threshold (or lower alpha) to shrink the causal set");
    PredictorSet sorted = causal;
    std::sort(sorted.begin(), sorted.end(),
              [](const ScoredPredictor& a, const ScoredPredictor& b) { return a.variable < b.variable; });
    const auto vars = variables_of(sorted);
    check_candidates(vars);
    const auto dm = design_matrix(panel, vars, task, valid_targets(panel, task));
    check_samples(dm, est.k_cmi_mmi);

    const int n = static_cast<int>(sorted.size());
    SelectionResult out;
    out.scheme = Scheme::optimal;
    out.per_p_sets.resize(static_cast<std::size_t>(n));
    out.per_p_scores.assign(static_cast<std::size_t>(n), 0.0);
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    int global_p = 0;
    double global_mmi = 0.0;

    // Within one cardinality, increasing masks over (var, lag)-sorted columns
    // are not lexicographic, so ties compare the subsets explicitly.
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<int> cols;
        for (int c = 0; c < n; ++c)
            if (mask & (1u << c)) cols.push_back(c);
        const int p = static_cast<int>(cols.size());
        const double mmi = estimate_mi(columns(dm, cols), dm.target, est.k_cmi_mmi).value;
        out.cost.add(p, 1, 0);

        SubsetScore score;
        for (int c : cols) score.subset.push_back(vars[static_cast<std::size_t>(c)]);
        score.mmi = mmi;
        auto& slot = out.per_p_sets[static_cast<std::size_t>(p - 1)];
        const bool better = !seen[static_cast<std::size_t>(p - 1)] || mmi > out.per_p_scores[static_cast<std::size_t>(p - 1)] ||
                            (mmi == out.per_p_scores[static_cast<std::size_t>(p - 1)] && score.subset < variables_of(slot));
        if (better) {
            seen[static_cast<std::size_t>(p - 1)] = true;
            out.per_p_scores[static_cast<std::size_t>(p - 1)] = mmi;
            slot.clear();
            for (int c : cols) slot.push_back(sorted[static_cast<std::size_t>(c)]);
        }
        out.subset_scores.push_back(std::move(score));
    }
    for (int p = 1; p <= n; ++p) {
        const double mmi = out.per_p_scores[static_cast<std::size_t>(p - 1)];
        if (global_p == 0 || mmi > global_mmi) {
            global_p = p;
            global_mmi = mmi;
        }
    }
    out.chosen_p = global_p;
    out.chosen_set = out.per_p_sets[static_cast<std::size_t>(global_p - 1)];
    return out;
}

CvOutcome cross_validate_p(const TimeSeriesPanel& panel, const PredictionTask& task, const EstimatorConfig& est,
                           const std::map<int, std::vector<LaggedVariable>>& per_p_sets, int folds) {
    est.validate();
    if (folds < 2) throw ValidationError("cross_validate_p: at least 2 folds are required");
    if (per_p_sets.empty()) throw ValidationError("cross_validate_p: no predictor sets to compare");
    const TimeRange range = valid_targets(panel, task);
    const int n_rows = range.size();
    if (n_rows < folds) throw InsufficientSamplesError("cross_validate_p: fold too small");
    const int purge = task.tau_max + task.horizon;

    // Row indices (into the design matrix over `range`) of each fold and its pool.
    std::vector<std::vector<int>> fold_rows(static_cast<std::size_t>(folds)), pool_rows(static_cast<std::size_t>(folds));
    for (int f = 0; f < folds; ++f) {
        const int begin = static_cast<int>(static_cast<long long>(n_rows) * f / folds);
        const int end = static_cast<int>(static_cast<long long>(n_rows) * (f + 1) / folds);
        for (int r = 0; r < n_rows; ++r) {
            if (r >= begin && r < end)
                fold_rows[static_cast<std::size_t>(f)].push_back(r);
            else if (r < begin - purge || r > end - 1 + purge)
                pool_rows[static_cast<std::size_t>(f)].push_back(r);
        }
        if (static_cast<int>(fold_rows[static_cast<std::size_t>(f)].size()) < est.k_predict ||
            static_cast<int>(pool_rows[static_cast<std::size_t>(f)].size()) < est.k_predict)
            throw InsufficientSamplesError("cross_validate_p: fold " + std::to_string(f) +
                                           " too small for k_predict = " + std::to_string(est.k_predict));
    }

    CvOutcome out;
    double best = 0.0;
    for (const auto& [p, vars] : per_p_sets) {
        const auto dm = design_matrix(panel, vars, task, range);
        double total = 0.0;
        for (int f = 0; f < folds; ++f) {
            const auto learn = rows_of(dm, pool_rows[static_cast<std::size_t>(f)]);
            const auto query = rows_of(dm, fold_rows[static_cast<std::size_t>(f)]);
            const auto fc = knn_predict(learn, query, est.k_predict);
            total += srmse(fc.predictions, query.target);
        }
        const double mean = total / folds;
        out.errors.push_back({p, mean});
        if (out.p_hat == 0 || mean < best) {
            out.p_hat = p;
            best = mean;
        }
    }
    return out;
}

SelectionResult run_scheme(const TimeSeriesPanel& panel, const PredictionTask& task, const EstimatorConfig& est,
                           const AlgorithmConfig& algo, const SchemeConfig& cfg, std::uint64_t rng_seed,
                           SelectionCache* cache) {
    cfg.validate();
    task.validate(panel.n_vars());
    est.validate();
    const auto grid = candidate_grid(panel.n_vars(), task.tau_max);
    const std::string stage_key = to_string(cfg.scheme) + "/" + std::to_string(cfg.p_max) + "/" +
                                  std::to_string(cfg.scheme == Scheme::optimal ? cfg.subset_cap : 0);
    auto pre_selection = [&] {
        if (cache && cache->preselection) return *cache->preselection;
        auto pre = preselect(panel, task, est, algo, rng_seed);
        if (cache) cache->preselection = pre;
        return pre;
    };

    SelectionResult out;
    const SelectionResult* cached = nullptr;
    if (cache) {
        const auto it = cache->before_cutoff.find(stage_key);
        if (it != cache->before_cutoff.end()) cached = &it->second;
    }
    if (cached) {
        out = *cached;
    } else {
    switch (cfg.scheme) {
        case Scheme::mi_rank: {
            out = rank_mi(panel, task, est, grid);
            if (static_cast<int>(out.per_p_sets.size()) > cfg.p_max) {
                out.per_p_sets.resize(static_cast<std::size_t>(cfg.p_max));
                out.per_p_scores.resize(static_cast<std::size_t>(cfg.p_max));
            }
            break;
        }
        case Scheme::cmi_forward: {
            out = forward_cmi(panel, task, est, grid, cfg.p_max);
            break;
        }
        case Scheme::causal_cmi_forward:
        case Scheme::optimal: {
            auto pre = pre_selection();
            if (pre.predictors.empty()) throw DataError("no causal predictors survived the pre-selection");
            if (cfg.scheme == Scheme::causal_cmi_forward) {
                const int limit = std::min<int>(cfg.p_max, static_cast<int>(pre.predictors.size()));
                out = forward_cmi(panel, task, est, variables_of(pre.predictors), limit);
                out.scheme = Scheme::causal_cmi_forward;
            } else {
                out = optimal_subsets(panel, task, est, pre.predictors, cfg.subset_cap);
            }
            out.cost += pre.cost;
            out.preselection = std::move(pre);
            break;
        }
    }
    if (cache) cache->before_cutoff[stage_key] = out;
    }

    const int available = static_cast<int>(out.per_p_sets.size());
    auto cv_over = [&](int folds) {
        std::map<int, std::vector<LaggedVariable>> sets;
        for (int p = 1; p <= std::min(available, cfg.p_max); ++p)
            sets[p] = variables_of(out.per_p_sets[static_cast<std::size_t>(p - 1)]);
        auto cv = cross_validate_p(panel, task, est, sets, folds);
        out.cv_errors = cv.errors;
        return cv.p_hat;
    };

    if (const auto* h = std::get_if<HeuristicCutoff>(&cfg.cutoff)) {
        out.chosen_p = std::min(heuristic_cutoff(out, h->lambda), available);
    } else if (const auto* cv = std::get_if<CrossValidationCutoff>(&cfg.cutoff)) {
        out.chosen_p = cv_over(cv->folds);
    } else if (const auto* cv2 = std::get_if<MmiMaxPlusCvCutoff>(&cfg.cutoff)) {
        out.chosen_p = cv_over(cv2->folds);
    }
    // MmiMaxCutoff keeps the global argmax chosen by optimal_subsets.
    out.chosen_set = out.per_p_sets[static_cast<std::size_t>(out.chosen_p - 1)];
    return out;
}

ComplexityTable complexity_formulas(const ComplexityInputs& in) {
    using I = std::int64_t;
    const I candidates = static_cast<I>(in.n_vars) * (in.tau_max + 1);
    const I p = in.p_max;
    const I P = in.causal_size;
    ComplexityTable t;
    t.mi = 2 * candidates;
    t.cmi_forward = p * (5 - 3 * p - 2 * p * p + 3 * static_cast<I>(in.n_vars) * (3 + p) * (1 + in.tau_max)) / 6;
    t.causal_cmi = P * (P + 1) * (P + 5) / 6;
    t.optimal = P >= 1 ? (I{1} << (P - 1)) * (2 + P) - 1 : 0;
    t.algo_typical = candidates * (2 + static_cast<I>(in.n_i) * (2 + in.n0));
    // n_i * (1 + n_max - n0) * (4 + n_max + n0) is always even.
    t.algo_worst = candidates * (2 + static_cast<I>(in.n_i) * (1 + in.n_max - in.n0) * (4 + in.n_max + in.n0) / 2);
    t.cv_extra = in.series_length * in.series_length * p * (3 + p) / 2;
    return t;
}

void write_selection_csv(std::ostream& out, const SelectionResult& result, const std::vector<std::string>& names) {
    out << "scheme,step,vars,lags,score,chosen,cost\n";
    for (std::size_t p = 1; p <= result.per_p_sets.size(); ++p) {
        std::string vars, lags;
        for (const auto& sp : result.per_p_sets[p - 1]) {
            if (!vars.empty()) {
                vars += ';';
                lags += ';';
            }
            vars += sp.variable.var < static_cast<int>(names.size()) ? names[sp.variable.var] : std::to_string(sp.variable.var);
            lags += std::to_string(sp.variable.lag);
        }
        out << to_string(result.scheme) << ',' << p << ',' << vars << ',' << lags << ','
            << format_real(result.per_p_scores[p - 1]) << ',' << (static_cast<int>(p) == result.chosen_p ? 1 : 0) << ','
            << result.cost.weighted_cost << '\n';
    }
}

}  // namespace mfp
