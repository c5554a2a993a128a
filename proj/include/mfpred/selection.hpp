#pragma once

#include "mfpred/causal.hpp"
#include "mfpred/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mfp {

struct CvError {
    int p = 0;
    double mean_srmse = 0.0;

    bool operator==(const CvError&) const = default;
};

struct SubsetScore {
    std::vector<LaggedVariable> subset;  // sorted by (var, lag)
    double mmi = 0.0;
};

struct SelectionResult {
    Scheme scheme = Scheme::mi_rank;
    /// mi_rank: candidates by descending MI. Forward schemes: picks in
    /// selection order, scored by their CMI gain. Empty for optimal.
    PredictorSet ranked;
    /// Forward schemes: chain-rule MMI after each step, I(X1;Y) + sum of gains.
    std::vector<double> cumulative_mmi;
    /// Entry p-1 holds the predictors used at cardinality p: the ranking
    /// prefix, or for the optimal scheme the MMI-argmax subset of size p.
    std::vector<PredictorSet> per_p_sets;
    /// MI of the p-th ranked predictor, the gain at step p, or the best MMI of size p.
    std::vector<double> per_p_scores;
    /// Optimal scheme only: estimated MMI of every nonempty subset.
    std::vector<SubsetScore> subset_scores;
    int chosen_p = 0;
    PredictorSet chosen_set;
    std::optional<std::vector<CvError>> cv_errors;
    CostCounter cost;
    std::optional<PreselectionResult> preselection;
    std::vector<std::string> warnings;
};

/// Ranks candidates by their estimated MI with the target (k_cmi_mmi).
SelectionResult rank_mi(const TimeSeriesPanel& panel, const PredictionTask& task, const EstimatorConfig& est,
                        const std::vector<LaggedVariable>& candidates);

/// Greedy forward selection by maximal CMI given the already chosen set.
/// Step p estimates one CMI of dimensionality p + 1 for every remaining candidate.
SelectionResult forward_cmi(const TimeSeriesPanel& panel, const PredictionTask& task, const EstimatorConfig& est,
                            const std::vector<LaggedVariable>& candidates, int p_max);

/// Largest p whose every step q <= p passes the lambda rule. For mi_rank the
/// rule is MI_q > lambda * MI_{q-1}; for forward schemes gain_q > lambda *
/// MMI_{q-1}. The first predictor is always kept.
int heuristic_cutoff(const SelectionResult& result, double lambda);

/// Estimates the MMI of every nonempty subset of `causal`, records the argmax
/// per cardinality and picks the global argmax. Ties prefer the smaller
/// subset, then the lexicographically smaller (var, lag) list.
SelectionResult optimal_subsets(const TimeSeriesPanel& panel, const PredictionTask& task, const EstimatorConfig& est,
                                const PredictorSet& causal, int subset_cap = 20);

struct CvOutcome {
    int p_hat = 0;
    std::vector<CvError> errors;
};

/// m-fold blocked cross-validation of the cardinality p. Each fold is a
/// contiguous block of target times; learning rows within tau_max + h steps
/// of a fold are purged from its neighbor pool. Ties go to the smaller p.
CvOutcome cross_validate_p(const TimeSeriesPanel& panel, const PredictionTask& task, const EstimatorConfig& est,
                           const std::map<int, std::vector<LaggedVariable>>& per_p_sets, int folds);

/// Stage results shared by several run_scheme calls on the same panel, task,
/// estimator, algorithm settings and seed. Reused stages keep their costs, so
/// every result reports what the scheme costs on its own.
struct SelectionCache {
    std::optional<PreselectionResult> preselection;
    std::map<std::string, SelectionResult> before_cutoff;
};

/// Runs one scheme end to end on a learning panel and applies its cutoff.
/// Causal schemes include the pre-selection cost in `cost`.
SelectionResult run_scheme(const TimeSeriesPanel& panel, const PredictionTask& task, const EstimatorConfig& est,
                           const AlgorithmConfig& algo, const SchemeConfig& scheme, std::uint64_t rng_seed,
                           SelectionCache* cache = nullptr);

struct ComplexityInputs {
    int n_vars = 10;
    int tau_max = 2;
    int p_max = 8;
    int causal_size = 7;
    int n0 = 2;
    int n_max = 3;
    int n_i = 3;
    std::int64_t series_length = 0;
};

/// Predicted weighted costs (sum of estimate dimensionalities).
struct ComplexityTable {
    std::int64_t mi = 0;
    std::int64_t cmi_forward = 0;
    std::int64_t causal_cmi = 0;
    std::int64_t optimal = 0;
    std::int64_t algo_typical = 0;
    std::int64_t algo_worst = 0;
    std::int64_t cv_extra = 0;
};

ComplexityTable complexity_formulas(const ComplexityInputs& in);

/// Columns: scheme,step,vars,lags,score,chosen,cost (vars and lags ';'-joined).
void write_selection_csv(std::ostream& out, const SelectionResult& result, const std::vector<std::string>& names);

}  // namespace mfp
