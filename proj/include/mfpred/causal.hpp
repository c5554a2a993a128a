#pragma once

#include "mfpred/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace mfp {

/// One conditional-independence test of the pre-selection run. The
/// initialization MI tests are logged with n = 0 and empty conditions.
struct CmiTestRecord {
    int n = 0;
    int i = 0;
    LaggedVariable tested;
    std::vector<LaggedVariable> conditions;
    double cmi = 0.0;
    bool removed = false;
};

struct PreselectionResult {
    /// Surviving causal predictors, ordered by descending final test value.
    PredictorSet predictors;
    std::vector<CmiTestRecord> iteration_log;
    CostCounter cost;
};

/// Iteratively removes candidates (var, lag), lag <= tau_max, that become
/// conditionally independent of the target.
///
/// Candidates passing the unconditional significance rule enter the
/// preliminary set P. For n = n0, n0 + 1, ... while |P| > n and n <= n_max,
/// sweep i = 0..n_i-1: each candidate in P is tested against the first
/// lexicographic combination of n conditions it has not yet been tested with
/// at this level, drawn from the other members of P ranked by descending
/// value at the start of the level. Non-significant candidates are dropped at
/// the end of the sweep and every tested candidate's value is updated to its
/// latest CMI. With n0 > 1 the skipped sizes n0-1 .. 1 are swept afterwards.
PreselectionResult preselect(const TimeSeriesPanel& panel, const PredictionTask& task, const EstimatorConfig& est,
                             const AlgorithmConfig& algo, std::uint64_t rng_seed);

/// Columns: n,i,var,lag,condition_vars,cmi,removed. Conditions are written
/// as name(t-lag) tokens joined by ';'.
void write_iteration_log_csv(std::ostream& out, const std::vector<CmiTestRecord>& log,
                             const std::vector<std::string>& names);

}  // namespace mfp
