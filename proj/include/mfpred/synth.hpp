#pragma once

#include "mfpred/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mfp {

struct ModelParams {
    double a = 0.4;
    double b = 2.0;
    double c = 0.4;
    double sigma = 0.5;
};

/// One additive driving term coef * g(X^{(source)}_{t - lag}) of a variable's
/// next value, with g(x) = x or x^2.
struct DrivingTerm {
    LaggedVariable source;
    double coefficient = 0.0;
    bool quadratic = false;
};

/// Structural equations: X^{(j)}_{t+1} = sum terms + product_coef * prod(product) + noise_scale * eta.
struct VariableEquation {
    std::vector<DrivingTerm> terms;
    std::vector<LaggedVariable> product;
    double product_coefficient = 0.0;
    double noise_scale = 1.0;
};

struct GroundTruth {
    std::string model;
    int target = 0;
    std::vector<LaggedVariable> true_drivers;        // lags relative to the base time, h = 1
    std::vector<LaggedVariable> synergetic_drivers;  // subset of true_drivers
    ModelParams model_params;
    std::uint64_t structure_seed = 0;
    std::uint64_t noise_seed = 0;
    std::vector<VariableEquation> equations;
};

struct SyntheticSeries {
    TimeSeriesPanel panel;
    GroundTruth truth;
};

/// Number of leading samples generated and discarded by every generator.
inline constexpr int kBurnIn = 100;

/// Ten variables Y, X1, X2, W1..W4, Z1..Z3 (Y is column 0):
///   Y_{t+1}  = c sum_i W^{(i)}_{t-1} + b prod_i Z^{(i)}_{t-1} + sigma eta
///   X1_t     = a (W1_{t-1} + W3_{t-1}) + eta,  X2_t = a (W2_{t-1} + W4_{t-1}) + eta
/// with W, Z, eta i.i.d. standard normal.
SyntheticSeries gen_fixed_model(int length, std::uint64_t seed, const ModelParams& params = {});

/// Random member of the synergetic ensemble. The target X1 (column 0) is
/// driven by c times the sum of 5 lagged variables plus b times the product of
/// 3 further lagged variables; every other variable by a times the sum of 2
/// lagged drivers among the non-target variables. All lags lie in {0, 1, 2}.
/// Structure comes from `structure_seed` (default: `seed`), noise from `seed`.
SyntheticSeries gen_synergetic_member(int n_vars, int length, std::uint64_t seed, const ModelParams& params = {},
                                      std::optional<std::uint64_t> structure_seed = std::nullopt);

/// Random generalized additive member: each variable has a linear
/// autodependency b * X^{(j)}_t with b ~ U[0.2, 0.5], 1-2 couplings
/// coef * g(X^{(i)}_{t-lag}) from other variables with g(x) = x or x^2 (equally
/// likely), |coef| ~ U[0.2, 0.5] with random sign and lag <= 2, plus unit noise. Structures that diverge are re-drawn with the next
/// structure seed. The target is the variable with the largest sum of
/// absolute incoming coefficients.
SyntheticSeries gen_gam_member(int n_vars, int length, std::uint64_t seed,
                               std::optional<std::uint64_t> structure_seed = std::nullopt);

struct OracleEntry {
    double srmse = 0.0;
    std::vector<LaggedVariable> subset;
};

/// Brute force over every nonempty subset of the true drivers: the lowest
/// out-of-sample kNN SRMSE on `test` for each cardinality p.
std::map<int, OracleEntry> minimal_error_oracle(const TimeSeriesPanel& panel, const GroundTruth& truth,
                                                const PredictionTask& task, int k, TimeRange learn, TimeRange test);

/// Smallest value over all cardinalities.
double oracle_minimum(const std::map<int, OracleEntry>& oracle);

/// key=value sidecar: model, target, seeds, parameters, driver lists.
void write_ground_truth(std::ostream& out, const GroundTruth& truth, const std::vector<std::string>& names);

}  // namespace mfp
