#pragma once

#include <Eigen/Core>

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mfp {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid arguments or configuration. The CLI maps this to exit status 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Problems with the data itself. The CLI maps this to exit status 2.
class DataError : public Error {
public:
    using Error::Error;
};

class InsufficientSamplesError : public DataError {
public:
    using DataError::DataError;
};

class DegenerateInputError : public DataError {
public:
    using DataError::DataError;
};

class SingularDesignError : public DataError {
public:
    using DataError::DataError;
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// One candidate predictor: variable `var` observed `lag` steps before the
/// forecast base time t = s - h of a target at time s.
struct LaggedVariable {
    int var = 0;
    int lag = 0;

    auto operator<=>(const LaggedVariable&) const = default;
};

struct ScoredPredictor {
    LaggedVariable variable;
    double score = 0.0;

    bool operator==(const ScoredPredictor&) const = default;
};

/// Ordered predictors with attached scores (MI, CMI gain or MMI).
using PredictorSet = std::vector<ScoredPredictor>;

std::vector<LaggedVariable> variables_of(const PredictorSet& set);

struct PredictionTask {
    int target = 0;
    int horizon = 1;
    int tau_max = 0;

    void validate(int n_vars) const;
    /// First admissible 0-based target time.
    int first_target_time() const { return tau_max + horizon; }
};

struct EstimatorConfig {
    int k_algo = 50;
    int k_cmi_mmi = 10;
    int k_predict = 10;

    void validate() const;
    /// Convenience for the common case k_predict == k_cmi_mmi.
    static EstimatorConfig with_k(int k_algo, int k);
};

struct FixedThreshold {
    double value = 0.004;
};

struct ShuffleSignificance {
    int surrogates = 100;
    double alpha = 0.05;
};

using Significance = std::variant<FixedThreshold, ShuffleSignificance>;

struct AlgorithmConfig {
    int n0 = 2;
    int n_max = 3;
    int n_i = 3;
    Significance significance = FixedThreshold{};

    void validate() const;
};

enum class Scheme { mi_rank, cmi_forward, causal_cmi_forward, optimal };

struct HeuristicCutoff {
    double lambda = 0.2;
};
struct CrossValidationCutoff {
    int folds = 5;
};
struct MmiMaxCutoff {};
struct MmiMaxPlusCvCutoff {
    int folds = 5;
};

using Cutoff = std::variant<HeuristicCutoff, CrossValidationCutoff, MmiMaxCutoff, MmiMaxPlusCvCutoff>;

struct SchemeConfig {
    Scheme scheme = Scheme::optimal;
    Cutoff cutoff = MmiMaxCutoff{};
    int p_max = 8;
    int subset_cap = 20;

    void validate() const;
};

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);
std::string to_string(const Cutoff& cutoff);

/// Number of (C)MI estimates and the summed dimensionality of their spaces.
struct CostCounter {
    std::int64_t n_estimates = 0;
    std::int64_t weighted_cost = 0;

    void add(int dx, int dy, int dz) {
        ++n_estimates;
        weighted_cost += dx + dy + dz;
    }
    CostCounter& operator+=(const CostCounter& other) {
        n_estimates += other.n_estimates;
        weighted_cost += other.weighted_cost;
        return *this;
    }
    bool operator==(const CostCounter&) const = default;
};

// ---------------------------------------------------------------------------
// Panel
// ---------------------------------------------------------------------------

/// T x N multivariate series; rows are time steps. Immutable once built.
class TimeSeriesPanel {
public:
    TimeSeriesPanel(Eigen::MatrixXd values, std::vector<std::string> names);

    int length() const { return static_cast<int>(values_.rows()); }
    int n_vars() const { return static_cast<int>(values_.cols()); }
    const Eigen::MatrixXd& values() const { return values_; }
    const std::vector<std::string>& names() const { return names_; }
    double at(int time, int var) const { return values_(time, var); }

    /// Index of a named variable; throws ValidationError if absent.
    int index_of(const std::string& name) const;

    /// Rows [begin, end).
    TimeSeriesPanel slice(int begin, int end) const;
    /// Same rows with columns reordered: column c of the result is column order[c].
    TimeSeriesPanel permute_columns(const std::vector<int>& order) const;

    bool operator==(const TimeSeriesPanel& other) const;

private:
    Eigen::MatrixXd values_;
    std::vector<std::string> names_;
};

/// Half-open range of 0-based target times.
struct TimeRange {
    int begin = 0;
    int end = 0;

    int size() const { return end > begin ? end - begin : 0; }
};

/// All admissible target times of a panel for a task: [tau_max + h, T).
TimeRange valid_targets(const TimeSeriesPanel& panel, const PredictionTask& task);

struct DesignMatrix {
    Eigen::MatrixXd predictors;  // S x p
    Eigen::VectorXd target;      // S
    std::vector<int> target_times;

    int rows() const { return static_cast<int>(target.size()); }
};

/// Row for target time s holds X^{(var)}_{s-h-lag} for each predictor and Y_s.
DesignMatrix design_matrix(const TimeSeriesPanel& panel, const std::vector<LaggedVariable>& predictors,
                           const PredictionTask& task, TimeRange range);

/// Full candidate grid {(j, tau) : j < N, tau <= tau_max}, ordered by (var, lag).
std::vector<LaggedVariable> candidate_grid(int n_vars, int tau_max);

/// Per-variable z-scoring with statistics from a learning prefix.
class Standardizer {
public:
    static Standardizer fit(const TimeSeriesPanel& panel, int learn_rows);

    TimeSeriesPanel apply(const TimeSeriesPanel& panel) const;
    double restore(int var, double standardized) const { return standardized * scale_[var] + mean_[var]; }
    double scale(int var) const { return scale_[var]; }
    double mean(int var) const { return mean_[var]; }

private:
    std::vector<double> mean_;
    std::vector<double> scale_;
};

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Header row of names, then one comma-separated row of reals per time step.
TimeSeriesPanel read_panel_csv(std::istream& in, const std::string& source = "<stream>");
TimeSeriesPanel read_panel_csv_file(const std::string& path);
void write_panel_csv(std::ostream& out, const TimeSeriesPanel& panel);

std::string format_real(double value);
std::string describe(const LaggedVariable& v, const std::vector<std::string>& names);

}  // namespace mfp
