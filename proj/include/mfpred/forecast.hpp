#pragma once

#include "mfpred/core.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace mfp {

struct ForecastResult {
    std::vector<int> target_times;
    Eigen::VectorXd predictions;
    Eigen::VectorXd sigmas;  // 1-sigma half-widths
    std::optional<double> srmse;
    /// Queries whose k-th and (k+1)-th neighbor distances tie, i.e. whose
    /// neighbor set was decided by the time-order tie rule.
    int tied_queries = 0;
};

/// Nearest-neighbor conditional-expectation forecast under the maximum norm.
/// Neighbors are the k learning rows closest to each query; equal distances
/// are ordered by smaller target time. A learning row with the same target
/// time as the query is never its own neighbor. Returns the neighbor-target
/// mean and its population standard deviation.
ForecastResult knn_predict(const DesignMatrix& learn, const DesignMatrix& query, int k);

/// Panel-level form: learning rows are the targets in `learn`, queries the
/// targets in `query`. SRMSE against the query truth is attached when the
/// truth has positive variance.
ForecastResult knn_predict(const TimeSeriesPanel& panel, const std::vector<LaggedVariable>& predictors,
                           const PredictionTask& task, int k, TimeRange learn, TimeRange query);

struct LinearModel {
    Eigen::VectorXd coefficients;  // intercept first
    Eigen::VectorXd coef_sigmas;
    double residual_variance = 0.0;
    std::vector<LaggedVariable> predictors;
};

/// Ordinary least squares with intercept on a learning design matrix.
LinearModel fit_linear(const DesignMatrix& learn, std::vector<LaggedVariable> predictors = {});
LinearModel fit_linear(const TimeSeriesPanel& panel, const std::vector<LaggedVariable>& predictors,
                       const PredictionTask& task, TimeRange learn);

/// prediction = b0 + sum b_i x_i; sigma = sqrt(s_eps^2 + sum_{i>=0} sd(b_i)^2 x_i^2), x_0 = 1.
ForecastResult linear_predict(const LinearModel& model, const Eigen::Ref<const Eigen::MatrixXd>& queries);
ForecastResult linear_predict(const LinearModel& model, const DesignMatrix& query);

/// Root mean squared error divided by the population standard deviation of `truth`.
double srmse(std::span<const double> predictions, std::span<const double> truth);
double srmse(const Eigen::VectorXd& predictions, const Eigen::VectorXd& truth);

/// Columns: time,prediction,sigma,truth (truth left empty when absent).
void write_forecast_csv(std::ostream& out, const ForecastResult& result, const Eigen::VectorXd* truth = nullptr);

}  // namespace mfp
