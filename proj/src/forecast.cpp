#include "mfpred/forecast.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace mfp {

ForecastResult knn_predict(const DesignMatrix& learn, const DesignMatrix& query, int k) {
    if (k < 1) throw ValidationError("knn_predict: k must be >= 1");
    const int n_learn = learn.rows();
    const int n_query = query.rows();
    const auto dims = learn.predictors.cols();
    if (query.predictors.cols() != dims) throw ValidationError("knn_predict: learning and query dimensions differ");
    if (n_learn < k)
        throw InsufficientSamplesError("knn_predict: " + std::to_string(n_learn) + " learning rows for k = " +
                                       std::to_string(k));

    ForecastResult out;
    out.target_times = query.target_times;
    out.predictions.resize(n_query);
    out.sigmas.resize(n_query);

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(static_cast<std::size_t>(n_learn));
    std::vector<int> order(static_cast<std::size_t>(n_learn));
    for (int q = 0; q < n_query; ++q) {
        std::fill(dist.begin(), dist.end(), 0.0);
        for (Eigen::Index c = 0; c < dims; ++c) {
            const double* col = learn.predictors.col(c).data();
            const double v = query.predictors(q, c);
            for (int r = 0; r < n_learn; ++r) {
                const double d = std::abs(col[r] - v);
                dist[r] = d > dist[r] ? d : dist[r];
            }
        }
        int available = n_learn;
        const int t = query.target_times[q];
        for (int r = 0; r < n_learn; ++r) {
            if (learn.target_times[r] == t) {
                dist[r] = inf;
                --available;
            }
        }
        if (available < k)
            throw InsufficientSamplesError("knn_predict: fewer than k learning rows besides the query itself");

        std::iota(order.begin(), order.end(), 0);
        auto closer = [&](int a, int b) {
            if (dist[a] != dist[b]) return dist[a] < dist[b];
            return learn.target_times[a] < learn.target_times[b];
        };
        const int keep = std::min(k + 1, n_learn);
        std::partial_sort(order.begin(), order.begin() + keep, order.end(), closer);
        if (keep > k && dist[order[k]] == dist[order[k - 1]] && available > k) ++out.tied_queries;

        double mean = 0.0;
        for (int j = 0; j < k; ++j) mean += learn.target(order[j]);
        mean /= k;
        double var = 0.0;
        for (int j = 0; j < k; ++j) {
            const double d = learn.target(order[j]) - mean;
            var += d * d;
        }
        out.predictions(q) = mean;
        out.sigmas(q) = std::sqrt(var / k);
    }
    return out;
}

namespace {

bool has_spread(const Eigen::VectorXd& v) {
    return v.size() > 0 && v.maxCoeff() > v.minCoeff();
}

}  // namespace

ForecastResult knn_predict(const TimeSeriesPanel& panel, const std::vector<LaggedVariable>& predictors,
                           const PredictionTask& task, int k, TimeRange learn, TimeRange query) {
    const auto learn_dm = design_matrix(panel, predictors, task, learn);
    const auto query_dm = design_matrix(panel, predictors, task, query);
    auto out = knn_predict(learn_dm, query_dm, k);
    if (has_spread(query_dm.target)) out.srmse = srmse(out.predictions, query_dm.target);
    return out;
}

LinearModel fit_linear(const DesignMatrix& learn, std::vector<LaggedVariable> predictors) {
    const auto rows = learn.predictors.rows();
    const auto p = learn.predictors.cols();
    if (rows <= p + 1)
        throw InsufficientSamplesError("fit_linear: need more than p + 1 = " + std::to_string(p + 1) + " rows");

    Eigen::MatrixXd a(rows, p + 1);
    a.col(0).setOnes();
    a.rightCols(p) = learn.predictors;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < p + 1) throw SingularDesignError("fit_linear: design matrix is rank deficient");

    LinearModel model;
    model.coefficients = qr.solve(learn.target);
    const Eigen::VectorXd residual = learn.target - a * model.coefficients;
    model.residual_variance = residual.squaredNorm() / static_cast<double>(rows);
    const Eigen::MatrixXd gram = a.transpose() * a;
    const Eigen::MatrixXd gram_inv = gram.ldlt().solve(Eigen::MatrixXd::Identity(p + 1, p + 1));
    model.coef_sigmas = (model.residual_variance * gram_inv.diagonal().array()).max(0.0).sqrt().matrix();
    model.predictors = std::move(predictors);
    return model;
}

LinearModel fit_linear(const TimeSeriesPanel& panel, const std::vector<LaggedVariable>& predictors,
                       const PredictionTask& task, TimeRange learn) {
    return fit_linear(design_matrix(panel, predictors, task, learn), predictors);
}

ForecastResult linear_predict(const LinearModel& model, const Eigen::Ref<const Eigen::MatrixXd>& queries) {
    const auto p = model.coefficients.size() - 1;
    if (queries.cols() != p)
        throw ValidationError("linear_predict: query dimension " + std::to_string(queries.cols()) +
                              " does not match the model's " + std::to_string(p));
    ForecastResult out;
    const auto n = queries.rows();
    out.predictions = (queries * model.coefficients.tail(p)).array() + model.coefficients(0);
    out.sigmas.resize(n);
    const Eigen::ArrayXd coef_var = model.coef_sigmas.tail(p).array().square();
    const double intercept_var = model.coef_sigmas(0) * model.coef_sigmas(0);
    for (Eigen::Index q = 0; q < n; ++q) {
        const double spread = (queries.row(q).array().square().transpose() * coef_var).sum();
        out.sigmas(q) = std::sqrt(model.residual_variance + intercept_var + spread);
    }
    out.target_times.resize(static_cast<std::size_t>(n));
    std::iota(out.target_times.begin(), out.target_times.end(), 0);
    return out;
}

ForecastResult linear_predict(const LinearModel& model, const DesignMatrix& query) {
    auto out = linear_predict(model, query.predictors);
    out.target_times = query.target_times;
    if (has_spread(query.target)) out.srmse = srmse(out.predictions, query.target);
    return out;
}

double srmse(std::span<const double> predictions, std::span<const double> truth) {
    if (predictions.size() != truth.size() || truth.empty())
        throw ValidationError("srmse: predictions and truth must have equal nonzero length");
    const double n = static_cast<double>(truth.size());
    const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / n;
    double var = 0.0;
    double mse = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        var += (truth[i] - mean) * (truth[i] - mean);
        mse += (truth[i] - predictions[i]) * (truth[i] - predictions[i]);
    }
    if (!(var > 0.0)) throw DegenerateInputError("srmse: truth has zero variance on the test set");
    return std::sqrt(mse / var);
}

double srmse(const Eigen::VectorXd& predictions, const Eigen::VectorXd& truth) {
    return srmse(std::span<const double>(predictions.data(), static_cast<std::size_t>(predictions.size())),
                 std::span<const double>(truth.data(), static_cast<std::size_t>(truth.size())));
}

void write_forecast_csv(std::ostream& out, const ForecastResult& result, const Eigen::VectorXd* truth) {
    out << "time,prediction,sigma,truth\n";
    for (Eigen::Index i = 0; i < result.predictions.size(); ++i) {
        out << result.target_times[static_cast<std::size_t>(i)] << ',' << format_real(result.predictions(i)) << ','
            << format_real(result.sigmas(i)) << ',';
        if (truth) out << format_real((*truth)(i));
        out << '\n';
    }
}

}  // namespace mfp
