#include "mfpred/infotheory.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace mfp {
namespace {

Eigen::MatrixXd normal(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    Eigen::MatrixXd m(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) m(r, c) = n01(rng);
    return m;
}

// All-pairs reference implementation of the same estimator.
double reference_cmi(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::MatrixXd& z, int k) {
    using boost::math::digamma;
    const int n = static_cast<int>(x.rows());
    auto dist = [](const Eigen::MatrixXd& m, int i, int j) {
        return m.cols() ? (m.row(i) - m.row(j)).cwiseAbs().maxCoeff() : 0.0;
    };
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        std::vector<double> d;
        for (int j = 0; j < n; ++j)
            if (j != i) d.push_back(std::max({dist(x, i, j), dist(y, i, j), dist(z, i, j)}));
        std::nth_element(d.begin(), d.begin() + k - 1, d.end());
        const double eps = d[k - 1];
        int nx = 0, ny = 0, nz = 0, nxz = 0, nyz = 0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const bool bx = dist(x, i, j) < eps, by = dist(y, i, j) < eps, bz = dist(z, i, j) < eps;
            nx += bx;
            ny += by;
            nz += bz;
            nxz += bz && bx;
            nyz += bz && by;
        }
        acc += z.cols() ? digamma(nz + 1) - digamma(nxz + 1) - digamma(nyz + 1) : digamma(nx + 1) + digamma(ny + 1);
    }
    return z.cols() ? digamma(k) + acc / n : digamma(k) + digamma(n) - acc / n;
}

TEST(EstimateCmi, MatchesAllPairsReference) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 12; ++t) {
        const int n = t < 9 ? 150 + 20 * t : 2100 + 50 * t;
        const int dx = 1 + t % 3, dy = 1 + t % 2, dz = t % 4;
        Eigen::MatrixXd x = normal(n, dx, rng), z = normal(n, dz, rng);
        Eigen::MatrixXd y = normal(n, dy, rng);
        y.col(0) += x.col(0);
        if (dz) y.col(0) += z.col(0);
        if (t % 4 == 0) x = (x * 2).array().round() / 2;
        const int k = 1 + t % 11;
        EXPECT_NEAR(estimate_cmi(x, y, z, k).value, reference_cmi(x, y, z, k), 1e-12) << "case " << t;
    }
}

TEST(EstimateCmi, GaussianMiOracle) {
    std::mt19937_64 rng(7);
    const int S = 10000;
    const double rho = 0.6;
    Eigen::MatrixXd x = normal(S, 1, rng), y = normal(S, 1, rng);
    y = rho * x + std::sqrt(1 - rho * rho) * y;
    const auto est = estimate_mi(x, y, 10);
    EXPECT_NEAR(est.value, -0.5 * std::log(1 - rho * rho), 0.02);
    EXPECT_EQ(est.k, 10);
    EXPECT_EQ(est.dims, (CmiDims{1, 1, 0}));
    EXPECT_EQ(est.n_samples, S);
}

TEST(EstimateCmi, ChainIsConditionallyIndependent) {
    std::mt19937_64 rng(11);
    const int S = 10000;
    const Eigen::MatrixXd x = normal(S, 1, rng);
    const Eigen::MatrixXd z = 0.8 * x + 0.6 * normal(S, 1, rng);
    const Eigen::MatrixXd y = 0.8 * z + 0.6 * normal(S, 1, rng);
    EXPECT_NEAR(estimate_cmi(x, y, z, 10).value, 0.0, 0.02);
    EXPECT_GT(estimate_mi(x, y, 10).value, 0.1);
}

TEST(EstimateCmi, IndependentWithinShuffleNoise) {
    std::mt19937_64 rng(5);
    const Eigen::MatrixXd x = normal(1000, 1, rng), y = normal(1000, 1, rng);
    const Eigen::MatrixXd none(1000, 0);
    const auto test = shuffle_test(x, y, none, 10, 50, 0.05, 9);
    EXPECT_FALSE(test.significant);
    EXPECT_NEAR(test.observed, 0.0, 0.02);
}

TEST(EstimateCmi, SymmetricInXAndY) {
    std::mt19937_64 rng(13);
    const Eigen::MatrixXd x = normal(400, 2, rng), z = normal(400, 1, rng);
    Eigen::MatrixXd y = normal(400, 1, rng);
    y.col(0) += x.col(0).cwiseProduct(z.col(0));
    EXPECT_EQ(estimate_cmi(x, y, z, 7).value, estimate_cmi(y, x, z, 7).value);
    const Eigen::MatrixXd none(400, 0);
    EXPECT_EQ(estimate_cmi(x, y, none, 7).value, estimate_cmi(y, x, none, 7).value);
}

TEST(EstimateCmi, InvariantUnderJointRowPermutation) {
    std::mt19937_64 rng(17);
    const Eigen::MatrixXd x = normal(300, 1, rng), z = normal(300, 2, rng);
    const Eigen::MatrixXd y = x + z.col(1) + normal(300, 1, rng);
    std::vector<int> perm(300);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd xp(300, 1), yp(300, 1), zp(300, 2);
    for (int r = 0; r < 300; ++r) {
        xp.row(r) = x.row(perm[r]);
        yp.row(r) = y.row(perm[r]);
        zp.row(r) = z.row(perm[r]);
    }
    EXPECT_NEAR(estimate_cmi(x, y, z, 10).value, estimate_cmi(xp, yp, zp, 10).value, 1e-12);
}

TEST(EstimateCmi, BiasDecreasesWithDimension) {
    std::mt19937_64 rng(19);
    std::normal_distribution<double> n01;
    const int trials = 100, S = 500;
    std::vector<Eigen::MatrixXd> xs, independent, dependent;
    for (int t = 0; t < trials; ++t) {
        xs.push_back(normal(S, 8, rng));
        independent.push_back(normal(S, 1, rng));
        Eigen::MatrixXd y(S, 1);
        for (int r = 0; r < S; ++r) y(r, 0) = 0.6 * xs.back()(r, 0) + 0.8 * n01(rng);
        dependent.push_back(y);
    }
    // The same draws for every d: extra columns of X are irrelevant to Y.
    double previous = std::numeric_limits<double>::infinity();
    for (int d = 1; d <= 8; ++d) {
        double dep = 0.0, ind = 0.0;
        for (int t = 0; t < trials; ++t) {
            dep += estimate_mi(xs[t].leftCols(d), dependent[t], 10).value;
            ind += estimate_mi(xs[t].leftCols(d), independent[t], 10).value;
        }
        dep /= trials;
        ind /= trials;
        EXPECT_LT(dep, previous) << "d=" << d;
        EXPECT_LT(ind, 0.005) << "d=" << d;
        previous = dep;
    }
    EXPECT_LT(previous, 0.6 * (-0.5 * std::log(1.0 - 0.36)));
}

TEST(EstimateCmi, Errors) {
    std::mt19937_64 rng(1);
    const Eigen::MatrixXd x = normal(20, 1, rng), y = normal(20, 1, rng);
    const Eigen::MatrixXd none(20, 0);
    EXPECT_THROW(estimate_cmi(x, y, none, 20), InsufficientSamplesError);
    EXPECT_THROW(estimate_cmi(x, y, none, 0), ValidationError);
    EXPECT_THROW(estimate_cmi(x, normal(19, 1, rng), none, 3), ValidationError);
    EXPECT_THROW(estimate_cmi(Eigen::MatrixXd::Ones(20, 1), y, none, 3), DegenerateInputError);
    Eigen::MatrixXd bad = x;
    bad(3, 0) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(estimate_cmi(bad, y, none, 3), DataError);
}

TEST(EstimateCmi, CountsRepeatedPoints) {
    Eigen::MatrixXd x(6, 1), y(6, 1);
    x << 0, 0, 1, 2, 3, 4;
    y << 5, 5, 1, 7, 2, 0;
    const Eigen::MatrixXd none(6, 0);
    EXPECT_EQ(estimate_cmi(x, y, none, 1).repeated_points, 2);
}

TEST(ShuffleTest, ThresholdRank) {
    EXPECT_EQ(shuffle_threshold_rank(100, 0.05), 95);
    EXPECT_EQ(shuffle_threshold_rank(20, 0.05), 19);
    EXPECT_EQ(shuffle_threshold_rank(30, 0.1), 27);
}

TEST(ShuffleTest, DetectsDependenceAndIsReproducible) {
    std::mt19937_64 rng(23);
    const Eigen::MatrixXd x = normal(500, 1, rng);
    const Eigen::MatrixXd y = x + 0.1 * normal(500, 1, rng);
    const Eigen::MatrixXd none(500, 0);
    const auto a = shuffle_test(x, y, none, 10, 100, 0.05, 42);
    EXPECT_TRUE(a.significant);
    EXPECT_EQ(a.significant, a.observed > a.threshold);
    EXPECT_TRUE(std::is_sorted(a.surrogates.begin(), a.surrogates.end()));
    EXPECT_EQ(a.threshold, a.surrogates[94]);
    EXPECT_EQ(a, shuffle_test(x, y, none, 10, 100, 0.05, 42));
    EXPECT_THROW(shuffle_test(x, y, none, 10, 100, 1.0, 42), ValidationError);
    EXPECT_THROW(shuffle_test(x, y, none, 10, 10, 0.05, 42), ValidationError);
}

TEST(ShuffleTest, FalsePositiveRateNearAlpha) {
    std::mt19937_64 rng(29);
    int positives = 0;
    const int runs = 60;
    for (int r = 0; r < runs; ++r) {
        const Eigen::MatrixXd x = normal(300, 1, rng), y = normal(300, 1, rng);
        const Eigen::MatrixXd none(300, 0);
        positives += shuffle_test(x, y, none, 10, 40, 0.05, static_cast<std::uint64_t>(r)).significant;
    }
    EXPECT_LE(positives, 10);
}

}  // namespace
}  // namespace mfp
