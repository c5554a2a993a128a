#include "mfpred/forecast.hpp"
#include "mfpred/infotheory.hpp"
#include "mfpred/synth.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

namespace mfp {
namespace {

double variance(const Eigen::VectorXd& v) { return (v.array() - v.mean()).square().mean(); }

TEST(FixedModel, TargetVarianceMatchesAnalyticValue) {
    const auto s = gen_fixed_model(100000, 1);
    // 4 c^2 + b^2 + sigma^2 with Var(Z1 Z2 Z3) = 1.
    EXPECT_NEAR(variance(s.panel.values().col(0)), 4.89, 0.02 * 4.89);
}

TEST(FixedModel, DriversAreStandardNormal) {
    const auto s = gen_fixed_model(10000, 2);
    for (int j = 3; j < 10; ++j) {
        EXPECT_NEAR(s.panel.values().col(j).mean(), 0.0, 0.02 * 2.5) << s.panel.names()[j];
        EXPECT_NEAR(variance(s.panel.values().col(j)), 1.0, 0.05) << s.panel.names()[j];
    }
}

TEST(FixedModel, StructuralEquationsHold) {
    const auto s = gen_fixed_model(500, 3);
    const auto& v = s.panel.values();
    // Y_{t+1} - c sum W_{t-1} - b prod Z_{t-1} is sigma * noise, uncorrelated with the drivers.
    Eigen::VectorXd resid(497);
    for (int t = 2; t < 499; ++t) {
        double w = 0.0;
        for (int i = 3; i < 7; ++i) w += v(t - 1, i);
        resid(t - 2) = v(t + 1, 0) - 0.4 * w - 2.0 * v(t - 1, 7) * v(t - 1, 8) * v(t - 1, 9);
    }
    EXPECT_NEAR(std::sqrt(variance(resid)), 0.5, 0.05);
    EXPECT_EQ(s.panel.names(), (std::vector<std::string>{"Y", "X1", "X2", "W1", "W2", "W3", "W4", "Z1", "Z2", "Z3"}));
    EXPECT_EQ(s.truth.true_drivers.size(), 7u);
    for (const auto& d : s.truth.true_drivers) EXPECT_EQ(d.lag, 1);
    EXPECT_EQ(s.truth.synergetic_drivers, (std::vector<LaggedVariable>{{7, 1}, {8, 1}, {9, 1}}));
}

TEST(FixedModel, Deterministic) {
    EXPECT_EQ(gen_fixed_model(300, 9).panel, gen_fixed_model(300, 9).panel);
    EXPECT_FALSE(gen_fixed_model(300, 9).panel == gen_fixed_model(300, 10).panel);
}

TEST(FixedModel, SynergyExceedsSingleInformation) {
    const auto s = gen_fixed_model(10000, 4);
    const auto panel = Standardizer::fit(s.panel, 10000).apply(s.panel);
    const PredictionTask task{0, 1, 2};
    const auto dm = design_matrix(panel, s.truth.synergetic_drivers, task, valid_targets(panel, task));
    const double joint = estimate_mi(dm.predictors, dm.target, 10).value;
    double best_single = 0.0;
    for (int c = 0; c < 3; ++c) best_single = std::max(best_single, estimate_mi(dm.predictors.col(c), dm.target, 10).value);
    EXPECT_GT(joint, 3.0 * best_single);
}

TEST(FixedModel, NoiseStreamsAreUncorrelated) {
    const auto s = gen_fixed_model(100000, 5);
    const auto& v = s.panel.values();
    for (int a = 3; a < 10; ++a)
        for (int b = a + 1; b < 10; ++b) {
            const double r = (v.col(a).array() - v.col(a).mean()).matrix().dot((v.col(b).array() - v.col(b).mean()).matrix()) /
                             (v.rows() * std::sqrt(variance(v.col(a)) * variance(v.col(b))));
            EXPECT_LT(std::abs(r), 0.01);
        }
}

TEST(SynergeticMember, DriverCountsAndStructure) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto s = gen_synergetic_member(10, 200, seed);
        EXPECT_EQ(s.truth.true_drivers.size(), 8u);
        EXPECT_EQ(s.truth.synergetic_drivers.size(), 3u);
        std::set<int> vars;
        for (const auto& d : s.truth.true_drivers) {
            EXPECT_NE(d.var, 0);
            EXPECT_LE(d.lag, 2);
            vars.insert(d.var);
        }
        EXPECT_EQ(vars.size(), 8u);
        for (const auto& z : s.truth.synergetic_drivers)
            EXPECT_TRUE(std::find(s.truth.true_drivers.begin(), s.truth.true_drivers.end(), z) !=
                        s.truth.true_drivers.end());
        for (int j = 1; j < 10; ++j) {
            const auto& eq = s.truth.equations[static_cast<std::size_t>(j)];
            ASSERT_EQ(eq.terms.size(), 2u);
            for (const auto& t : eq.terms) {
                EXPECT_NE(t.source.var, j);
                EXPECT_NE(t.source.var, 0);
                EXPECT_EQ(t.coefficient, 0.4);
            }
        }
    }
    EXPECT_THROW(gen_synergetic_member(8, 100, 0), ValidationError);
}

TEST(SynergeticMember, StructureSeedSeparatesFromNoise) {
    const auto a = gen_synergetic_member(10, 200, 1, {}, 42);
    const auto b = gen_synergetic_member(10, 200, 2, {}, 42);
    EXPECT_EQ(a.truth.true_drivers, b.truth.true_drivers);
    EXPECT_FALSE(a.panel == b.panel);
    EXPECT_EQ(gen_synergetic_member(10, 200, 1, {}, 42).panel, a.panel);
}

TEST(SynergeticMember, ZeroProductCoefficientRemovesSynergy) {
    ModelParams params;
    params.b = 0.0;
    const auto s = gen_synergetic_member(10, 2000, 3, params);
    const auto panel = Standardizer::fit(s.panel, 2000).apply(s.panel);
    const PredictionTask task{0, 1, 2};
    const auto dm = design_matrix(panel, s.truth.synergetic_drivers, task, valid_targets(panel, task));
    const Eigen::MatrixXd none(dm.rows(), 0);
    const auto test = shuffle_test(dm.predictors, dm.target, none, 10, 40, 0.05, 3);
    EXPECT_FALSE(test.significant);
}

TEST(GamMember, StableDeterministicAndTargetRule) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto s = gen_gam_member(4, 1000, seed);
        const auto& v = s.panel.values();
        ASSERT_TRUE(v.allFinite());
        for (int j = 0; j < 4; ++j) {
            const double first = variance(v.col(j).head(500)), second = variance(v.col(j).tail(500));
            EXPECT_LT(second, 3.0 * first);
            EXPECT_LT(first, 3.0 * second);
        }
        double best = 0.0;
        int target = -1;
        for (int j = 0; j < 4; ++j) {
            double incoming = 0.0;
            for (const auto& t : s.truth.equations[static_cast<std::size_t>(j)].terms) {
                EXPECT_GE(std::abs(t.coefficient), 0.2);
                EXPECT_LE(std::abs(t.coefficient), 0.5);
                EXPECT_LE(t.source.lag, 2);
                incoming += std::abs(t.coefficient);
            }
            if (incoming > best) {
                best = incoming;
                target = j;
            }
        }
        EXPECT_EQ(s.truth.target, target);
        EXPECT_EQ(s.truth.true_drivers.size(), s.truth.equations[static_cast<std::size_t>(target)].terms.size());
        EXPECT_EQ(gen_gam_member(4, 1000, seed).panel, s.panel);
    }
}

TEST(GamMember, QuadraticParentIsDetectable) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n01;
    const int S = 2000;
    Eigen::MatrixXd x(S, 1), y(S, 1);
    for (int i = 0; i < S; ++i) {
        x(i, 0) = n01(rng);
        y(i, 0) = x(i, 0) * x(i, 0) + 0.5 * n01(rng);
    }
    const double corr = ((x.array() - x.mean()) * (y.array() - y.mean())).mean() /
                        std::sqrt(variance(x.col(0)) * variance(y.col(0)));
    EXPECT_LT(std::abs(corr), 0.1);
    const Eigen::MatrixXd none(S, 0);
    EXPECT_TRUE(shuffle_test(x, y, none, 10, 40, 0.05, 1).significant);
}

TEST(Oracle, SingleSubsetAtFullSizeAndMinimumBound) {
    const auto s = gen_fixed_model(400, 7);
    const auto panel = Standardizer::fit(s.panel, 300).apply(s.panel);
    const PredictionTask task{0, 1, 2};
    const TimeRange learn{3, 300}, test{300, 400};
    const auto oracle = minimal_error_oracle(panel, s.truth, task, 10, learn, test);
    ASSERT_EQ(oracle.size(), 7u);
    const auto full = knn_predict(panel, s.truth.true_drivers, task, 10, learn, test);
    EXPECT_EQ(oracle.at(7).srmse, *full.srmse);
    // Every 3-subset of the drivers is at least the oracle minimum for p = 3.
    const auto& d = s.truth.true_drivers;
    for (std::size_t a = 0; a < d.size(); ++a)
        for (std::size_t b = a + 1; b < d.size(); ++b)
            for (std::size_t c = b + 1; c < d.size(); ++c)
                EXPECT_GE(*knn_predict(panel, {d[a], d[b], d[c]}, task, 10, learn, test).srmse, oracle.at(3).srmse);
    double lowest = oracle.begin()->second.srmse;
    for (const auto& [p, e] : oracle) lowest = std::min(lowest, e.srmse);
    EXPECT_EQ(oracle_minimum(oracle), lowest);
}

TEST(Oracle, ZTripleUsuallyAttainsTheMinimumAtThree) {
    int hits = 0;
    for (std::uint64_t m = 0; m < 10; ++m) {
        const auto s = gen_fixed_model(625, m);
        const auto panel = Standardizer::fit(s.panel, 500).apply(s.panel);
        const auto oracle = minimal_error_oracle(panel, s.truth, {0, 1, 2}, 10, {3, 500}, {500, 625});
        hits += oracle.at(3).subset == s.truth.synergetic_drivers;
    }
    EXPECT_GE(hits, 6);
}

TEST(GroundTruth, SidecarListsDriversAndEquations) {
    const auto s = gen_fixed_model(50, 1);
    std::ostringstream os;
    write_ground_truth(os, s.truth, s.panel.names());
    const auto text = os.str();
    EXPECT_NE(text.find("model=fixed_model\n"), std::string::npos);
    EXPECT_NE(text.find("target=Y\n"), std::string::npos);
    EXPECT_NE(text.find("synergetic_drivers=Z1(t-1);Z2(t-1);Z3(t-1)\n"), std::string::npos);
    EXPECT_NE(text.find("equation.Y=0.40000000000000002*W1(t-1)"), std::string::npos);
    EXPECT_NE(text.find("equation.W1=1*eta\n"), std::string::npos);
}

}  // namespace
}  // namespace mfp
