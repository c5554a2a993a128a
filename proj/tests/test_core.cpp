#include "mfpred/core.hpp"
#include "mfpred/synth.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace mfp {
namespace {

TimeSeriesPanel ramp(int n) {
    Eigen::MatrixXd v(n, 1);
    for (int t = 0; t < n; ++t) v(t, 0) = t;
    return TimeSeriesPanel(v, {"A"});
}

TEST(DesignMatrix, SingleShift) {
    const auto panel = ramp(5);
    const PredictionTask task{0, 1, 0};
    const auto dm = design_matrix(panel, {{0, 0}}, task, {1, 5});
    Eigen::MatrixXd expected(4, 1);
    expected << 0, 1, 2, 3;
    EXPECT_EQ(dm.predictors, expected);
    EXPECT_EQ(dm.target, Eigen::Vector4d(1, 2, 3, 4));
    EXPECT_EQ(dm.target_times, (std::vector<int>{1, 2, 3, 4}));
}

TEST(DesignMatrix, DoubleShift) {
    const auto panel = ramp(5);
    const PredictionTask task{0, 1, 1};
    const auto dm = design_matrix(panel, {{0, 0}, {0, 1}}, task, {2, 5});
    Eigen::MatrixXd expected(3, 2);
    expected << 1, 0, 2, 1, 3, 2;
    EXPECT_EQ(dm.predictors, expected);
    EXPECT_EQ(dm.target, Eigen::Vector3d(2, 3, 4));
}

TEST(DesignMatrix, FixedModelReadsZTwoStepsBack) {
    const auto series = gen_fixed_model(50, 3);
    const PredictionTask task{0, 1, 2};
    const std::vector<LaggedVariable> zs{{7, 1}, {8, 1}, {9, 1}};
    const auto dm = design_matrix(series.panel, zs, task, valid_targets(series.panel, task));
    for (int r = 0; r < dm.rows(); ++r) {
        const int s = dm.target_times[r];
        for (int c = 0; c < 3; ++c) EXPECT_EQ(dm.predictors(r, c), series.panel.at(s - 2, 7 + c));
        EXPECT_EQ(dm.target(r), series.panel.at(s, 0));
    }
}

TEST(DesignMatrix, HorizonShiftsBaseTime) {
    const auto panel = ramp(10);
    const PredictionTask task{0, 3, 1};
    const auto dm = design_matrix(panel, {{0, 1}}, task, {4, 10});
    for (int r = 0; r < dm.rows(); ++r) EXPECT_EQ(dm.predictors(r, 0), dm.target_times[r] - 4);
}

TEST(DesignMatrix, TranslationConsistent) {
    const auto series = gen_synergetic_member(10, 80, 11);
    const PredictionTask task{0, 1, 2};
    const std::vector<LaggedVariable> preds{{1, 0}, {4, 2}, {0, 1}};
    const int delta = 17;
    const auto a = design_matrix(series.panel, preds, task, {3 + delta, 40 + delta});
    const auto b = design_matrix(series.panel.slice(delta, 80), preds, task, {3, 40});
    EXPECT_EQ(a.predictors, b.predictors);
    EXPECT_EQ(a.target, b.target);
    for (int r = 0; r < a.rows(); ++r) EXPECT_EQ(a.target_times[r], b.target_times[r] + delta);
}

TEST(DesignMatrix, RowCountMatchesAdmissibleTargets) {
    const auto panel = ramp(30);
    for (int tau = 0; tau <= 3; ++tau) {
        for (int h = 1; h <= 3; ++h) {
            const PredictionTask task{0, h, tau};
            const auto range = valid_targets(panel, task);
            EXPECT_EQ(range.begin, tau + h);
            EXPECT_EQ(design_matrix(panel, {{0, 0}}, task, range).rows(), 30 - tau - h);
        }
    }
}

TEST(DesignMatrix, Errors) {
    const auto panel = ramp(5);
    const PredictionTask task{0, 1, 1};
    EXPECT_THROW(design_matrix(panel, {}, task, {2, 5}), ValidationError);
    EXPECT_THROW(design_matrix(panel, {{0, 0}}, task, {1, 5}), ValidationError);
    EXPECT_THROW(design_matrix(panel, {{0, 0}}, task, {2, 6}), ValidationError);
    EXPECT_THROW(design_matrix(panel, {{0, 2}}, task, {2, 5}), ValidationError);
    EXPECT_THROW(design_matrix(panel, {{1, 0}}, task, {2, 5}), ValidationError);
}

TEST(CandidateGrid, OrderedByVariableThenLag) {
    const auto grid = candidate_grid(3, 2);
    ASSERT_EQ(grid.size(), 9u);
    EXPECT_EQ(grid.front(), (LaggedVariable{0, 0}));
    EXPECT_EQ(grid[4], (LaggedVariable{1, 1}));
    EXPECT_TRUE(std::is_sorted(grid.begin(), grid.end()));
}

TEST(Panel, ValidatesShapeAndNames) {
    EXPECT_THROW(TimeSeriesPanel(Eigen::MatrixXd(3, 2), {"a"}), ValidationError);
    EXPECT_THROW(TimeSeriesPanel(Eigen::MatrixXd::Zero(3, 2), {"a", "a"}), ValidationError);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 1);
    bad(1, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(TimeSeriesPanel(bad, {"a"}), DataError);
}

TEST(Panel, PermuteColumnsAndIndex) {
    Eigen::MatrixXd v(2, 3);
    v << 1, 2, 3, 4, 5, 6;
    const TimeSeriesPanel p(v, {"a", "b", "c"});
    const auto q = p.permute_columns({2, 0, 1});
    EXPECT_EQ(q.names(), (std::vector<std::string>{"c", "a", "b"}));
    EXPECT_EQ(q.at(1, 0), 6);
    EXPECT_EQ(q.index_of("b"), 2);
    EXPECT_THROW(q.index_of("z"), ValidationError);
}

TEST(Standardizer, UsesLearningRowsOnly) {
    Eigen::MatrixXd v(6, 1);
    v << 0, 2, 0, 2, 100, 100;
    const TimeSeriesPanel p(v, {"a"});
    const auto s = Standardizer::fit(p, 4);
    EXPECT_DOUBLE_EQ(s.mean(0), 1.0);
    EXPECT_DOUBLE_EQ(s.scale(0), 1.0);
    const auto z = s.apply(p);
    EXPECT_DOUBLE_EQ(z.at(4, 0), 99.0);
    EXPECT_DOUBLE_EQ(s.restore(0, z.at(4, 0)), 100.0);
    EXPECT_THROW(Standardizer::fit(TimeSeriesPanel(Eigen::MatrixXd::Ones(4, 1), {"a"}), 4), DegenerateInputError);
}

TEST(Csv, RoundTripIsExact) {
    const auto series = gen_synergetic_member(10, 20, 5);
    std::stringstream ss;
    write_panel_csv(ss, series.panel);
    EXPECT_EQ(read_panel_csv(ss), series.panel);
}

TEST(Csv, LinePreciseErrors) {
    std::istringstream missing("a,b\n1,2\n3\n");
    try {
        read_panel_csv(missing, "in.csv");
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("in.csv:3:"), std::string::npos);
    }
    std::istringstream text("a\n1\nx\n");
    EXPECT_THROW(read_panel_csv(text), DataError);
    std::istringstream empty("");
    EXPECT_THROW(read_panel_csv(empty), DataError);
    std::istringstream header_only("a,b\n");
    EXPECT_THROW(read_panel_csv(header_only), DataError);
    EXPECT_THROW(read_panel_csv_file("/nonexistent/file.csv"), DataError);
}

TEST(Config, Validation) {
    EXPECT_THROW((PredictionTask{3, 1, 0}.validate(3)), ValidationError);
    EXPECT_THROW((PredictionTask{0, 0, 0}.validate(3)), ValidationError);
    AlgorithmConfig algo;
    algo.n_max = 1;
    EXPECT_THROW(algo.validate(), ValidationError);
    algo = {};
    algo.significance = ShuffleSignificance{10, 0.05};
    EXPECT_THROW(algo.validate(), ValidationError);
    SchemeConfig scheme;
    scheme.scheme = Scheme::mi_rank;
    scheme.cutoff = MmiMaxCutoff{};
    EXPECT_THROW(scheme.validate(), ValidationError);
    scheme.scheme = Scheme::optimal;
    scheme.cutoff = HeuristicCutoff{0.2};
    EXPECT_THROW(scheme.validate(), ValidationError);
    scheme.cutoff = CrossValidationCutoff{1};
    EXPECT_THROW(scheme.validate(), ValidationError);
}

TEST(CostCounter, WeightedCostAtLeastTwicePerEstimate) {
    CostCounter c;
    c.add(1, 1, 0);
    c.add(3, 1, 2);
    EXPECT_EQ(c.n_estimates, 2);
    EXPECT_EQ(c.weighted_cost, 8);
    EXPECT_GE(c.weighted_cost, 2 * c.n_estimates);
}

TEST(Format, DescribeAndReal) {
    EXPECT_EQ(describe({1, 0}, {"a", "b"}), "b(t)");
    EXPECT_EQ(describe({0, 2}, {"a", "b"}), "a(t-2)");
    EXPECT_EQ(std::stod(format_real(0.1)), 0.1);
}

}  // namespace
}  // namespace mfp
