#include "mfpred/causal.hpp"

#include "mfpred/infotheory.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>

namespace mfp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

struct Node {
    LaggedVariable variable;
    int column = 0;  // column in the candidate design matrix
    double value = 0.0;
};

bool stronger(const Node& a, const Node& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.variable < b.variable;
}

// Advances a lexicographic n-combination of {0..m-1}; false when exhausted.
bool next_combination(std::vector<int>& c, int m) {
    const int n = static_cast<int>(c.size());
    int pos = n - 1;
    while (pos >= 0 && c[pos] == m - n + pos) --pos;
    if (pos < 0) return false;
    ++c[pos];
    for (int j = pos + 1; j < n; ++j) c[j] = c[j - 1] + 1;
    return true;
}

// First lexicographic n-combination of `ranked` whose column set is not in `tried`.
std::vector<int> first_untried(const std::vector<Node>& ranked, int n, const std::set<std::vector<int>>& tried) {
    const int m = static_cast<int>(ranked.size());
    if (n > m) return {};
    std::vector<int> c(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) c[j] = j;
    do {
        std::vector<int> columns;
        for (int idx : c) columns.push_back(ranked[idx].column);
        std::sort(columns.begin(), columns.end());
        if (!tried.count(columns)) return c;
    } while (next_combination(c, m));
    return {};
}

class ConditionalTester {
public:
    ConditionalTester(const DesignMatrix& dm, const EstimatorConfig& est, const AlgorithmConfig& algo,
                      std::uint64_t seed)
        : dm_(dm), k_(est.k_algo), algo_(algo), seed_(seed), y_(dm.target) {}

    struct Outcome {
        double value;
        bool significant;
    };

    Outcome test(int column, const std::vector<int>& condition_columns) {
        const auto rows = dm_.predictors.rows();
        Eigen::MatrixXd z(rows, static_cast<Eigen::Index>(condition_columns.size()));
        for (std::size_t c = 0; c < condition_columns.size(); ++c)
            z.col(static_cast<Eigen::Index>(c)) = dm_.predictors.col(condition_columns[c]);
        const auto x = dm_.predictors.col(column);
        const int dz = static_cast<int>(condition_columns.size());
        if (const auto* fixed = std::get_if<FixedThreshold>(&algo_.significance)) {
            const double value = estimate_cmi(x, y_, z, k_).value;
            cost_.add(1, 1, dz);
            return {value, value > fixed->value};
        }
        const auto& shuffle = std::get<ShuffleSignificance>(algo_.significance);
        const auto result = shuffle_test(x, y_, z, k_, shuffle.surrogates, shuffle.alpha, splitmix64(seed_ + tests_++));
        for (int m = 0; m <= shuffle.surrogates; ++m) cost_.add(1, 1, dz);
        return {result.observed, result.significant};
    }

    const CostCounter& cost() const { return cost_; }

private:
    const DesignMatrix& dm_;
    int k_;
    const AlgorithmConfig& algo_;
    std::uint64_t seed_;
    std::uint64_t tests_ = 0;
    Eigen::MatrixXd y_;
    CostCounter cost_;
};

}  // namespace

PreselectionResult preselect(const TimeSeriesPanel& panel, const PredictionTask& task, const EstimatorConfig& est,
                             const AlgorithmConfig& algo, std::uint64_t rng_seed) {
    task.validate(panel.n_vars());
    est.validate();
    algo.validate();
    const TimeRange range = valid_targets(panel, task);
    if (range.size() <= est.k_algo)
        throw InsufficientSamplesError("preselect: " + std::to_string(range.size()) +
                                       " aligned samples do not exceed k_algo = " + std::to_string(est.k_algo));

    const auto grid = candidate_grid(panel.n_vars(), task.tau_max);
    const DesignMatrix dm = design_matrix(panel, grid, task, range);
    ConditionalTester tester(dm, est, algo, rng_seed);
    PreselectionResult out;

    std::vector<Node> alive;
    for (std::size_t c = 0; c < grid.size(); ++c) {
        const auto r = tester.test(static_cast<int>(c), {});
        out.iteration_log.push_back({0, 0, grid[c], {}, r.value, !r.significant});
        if (r.significant) alive.push_back({grid[c], static_cast<int>(c), r.value});
    }

    // Conditions are ranked by the values held when level n starts, and sweep
    // i gives every candidate the first combination it has not been tested
    // with at this level. All tests of one (n, i) sweep see the same snapshot
    // of `alive`; removals and value updates are applied once it is complete.
    auto sweep_level = [&](int n) {
        std::map<int, double> rank_value;
        for (const auto& node : alive) rank_value[node.column] = node.value;
        std::map<int, std::set<std::vector<int>>> tried;
        for (int i = 0; i < algo.n_i; ++i) {
            if (static_cast<int>(alive.size()) <= n) return;
            const std::vector<Node> snapshot = alive;
            std::vector<bool> drop(snapshot.size(), false);
            bool any_tested = false;
            for (std::size_t a = 0; a < snapshot.size(); ++a) {
                std::vector<Node> others;
                for (std::size_t b = 0; b < snapshot.size(); ++b)
                    if (b != a) {
                        others.push_back(snapshot[b]);
                        others.back().value = rank_value[snapshot[b].column];
                    }
                std::sort(others.begin(), others.end(), stronger);
                auto& seen = tried[snapshot[a].column];
                const auto combo = first_untried(others, n, seen);
                if (combo.empty()) continue;
                any_tested = true;

                std::vector<int> cond_cols;
                std::vector<LaggedVariable> cond_vars;
                for (int idx : combo) {
                    cond_cols.push_back(others[idx].column);
                    cond_vars.push_back(others[idx].variable);
                }
                std::vector<int> key = cond_cols;
                std::sort(key.begin(), key.end());
                seen.insert(std::move(key));
                const auto r = tester.test(snapshot[a].column, cond_cols);
                alive[a].value = r.value;
                drop[a] = !r.significant;
                out.iteration_log.push_back({n, i, snapshot[a].variable, std::move(cond_vars), r.value, drop[a]});
            }
            std::vector<Node> kept;
            for (std::size_t a = 0; a < alive.size(); ++a)
                if (!drop[a]) kept.push_back(alive[a]);
            alive = std::move(kept);
            if (!any_tested) return;
        }
    };

    for (int n = algo.n0; n <= algo.n_max && static_cast<int>(alive.size()) > n; ++n) sweep_level(n);
    for (int n = algo.n0 - 1; n >= 1; --n)
        if (static_cast<int>(alive.size()) > n) sweep_level(n);

    std::sort(alive.begin(), alive.end(), stronger);
    for (const auto& node : alive) out.predictors.push_back({node.variable, node.value});
    out.cost = tester.cost();
    return out;
}

void write_iteration_log_csv(std::ostream& out, const std::vector<CmiTestRecord>& log,
                             const std::vector<std::string>& names) {
    out << "n,i,var,lag,condition_vars,cmi,removed\n";
    for (const auto& r : log) {
        std::string conds;
        for (std::size_t c = 0; c < r.conditions.size(); ++c) {
            if (c) conds += ';';
            conds += describe(r.conditions[c], names);
        }
        const auto& name = r.tested.var < static_cast<int>(names.size()) ? names[r.tested.var] : std::to_string(r.tested.var);
        out << r.n << ',' << r.i << ',' << name << ',' << r.tested.lag << ',' << conds << ',' << format_real(r.cmi) << ','
            << (r.removed ? 1 : 0) << '\n';
    }
}

}  // namespace mfp
