#include "mfpred/synth.hpp"

#include "mfpred/forecast.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

namespace mfp {

namespace {

constexpr int kMaxLag = 2;

std::mt19937_64 make_engine(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
    return std::mt19937_64(seq);
}

constexpr std::uint32_t kStructureStream = 0x5157u;
constexpr std::uint32_t kNoiseStream = 0x401u;

// Simulates the equations for kBurnIn + length steps and returns the last `length`.
Eigen::MatrixXd simulate(const std::vector<VariableEquation>& eqs, int length, std::uint64_t seed) {
    const int n = static_cast<int>(eqs.size());
    const int total = length + kBurnIn;
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(total, n);
    auto rng = make_engine(seed, kNoiseStream);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto past = [&](int t, const LaggedVariable& src) {
        const int when = t - 1 - src.lag;
        return when >= 0 ? x(when, src.var) : 0.0;
    };
    for (int t = 0; t < total; ++t) {
        for (int j = 0; j < n; ++j) {
            const auto& eq = eqs[static_cast<std::size_t>(j)];
            double v = eq.noise_scale * normal(rng);
            for (const auto& term : eq.terms) {
                const double s = past(t, term.source);
                v += term.coefficient * (term.quadratic ? s * s : s);
            }
            if (!eq.product.empty()) {
                double prod = eq.product_coefficient;
                for (const auto& src : eq.product) prod *= past(t, src);
                v += prod;
            }
            x(t, j) = v;
        }
    }
    return x.bottomRows(length);
}

std::vector<std::string> numbered(const std::string& stem, int count) {
    std::vector<std::string> out;
    for (int i = 1; i <= count; ++i) out.push_back(stem + std::to_string(i));
    return out;
}

bool looks_stationary(const Eigen::MatrixXd& x) {
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > 1e6) return false;
    const auto half = x.rows() / 2;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        auto var_of = [](const auto& seg) {
            const double m = seg.mean();
            return (seg.array() - m).square().mean();
        };
        const double first = var_of(x.col(j).head(half));
        const double second = var_of(x.col(j).tail(x.rows() - half));
        if (!(first > 0.0 && second > 0.0)) return false;
        if (second > 3.0 * first || first > 3.0 * second) return false;
    }
    return true;
}

}  // namespace

SyntheticSeries gen_fixed_model(int length, std::uint64_t seed, const ModelParams& params) {
    if (length <= 2) throw ValidationError("gen_fixed_model: length must exceed 2");
    // Columns: Y, X1, X2, W1..W4, Z1..Z3.
    constexpr int kY = 0, kX1 = 1, kX2 = 2, kW = 3, kZ = 7;
    std::vector<VariableEquation> eqs(10);
    GroundTruth truth;
    truth.model = "fixed_model";
    truth.target = kY;
    truth.model_params = params;
    truth.structure_seed = seed;
    truth.noise_seed = seed;

    auto& y = eqs[kY];
    y.noise_scale = params.sigma;
    for (int i = 0; i < 4; ++i) {
        y.terms.push_back({{kW + i, 1}, params.c, false});
        truth.true_drivers.push_back({kW + i, 1});
    }
    for (int i = 0; i < 3; ++i) {
        y.product.push_back({kZ + i, 1});
        truth.true_drivers.push_back({kZ + i, 1});
        truth.synergetic_drivers.push_back({kZ + i, 1});
    }
    y.product_coefficient = params.b;
    eqs[kX1].terms = {{{kW + 0, 0}, params.a, false}, {{kW + 2, 0}, params.a, false}};
    eqs[kX2].terms = {{{kW + 1, 0}, params.a, false}, {{kW + 3, 0}, params.a, false}};
    truth.equations = eqs;

    std::vector<std::string> names{"Y", "X1", "X2"};
    for (auto& n : numbered("W", 4)) names.push_back(n);
    for (auto& n : numbered("Z", 3)) names.push_back(n);
    return {TimeSeriesPanel(simulate(eqs, length, seed), std::move(names)), std::move(truth)};
}

SyntheticSeries gen_synergetic_member(int n_vars, int length, std::uint64_t seed, const ModelParams& params,
                                      std::optional<std::uint64_t> structure_seed) {
    if (n_vars < 9) throw ValidationError("gen_synergetic_member: need N >= 9 for 8 distinct non-target drivers");
    if (length <= kMaxLag) throw ValidationError("gen_synergetic_member: series too short");
    const std::uint64_t sseed = structure_seed.value_or(seed);
    auto rng = make_engine(sseed, kStructureStream);
    std::uniform_int_distribution<int> lag_dist(0, kMaxLag);

    std::vector<int> pool(static_cast<std::size_t>(n_vars - 1));
    std::iota(pool.begin(), pool.end(), 1);
    std::shuffle(pool.begin(), pool.end(), rng);

    std::vector<VariableEquation> eqs(static_cast<std::size_t>(n_vars));
    GroundTruth truth;
    truth.model = "synergetic";
    truth.target = 0;
    truth.model_params = params;
    truth.structure_seed = sseed;
    truth.noise_seed = seed;
    for (int i = 0; i < 5; ++i) {
        const LaggedVariable src{pool[static_cast<std::size_t>(i)], lag_dist(rng)};
        eqs[0].terms.push_back({src, params.c, false});
        truth.true_drivers.push_back(src);
    }
    for (int i = 5; i < 8; ++i) {
        const LaggedVariable src{pool[static_cast<std::size_t>(i)], lag_dist(rng)};
        eqs[0].product.push_back(src);
        truth.true_drivers.push_back(src);
        truth.synergetic_drivers.push_back(src);
    }
    eqs[0].product_coefficient = params.b;

    for (int j = 1; j < n_vars; ++j) {
        std::vector<int> others;
        for (int v = 1; v < n_vars; ++v)
            if (v != j) others.push_back(v);
        std::shuffle(others.begin(), others.end(), rng);
        for (int d = 0; d < 2; ++d)
            eqs[static_cast<std::size_t>(j)].terms.push_back({{others[static_cast<std::size_t>(d)], lag_dist(rng)}, params.a, false});
    }
    truth.equations = eqs;
    return {TimeSeriesPanel(simulate(eqs, length, seed), numbered("X", n_vars)), std::move(truth)};
}

SyntheticSeries gen_gam_member(int n_vars, int length, std::uint64_t seed, std::optional<std::uint64_t> structure_seed) {
    if (n_vars < 2) throw ValidationError("gen_gam_member: need N >= 2");
    if (length <= kMaxLag) throw ValidationError("gen_gam_member: series too short");
    std::uint64_t sseed = structure_seed.value_or(seed);
    for (int attempt = 0; attempt < 10000; ++attempt, ++sseed) {
        auto rng = make_engine(sseed, kStructureStream);
        std::uniform_int_distribution<int> count_dist(1, 2);
        std::uniform_int_distribution<int> other_dist(0, n_vars - 2);
        std::uniform_int_distribution<int> lag_dist(0, kMaxLag);
        std::uniform_real_distribution<double> magnitude(0.2, 0.5);
        std::bernoulli_distribution coin(0.5);

        std::vector<VariableEquation> eqs(static_cast<std::size_t>(n_vars));
        for (int j = 0; j < n_vars; ++j) {
            auto& eq = eqs[static_cast<std::size_t>(j)];
            eq.terms.push_back({LaggedVariable{j, 0}, magnitude(rng), false});
            const int count = 1 + count_dist(rng);
            while (static_cast<int>(eq.terms.size()) < count) {
                int var = other_dist(rng);
                if (var >= j) ++var;
                const LaggedVariable src{var, lag_dist(rng)};
                const bool quadratic = coin(rng);
                const double coef = magnitude(rng) * (coin(rng) ? 1.0 : -1.0);
                const bool dup = std::any_of(eq.terms.begin(), eq.terms.end(),
                                             [&](const DrivingTerm& t) { return t.source == src; });
                if (!dup) eq.terms.push_back({src, coef, quadratic});
            }
        }
        Eigen::MatrixXd x = simulate(eqs, length, seed);
        if (!looks_stationary(x)) continue;

        int target = 0;
        double best = -1.0;
        for (int j = 0; j < n_vars; ++j) {
            double incoming = 0.0;
            for (const auto& t : eqs[static_cast<std::size_t>(j)].terms) incoming += std::abs(t.coefficient);
            if (incoming > best) {
                best = incoming;
                target = j;
            }
        }
        GroundTruth truth;
        truth.model = "gam";
        truth.target = target;
        truth.structure_seed = sseed;
        truth.noise_seed = seed;
        for (const auto& t : eqs[static_cast<std::size_t>(target)].terms) truth.true_drivers.push_back(t.source);
        std::sort(truth.true_drivers.begin(), truth.true_drivers.end());
        truth.equations = std::move(eqs);
        return {TimeSeriesPanel(std::move(x), numbered("X", n_vars)), std::move(truth)};
    }
    throw DataError("gen_gam_member: no stable structure found");
}

std::map<int, OracleEntry> minimal_error_oracle(const TimeSeriesPanel& panel, const GroundTruth& truth,
                                                const PredictionTask& task, int k, TimeRange learn, TimeRange test) {
    const auto& drivers = truth.true_drivers;
    if (drivers.empty()) throw ValidationError("minimal_error_oracle: ground truth has no drivers");
    if (drivers.size() > 20) throw ValidationError("minimal_error_oracle: too many true drivers to enumerate");
    std::map<int, OracleEntry> out;
    const auto n = static_cast<std::uint32_t>(drivers.size());
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<LaggedVariable> subset;
        for (std::uint32_t c = 0; c < n; ++c)
            if (mask & (1u << c)) subset.push_back(drivers[c]);
        const auto fc = knn_predict(panel, subset, task, k, learn, test);
        if (!fc.srmse) throw DegenerateInputError("minimal_error_oracle: test truth has zero variance");
        const int p = std::popcount(mask);
        auto it = out.find(p);
        if (it == out.end() || *fc.srmse < it->second.srmse) out[p] = OracleEntry{*fc.srmse, subset};
    }
    return out;
}

double oracle_minimum(const std::map<int, OracleEntry>& oracle) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [p, e] : oracle) best = std::min(best, e.srmse);
    return best;
}

void write_ground_truth(std::ostream& out, const GroundTruth& truth, const std::vector<std::string>& names) {
    auto list = [&](const std::vector<LaggedVariable>& vars) {
        std::string s;
        for (std::size_t i = 0; i < vars.size(); ++i) s += (i ? ";" : "") + describe(vars[i], names);
        return s;
    };
    out << "model=" << truth.model << '\n';
    out << "target=" << names.at(static_cast<std::size_t>(truth.target)) << '\n';
    out << "structure_seed=" << truth.structure_seed << '\n';
    out << "noise_seed=" << truth.noise_seed << '\n';
    out << "a=" << format_real(truth.model_params.a) << '\n';
    out << "b=" << format_real(truth.model_params.b) << '\n';
    out << "c=" << format_real(truth.model_params.c) << '\n';
    out << "sigma=" << format_real(truth.model_params.sigma) << '\n';
    out << "true_drivers=" << list(truth.true_drivers) << '\n';
    out << "synergetic_drivers=" << list(truth.synergetic_drivers) << '\n';
    for (std::size_t j = 0; j < truth.equations.size(); ++j) {
        const auto& eq = truth.equations[j];
        out << "equation." << names.at(j) << '=';
        for (std::size_t t = 0; t < eq.terms.size(); ++t) {
            const auto& term = eq.terms[t];
            out << (t ? " + " : "") << format_real(term.coefficient) << '*' << describe(term.source, names)
                << (term.quadratic ? "^2" : "");
        }
        if (!eq.product.empty()) {
            out << (eq.terms.empty() ? "" : " + ") << format_real(eq.product_coefficient);
            for (const auto& src : eq.product) out << '*' << describe(src, names);
        }
        const bool empty = eq.terms.empty() && eq.product.empty();
        out << (empty ? "" : " + ") << format_real(eq.noise_scale) << "*eta\n";
    }
}

}  // namespace mfp
