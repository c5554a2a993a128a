#include "mfpred/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace mfp {

std::vector<LaggedVariable> variables_of(const PredictorSet& set) {
    std::vector<LaggedVariable> out;
    out.reserve(set.size());
    for (const auto& p : set) out.push_back(p.variable);
    return out;
}

void PredictionTask::validate(int n_vars) const {
    if (target < 0 || target >= n_vars)
        throw ValidationError("target index " + std::to_string(target) + " outside [0, " + std::to_string(n_vars) + ")");
    if (horizon < 1) throw ValidationError("prediction step h must be >= 1");
    if (tau_max < 0) throw ValidationError("tau_max must be >= 0");
}

void EstimatorConfig::validate() const {
    if (k_algo < 1 || k_cmi_mmi < 1 || k_predict < 1)
        throw ValidationError("neighbor counts must be >= 1");
}

EstimatorConfig EstimatorConfig::with_k(int k_algo, int k) {
    return EstimatorConfig{k_algo, k, k};
}

void AlgorithmConfig::validate() const {
    if (n0 < 1) throw ValidationError("n0 must be >= 1");
    if (n_max < n0) throw ValidationError("n_max must be >= n0");
    if (n_i < 1) throw ValidationError("n_i must be >= 1");
    if (const auto* s = std::get_if<ShuffleSignificance>(&significance)) {
        if (s->surrogates < 20) throw ValidationError("shuffle test needs at least 20 surrogates");
        if (!(s->alpha > 0.0 && s->alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    } else {
        const double value = std::get<FixedThreshold>(significance).value;
        if (std::isnan(value)) throw ValidationError("fixed threshold must not be NaN");
    }
}

void SchemeConfig::validate() const {
    if (p_max < 1) throw ValidationError("p_max must be >= 1");
    if (subset_cap < 1) throw ValidationError("subset_cap must be >= 1");
    const bool mmi_cut = std::holds_alternative<MmiMaxCutoff>(cutoff) || std::holds_alternative<MmiMaxPlusCvCutoff>(cutoff);
    if (mmi_cut && scheme != Scheme::optimal)
        throw ValidationError("mmi_max cutoffs are only valid with the optimal scheme");
    if (std::holds_alternative<HeuristicCutoff>(cutoff)) {
        if (scheme == Scheme::optimal)
            throw ValidationError("the lambda heuristic does not apply to the optimal scheme; use mmi_max");
        const double lambda = std::get<HeuristicCutoff>(cutoff).lambda;
        if (!(lambda >= 0.0 && lambda < 1.0)) throw ValidationError("lambda must lie in [0, 1)");
    }
    if (const auto* cv = std::get_if<CrossValidationCutoff>(&cutoff); cv && cv->folds < 2)
        throw ValidationError("cross-validation needs at least 2 folds");
    if (const auto* cv = std::get_if<MmiMaxPlusCvCutoff>(&cutoff); cv && cv->folds < 2)
        throw ValidationError("cross-validation needs at least 2 folds");
}

std::string to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::mi_rank: return "mi_rank";
        case Scheme::cmi_forward: return "cmi_forward";
        case Scheme::causal_cmi_forward: return "causal_cmi_forward";
        case Scheme::optimal: return "optimal";
    }
    return "unknown";
}

Scheme scheme_from_string(const std::string& name) {
    if (name == "mi_rank" || name == "mi") return Scheme::mi_rank;
    if (name == "cmi_forward" || name == "cmi") return Scheme::cmi_forward;
    if (name == "causal_cmi_forward" || name == "causal_cmi") return Scheme::causal_cmi_forward;
    if (name == "optimal") return Scheme::optimal;
    throw ValidationError("unknown scheme '" + name + "'");
}

std::string to_string(const Cutoff& cutoff) {
    struct Visitor {
        std::string operator()(const HeuristicCutoff& c) const {
            char buf[64];
            std::snprintf(buf, sizeof buf, "lambda%.2f", c.lambda);
            return buf;
        }
        std::string operator()(const CrossValidationCutoff& c) const { return "cv" + std::to_string(c.folds); }
        std::string operator()(const MmiMaxCutoff&) const { return "mmi_max"; }
        std::string operator()(const MmiMaxPlusCvCutoff& c) const { return "mmi_max_cv" + std::to_string(c.folds); }
    };
    return std::visit(Visitor{}, cutoff);
}

// ---------------------------------------------------------------------------

TimeSeriesPanel::TimeSeriesPanel(Eigen::MatrixXd values, std::vector<std::string> names)
    : values_(std::move(values)), names_(std::move(names)) {
    if (values_.rows() < 1 || values_.cols() < 1) throw ValidationError("panel must have at least one row and one column");
    if (static_cast<Eigen::Index>(names_.size()) != values_.cols())
        throw ValidationError("panel has " + std::to_string(values_.cols()) + " columns but " +
                              std::to_string(names_.size()) + " names");
    std::set<std::string> seen;
    for (const auto& n : names_) {
        if (!seen.insert(n).second) throw ValidationError("duplicate variable name '" + n + "'");
    }
    if (!values_.allFinite()) throw DataError("panel contains non-finite values");
}

int TimeSeriesPanel::index_of(const std::string& name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw ValidationError("no variable named '" + name + "'");
    return static_cast<int>(it - names_.begin());
}

TimeSeriesPanel TimeSeriesPanel::slice(int begin, int end) const {
    if (begin < 0 || end > length() || begin >= end) throw ValidationError("invalid row slice");
    return TimeSeriesPanel(values_.middleRows(begin, end - begin), names_);
}

TimeSeriesPanel TimeSeriesPanel::permute_columns(const std::vector<int>& order) const {
    if (static_cast<int>(order.size()) != n_vars()) throw ValidationError("column permutation has wrong length");
    Eigen::MatrixXd v(values_.rows(), values_.cols());
    std::vector<std::string> names(order.size());
    for (std::size_t c = 0; c < order.size(); ++c) {
        v.col(static_cast<Eigen::Index>(c)) = values_.col(order[c]);
        names[c] = names_.at(order[c]);
    }
    return TimeSeriesPanel(std::move(v), std::move(names));
}

bool TimeSeriesPanel::operator==(const TimeSeriesPanel& other) const {
    return names_ == other.names_ && values_.rows() == other.values_.rows() &&
           values_.cols() == other.values_.cols() && values_ == other.values_;
}

TimeRange valid_targets(const TimeSeriesPanel& panel, const PredictionTask& task) {
    return TimeRange{task.first_target_time(), panel.length()};
}

DesignMatrix design_matrix(const TimeSeriesPanel& panel, const std::vector<LaggedVariable>& predictors,
                           const PredictionTask& task, TimeRange range) {
    task.validate(panel.n_vars());
    if (predictors.empty()) throw ValidationError("design matrix needs at least one predictor");
    if (range.begin < task.first_target_time())
        throw ValidationError("target range starts at " + std::to_string(range.begin) +
                              ", below the alignment bound tau_max + h = " + std::to_string(task.first_target_time()));
    if (range.end > panel.length())
        throw ValidationError("target range ends at " + std::to_string(range.end) + ", past the series length " +
                              std::to_string(panel.length()));
    for (const auto& p : predictors) {
        if (p.var < 0 || p.var >= panel.n_vars()) throw ValidationError("predictor variable index out of range");
        if (p.lag < 0 || p.lag > task.tau_max) throw ValidationError("predictor lag outside [0, tau_max]");
    }

    const int rows = range.size();
    DesignMatrix dm;
    dm.predictors.resize(rows, static_cast<Eigen::Index>(predictors.size()));
    dm.target.resize(rows);
    dm.target_times.resize(rows);
    const auto& v = panel.values();
    for (std::size_t c = 0; c < predictors.size(); ++c) {
        const auto& p = predictors[c];
        for (int r = 0; r < rows; ++r) {
            dm.predictors(r, static_cast<Eigen::Index>(c)) = v(range.begin + r - task.horizon - p.lag, p.var);
        }
    }
    for (int r = 0; r < rows; ++r) {
        dm.target(r) = v(range.begin + r, task.target);
        dm.target_times[r] = range.begin + r;
    }
    return dm;
}

std::vector<LaggedVariable> candidate_grid(int n_vars, int tau_max) {
    std::vector<LaggedVariable> out;
    out.reserve(static_cast<std::size_t>(n_vars) * (tau_max + 1));
    for (int j = 0; j < n_vars; ++j)
        for (int tau = 0; tau <= tau_max; ++tau) out.push_back({j, tau});
    return out;
}

Standardizer Standardizer::fit(const TimeSeriesPanel& panel, int learn_rows) {
    if (learn_rows < 2 || learn_rows > panel.length()) throw ValidationError("standardization needs 2..T learning rows");
    Standardizer s;
    const auto block = panel.values().topRows(learn_rows);
    for (int j = 0; j < panel.n_vars(); ++j) {
        const double mean = block.col(j).mean();
        const double var = (block.col(j).array() - mean).square().mean();
        if (!(var > 0.0)) throw DegenerateInputError("variable '" + panel.names()[j] + "' is constant on the learning segment");
        s.mean_.push_back(mean);
        s.scale_.push_back(std::sqrt(var));
    }
    return s;
}

TimeSeriesPanel Standardizer::apply(const TimeSeriesPanel& panel) const {
    if (panel.n_vars() != static_cast<int>(mean_.size())) throw ValidationError("standardizer fitted on a different panel");
    Eigen::MatrixXd v = panel.values();
    for (int j = 0; j < panel.n_vars(); ++j) v.col(j) = (v.col(j).array() - mean_[j]) / scale_[j];
    return TimeSeriesPanel(std::move(v), panel.names());
}

// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

TimeSeriesPanel read_panel_csv(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw DataError(source + ": empty input");
    const auto names = split_commas(line);
    if (names.empty() || names.front().empty()) throw DataError(source + ":1: missing header row");
    std::vector<double> flat;
    int rows = 0;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_commas(line);
        if (fields.size() != names.size())
            throw DataError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(names.size()) +
                            " fields, found " + std::to_string(fields.size()));
        for (const auto& f : fields) {
            if (f.empty()) throw DataError(source + ":" + std::to_string(line_no) + ": missing value");
            std::size_t used = 0;
            double value = 0.0;
            try {
                value = std::stod(f, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != f.size() || !std::isfinite(value))
                throw DataError(source + ":" + std::to_string(line_no) + ": not a finite real: '" + f + "'");
            flat.push_back(value);
        }
        ++rows;
    }
    if (rows == 0) throw DataError(source + ": no data rows");
    const auto cols = static_cast<Eigen::Index>(names.size());
    Eigen::MatrixXd values(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) values(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
    return TimeSeriesPanel(std::move(values), names);
}

TimeSeriesPanel read_panel_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return read_panel_csv(in, path);
}

void write_panel_csv(std::ostream& out, const TimeSeriesPanel& panel) {
    for (int j = 0; j < panel.n_vars(); ++j) out << (j ? "," : "") << panel.names()[j];
    out << '\n';
    for (int t = 0; t < panel.length(); ++t) {
        for (int j = 0; j < panel.n_vars(); ++j) out << (j ? "," : "") << format_real(panel.at(t, j));
        out << '\n';
    }
}

std::string format_real(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string describe(const LaggedVariable& v, const std::vector<std::string>& names) {
    const std::string name = (v.var >= 0 && v.var < static_cast<int>(names.size())) ? names[v.var] : "v" + std::to_string(v.var);
    return v.lag == 0 ? name + "(t)" : name + "(t-" + std::to_string(v.lag) + ")";
}

}  // namespace mfp
