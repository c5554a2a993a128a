#pragma once

#include "mfpred/core.hpp"
#include "mfpred/selection.hpp"
#include "mfpred/synth.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mfp {

enum class ModelKind { fixed_model, synergetic, gam, csv };

std::string to_string(ModelKind kind);

struct ModelSpec {
    ModelKind kind = ModelKind::synergetic;
    int n_vars = 10;
    ModelParams params;
    std::string path;    // csv only
    std::string target;  // csv only
    std::optional<std::uint64_t> structure_seed;
};

enum class PredictorMode { knn, linear, both };

std::string to_string(PredictorMode mode);
PredictorMode predictor_mode_from_string(const std::string& name);

enum class SweepParameter { threshold, length, k, lambda };

std::string to_string(SweepParameter parameter);
SweepParameter sweep_parameter_from_string(const std::string& name);

struct SweepSpec {
    SweepParameter parameter = SweepParameter::k;
    std::vector<double> values;
};

struct ExperimentConfig {
    ModelSpec model;
    int T_learn = 500;
    int T_test = 125;
    int ensemble_size = 100;
    std::vector<SchemeConfig> schemes;
    EstimatorConfig est;
    AlgorithmConfig algo;
    int h = 1;
    int tau_max = 2;
    std::optional<SweepSpec> sweep;
    std::uint64_t seed_base = 0;
    std::string output_dir = "results";
    int workers = 1;
    PredictorMode predictor = PredictorMode::knn;
    bool oracle = true;

    void validate() const;
};

/// Plain key = value file with [experiment], [model], [estimator],
/// [algorithm], [scheme] (repeatable) and [sweep] sections. `#` starts a
/// comment. Errors carry "source:line:" prefixes.
ExperimentConfig parse_experiment_config(std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_experiment_config(const std::string& path);

/// Label used in report files, e.g. "optimal/cv5".
std::string scheme_label(const SchemeConfig& scheme);

struct MemberRow {
    int member = 0;
    std::string scheme;
    std::string predictor;
    int p = 0;
    bool chosen = false;
    double srmse = 0.0;
    double rel_srmse = 0.0;
    double tpr = 0.0;
    double fdr = 0.0;
    std::int64_t cost = 0;
    int causal_size = -1;
    /// Row at which TPR/FDR enter the summary: p = min(|true drivers|, available).
    bool eval_row = false;
};

struct SchemeOutcome {
    std::string label;
    std::optional<SelectionResult> selection;
    std::string error;
};

struct MemberOutcome {
    int member = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> names;
    std::optional<GroundTruth> truth;
    std::map<int, OracleEntry> oracle;
    std::vector<SchemeOutcome> schemes;
    std::vector<MemberRow> rows;
};

struct SummaryRow {
    std::string scheme;
    std::string statistic;
    double value = 0.0;
};

struct ExperimentReport {
    std::vector<MemberOutcome> members;
    std::vector<MemberRow> rows;
    std::vector<SummaryRow> summary;

    /// NaN when absent.
    double statistic(const std::string& scheme, const std::string& name) const;
};

/// Generates (or loads), standardizes, selects and forecasts one member.
MemberOutcome run_member(const ExperimentConfig& cfg, int member);

/// Runs every member on `cfg.workers` threads and aggregates the report.
/// Files are written only when `write_files` is set.
ExperimentReport run_experiment(const ExperimentConfig& cfg, bool write_files = true);

/// Empirical quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

std::vector<SummaryRow> summarize(const std::vector<MemberRow>& rows, int ensemble_size);

void write_members_csv(std::ostream& out, const std::vector<MemberRow>& rows);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_selection_log_csv(std::ostream& out, const std::vector<MemberOutcome>& members);

struct SweepPoint {
    double value = 0.0;
    ExperimentReport report;
};

/// Applies each sweep value to a copy of `cfg`: threshold sets I*, length sets
/// T_learn (T_test = T_learn / 4), k sets k_cmi_mmi = k_predict, lambda sets
/// every heuristic cutoff. Each point writes into output_dir/<parameter>_<value>
/// and the combined sweep.csv goes to output_dir.
std::vector<SweepPoint> run_sweep(const ExperimentConfig& cfg, bool write_files = true);

ExperimentConfig apply_sweep_value(const ExperimentConfig& cfg, SweepParameter parameter, double value);

}  // namespace mfp
