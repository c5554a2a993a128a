#include "mfpred/bench.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

namespace mfp {

namespace {

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

struct Section {
    std::string name;
    int line = 0;
    std::vector<std::pair<std::string, Entry>> entries;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

class Reader {
public:
    Reader(Section& section, std::string source) : section_(section), source_(std::move(source)) {}

    [[noreturn]] void fail(int line, const std::string& message) const {
        throw ValidationError(source_ + ":" + std::to_string(line) + ": " + message);
    }

    Entry* find(const std::string& key) {
        for (auto& [k, e] : section_.entries)
            if (k == key) {
                e.used = true;
                return &e;
            }
        return nullptr;
    }

    std::optional<std::string> text(const std::string& key) {
        if (auto* e = find(key)) return e->value;
        return std::nullopt;
    }

    template <typename T>
    void integer(const std::string& key, T& out) {
        auto* e = find(key);
        if (!e) return;
        T v{};
        const auto* first = e->value.data();
        const auto* last = first + e->value.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last) fail(e->line, "'" + key + "' expects an integer, got '" + e->value + "'");
        out = v;
    }

    void real(const std::string& key, double& out) {
        auto* e = find(key);
        if (!e) return;
        out = parse_real(*e, key);
    }

    double parse_real(const Entry& e, const std::string& key) const {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(e.value, &used);
        } catch (const std::exception&) {
            fail(e.line, "'" + key + "' expects a number, got '" + e.value + "'");
        }
        if (used != e.value.size() || !std::isfinite(v))
            fail(e.line, "'" + key + "' expects a finite number, got '" + e.value + "'");
        return v;
    }

    void flag(const std::string& key, bool& out) {
        auto* e = find(key);
        if (!e) return;
        if (e->value == "true" || e->value == "1" || e->value == "yes") out = true;
        else if (e->value == "false" || e->value == "0" || e->value == "no") out = false;
        else fail(e->line, "'" + key + "' expects true or false");
    }

    int line_of(const std::string& key) {
        auto* e = find(key);
        return e ? e->line : section_.line;
    }

    void reject_unused() const {
        for (const auto& [k, e] : section_.entries)
            if (!e.used) fail(e.line, "unknown key '" + k + "' in section [" + section_.name + "]");
    }

private:
    Section& section_;
    std::string source_;
};

template <typename F>
void checked(Reader& r, int line, F&& f) {
    try {
        f();
    } catch (const ValidationError& e) {
        r.fail(line, e.what());
    }
}

SchemeConfig parse_scheme(Reader& r) {
    SchemeConfig s;
    const int line = r.line_of("scheme");
    if (auto name = r.text("scheme")) {
        try {
            s.scheme = scheme_from_string(*name);
        } catch (const ValidationError& e) {
            r.fail(line, e.what());
        }
    } else {
        r.fail(line, "[scheme] requires 'scheme'");
    }
    int folds = 5;
    double lambda = 0.2;
    r.integer("folds", folds);
    r.real("lambda", lambda);
    const std::string cutoff = r.text("cutoff").value_or(s.scheme == Scheme::optimal ? "mmi_max" : "cross_validation");
    const int cline = r.line_of("cutoff");
    if (cutoff == "heuristic") s.cutoff = HeuristicCutoff{lambda};
    else if (cutoff == "cross_validation" || cutoff == "cv") s.cutoff = CrossValidationCutoff{folds};
    else if (cutoff == "mmi_max") s.cutoff = MmiMaxCutoff{};
    else if (cutoff == "mmi_max_plus_cv") s.cutoff = MmiMaxPlusCvCutoff{folds};
    else r.fail(cline, "unknown cutoff '" + cutoff + "' (heuristic, cross_validation, mmi_max, mmi_max_plus_cv)");
    r.integer("p_max", s.p_max);
    r.integer("subset_cap", s.subset_cap);
    checked(r, line, [&] { s.validate(); });
    return s;
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::fixed_model: return "fixed_model";
        case ModelKind::synergetic: return "synergetic";
        case ModelKind::gam: return "gam";
        case ModelKind::csv: return "csv";
    }
    return "?";
}

std::string to_string(PredictorMode mode) {
    switch (mode) {
        case PredictorMode::knn: return "knn";
        case PredictorMode::linear: return "linear";
        case PredictorMode::both: return "both";
    }
    return "?";
}

PredictorMode predictor_mode_from_string(const std::string& name) {
    if (name == "knn") return PredictorMode::knn;
    if (name == "linear") return PredictorMode::linear;
    if (name == "both") return PredictorMode::both;
    throw ValidationError("unknown predictor '" + name + "' (knn, linear, both)");
}

std::string to_string(SweepParameter parameter) {
    switch (parameter) {
        case SweepParameter::threshold: return "threshold";
        case SweepParameter::length: return "T";
        case SweepParameter::k: return "k";
        case SweepParameter::lambda: return "lambda";
    }
    return "?";
}

SweepParameter sweep_parameter_from_string(const std::string& name) {
    if (name == "threshold" || name == "I*") return SweepParameter::threshold;
    if (name == "T" || name == "length") return SweepParameter::length;
    if (name == "k") return SweepParameter::k;
    if (name == "lambda") return SweepParameter::lambda;
    throw ValidationError("unknown sweep parameter '" + name + "' (threshold, T, k, lambda)");
}

void ExperimentConfig::validate() const {
    if (T_learn < 1 || T_test < 1) throw ValidationError("T_learn and T_test must be positive");
    if (ensemble_size < 1) throw ValidationError("ensemble_size must be >= 1");
    if (model.kind == ModelKind::csv && ensemble_size != 1)
        throw ValidationError("a csv model has exactly one member; set ensemble_size = 1");
    if (model.kind == ModelKind::csv && (model.path.empty() || model.target.empty()))
        throw ValidationError("a csv model needs 'path' and 'target'");
    if (h < 1) throw ValidationError("h must be >= 1");
    if (tau_max < 0) throw ValidationError("tau_max must be >= 0");
    if (workers < 1) throw ValidationError("workers must be >= 1");
    if (schemes.empty()) throw ValidationError("at least one [scheme] section is required");
    if (T_learn <= tau_max + h + est.k_predict)
        throw ValidationError("T_learn too short for tau_max + h + k_predict");
    est.validate();
    algo.validate();
    for (const auto& s : schemes) s.validate();
    if (sweep && sweep->values.empty()) throw ValidationError("sweep needs at least one value");
}

ExperimentConfig parse_experiment_config(std::istream& in, const std::string& source) {
    std::vector<Section> sections;
    std::string raw;
    int line_no = 0;
    auto fail = [&](int line, const std::string& message) {
        throw ValidationError(source + ":" + std::to_string(line) + ": " + message);
    };
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(line_no, "malformed section header '" + line + "'");
            sections.push_back({trim(line.substr(1, line.size() - 2)), line_no, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected 'key = value', got '" + line + "'");
        if (sections.empty()) fail(line_no, "key outside of any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(line_no, "empty key");
        auto& entries = sections.back().entries;
        if (std::any_of(entries.begin(), entries.end(), [&](const auto& kv) { return kv.first == key; }))
            fail(line_no, "duplicate key '" + key + "'");
        entries.push_back({key, Entry{value, line_no, false}});
    }

    ExperimentConfig cfg;
    bool seen_experiment = false;
    for (auto& section : sections) {
        Reader r(section, source);
        const std::string& name = section.name;
        if (name == "experiment") {
            if (seen_experiment) fail(section.line, "duplicate [experiment] section");
            seen_experiment = true;
            if (auto m = r.text("model")) {
                const int line = r.line_of("model");
                if (*m == "fixed_model") cfg.model.kind = ModelKind::fixed_model;
                else if (*m == "synergetic") cfg.model.kind = ModelKind::synergetic;
                else if (*m == "gam") cfg.model.kind = ModelKind::gam;
                else if (*m == "csv") cfg.model.kind = ModelKind::csv;
                else r.fail(line, "unknown model '" + *m + "' (fixed_model, synergetic, gam, csv)");
            }
            r.integer("T_learn", cfg.T_learn);
            r.integer("T_test", cfg.T_test);
            r.integer("ensemble_size", cfg.ensemble_size);
            r.integer("h", cfg.h);
            r.integer("tau_max", cfg.tau_max);
            r.integer("seed_base", cfg.seed_base);
            r.integer("workers", cfg.workers);
            r.flag("oracle", cfg.oracle);
            if (auto d = r.text("output_dir")) cfg.output_dir = *d;
            if (auto p = r.text("predictor")) {
                const int line = r.line_of("predictor");
                checked(r, line, [&] { cfg.predictor = predictor_mode_from_string(*p); });
            }
        } else if (name == "model") {
            r.integer("n_vars", cfg.model.n_vars);
            r.real("a", cfg.model.params.a);
            r.real("b", cfg.model.params.b);
            r.real("c", cfg.model.params.c);
            r.real("sigma", cfg.model.params.sigma);
            if (auto p = r.text("path")) {
                std::filesystem::path path(*p);
                if (path.is_relative() && source.find('<') == std::string::npos)
                    path = std::filesystem::path(source).parent_path() / path;
                cfg.model.path = path.string();
            }
            if (auto t = r.text("target")) cfg.model.target = *t;
            if (r.find("structure_seed")) {
                std::uint64_t s = 0;
                r.integer("structure_seed", s);
                cfg.model.structure_seed = s;
            }
        } else if (name == "estimator") {
            r.integer("k_algo", cfg.est.k_algo);
            r.integer("k_cmi_mmi", cfg.est.k_cmi_mmi);
            cfg.est.k_predict = cfg.est.k_cmi_mmi;
            r.integer("k_predict", cfg.est.k_predict);
            checked(r, section.line, [&] { cfg.est.validate(); });
        } else if (name == "algorithm") {
            r.integer("n0", cfg.algo.n0);
            r.integer("n_max", cfg.algo.n_max);
            r.integer("n_i", cfg.algo.n_i);
            const std::string sig = r.text("significance").value_or("fixed_threshold");
            const int line = r.line_of("significance");
            if (sig == "fixed_threshold" || sig == "fixed") {
                FixedThreshold f;
                r.real("threshold", f.value);
                cfg.algo.significance = f;
            } else if (sig == "shuffle") {
                ShuffleSignificance s;
                r.integer("surrogates", s.surrogates);
                r.real("alpha", s.alpha);
                cfg.algo.significance = s;
            } else {
                r.fail(line, "unknown significance '" + sig + "' (fixed_threshold, shuffle)");
            }
            checked(r, section.line, [&] { cfg.algo.validate(); });
        } else if (name == "scheme") {
            cfg.schemes.push_back(parse_scheme(r));
        } else if (name == "sweep") {
            if (cfg.sweep) fail(section.line, "duplicate [sweep] section");
            SweepSpec sweep;
            const int pline = r.line_of("parameter");
            const auto param = r.text("parameter");
            if (!param) r.fail(pline, "[sweep] requires 'parameter'");
            checked(r, pline, [&] { sweep.parameter = sweep_parameter_from_string(*param); });
            auto* values = r.find("values");
            if (!values) r.fail(section.line, "[sweep] requires 'values'");
            std::stringstream ss(values->value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                Entry e{trim(item), values->line, true};
                sweep.values.push_back(r.parse_real(e, "values"));
            }
            if (sweep.values.empty()) r.fail(values->line, "'values' is empty");
            cfg.sweep = sweep;
        } else {
            fail(section.line, "unknown section [" + name + "]");
        }
        r.reject_unused();
    }
    if (cfg.schemes.empty()) throw ValidationError(source + ": at least one [scheme] section is required");
    try {
        cfg.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(source + ": " + e.what());
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    return parse_experiment_config(in, path);
}

}  // namespace mfp
