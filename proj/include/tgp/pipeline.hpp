#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tgp/audit.hpp"
#include "tgp/baselines.hpp"
#include "tgp/error.hpp"
#include "tgp/graph.hpp"
#include "tgp/io.hpp"
#include "tgp/manifest.hpp"
#include "tgp/sampler.hpp"
#include "tgp/sparsify.hpp"
#include "tgp/tpr.hpp"

namespace tgp {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int audit_failed = 2;
inline constexpr int infeasible = 3;
inline constexpr int input = 4;
} // namespace exit_code

struct AttackConfig {
    std::string dataset;
    std::string descriptor;
    std::string output_dir = "out";
    /// One of the 16 strategy names, or a baseline such as ADD-Degree.
    std::string strategy = "TPR-Cosine";

    double p = 0.3;
    double knowledge = 1.0;
    double train_ratio = 0.7;
    double val_ratio = 0.15;
    double test_ratio = 0.15;
    std::uint64_t seed = 0;

    double alpha = 0.85;
    double beta = 0.5;
    std::size_t topk = 0;
    double kl_epsilon = 1e-12;
    double combined_weight = 0.5;
    bool raw_snapshots = false;
    std::string budget_basis = "train";

    double window = 1800.0;
    std::size_t capacity = 1;
    std::size_t max_attempts = 3;
    std::size_t candidate_timestamps = 8;
    double recovery_oversample = 8.0;

    double ks_threshold = 0.1;
    std::size_t ks_min_samples = 100;

    /// Overrides of the built-in paper_specified annotations, from a config file.
    std::map<std::string, bool> annotations;

    TprParams tpr() const { return {alpha, beta}; }

    SamplerParams sampler() const {
        SamplerParams s;
        s.window = window;
        s.node_capacity = capacity;
        s.max_attempts = max_attempts;
        s.rng_seed = seed;
        s.candidate_timestamps = candidate_timestamps;
        s.recovery_oversample = recovery_oversample;
        return s;
    }

    SparsifyOptions sparsify_options() const {
        SparsifyOptions o;
        o.tpr = tpr();
        o.combined_weight = combined_weight;
        o.use_raw_snapshots = raw_snapshots;
        if (budget_basis == "train") o.budget_basis = BudgetBasis::Train;
        else if (budget_basis == "visible") o.budget_basis = BudgetBasis::Visible;
        else throw InputError("budget_basis must be 'train' or 'visible'");
        return o;
    }

    AuditThresholds thresholds(AuditMode mode) const {
        AuditThresholds t;
        t.mode = mode;
        t.window = window;
        t.capacity = capacity;
        t.ks_threshold = ks_threshold;
        t.ks_min_samples = ks_min_samples;
        return t;
    }
};

/// Calls f(name, field, paper_specified) for every tunable parameter.
template <class Config, class F>
void visit_parameters(Config& c, F&& f) {
    f("p", c.p, true);
    f("knowledge", c.knowledge, true);
    f("train_ratio", c.train_ratio, true);
    f("val_ratio", c.val_ratio, true);
    f("test_ratio", c.test_ratio, true);
    f("seed", c.seed, false);
    f("alpha", c.alpha, false);
    f("beta", c.beta, false);
    f("topk", c.topk, false);
    f("kl_epsilon", c.kl_epsilon, false);
    f("combined_weight", c.combined_weight, false);
    f("raw_snapshots", c.raw_snapshots, false);
    f("budget_basis", c.budget_basis, false);
    f("window", c.window, false);
    f("capacity", c.capacity, false);
    f("max_attempts", c.max_attempts, false);
    f("candidate_timestamps", c.candidate_timestamps, false);
    f("recovery_oversample", c.recovery_oversample, false);
    f("ks_threshold", c.ks_threshold, false);
    f("ks_min_samples", c.ks_min_samples, false);
}

/// Reads a declarative config. Each parameter is either a bare value or
/// {"value": ..., "paper_specified": bool}.
inline AttackConfig config_from_json(const nlohmann::json& j, AttackConfig c = {}) {
    if (!j.is_object()) throw InputError("config must be a JSON object");
    try {
        if (j.contains("dataset")) c.dataset = j["dataset"].get<std::string>();
        if (j.contains("descriptor")) c.descriptor = j["descriptor"].get<std::string>();
        if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
        if (j.contains("strategy")) c.strategy = j["strategy"].get<std::string>();
        visit_parameters(c, [&](const char* name, auto& field, bool) {
            if (!j.contains(name)) return;
            const auto& node = j[name];
            if (node.is_object()) {
                field = node.at("value").get<std::decay_t<decltype(field)>>();
                if (node.contains("paper_specified")) c.annotations[name] = node["paper_specified"].get<bool>();
            } else {
                field = node.get<std::decay_t<decltype(field)>>();
            }
        });
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    return c;
}

inline AttackConfig load_config(const std::string& path, AttackConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError("config " + path + ": " + e.what());
    }
    return config_from_json(j, std::move(base));
}

/// Every parameter with its value and whether the paper fixes it.
inline nlohmann::ordered_json config_lock(const AttackConfig& c) {
    nlohmann::ordered_json j;
    j["dataset"] = c.dataset;
    j["descriptor"] = c.descriptor;
    j["strategy"] = c.strategy;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    visit_parameters(c, [&](const char* name, const auto& field, bool paper) {
        const auto it = c.annotations.find(name);
        params[name] = {{"value", field}, {"paper_specified", it == c.annotations.end() ? paper : it->second}};
    });
    j["parameters"] = std::move(params);
    return j;
}

inline void validate_config(const AttackConfig& c) {
    if (!(c.p >= 0.0 && c.p <= 1.0)) throw InputError("p must lie in [0, 1]");
    if (!(c.knowledge > 0.0 && c.knowledge <= 1.0)) throw InputError("knowledge must lie in (0, 1]");
    c.sampler().validate();
    c.tpr().validate();
    (void)c.sparsify_options();
}

/// Parsed baseline name ("ADD-Degree", "REM-Random"), if the strategy is one.
struct BaselineName {
    BaselineMode mode;
    Heuristic heuristic;
};

inline std::optional<BaselineName> parse_baseline(std::string_view name) {
    for (const auto mode : {BaselineMode::Add, BaselineMode::Rem}) {
        const auto prefix = std::string(to_string(mode)) + "-";
        if (name.starts_with(prefix))
            if (auto h = heuristic_from_string(name.substr(prefix.size()))) return BaselineName{mode, *h};
    }
    return std::nullopt;
}

struct CatalogEntry {
    std::string name;
    std::string family;
};

/// The 16 attack strategies followed by the 5 ADD and 5 REM baselines.
inline std::vector<CatalogEntry> catalog() {
    std::vector<CatalogEntry> out;
    for (const auto& n : strategy_names()) {
        const auto s = *strategy_from_name(n);
        const char* fam = s.family == StrategyFamily::EdgeHeuristic ? "edge-heuristic"
                          : s.family == StrategyFamily::EdgeRank    ? "edge-rank"
                                                                    : "timestamp-drift";
        out.push_back({n, fam});
    }
    for (const auto mode : {BaselineMode::Add, BaselineMode::Rem})
        for (const auto h : kAllHeuristics)
            out.push_back({std::string(to_string(mode)) + "-" + std::string(to_string(h)),
                           mode == BaselineMode::Add ? "baseline-add" : "baseline-rem"});
    return out;
}

/// Whatever a run produced before it stopped.
struct AttackOutcome {
    std::optional<RemovalPlan> removal;
    std::optional<InsertionPlan> insertion;
    std::optional<TemporalGraph> poisoned;
    std::optional<AuditReport> audit;
    Manifest manifest;
    AuditMode mode = AuditMode::Full;
};

namespace detail {

inline SparsifyStrategy resolve_strategy(const AttackConfig& c) {
    auto s = strategy_from_name(c.strategy, c.seed);
    if (!s) throw InputError("unknown strategy '" + c.strategy + "'");
    s->metric.topk = c.topk;
    s->metric.epsilon = c.kl_epsilon;
    return *s;
}

inline nlohmann::ordered_json rounds_json(const InsertionPlan& plan) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : plan.rounds)
        arr.push_back({{"round", r.round}, {"timestamps_drawn", r.timestamps_drawn}, {"inserted", r.inserted},
                       {"kde_refit", r.refit}});
    return arr;
}

inline nlohmann::ordered_json manifest_meta(const AttackConfig& c, const AttackOutcome& o, std::size_t train_edges) {
    nlohmann::ordered_json m;
    m["strategy"] = c.strategy;
    m["mode"] = to_string(o.mode);
    m["p"] = c.p;
    m["knowledge"] = c.knowledge;
    m["train_edges"] = train_edges;
    if (o.removal) {
        m["budget"] = o.removal->budget;
        m["visible"] = o.removal->visible;
    } else if (o.insertion) {
        m["budget"] = o.insertion->budget;
        m["visible"] = floor_fraction(c.knowledge, train_edges);
    }
    m["seed"] = c.seed;
    m["window"] = c.window;
    m["capacity"] = c.capacity;
    if (o.mode == AuditMode::Full) {
        m["structural_priority"] = "out-deficit desc, original degree desc, node id asc";
        m["select_best"] = "partner in-deficit desc, then partner last activity before t furthest";
        m["partial_timestamp_order"] = "Combined-TER desc, then stream order";
    }
    if (o.insertion) {
        m["rounds"] = rounds_json(*o.insertion);
        m["recovery_rounds_used"] = o.insertion->recovery_rounds_used();
    }
    return m;
}

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const InfeasibleSampling& e) {
        throw StageError(name, e.what(), exit_code::infeasible);
    } catch (const Error& e) {
        throw StageError(name, e.what(), exit_code::input);
    }
}

} // namespace detail

/// Poisons a training stream in memory: sparsify, sample, position, audit.
/// On failure the stages completed so far stay in `out`, and a StageError
/// names the stage.
inline void poison_train(const TemporalGraph& train, const AttackConfig& config, AttackOutcome& out) {
    detail::stage("config", [&] { validate_config(config); });
    const auto opt = detail::stage("config", [&] { return config.sparsify_options(); });
    const auto finish = [&](AuditMode mode) {
        out.mode = mode;
        out.manifest = make_manifest(train, out.removal ? &*out.removal : nullptr,
                                     out.insertion ? &*out.insertion : nullptr,
                                     detail::manifest_meta(config, out, train.edge_count()));
    };

    if (const auto base = parse_baseline(config.strategy)) {
        const auto mode = base->mode == BaselineMode::Add ? AuditMode::Add : AuditMode::Rem;
        out.mode = mode;
        if (base->mode == BaselineMode::Rem) {
            detail::stage("sparsify", [&] {
                try {
                    out.removal = rem_baseline(train, base->heuristic, config.p, config.knowledge, config.seed, opt);
                } catch (const BudgetExceeded& e) {
                    out.removal = e.partial();
                    throw;
                }
            });
            out.insertion = InsertionPlan{};
        } else {
            detail::stage("sample", [&] {
                try {
                    out.insertion = add_baseline(train, base->heuristic, config.p, config.knowledge, config.seed, opt);
                } catch (const InfeasibleSampling& e) {
                    out.insertion = e.partial();
                    throw;
                }
            });
        }
        finish(mode);
        RemovalPlan none;
        const auto& removal = out.removal ? *out.removal : none;
        out.poisoned = detail::stage("position", [&] { return insertion_positioning(train, removal, *out.insertion); });
        out.audit = detail::stage("audit", [&] { return audit(train, *out.poisoned, &out.manifest, config.thresholds(mode)); });
        return;
    }

    const auto strategy = detail::stage("config", [&] { return detail::resolve_strategy(config); });
    out.mode = AuditMode::Full;
    try {
        detail::stage("sparsify", [&] {
            try {
                out.removal = select_removals(train, strategy, config.p, config.knowledge, opt);
            } catch (const BudgetExceeded& e) {
                out.removal = e.partial();
                throw;
            }
        });
        detail::stage("sample", [&] {
            try {
                out.insertion = timestamp_selector(train, *out.removal, config.sampler());
            } catch (const InfeasibleSampling& e) {
                out.insertion = e.partial();
                throw;
            }
        });
    } catch (...) {
        finish(AuditMode::Full);
        throw;
    }
    finish(AuditMode::Full);
    out.poisoned = detail::stage("position", [&] { return insertion_positioning(train, *out.removal, *out.insertion); });
    out.audit = detail::stage("audit", [&] { return audit(train, *out.poisoned, &out.manifest, config.thresholds(AuditMode::Full)); });
}

inline AttackOutcome poison_train(const TemporalGraph& train, const AttackConfig& config) {
    AttackOutcome out;
    poison_train(train, config, out);
    return out;
}

inline std::string rate_label(double p) {
    std::string s;
    detail::append_double(s, p);
    return s;
}

/// out/<dataset>/<strategy>/p<rate>, with _k<knowledge> appended below full knowledge.
inline std::filesystem::path run_directory(const AttackConfig& c, const std::string& dataset_name) {
    auto leaf = "p" + rate_label(c.p);
    if (c.knowledge < 1.0) leaf += "_k" + rate_label(c.knowledge);
    return std::filesystem::path(c.output_dir) / dataset_name / c.strategy / leaf;
}

struct RunResult {
    std::filesystem::path directory;
    AttackOutcome outcome;
};

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

inline void write_graph(const std::filesystem::path& path, const TemporalGraph& g) {
    write_text(path, serialize_edge_stream(g));
}

inline void write_outputs(const std::filesystem::path& dir, const AttackConfig& c, const ChronologicalSplit* split,
                          const AttackOutcome& o, const std::string& error) {
    std::filesystem::create_directories(dir);
    write_text(dir / "config.lock", config_lock(c).dump(2) + "\n");
    if (o.poisoned) write_graph(dir / "train_poisoned.csv", *o.poisoned);
    if (split) {
        write_graph(dir / "val.csv", split->val);
        write_graph(dir / "test.csv", split->test);
    }
    if (o.removal || o.insertion) write_text(dir / "manifest.jsonl", serialize_manifest(o.manifest));
    if (o.audit) write_text(dir / "audit.json", o.audit->to_json().dump(2) + "\n");
    if (!error.empty()) write_text(dir / "error.txt", error + "\n");
}

} // namespace detail

/// Loads the dataset, splits it 70/15/15, poisons the training piece and
/// writes the run directory. Failures, including a failed audit, write what
/// exists to <run>/quarantine and rethrow as StageError.
inline RunResult run_attack(const AttackConfig& config) {
    DatasetFormat fmt;
    if (!config.descriptor.empty()) fmt = detail::stage("load", [&] { return read_descriptor_file(config.descriptor); });
    else fmt.name = std::filesystem::path(config.dataset).stem().string();
    const auto graph = detail::stage("load", [&] { return load_edge_stream(config.dataset, fmt); });
    const auto split = detail::stage("split", [&] {
        return chronological_split(graph, {config.train_ratio, config.val_ratio, config.test_ratio});
    });

    RunResult result;
    result.directory = run_directory(config, fmt.name);
    try {
        poison_train(split.train, config, result.outcome);
    } catch (const StageError& e) {
        detail::write_outputs(result.directory / "quarantine", config, &split, result.outcome, e.what());
        throw;
    }
    if (!result.outcome.audit->passed()) {
        detail::write_outputs(result.directory / "quarantine", config, &split, result.outcome,
                              "audit failed\n" + result.outcome.audit->to_text());
        throw StageError("audit", "constraint audit failed", exit_code::audit_failed);
    }
    detail::stage("write", [&] {
        detail::write_outputs(result.directory, config, &split, result.outcome, "");
    });
    return result;
}

/// Baseline runs share run_attack's layout; `strategy` may be a bare
/// heuristic name, which is prefixed with the mode.
inline RunResult run_baseline(AttackConfig config, BaselineMode mode) {
    if (!parse_baseline(config.strategy)) {
        if (!heuristic_from_string(config.strategy))
            throw StageError("config", "unknown baseline '" + config.strategy + "'", exit_code::input);
        config.strategy = std::string(to_string(mode)) + "-" + config.strategy;
    }
    return run_attack(config);
}

struct BenchmarkRow {
    std::size_t edges = 0;
    double tpr_seconds = 0.0;
    double sparsify_seconds = 0.0;
    double selector_seconds = 0.0;
};

struct BenchmarkReport {
    std::vector<BenchmarkRow> rows;
    double tpr_slope = 0.0;
    double selector_slope = 0.0;
};

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InputError("slope needs at least two points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(std::max(y[i], 1e-12));
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(std::max(y[i], 1e-12)) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) throw InputError("slope needs at least two distinct sizes");
    return sxy / sxx;
}

/// Times TPR, removal selection and the Timestamp Selector on each stream,
/// keeping the fastest of `repeats` runs per stage.
inline BenchmarkReport benchmark(const std::vector<TemporalGraph>& streams, const AttackConfig& config,
                                 std::size_t repeats = 3) {
    if (streams.empty()) throw InputError("nothing to benchmark");
    if (streams.size() < 2) throw InputError("benchmark needs at least two input sizes");
    validate_config(config);
    const auto strategy = detail::resolve_strategy(config);
    const auto opt = config.sparsify_options();
    using clock = std::chrono::steady_clock;
    const auto seconds = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };
    BenchmarkReport rep;
    for (const auto& g : streams) {
        BenchmarkRow row;
        row.edges = g.edge_count();
        row.tpr_seconds = row.sparsify_seconds = row.selector_seconds = 1e300;
        for (std::size_t r = 0; r < std::max<std::size_t>(repeats, 1); ++r) {
            auto t0 = clock::now();
            const auto tl = compute_tpr_stream(g, opt.tpr);
            auto t1 = clock::now();
            const auto removal = select_removals(g, strategy, config.p, config.knowledge, opt);
            auto t2 = clock::now();
            const auto insertion = timestamp_selector(g, removal, config.sampler());
            auto t3 = clock::now();
            row.tpr_seconds = std::min(row.tpr_seconds, seconds(t0, t1));
            row.sparsify_seconds = std::min(row.sparsify_seconds, seconds(t1, t2));
            row.selector_seconds = std::min(row.selector_seconds, seconds(t2, t3));
            (void)tl;
            (void)insertion;
        }
        rep.rows.push_back(row);
    }
    std::vector<double> e, tpr, sel;
    for (const auto& r : rep.rows) {
        e.push_back(static_cast<double>(r.edges));
        tpr.push_back(r.tpr_seconds);
        sel.push_back(r.selector_seconds);
    }
    rep.tpr_slope = loglog_slope(e, tpr);
    rep.selector_slope = loglog_slope(e, sel);
    return rep;
}

} // namespace tgp
