// Command-line front end: attack, baseline, audit, benchmark, catalog.

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tgp/tgp.hpp"

namespace {

using namespace tgp;

struct ConfigFlags {
    std::string config_file;
    std::string dataset, descriptor, output_dir, strategy;
    std::map<std::string, std::string> values;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
    cmd->add_option("-c,--config", flags.config_file, "JSON config file; flags override it");
    cmd->add_option("-d,--dataset", flags.dataset, "edge stream CSV");
    cmd->add_option("--descriptor", flags.descriptor, "dataset descriptor (INI)");
    cmd->add_option("-o,--out", flags.output_dir, "output root");
    cmd->add_option("-s,--strategy", flags.strategy, "strategy or baseline name");
    AttackConfig defaults;
    visit_parameters(defaults, [&](const char* name, const auto& field, bool) {
        std::ostringstream help;
        help << "default " << nlohmann::json(field).dump();
        cmd->add_option(std::string("--") + name, flags.values[name], help.str());
    });
}

AttackConfig build_config(const ConfigFlags& flags) {
    AttackConfig c;
    if (!flags.config_file.empty()) c = load_config(flags.config_file, c);
    if (!flags.dataset.empty()) c.dataset = flags.dataset;
    if (!flags.descriptor.empty()) c.descriptor = flags.descriptor;
    if (!flags.output_dir.empty()) c.output_dir = flags.output_dir;
    if (!flags.strategy.empty()) c.strategy = flags.strategy;
    nlohmann::json overrides = nlohmann::json::object();
    for (const auto& [name, text] : flags.values) {
        if (text.empty()) continue;
        auto parsed = nlohmann::json::parse(text, nullptr, false);
        overrides[name] = parsed.is_discarded() ? nlohmann::json(text) : parsed;
    }
    c = config_from_json(overrides, c);
    if (c.dataset.empty()) throw InputError("no dataset given (--dataset or config file)");
    return c;
}

int report_run(const RunResult& run) {
    std::cout << "wrote " << run.directory.string() << '\n';
    const auto& o = run.outcome;
    std::cout << "removed " << (o.removal ? o.removal->removed.size() : 0) << ", inserted "
              << (o.insertion ? o.insertion->inserted.size() : 0) << '\n';
    if (o.audit) std::cout << o.audit->to_text();
    return exit_code::ok;
}

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const StageError& e) {
        std::cerr << "error [" << e.stage() << "]: " << e.what() << '\n';
        return e.exit_code();
    } catch (const InfeasibleSampling& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code::infeasible;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code::input;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code::input;
    }
}

struct AuditFlags {
    std::string original, dataset, poisoned, descriptor, manifest, json_out, mode = "full";
    double window = 1800.0, ks_threshold = 0.1, train_ratio = 0.7, val_ratio = 0.15;
    std::size_t capacity = 1, ks_min_samples = 100;
    long long budget = -1;
};

int run_audit(const AuditFlags& f) {
    DatasetFormat fmt;
    if (!f.descriptor.empty()) fmt = read_descriptor_file(f.descriptor);
    TemporalGraph original;
    if (!f.original.empty()) {
        original = load_edge_stream(f.original, fmt);
    } else if (!f.dataset.empty()) {
        original = chronological_split(load_edge_stream(f.dataset, fmt),
                                       {f.train_ratio, f.val_ratio, 1.0 - f.train_ratio - f.val_ratio})
                       .train;
    } else {
        throw InputError("audit needs --original (clean training stream) or --dataset");
    }
    const auto poisoned = load_edge_stream(f.poisoned, fmt);
    std::optional<Manifest> manifest;
    if (!f.manifest.empty()) manifest = load_manifest(f.manifest);

    AuditThresholds th;
    const auto mode = audit_mode_from_string(f.mode);
    if (!mode) throw InputError("--mode must be full, add or rem");
    th.mode = *mode;
    th.window = f.window;
    th.capacity = f.capacity;
    th.ks_threshold = f.ks_threshold;
    th.ks_min_samples = f.ks_min_samples;
    if (f.budget >= 0) th.budget = static_cast<std::size_t>(f.budget);
    const auto rep = audit(original, poisoned, manifest ? &*manifest : nullptr, th);
    std::cout << rep.to_text();
    if (!f.json_out.empty()) {
        std::ofstream out(f.json_out);
        if (!out) throw InputError("cannot write " + f.json_out);
        out << rep.to_json().dump(2) << '\n';
    }
    return rep.passed() ? exit_code::ok : exit_code::audit_failed;
}

struct BenchFlags {
    std::vector<std::size_t> sizes;
    std::vector<std::string> datasets;
    ConfigFlags config;
    std::size_t repeats = 3;
};

int run_benchmark(BenchFlags& f) {
    AttackConfig c;
    if (!f.config.config_file.empty()) c = load_config(f.config.config_file, c);
    if (!f.config.strategy.empty()) c.strategy = f.config.strategy;
    nlohmann::json overrides = nlohmann::json::object();
    for (const auto& [name, text] : f.config.values) {
        if (text.empty()) continue;
        auto parsed = nlohmann::json::parse(text, nullptr, false);
        overrides[name] = parsed.is_discarded() ? nlohmann::json(text) : parsed;
    }
    c = config_from_json(overrides, c);

    std::vector<TemporalGraph> streams;
    if (!f.datasets.empty()) {
        DatasetFormat fmt;
        if (!f.config.descriptor.empty()) fmt = read_descriptor_file(f.config.descriptor);
        for (const auto& path : f.datasets) streams.push_back(load_edge_stream(path, fmt));
    } else if (!f.sizes.empty()) {
        // Replicated copies of one base stream keep the node set and density fixed.
        const auto base_edges = *std::min_element(f.sizes.begin(), f.sizes.end());
        SyntheticSpec spec;
        spec.edges = base_edges;
        spec.duration = static_cast<double>(base_edges) / 4.0;
        spec.seed = c.seed + 1;
        const auto base = synthetic_stream(spec);
        for (auto n : f.sizes) {
            if (n % base_edges != 0) throw InputError("benchmark sizes must be multiples of the smallest size");
            streams.push_back(replicate_in_time(base, n / base_edges));
        }
    }
    const auto rep = benchmark(streams, c, f.repeats);
    std::cout << std::left << std::setw(10) << "edges" << std::setw(14) << "tpr_s" << std::setw(14) << "sparsify_s"
              << "selector_s\n";
    for (const auto& r : rep.rows)
        std::cout << std::setw(10) << r.edges << std::setw(14) << r.tpr_seconds << std::setw(14)
                  << r.sparsify_seconds << r.selector_seconds << '\n';
    std::cout << "tpr slope " << rep.tpr_slope << "\nselector slope " << rep.selector_slope << '\n';
    return exit_code::ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Perturbation toolkit for continuous-time dynamic graphs"};
    app.require_subcommand(1);

    ConfigFlags attack_flags;
    auto* attack_cmd = app.add_subcommand("attack", "sparsify the training stream and insert adversarial negatives");
    add_config_flags(attack_cmd, attack_flags);

    ConfigFlags base_flags;
    std::string base_mode;
    auto* base_cmd = app.add_subcommand("baseline", "run an ADD or REM heuristic baseline");
    add_config_flags(base_cmd, base_flags);
    base_cmd->add_option("-m,--mode", base_mode, "add or rem")->required()->check(CLI::IsMember({"add", "rem"}));

    AuditFlags audit_flags;
    auto* audit_cmd = app.add_subcommand("audit", "check C1-C4, novelty and partitions on a poisoned stream");
    audit_cmd->add_option("--original", audit_flags.original, "clean training stream CSV");
    audit_cmd->add_option("-d,--dataset", audit_flags.dataset, "full dataset CSV; its training split is used");
    audit_cmd->add_option("-p,--poisoned", audit_flags.poisoned, "poisoned training stream CSV")->required();
    audit_cmd->add_option("--descriptor", audit_flags.descriptor, "dataset descriptor (INI)");
    audit_cmd->add_option("-m,--manifest", audit_flags.manifest, "manifest.jsonl to cross-check");
    audit_cmd->add_option("--mode", audit_flags.mode, "full, add or rem");
    audit_cmd->add_option("--window", audit_flags.window, "activity window W");
    audit_cmd->add_option("--capacity", audit_flags.capacity, "per-node degree capacity C");
    audit_cmd->add_option("--ks_threshold", audit_flags.ks_threshold, "C2 KS threshold");
    audit_cmd->add_option("--ks_min_samples", audit_flags.ks_min_samples, "insertions needed to enforce C2");
    audit_cmd->add_option("--budget", audit_flags.budget, "expected Delta (default: from the manifest)");
    audit_cmd->add_option("--train_ratio", audit_flags.train_ratio, "split ratio used with --dataset");
    audit_cmd->add_option("--val_ratio", audit_flags.val_ratio, "split ratio used with --dataset");
    audit_cmd->add_option("--json", audit_flags.json_out, "write the report as JSON");

    BenchFlags bench_flags;
    auto* bench_cmd = app.add_subcommand("benchmark", "time TPR, sparsification and the Timestamp Selector");
    bench_cmd->add_option("--sizes", bench_flags.sizes, "synthetic edge counts (multiples of the smallest)")
        ->delimiter(',');
    bench_cmd->add_option("--inputs", bench_flags.datasets, "edge stream CSVs instead of synthetic sizes");
    bench_cmd->add_option("--repeats", bench_flags.repeats, "keep the fastest of this many runs");
    add_config_flags(bench_cmd, bench_flags.config);
    bench_cmd->remove_option(bench_cmd->get_option("--dataset"));

    bool catalog_json = false;
    auto* catalog_cmd = app.add_subcommand("catalog", "list strategies and baselines");
    catalog_cmd->add_flag("--json", catalog_json, "print as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_code::input;
    }

    if (*attack_cmd) return run_guarded([&] { return report_run(run_attack(build_config(attack_flags))); });
    if (*base_cmd)
        return run_guarded([&] {
            return report_run(run_baseline(build_config(base_flags), base_mode == "add" ? BaselineMode::Add : BaselineMode::Rem));
        });
    if (*audit_cmd) return run_guarded([&] { return run_audit(audit_flags); });
    if (*bench_cmd) return run_guarded([&] { return run_benchmark(bench_flags); });
    if (*catalog_cmd) {
        const auto entries = catalog();
        if (catalog_json) {
            auto j = nlohmann::ordered_json::array();
            for (const auto& e : entries) j.push_back({{"name", e.name}, {"family", e.family}});
            std::cout << j.dump(2) << '\n';
        } else {
            for (const auto& e : entries) std::cout << std::left << std::setw(18) << e.name << e.family << '\n';
        }
        return exit_code::ok;
    }
    return exit_code::input;
}
