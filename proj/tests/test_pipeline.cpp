#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"

using namespace tgp;
namespace fs = std::filesystem;

namespace {

TemporalGraph sparse_200() {
    SyntheticSpec spec;
    spec.nodes = 100;
    spec.edges = 200;
    spec.duration = 200;
    spec.skew = 0.0;
    return synthetic_stream(spec);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("tgp_test_" + name);
    fs::remove_all(dir);
    return dir;
}

AttackConfig sample_config(const fs::path& out) {
    const std::string dir = TGP_SAMPLE_DIR;
    AttackConfig c = load_config(dir + "/attack.json");
    c.dataset = dir + "/interactions.csv";
    c.descriptor = dir + "/interactions.ini";
    c.output_dir = out.string();
    return c;
}

} // namespace

TEST(Pipeline, ZeroRateIsNoOp) {
    const auto g = sparse_200();
    AttackConfig c;
    c.p = 0.0;
    const auto run = poison_train(g, c);
    EXPECT_EQ(serialize_edge_stream(*run.poisoned), serialize_edge_stream(g));
    EXPECT_TRUE(run.audit->passed());
}

TEST(Pipeline, DegreeOnSparseStream) {
    const auto g = sparse_200();
    AttackConfig c;
    c.strategy = "Degree";
    c.window = 50.0;
    const auto run = poison_train(g, c);
    EXPECT_EQ(run.removal->removed.size(), 60u);
    EXPECT_EQ(run.insertion->inserted.size(), 60u);
    EXPECT_EQ(run.manifest.removals.size(), 60u);
    EXPECT_EQ(run.manifest.insertions.size(), 60u);
    EXPECT_TRUE(run.audit->passed()) << run.audit->to_text();
    EXPECT_EQ(run.manifest.meta["budget"], 60);
}

TEST(Pipeline, SameSeedSameManifest) {
    const auto g = sparse_200();
    AttackConfig c;
    c.strategy = "TPR-KL";
    c.window = 50.0;
    c.seed = 3;
    EXPECT_EQ(serialize_manifest(poison_train(g, c).manifest), serialize_manifest(poison_train(g, c).manifest));
}

TEST(Pipeline, BaselinesRunThroughPoison) {
    const auto g = sparse_200();
    AttackConfig c;
    c.strategy = "ADD-Degree";
    auto run = poison_train(g, c);
    EXPECT_EQ(run.mode, AuditMode::Add);
    EXPECT_EQ(run.poisoned->edge_count(), 260u);
    EXPECT_TRUE(run.audit->passed()) << run.audit->to_text();
    c.strategy = "REM-PageRank";
    run = poison_train(g, c);
    EXPECT_EQ(run.mode, AuditMode::Rem);
    EXPECT_EQ(run.poisoned->edge_count(), 140u);
    EXPECT_TRUE(run.audit->passed());
}

TEST(Pipeline, StageAttribution) {
    const auto g = sparse_200();
    AttackConfig c;
    c.strategy = "Katz";
    try {
        poison_train(g, c);
        FAIL();
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "config");
        EXPECT_EQ(e.exit_code(), exit_code::input);
    }
    c.strategy = "Degree";
    c.knowledge = 0.1;
    AttackOutcome out;
    try {
        poison_train(g, c, out);
        FAIL();
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "sparsify");
    }
    ASSERT_TRUE(out.removal);
    EXPECT_EQ(out.removal->removed.size(), 20u);

    // Two nodes, one pair: sampling must starve.
    const auto pair = fixtures::make_stream({{0, 1, 1.0}, {0, 1, 2.0}, {0, 1, 3.0}});
    c = {};
    c.strategy = "Degree";
    c.p = 0.7;
    try {
        poison_train(pair, c);
        FAIL();
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "sample");
        EXPECT_EQ(e.exit_code(), exit_code::infeasible);
    }
}

TEST(Config, BareAndAnnotatedValues) {
    const auto j = nlohmann::json::parse(R"({"p": 0.2, "window": {"value": 60, "paper_specified": false},
                                             "knowledge": {"value": 0.5, "paper_specified": false},
                                             "strategy": "TER"})");
    const auto c = config_from_json(j);
    EXPECT_EQ(c.p, 0.2);
    EXPECT_EQ(c.window, 60.0);
    EXPECT_EQ(c.strategy, "TER");
    const auto lock = config_lock(c);
    EXPECT_TRUE(lock["parameters"]["p"]["paper_specified"].get<bool>());
    EXPECT_FALSE(lock["parameters"]["knowledge"]["paper_specified"].get<bool>());
    EXPECT_FALSE(lock["parameters"]["alpha"]["paper_specified"].get<bool>());
    EXPECT_EQ(lock["parameters"]["window"]["value"], 60.0);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"p": "lots"})")), InputError);
    EXPECT_THROW(config_from_json(nlohmann::json::array()), InputError);
    EXPECT_THROW(load_config("/nonexistent.json"), InputError);
}

TEST(Config, Validation) {
    AttackConfig c;
    c.p = 1.5;
    EXPECT_THROW(validate_config(c), InputError);
    c = {};
    c.budget_basis = "everything";
    EXPECT_THROW(validate_config(c), InputError);
    c = {};
    c.beta = 2.0;
    EXPECT_THROW(validate_config(c), InputError);
}

TEST(Catalog, Entries) {
    const auto entries = catalog();
    EXPECT_EQ(entries.size(), 26u);
    EXPECT_EQ(entries.front().name, "Degree");
    EXPECT_EQ(entries.back().name, "REM-Random");
    const auto b = parse_baseline("ADD-Preference");
    ASSERT_TRUE(b);
    EXPECT_EQ(b->mode, BaselineMode::Add);
    EXPECT_EQ(b->heuristic, Heuristic::Preference);
    EXPECT_FALSE(parse_baseline("ADD-TER"));
    EXPECT_FALSE(parse_baseline("Degree"));
}

TEST(RunDirectory, Layout) {
    AttackConfig c;
    c.strategy = "TER";
    c.p = 0.3;
    EXPECT_EQ(run_directory(c, "wiki"), fs::path("out/wiki/TER/p0.3"));
    c.knowledge = 0.4;
    EXPECT_EQ(run_directory(c, "wiki"), fs::path("out/wiki/TER/p0.3_k0.4"));
}

TEST(RunAttack, WritesRunDirectory) {
    const auto out = scratch("run");
    const auto c = sample_config(out);
    const auto run = run_attack(c);
    EXPECT_EQ(run.directory, out / "sample" / "TPR-Cosine" / "p0.3");
    for (const char* f : {"config.lock", "train_poisoned.csv", "val.csv", "test.csv", "manifest.jsonl", "audit.json"})
        EXPECT_TRUE(fs::exists(run.directory / f)) << f;
    EXPECT_FALSE(fs::exists(run.directory / "quarantine"));

    DatasetFormat fmt = read_descriptor_file(c.descriptor);
    const auto full = load_edge_stream(c.dataset, fmt);
    const auto split = chronological_split(full);
    const auto poisoned = load_edge_stream((run.directory / "train_poisoned.csv").string(), fmt);
    EXPECT_EQ(poisoned.edge_count(), split.train.edge_count());
    const auto manifest = load_manifest((run.directory / "manifest.jsonl").string());
    EXPECT_EQ(manifest.removals.size(), compute_budget(split.train.edge_count(), 0.3));
    const auto rep = audit(split.train, poisoned, &manifest, c.thresholds(AuditMode::Full));
    EXPECT_TRUE(rep.passed()) << rep.to_text();
    EXPECT_EQ(slurp(run.directory / "test.csv"), serialize_edge_stream(split.test));

    // A second run with the same seed rewrites identical files.
    const auto first = slurp(run.directory / "manifest.jsonl");
    run_attack(c);
    EXPECT_EQ(slurp(run.directory / "manifest.jsonl"), first);
    fs::remove_all(out);
}

TEST(RunAttack, FailuresGoToQuarantine) {
    const auto out = scratch("quarantine");
    auto c = sample_config(out);
    c.knowledge = 0.2;
    c.p = 0.5;
    try {
        run_attack(c);
        FAIL();
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "sparsify");
    }
    const auto q = run_directory(c, "sample") / "quarantine";
    EXPECT_TRUE(fs::exists(q / "error.txt"));
    EXPECT_TRUE(fs::exists(q / "manifest.jsonl"));
    EXPECT_FALSE(fs::exists(q / "train_poisoned.csv"));

    c = sample_config(out);
    c.dataset = (out / "missing.csv").string();
    try {
        run_attack(c);
        FAIL();
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "load");
        EXPECT_EQ(e.exit_code(), exit_code::input);
    }
    fs::remove_all(out);
}

TEST(RunBaseline, PrefixesMode) {
    const auto out = scratch("baseline");
    auto c = sample_config(out);
    c.strategy = "Degree";
    const auto run = run_baseline(c, BaselineMode::Rem);
    EXPECT_EQ(run.directory.parent_path().filename(), "REM-Degree");
    EXPECT_EQ(run.outcome.mode, AuditMode::Rem);
    c.strategy = "Katz";
    EXPECT_THROW(run_baseline(c, BaselineMode::Add), StageError);
    fs::remove_all(out);
}

TEST(Benchmark, InputValidation) {
    AttackConfig c;
    EXPECT_THROW(benchmark({}, c), InputError);
    EXPECT_THROW(benchmark({sparse_200()}, c), InputError);
    EXPECT_NEAR(loglog_slope({1, 2, 4}, {3, 6, 12}), 1.0, 1e-12);
    EXPECT_NEAR(loglog_slope({1, 2, 4}, {5, 5, 5}), 0.0, 1e-12);
    EXPECT_THROW(loglog_slope({2, 2}, {1, 3}), InputError);
}

TEST(Benchmark, ReportsRows) {
    SyntheticSpec spec;
    spec.nodes = 200;
    spec.edges = 1000;
    spec.duration = 250;
    const auto base = synthetic_stream(spec);
    AttackConfig c;
    c.strategy = "Random";
    c.window = 20.0;
    const auto rep = benchmark({base, replicate_in_time(base, 2)}, c, 1);
    ASSERT_EQ(rep.rows.size(), 2u);
    EXPECT_EQ(rep.rows[1].edges, 2000u);
    EXPECT_GT(rep.rows[0].tpr_seconds, 0.0);
}

TEST(Synthetic, ShapeAndReplication) {
    auto spec = fixtures::standard_spec(true);
    const auto g = synthetic_stream(spec);
    EXPECT_EQ(g.edge_count(), 10000u);
    EXPECT_TRUE(g.bipartite());
    for (const auto& e : g.edges()) {
        EXPECT_LT(g.nodes().original(e.source), 500);
        EXPECT_GE(g.nodes().original(e.target), 500);
    }
    const auto twice = replicate_in_time(g, 2);
    EXPECT_EQ(twice.edge_count(), 20000u);
    EXPECT_EQ(twice.node_space(), g.node_space());
    EXPECT_GT(twice.timestamps()[10000], g.timestamps().back());
    EXPECT_THROW(replicate_in_time(g, 0), InputError);
}
