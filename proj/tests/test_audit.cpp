#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles/rank_reference.hpp"

using namespace tgp;
using fixtures::make_stream;

namespace {

std::vector<bool> only(std::size_t failing) {
    std::vector<bool> f(6, true);
    f[failing] = false;
    return f;
}

} // namespace

TEST(Audit, IdentityPasses) {
    const auto g = fixtures::ring_stream();
    const Manifest empty;
    const auto rep = audit(g, g, &empty, {});
    EXPECT_TRUE(rep.passed());
    EXPECT_EQ(rep.c1.budget, 0u);
    EXPECT_EQ(rep.c1.removed, 0u);
    EXPECT_EQ(rep.c1.inserted, 0u);
    EXPECT_EQ(rep.c3.violations, 0u);
    EXPECT_EQ(rep.c4.max_in_delta, 0u);
    EXPECT_EQ(rep.c4.histogram_tv, 0.0);
    EXPECT_FALSE(rep.c2.checked);
}

TEST(Audit, InactiveEndpointsCountOnce) {
    const auto g = make_stream({{0, 1, 1.0}, {2, 3, 100.0}, {0, 1, 200.0}});
    const auto poisoned = make_stream({{0, 1, 1.0}, {2, 3, 100.0}, {0, 1, 200.0}, {0, 3, 150.0}});
    AuditThresholds th;
    th.window = 10.0;
    th.budget = 0;
    th.capacity = 5;
    const auto rep = audit(g, poisoned, nullptr, th);
    EXPECT_EQ(rep.c3.violations, 1u);
    EXPECT_EQ(rep.c3.total, 1u);
    EXPECT_FALSE(rep.c3.pass);
    EXPECT_FALSE(rep.c1.pass);
    EXPECT_TRUE(rep.novelty.pass);
}

TEST(Audit, UnknownNodesViolateActivity) {
    const auto g = make_stream({{0, 1, 1.0}});
    const auto poisoned = make_stream({{0, 1, 1.0}, {0, 9, 1.0}});
    AuditThresholds th;
    th.mode = AuditMode::Add;
    const auto add = audit(g, poisoned, nullptr, th);
    EXPECT_TRUE(add.passed());
    EXPECT_FALSE(add.c3.checked);
    th.mode = AuditMode::Full;
    EXPECT_EQ(audit(g, poisoned, nullptr, th).c3.violations, 1u);
}

TEST(Audit, NoveltyBothDirectionsAndRepeats) {
    const auto g = make_stream({{0, 1, 1.0}, {2, 3, 1.0}});
    const auto poisoned = make_stream({{0, 1, 1.0}, {2, 3, 1.0}, {1, 0, 2.0}, {0, 2, 2.0}, {2, 0, 3.0}});
    AuditThresholds th;
    th.mode = AuditMode::Add;
    const auto rep = audit(g, poisoned, nullptr, th);
    EXPECT_EQ(rep.novelty.violations, 2u);
    // An insertion before the pair's first interaction is still novel.
    const auto later = make_stream({{0, 1, 5.0}});
    const auto early = make_stream({{0, 1, 5.0}, {1, 0, 2.0}});
    EXPECT_TRUE(audit(later, early, nullptr, th).novelty.pass);
}

TEST(Audit, KsMatchesBruteForceAndMinSamples) {
    const auto g = make_stream({{0, 1, 0.0}, {1, 2, 10.0}, {2, 3, 20.0}, {3, 0, 30.0}});
    const auto poisoned = make_stream({{0, 1, 0.0}, {1, 2, 10.0}, {2, 3, 20.0}, {3, 0, 30.0}, {0, 2, 29.0}});
    AuditThresholds th;
    th.mode = AuditMode::Add;
    const auto rep = audit(g, poisoned, nullptr, th);
    EXPECT_TRUE(rep.c2.checked);
    EXPECT_FALSE(rep.c2.enforced);
    EXPECT_TRUE(rep.c2.pass);
    EXPECT_NEAR(rep.c2.ks, oracle::brute_force_ks({29.0}, {0, 10, 20, 30}), 1e-15);
    th.ks_min_samples = 1;
    EXPECT_FALSE(audit(g, poisoned, nullptr, th).c2.pass);
}

TEST(Audit, RemModeRejectsInsertions) {
    const auto g = make_stream({{0, 1, 1.0}, {1, 2, 2.0}});
    const auto removed = make_stream({{1, 2, 2.0}});
    AuditThresholds th;
    th.mode = AuditMode::Rem;
    th.budget = 1;
    EXPECT_TRUE(audit(g, removed, nullptr, th).passed());
    const auto swapped = make_stream({{1, 2, 2.0}, {0, 2, 1.5}});
    EXPECT_FALSE(audit(g, swapped, nullptr, th).c1.pass);
}

TEST(Audit, ManifestMismatchIsReported) {
    const auto ring = fixtures::ring_stream();
    const auto plans = fixtures::ring_swap_plan(ring);
    auto run = fixtures::audit_plans(ring, plans, plans.removal.removed.size(), fixtures::kRingWindow);
    EXPECT_TRUE(run.report.passed());
    EXPECT_TRUE(run.report.manifest.consistent);

    auto wrong = run.manifest;
    wrong.insertions.front().timestamp += 1.0;
    wrong.removals.pop_back();
    AuditThresholds th;
    th.window = fixtures::kRingWindow;
    const auto rep = audit(ring, run.poisoned, &wrong, th);
    EXPECT_FALSE(rep.manifest.consistent);
    EXPECT_EQ(rep.manifest.unmatched_insertions, 2u);
    EXPECT_EQ(rep.manifest.unmatched_removals, 1u);
    EXPECT_FALSE(rep.passed());
    // The numbers come from the streams, not the manifest.
    EXPECT_EQ(rep.c1.removed, plans.removal.removed.size());
}

TEST(Audit, RingFaultsFlipOwnFlag) {
    const auto ring = fixtures::ring_stream();
    const auto clean = fixtures::ring_swap_plan(ring);
    const auto budget = clean.removal.removed.size();
    const auto w = fixtures::kRingWindow;
    EXPECT_EQ(fixtures::flags(fixtures::audit_plans(ring, clean, budget, w).report), std::vector<bool>(6, true));
    EXPECT_EQ(fixtures::flags(fixtures::audit_plans(ring, fixtures::fault_c1(ring, clean), budget, w).report), only(0));
    EXPECT_EQ(fixtures::flags(fixtures::audit_plans(ring, fixtures::fault_c2(clean), budget, w).report), only(1));
    EXPECT_EQ(fixtures::flags(fixtures::audit_plans(ring, fixtures::fault_c3(ring, clean), budget, w).report), only(2));
    EXPECT_EQ(fixtures::flags(fixtures::audit_plans(ring, fixtures::fault_c4(ring, clean), budget, w).report), only(3));
    EXPECT_EQ(fixtures::flags(fixtures::audit_plans(ring, fixtures::fault_novelty(ring, clean), budget, w).report),
              only(4));
}

TEST(Audit, TwentyNodePipelinePasses) {
    SyntheticSpec spec;
    spec.nodes = 20;
    spec.edges = 30;
    spec.duration = 30;
    spec.skew = 0.0;
    const auto g = synthetic_stream(spec);
    AttackConfig c;
    c.strategy = "Degree";
    c.window = 30.0;
    c.seed = 1;
    const auto run = poison_train(g, c);
    const auto rep = audit(g, *run.poisoned, &run.manifest, c.thresholds(AuditMode::Full));
    EXPECT_TRUE(rep.passed()) << rep.to_text();
    EXPECT_EQ(rep.c1.removed, 9u);
    EXPECT_EQ(rep.c1.inserted, 9u);
}

TEST(Audit, BipartiteColumnSwapIsCaught) {
    auto spec = fixtures::standard_spec(true);
    spec.edges = 3000;
    spec.nodes = 400;
    spec.duration = 1000;
    const auto g = synthetic_stream(spec);
    AttackConfig c;
    c.strategy = "Random";
    c.window = 50.0;
    const auto run = poison_train(g, c);
    ASSERT_TRUE(run.audit->passed()) << run.audit->to_text();
    const auto faulty = fixtures::bipartite_fault(g, run, c.window);
    auto th = c.thresholds(AuditMode::Full);
    th.budget = run.removal->budget;
    const auto rep = audit(g, faulty, nullptr, th);
    EXPECT_EQ(fixtures::flags(rep), only(5)) << rep.to_text();
    EXPECT_EQ(rep.bipartite.violations, 1u);
}

TEST(Audit, ReportSerializes) {
    const auto g = make_stream({{0, 1, 1.0}});
    const auto rep = audit(g, g, nullptr, {});
    const auto j = rep.to_json();
    EXPECT_TRUE(j["passed"].get<bool>());
    EXPECT_EQ(j["mode"], "full");
    EXPECT_TRUE(j.contains("c4"));
    EXPECT_NE(rep.to_text().find("C3 activity"), std::string::npos);
    EXPECT_EQ(audit_mode_from_string("rem"), AuditMode::Rem);
    EXPECT_FALSE(audit_mode_from_string("both"));
    AuditThresholds bad;
    bad.window = 0.0;
    EXPECT_THROW(audit(g, g, nullptr, bad), InputError);
}
