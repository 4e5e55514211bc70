#include <gtest/gtest.h>

#include "support.hpp"

using namespace cabee;

namespace {

// One matching-pennies game; one class is both the finest and the coarsest partition.
Environment single_game() {
    auto env = Environment::make(1, 2, 2);
    env.u(0, 0, 0, 0) = 1;
    env.u(0, 1, 1, 0) = 1;
    env.u(1, 1, 0, 0) = 1;
    env.u(1, 0, 1, 0) = 1;
    return env;
}

}  // namespace

TEST(CabeeVerify, MatchingPenniesTwoClassRowFails) {
    auto env = build_matching_pennies({});
    for (auto lab : {std::vector<int>{0, 0, 1}, std::vector<int>{0, 1, 0}, std::vector<int>{0, 1, 1}}) {
        std::array<Partition, 2> parts{Partition(lab, 2), Partition::finest(3)};
        for (const auto& prof : abee_solve(env, parts).profiles)
            for (Mode m : {Mode::Local, Mode::Global}) {
                auto chk = cabee_verify(env, {degenerate_lambda(parts), prof, m, Divergence::l2()});
                EXPECT_FALSE(chk);
                EXPECT_FALSE(chk.witness.empty());
            }
    }
}

TEST(CabeeVerify, SingleGameNash) {
    auto env = single_game();
    std::array<Partition, 2> parts{Partition::coarsest(1), Partition::coarsest(1)};
    auto res = abee_solve(env, parts);
    ASSERT_EQ(res.profiles.size(), 1u);
    for (Mode m : {Mode::Local, Mode::Global})
        EXPECT_TRUE(cabee_verify(env, {degenerate_lambda(parts), res.profiles[0], m, Divergence::l2()}));
}

TEST(CabeeVerify, RejectsNonDegenerateLambda) {
    auto env = build_matching_pennies({});
    auto cand = solve_matching_pennies_cdabee({});
    EXPECT_FALSE(cabee_verify(env, cand));
}

TEST(CdAbeeVerify, MonitoringCandidates) {
    MonitoringSpec s;
    auto env = build_monitoring(s);
    EXPECT_TRUE(cd_abee_verify(env, monitoring_candidate(s, 0.5, Mode::Global, Divergence::l2())));
    s.nu = 0.45;
    env = build_monitoring(s);
    EXPECT_FALSE(cd_abee_verify(env, monitoring_candidate(s, 0.9, Mode::Local, Divergence::l2())));
    EXPECT_TRUE(cd_abee_verify(env, monitoring_candidate(s, 0.9, Mode::Local, Divergence::kl())));
    EXPECT_TRUE(cd_abee_verify(env, monitoring_candidate(s, 0.5, Mode::Local, Divergence::l2())));
}

TEST(CdAbeeVerify, ThreeGameCandidateAndPerturbation) {
    auto env = build_matching_pennies({});
    auto cand = solve_matching_pennies_cdabee({});
    EXPECT_TRUE(cd_abee_verify(env, cand));
    auto bad = cand;
    bad.lambda[0].weights = {0.6, 0.4};
    EXPECT_FALSE(cd_abee_verify(env, bad));
}

TEST(GrandMap, EquilibriumIsItsOwnSuccessor) {
    auto env = build_matching_pennies({});
    auto cand = solve_matching_pennies_cdabee({});
    EXPECT_TRUE(grand_map_contains(grand_map(env, cand, kMatchingPenniesCapacity), cand));
    MonitoringSpec s;
    auto menv = build_monitoring(s);
    auto mc = monitoring_candidate(s, 0.5, Mode::Global, Divergence::l2());
    EXPECT_TRUE(grand_map_contains(grand_map(menv, mc, kMonitoringCapacity), mc));
}

TEST(GrandMap, MonitoringReassignsTypeC) {
    MonitoringSpec s;
    auto env = build_monitoring(s);
    std::array<Partition, 2> parts{monitoring_ac_b(), Partition::finest(3)};
    auto res = abee_solve(env, parts);
    ASSERT_FALSE(res.profiles.empty());
    for (const auto& prof : res.profiles) {
        EquilibriumCandidate st{degenerate_lambda(parts), prof, Mode::Global, Divergence::l2()};
        auto img = grand_map(env, st, kMonitoringCapacity);
        const auto& succ = img.partitions[0];
        EXPECT_EQ(std::find(succ.begin(), succ.end(), monitoring_ac_b()), succ.end());
        EXPECT_NE(std::find(succ.begin(), succ.end(), monitoring_bc_a()), succ.end());
        EXPECT_FALSE(grand_map_contains(img, st));
    }
}

TEST(GrandMap, DominantEnvironmentIsConstant) {
    auto env = Environment::make(3, 2, 2);
    for (std::size_t g = 0; g < 3; ++g) {
        env.u(0, 0, 0, g) = env.u(0, 0, 1, g) = 1;  // U dominant
        env.u(1, 1, 0, g) = env.u(1, 1, 1, g) = 1;  // R dominant
    }
    gen::Gen gen(1);
    std::optional<GrandMapImage> first;
    for (int trial = 0; trial < 5; ++trial) {
        std::array<Partition, 2> parts{enumerate_partitions(3, 2)[std::size_t(gen.integer(0, 3))], Partition::finest(3)};
        StrategyProfile prof;
        for (int p = 0; p < 2; ++p) {
            prof.player[p].support = {parts[std::size_t(p)]};
            prof.player[p].play = {gen.data(3, 2)};
        }
        EquilibriumCandidate st{degenerate_lambda(parts), prof, Mode::Global, Divergence::l2()};
        auto once = grand_map(env, st, {2, 3});
        // one application later the data are the dominant profile regardless of the start
        EquilibriumCandidate next;
        for (int p = 0; p < 2; ++p) {
            next.lambda[p] = PartitionDistribution::degenerate(once.partitions[p][0]);
            next.profile.player[p].support = {once.partitions[p][0]};
            std::vector<Mixed> play;
            for (const auto& brs : once.best_replies[p][0]) play.push_back(pure(2, brs.front()));
            next.profile.player[p].play = {play};
        }
        auto twice = grand_map(env, next, {2, 3});
        if (!first) first = twice;
        EXPECT_EQ(twice.aggregate, first->aggregate);
        EXPECT_EQ(twice.partitions, first->partitions);
        EXPECT_EQ(twice.best_replies, first->best_replies);
    }
}

TEST(Search, ThreeGameExhaustiveFirstLayer) {
    auto env = build_matching_pennies({});
    SearchOptions so;
    so.distributional = false;
    auto rep = cd_abee_search(env, kMatchingPenniesCapacity, Mode::Global, Divergence::l2(), so);
    EXPECT_TRUE(rep.layer1_complete);
    EXPECT_TRUE(rep.candidates.empty());
    EXPECT_EQ(rep.verdict, SearchVerdict::ExhaustivelyRefuted);
}

TEST(Search, MonitoringUniqueGlobalCandidate) {
    MonitoringSpec s;
    auto env = build_monitoring(s);
    SearchOptions so;
    so.max_support = 2;
    auto rep = cd_abee_search(env, kMonitoringCapacity, Mode::Global, Divergence::l2(), so);
    ASSERT_EQ(rep.candidates.size(), 1u);
    EXPECT_LT(detail::candidate_distance(rep.candidates[0], monitoring_candidate(s, 0.5, Mode::Global, Divergence::l2())),
              1e-9);
    // every returned candidate verifies as returned, is a grand-map fixed point,
    // and, being global, passes the local test too
    for (const auto& c : rep.candidates) {
        EXPECT_TRUE(cd_abee_verify(env, c));
        EXPECT_TRUE(grand_map_contains(grand_map(env, c, kMonitoringCapacity), c));
        auto local = c;
        local.mode = Mode::Local;
        EXPECT_TRUE(cd_abee_verify(env, local));
    }
}

TEST(Property, VerifyIffGrandMapFixedPoint) {
    // Matching pennies and monitoring candidates, plus perturbed copies that must fail both tests.
    MonitoringSpec ms;
    std::vector<std::pair<Environment, EquilibriumCandidate>> cases{
        {build_matching_pennies({}), solve_matching_pennies_cdabee({})},
        {build_monitoring(ms), monitoring_candidate(ms, 0.5, Mode::Global, Divergence::l2())}};
    gen::Gen gen(8);
    for (auto& [env, c] : cases) {
        std::array<int, 2> K{2, 3};
        EXPECT_EQ(bool(cd_abee_verify(env, c)), grand_map_contains(grand_map(env, c, K), c));
        for (int trial = 0; trial < 20; ++trial) {
            auto bad = c;
            auto& play = bad.profile.player[1].play[0][std::size_t(gen.integer(0, 2))];
            double v = gen.unit();
            play = {v, 1 - v};
            EXPECT_EQ(bool(cd_abee_verify(env, bad)), grand_map_contains(grand_map(env, bad, K), bad)) << trial;
        }
    }
}
