#include <gtest/gtest.h>

#include "support.hpp"

using namespace cabee;

namespace {

const Mixed U{1, 0}, D{0, 1};

// Row payoffs favour U in every cell; the column is indifferent.
Environment dominant_env(std::size_t games) {
    auto env = Environment::make(games, 2, 2);
    for (std::size_t g = 0; g < games; ++g) {
        env.u(0, 0, 0, g) = 2;
        env.u(0, 0, 1, g) = 1;
        env.u(1, 0, 0, g) = 1;  // L against U
        env.u(1, 0, 1, g) = 1;  // L against D
    }
    return env;
}

}  // namespace

TEST(ConsistentExpectation, PooledAndSingleton) {
    auto env = Environment::make(2, 2, 2);
    env.prior = {0.5, 0.5};
    std::vector<Mixed> agg{{1, 0}, {0, 1}};
    EXPECT_EQ(consistent_expectation(env, Partition({0, 0}, 1), agg)[0], (Mixed{0.5, 0.5}));
    auto fine = consistent_expectation(env, Partition::finest(2), agg);
    EXPECT_EQ(fine[0], agg[0]);
    EXPECT_EQ(fine[1], agg[1]);
}

TEST(ConsistentExpectation, BundledRowExpectsIndifference) {
    MatchingPenniesSpec s{0.5, 1.0, 1.5};
    auto env = build_matching_pennies(s);
    std::array<Partition, 2> parts{Partition({0, 0, 1}, 2), Partition::finest(3)};
    auto res = abee_solve(env, parts);
    ASSERT_EQ(res.profiles.size(), 1u);
    auto agg = aggregate(res.profiles[0], degenerate_lambda(parts));
    auto beta = consistent_expectation(env, parts[0], agg[1]);
    EXPECT_NEAR(beta[0][0], 1 / (2 + s.a), 1e-12);
}

TEST(BestResponse, MatchingPenniesThreshold) {
    MatchingPenniesSpec s{0.5, 1.0, 1.5};
    auto env = build_matching_pennies(s);
    // game b has x = 1: U iff (1+x) beta > 1 - beta
    auto strict = analogy_best_response(env, 0, 1, {0.4, 0.6});
    EXPECT_EQ(strict.actions, std::vector<std::size_t>{0});
    EXPECT_FALSE(strict.indifferent);
    auto tie = analogy_best_response(env, 0, 1, {1.0 / 3, 2.0 / 3});
    EXPECT_EQ(tie.actions, (std::vector<std::size_t>{0, 1}));
    EXPECT_TRUE(tie.indifferent);
}

TEST(BestResponse, EmployerControlsAboveThreshold) {
    MonitoringSpec s;
    auto env = build_monitoring(s);
    auto br = analogy_best_response(env, 0, 0, {s.nu + 0.05, 0.95 - s.nu});
    EXPECT_EQ(br.actions, std::vector<std::size_t>{0});
    auto below = analogy_best_response(env, 0, 0, {s.nu - 0.05, 1.05 - s.nu});
    EXPECT_EQ(below.actions, std::vector<std::size_t>{1});
}

TEST(Aggregate, DegenerateAndHalfMix) {
    auto cand = solve_matching_pennies_cdabee({});
    auto agg = aggregate(cand.profile, cand.lambda);
    for (std::size_t g = 0; g < 3; ++g) EXPECT_NEAR(agg[0][g][0], 0.5, 1e-15);
    std::array<Partition, 2> parts{Partition({0, 0, 1}, 2), Partition::finest(3)};
    StrategyProfile prof;
    prof.player[0] = {{parts[0]}, {{U, D, U}}};
    prof.player[1] = {{parts[1]}, {{D, D, U}}};
    auto one = aggregate(prof, degenerate_lambda(parts));
    EXPECT_EQ(one[0], prof.player[0].play[0]);
    EXPECT_EQ(one[1], prof.player[1].play[0]);
}

TEST(Aggregate, IdenticalPlayIgnoresLambda) {
    Partition p1({0, 0, 1}, 2), p2({0, 1, 1}, 2);
    StrategyProfile prof;
    prof.player[0] = {{p1, p2}, {{U, D, U}, {U, D, U}}};
    prof.player[1] = {{Partition::finest(3)}, {{D, D, U}}};
    std::array<PartitionDistribution, 2> lam{PartitionDistribution{{p1, p2}, {0.2, 0.8}},
                                             PartitionDistribution::degenerate(Partition::finest(3))};
    EXPECT_EQ(aggregate(prof, lam)[0], (std::vector<Mixed>{U, D, U}));
}

TEST(AbeeSolve, FinestPartitionsGiveNash) {
    auto env = build_matching_pennies({});
    std::array<Partition, 2> parts{Partition::finest(3), Partition::finest(3)};
    auto res = abee_solve(env, parts);
    ASSERT_EQ(res.profiles.size(), 1u);
    for (std::size_t g = 0; g < 3; ++g) {
        auto [row, col] = nash_solve_2x2(env, g);
        EXPECT_NEAR(res.profiles[0].player[0].play[0][g][0], row[0], 1e-12);
        EXPECT_NEAR(res.profiles[0].player[1].play[0][g][0], col[0], 1e-12);
    }
}

TEST(AbeeSolve, BundledRowStructure) {
    MatchingPenniesSpec s{0.5, 1.0, 1.5};
    auto env = build_matching_pennies(s);
    std::array<Partition, 2> parts{Partition({0, 0, 1}, 2), Partition::finest(3)};
    auto res = abee_solve(env, parts);
    ASSERT_EQ(res.profiles.size(), 1u);
    EXPECT_TRUE(res.exhaustive);
    const auto& row = res.profiles[0].player[0].play[0];
    const auto& col = res.profiles[0].player[1].play[0];
    EXPECT_NEAR(col[0][0], 2 / (2 + s.a), 1e-12);
    EXPECT_NEAR(col[1][0], 0.0, 1e-12);
    EXPECT_NEAR(col[2][0], 1 / (2 + s.c), 1e-12);
    EXPECT_GT(row[0][0], 1e-9);
    EXPECT_LT(row[0][0], 1 - 1e-9);
    EXPECT_NEAR(row[1][0], 1.0, 1e-12);
}

TEST(AbeeVerify, NashUnderCoarsePartitionFails) {
    auto env = build_matching_pennies({});
    std::array<Partition, 2> fine{Partition::finest(3), Partition::finest(3)};
    auto nash = abee_solve(env, fine).profiles.at(0);
    std::array<Partition, 2> coarse{Partition::coarsest(3), Partition::finest(3)};
    StrategyProfile prof;
    prof.player[0] = {{coarse[0]}, nash.player[0].play};
    prof.player[1] = {{coarse[1]}, nash.player[1].play};
    auto rep = abee_verify(env, coarse, prof);
    EXPECT_FALSE(rep);
    EXPECT_GT(rep.max_gain, 0.0);
}

TEST(AbeeVerify, DominantProfileUnderAnyPartition) {
    auto env = dominant_env(3);
    for (const auto& p : enumerate_partitions(3, 3)) {
        std::array<Partition, 2> parts{p, Partition::coarsest(3)};
        StrategyProfile prof;
        prof.player[0] = {{p}, {{U, U, U}}};
        prof.player[1] = {{parts[1]}, {{U, U, U}}};
        EXPECT_TRUE(abee_verify(env, parts, prof));
    }
}

TEST(DistAbeeSolve, DegenerateMatchesAbeeSolve) {
    auto env = build_matching_pennies({});
    std::array<Partition, 2> parts{Partition({0, 1, 1}, 2), Partition::finest(3)};
    auto a = abee_solve(env, parts), b = dist_abee_solve(env, degenerate_lambda(parts));
    ASSERT_EQ(a.profiles.size(), b.profiles.size());
    for (std::size_t k = 0; k < a.profiles.size(); ++k)
        EXPECT_LE(profile_distance(a.profiles[k], b.profiles[k]), 1e-12);
}

TEST(DistAbeeSolve, MonitoringMixture) {
    MonitoringSpec s;
    auto env = build_monitoring(s);
    std::array<PartitionDistribution, 2> lam{
        PartitionDistribution{{monitoring_ac_b(), monitoring_bc_a()}, {s.mu, 1 - s.mu}},
        PartitionDistribution::degenerate(Partition::finest(3))};
    auto res = dist_abee_solve(env, lam);
    ASSERT_FALSE(res.profiles.empty());
    for (const auto& prof : res.profiles) {
        EXPECT_TRUE(dist_abee_verify(env, lam, prof));
        for (std::size_t k = 0; k < 2; ++k) {
            const auto& part = prof.player[0].support[k];
            const auto& play = prof.player[0].play[k];
            // C wherever the class contains a, D wherever it contains b
            EXPECT_EQ(play[0], U);
            EXPECT_EQ(play[1], D);
            EXPECT_EQ(play[2], part.label[2] == part.label[0] ? U : D);
        }
        auto agg = aggregate(prof, lam);
        auto vals = action_values_against(env, 1, 2, agg[0][2]);
        EXPECT_NEAR(vals[0], vals[1], 1e-12);
    }
}

TEST(DistAbeeSolve, MatchingPenniesHalfMix) {
    auto env = build_matching_pennies({});
    auto cand = solve_matching_pennies_cdabee({});
    auto res = dist_abee_solve(env, cand.lambda);
    ASSERT_FALSE(res.profiles.empty());
    bool found = false;
    for (const auto& prof : res.profiles) {
        auto agg = aggregate(prof, cand.lambda);
        bool half = true;
        for (std::size_t g = 0; g < 3; ++g) half = half && std::abs(agg[0][g][0] - 0.5) < 1e-9;
        found = found || half;
    }
    EXPECT_TRUE(found);
}

TEST(Property, ConsistencyIsLinear) {
    gen::Gen gen(31);
    for (int trial = 0; trial < 200; ++trial) {
        auto env = gen.environment(5, 2, 3);
        auto part = Partition({gen.integer(0, 2), gen.integer(0, 2), gen.integer(0, 2), gen.integer(0, 2), 0}, 3);
        auto x = gen.data(5, 3), y = gen.data(5, 3);
        double w = gen.unit();
        std::vector<Mixed> mix(5, Mixed(3));
        for (std::size_t g = 0; g < 5; ++g)
            for (std::size_t a = 0; a < 3; ++a) mix[g][a] = w * x[g][a] + (1 - w) * y[g][a];
        auto ex = consistent_expectation(env, part, x), ey = consistent_expectation(env, part, y);
        auto em = consistent_expectation(env, part, mix);
        for (std::size_t c = 0; c < em.size(); ++c)
            for (std::size_t a = 0; a < 3; ++a) EXPECT_NEAR(em[c][a], w * ex[c][a] + (1 - w) * ey[c][a], 1e-14);
    }
}

TEST(Property, SolverOutputVerifiesAndSingletonsAreNash) {
    gen::Gen gen(17);
    int found = 0;
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t games = std::size_t(gen.integer(1, 4));
        bool binary = trial % 3 != 0;
        auto env = gen.environment(games, binary ? 2 : 3, 2);
        std::array<Partition, 2> parts;
        for (auto& p : parts) {
            std::vector<int> lab(games);
            for (auto& l : lab) l = gen.integer(0, 1);
            p = Partition(lab, 2);
        }
        if (trial % 4 == 0) parts = {Partition::finest(games), Partition::finest(games)};
        SolveOptions so;
        so.seed = std::uint64_t(trial);
        auto res = abee_solve(env, parts, so);
        for (const auto& prof : res.profiles) {
            ++found;
            EXPECT_TRUE(abee_verify(env, parts, prof)) << "trial " << trial;
            if (parts[0].n_classes() == int(games) && parts[1].n_classes() == int(games))
                for (std::size_t g = 0; g < games; ++g) {
                    const auto& r = prof.player[0].play[0][g];
                    const auto& c = prof.player[1].play[0][g];
                    EXPECT_LE(deviation_gain(env, 0, g, r, c), 1e-9);
                    EXPECT_LE(deviation_gain(env, 1, g, c, r), 1e-9);
                }
        }
    }
    EXPECT_GT(found, 30);
}

TEST(Property, BundledRowMixesInAtMostOneGame) {
    gen::Gen gen(3);
    for (int trial = 0; trial < 60; ++trial) {
        double a = gen.range(0.05, 1.9), b = gen.range(a + 0.01, 1.95), c = gen.range(b + 0.01, 1.99);
        if (!(c < 2)) continue;
        auto env = build_matching_pennies({a, b, c});
        for (auto lab : {std::vector<int>{0, 0, 1}, std::vector<int>{0, 1, 0}, std::vector<int>{0, 1, 1}}) {
            std::array<Partition, 2> parts{Partition(lab, 2), Partition::finest(3)};
            for (const auto& prof : abee_solve(env, parts).profiles) {
                int mixing = 0;
                for (std::size_t g = 0; g < 3; ++g) {
                    if (std::count(lab.begin(), lab.end(), lab[g]) != 2) continue;
                    double u = prof.player[0].play[0][g][0];
                    mixing += u > 1e-9 && u < 1 - 1e-9;
                }
                EXPECT_LE(mixing, 1);
            }
        }
    }
}
