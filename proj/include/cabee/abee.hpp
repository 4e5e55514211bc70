#pragma once

#include <cstdint>
#include <random>

#include "cabee/detail/support_enum.hpp"
#include "cabee/strategy.hpp"

namespace cabee {

struct SolveOptions {
    std::uint64_t seed = 0;
    int starts = 32;
    int max_iter = 100000;
    double damping = 0.5;
    double tol = 1e-9;
    long budget_ms = -1;  // negative: unlimited
    bool force_fixed_point = false;  // skip support enumeration even for 2x2 shapes
};

enum class SolveStatus { Found, NotFoundWithinBudget };

struct SolveResult {
    SolveStatus status = SolveStatus::NotFoundWithinBudget;
    std::vector<StrategyProfile> profiles;
    std::string route;  // "support-enumeration" or "fixed-point"
    bool exhaustive = false;  // every support pattern was examined
};

inline constexpr double kDedupTol = 1e-7;

inline void add_unique(std::vector<StrategyProfile>& out, StrategyProfile p) {
    for (const auto& q : out)
        if (profile_distance(p, q) <= kDedupTol) return;
    out.push_back(std::move(p));
}

namespace detail {

inline bool binary_shape(const Environment& env) { return env.n_actions(0) == 2 && env.n_actions(1) == 2; }

inline SolveResult solve_by_patterns(const Environment& env, const std::array<PartitionDistribution, 2>& lambda,
                                     const Deadline& deadline) {
    SolveResult res;
    res.route = "support-enumeration";
    std::array<std::vector<Partition>, 2> support{lambda[0].support, lambda[1].support};
    SupportEnumerator en(env, support, {lambda[0].weights, lambda[1].weights});
    res.exhaustive = en.run(
        [&](const SupportEnumerator::Leaf& leaf) {
            auto prof = profile_from_point(support, leaf.decode(leaf.x));
            if (dist_abee_verify(env, lambda, prof)) add_unique(res.profiles, std::move(prof));
            return true;
        },
        deadline);
    res.status = res.profiles.empty() ? SolveStatus::NotFoundWithinBudget : SolveStatus::Found;
    return res;
}

inline Mixed interior_draw(std::size_t n, std::mt19937_64& rng) {
    std::exponential_distribution<double> ex(1.0);
    Mixed m(n);
    double s = 0;
    for (auto& v : m) s += (v = ex(rng));
    for (auto& v : m) v /= s;
    return m;
}

// sigma <- (1 - gamma) sigma + gamma * BR(consistent expectations), multi-start.
inline SolveResult solve_by_fixed_point(const Environment& env, const std::array<PartitionDistribution, 2>& lambda,
                                        const SolveOptions& opt, const Deadline& deadline) {
    SolveResult res;
    res.route = "fixed-point";
    for (int start = 0; start < opt.starts && !deadline.expired(); ++start) {
        std::mt19937_64 rng(opt.seed * 0x9E3779B97F4A7C15ULL + std::uint64_t(start));
        StrategyProfile prof;
        for (int p = 0; p < 2; ++p) {
            prof.player[p].support = lambda[p].support;
            for (std::size_t s = 0; s < lambda[p].support.size(); ++s) {
                std::vector<Mixed> play;
                for (std::size_t g = 0; g < env.n_games(); ++g)
                    play.push_back(start == 0 ? uniform_mixed(env.n_actions(p)) : interior_draw(env.n_actions(p), rng));
                prof.player[p].play.push_back(std::move(play));
            }
        }
        for (int it = 0; it < opt.max_iter; ++it) {
            if ((it & 255) == 255 && deadline.expired()) break;
            auto agg = aggregate(prof, lambda);
            double change = 0;
            StrategyProfile next = prof;
            for (int p = 0; p < 2; ++p)
                for (std::size_t s = 0; s < lambda[p].support.size(); ++s) {
                    const auto& part = lambda[p].support[s];
                    auto beta = consistent_expectation(env, part, agg[opponent(p)]);
                    for (std::size_t g = 0; g < env.n_games(); ++g) {
                        auto br = analogy_best_response(env, p, g, beta[std::size_t(part.label[g])]);
                        Mixed& cur = next.player[p].play[s][g];
                        for (std::size_t a = 0; a < cur.size(); ++a) {
                            bool in = std::find(br.actions.begin(), br.actions.end(), a) != br.actions.end();
                            double target = in ? 1.0 / double(br.actions.size()) : 0.0;
                            double v = (1 - opt.damping) * cur[a] + opt.damping * target;
                            change = std::max(change, std::abs(v - cur[a]));
                            cur[a] = v;
                        }
                    }
                }
            prof = std::move(next);
            if (change < opt.tol) break;
        }
        if (dist_abee_verify(env, lambda, prof)) add_unique(res.profiles, std::move(prof));
    }
    res.status = res.profiles.empty() ? SolveStatus::NotFoundWithinBudget : SolveStatus::Found;
    return res;
}

}  // namespace detail

inline SolveResult dist_abee_solve(const Environment& env, const std::array<PartitionDistribution, 2>& lambda,
                                   const SolveOptions& opt = {}) {
    require_valid(env);
    for (int p = 0; p < 2; ++p) {
        auto v = lambda[p].validate();
        if (!v.empty()) throw Error("invalid lambda for player " + std::to_string(p) + ": " + v.front());
        for (const auto& part : lambda[p].support)
            if (part.n_games() != env.n_games()) throw Error("partition does not match the game set");
    }
    auto deadline = detail::Deadline::after_ms(opt.budget_ms);
    if (detail::binary_shape(env) && !opt.force_fixed_point) {
        auto res = detail::solve_by_patterns(env, lambda, deadline);
        if (res.status == SolveStatus::Found) return res;
    }
    return detail::solve_by_fixed_point(env, lambda, opt, deadline);
}

inline SolveResult abee_solve(const Environment& env, const std::array<Partition, 2>& parts,
                              const SolveOptions& opt = {}) {
    return dist_abee_solve(env, degenerate_lambda(parts), opt);
}

}  // namespace cabee
