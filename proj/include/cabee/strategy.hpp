#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "cabee/clustering.hpp"
#include "cabee/env.hpp"

namespace cabee {

// One probability vector per analogy class.
using Expectation = std::vector<Mixed>;

struct PartitionDistribution {
    std::vector<Partition> support;
    std::vector<double> weights;

    static PartitionDistribution degenerate(const Partition& p) { return {{p}, {1.0}}; }

    std::vector<std::string> validate() const {
        std::vector<std::string> out;
        if (support.empty()) out.push_back("lambda support empty");
        if (support.size() != weights.size()) out.push_back("lambda support and weights differ in size");
        double s = 0;
        for (double w : weights) {
            if (!(w > 0)) out.push_back("lambda weight not positive");
            s += w;
        }
        if (std::abs(s - 1.0) > kValidationTol) out.push_back("lambda weights sum to " + fmt_num(s));
        for (std::size_t a = 0; a < support.size(); ++a)
            for (std::size_t b = a + 1; b < support.size(); ++b)
                if (support[a] == support[b]) out.push_back("lambda support has a repeated partition");
        return out;
    }
};

// Per-partition play of one player: play[s][game].
struct PlayerStrategy {
    std::vector<Partition> support;
    std::vector<std::vector<Mixed>> play;

    const std::vector<Mixed>* find(const Partition& p) const {
        for (std::size_t s = 0; s < support.size(); ++s)
            if (support[s] == p) return &play[s];
        return nullptr;
    }
};

struct StrategyProfile {
    std::array<PlayerStrategy, 2> player;
};

using AggregateStrategy = std::array<std::vector<Mixed>, 2>;

inline Expectation consistent_expectation(const Environment& env, const Partition& part,
                                          const std::vector<Mixed>& opponent_aggregate) {
    if (part.n_games() != env.n_games()) throw Error("partition does not match the game set");
    return prototypes(opponent_aggregate, part, env.prior);
}

struct BestReply {
    std::vector<std::size_t> actions;
    bool indifferent = false;
    double value = 0;
};

inline constexpr double kBestReplyTol = 1e-9;

inline BestReply analogy_best_response(const Environment& env, int player, std::size_t game,
                                       const Mixed& expectation, double tol = kBestReplyTol) {
    check_game(env, game);
    auto v = action_values_against(env, player, game, expectation);
    BestReply br;
    br.value = *std::max_element(v.begin(), v.end());
    for (std::size_t a = 0; a < v.size(); ++a)
        if (v[a] >= br.value - tol) br.actions.push_back(a);
    br.indifferent = br.actions.size() >= 2;
    return br;
}

inline AggregateStrategy aggregate(const StrategyProfile& profile, const std::array<PartitionDistribution, 2>& lambda) {
    AggregateStrategy out;
    for (int p = 0; p < 2; ++p) {
        const auto& lam = lambda[p];
        for (std::size_t s = 0; s < lam.support.size(); ++s) {
            const auto* play = profile.player[p].find(lam.support[s]);
            if (!play) throw Error("strategy missing for partition " + lam.support[s].to_string());
            if (out[p].empty()) {
                out[p].assign(play->size(), Mixed((*play)[0].size(), 0.0));
            }
            if (play->size() != out[p].size()) throw Error("strategy missing game entries");
            for (std::size_t g = 0; g < play->size(); ++g)
                for (std::size_t a = 0; a < out[p][g].size(); ++a) out[p][g][a] += lam.weights[s] * (*play)[g][a];
        }
    }
    return out;
}

struct VerifyReport {
    bool ok = true;
    double max_gain = 0;
    std::string witness;
    explicit operator bool() const { return ok; }
};

inline VerifyReport dist_abee_verify(const Environment& env, const std::array<PartitionDistribution, 2>& lambda,
                                     const StrategyProfile& profile, double tol = kSolverTol) {
    VerifyReport rep;
    AggregateStrategy agg;
    try {
        agg = aggregate(profile, lambda);
    } catch (const Error& e) {
        return {false, std::numeric_limits<double>::infinity(), e.what()};
    }
    for (int p = 0; p < 2; ++p) {
        const int q = opponent(p);
        for (const auto& part : lambda[p].support) {
            const auto& play = *profile.player[p].find(part);
            if (play.size() != env.n_games()) return {false, std::numeric_limits<double>::infinity(), "wrong game count"};
            auto beta = consistent_expectation(env, part, agg[q]);
            for (std::size_t g = 0; g < env.n_games(); ++g) {
                if (!is_distribution(play[g], 1e-9)) {
                    return {false, std::numeric_limits<double>::infinity(),
                            "player " + std::to_string(p) + " game " + env.games[g] + ": not a distribution"};
                }
                double gain = deviation_gain(env, p, g, play[g], beta[std::size_t(part.label[g])]);
                if (gain > rep.max_gain) {
                    rep.max_gain = gain;
                    if (gain > tol)
                        rep.witness = "player " + std::to_string(p) + " partition " + part.to_string(&env.games) +
                                      " game " + env.games[g] + " gains " + fmt_num(gain);
                }
            }
        }
    }
    rep.ok = rep.max_gain <= tol;
    return rep;
}

inline std::array<PartitionDistribution, 2> degenerate_lambda(const std::array<Partition, 2>& parts) {
    return {PartitionDistribution::degenerate(parts[0]), PartitionDistribution::degenerate(parts[1])};
}

inline VerifyReport abee_verify(const Environment& env, const std::array<Partition, 2>& parts,
                                const StrategyProfile& profile, double tol = kSolverTol) {
    return dist_abee_verify(env, degenerate_lambda(parts), profile, tol);
}

inline double profile_distance(const StrategyProfile& a, const StrategyProfile& b) {
    double d = 0;
    for (int p = 0; p < 2; ++p) {
        if (a.player[p].support != b.player[p].support) return std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < a.player[p].play.size(); ++s)
            for (std::size_t g = 0; g < a.player[p].play[s].size(); ++g)
                for (std::size_t k = 0; k < a.player[p].play[s][g].size(); ++k)
                    d = std::max(d, std::abs(a.player[p].play[s][g][k] - b.player[p].play[s][g][k]));
    }
    return d;
}

}  // namespace cabee
