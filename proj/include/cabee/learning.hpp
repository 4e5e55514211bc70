#pragma once

#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <thread>

#include "cabee/equilibrium.hpp"

namespace cabee {

// How exact ties are resolved in the unperturbed dynamics. Uniform splits mass
// evenly over tied partitions / actions; Incumbent keeps the current shares and
// play whenever they remain optimal, and splits evenly otherwise.
enum class TiePolicy { Uniform, Incumbent };

inline const char* tie_policy_name(TiePolicy t) { return t == TiePolicy::Uniform ? "uniform" : "incumbent"; }
inline TiePolicy parse_tie_policy(const std::string& s) {
    if (s == "uniform") return TiePolicy::Uniform;
    if (s == "incumbent") return TiePolicy::Incumbent;
    throw Error("unknown tie policy '" + s + "'");
}

struct PerturbationSpec {
    double epsilon = 0;
    // payoff noise rho on [0,1]; null means uniform
    std::function<double(std::mt19937_64&)> payoff_noise;
    // measurement noise eta ~ Dirichlet(alpha, ..., alpha) on the opponent simplex
    double dirichlet_alpha = 1.0;
    std::uint64_t seed = 0;

    std::vector<std::string> validate() const {
        std::vector<std::string> out;
        if (!(epsilon >= 0)) out.push_back("epsilon must be nonnegative");
        if (!(dirichlet_alpha > 0)) out.push_back("dirichlet_alpha must be positive");
        return out;
    }
};

// A mass of subjects (model 1) or dynasties (model 2) sharing a partition.
struct Cohort {
    Partition partition;
    std::vector<Mixed> prototypes;  // per class, over opponent actions
    std::vector<Mixed> play;        // per game
    double share = 0;
};

struct PopulationState {
    std::array<std::vector<Cohort>, 2> cohorts;
    AggregateStrategy aggregate;  // play of the last period, what subjects observe
    long t = 0;
    std::vector<std::string> events;  // produced by the step that created this state

    PartitionDistribution lambda(int p) const {
        std::map<Partition, double> acc;
        for (const auto& c : cohorts[std::size_t(p)]) acc[c.partition] += c.share;
        PartitionDistribution out;
        for (auto& [part, w] : acc)
            if (w > 0) {
                out.support.push_back(part);
                out.weights.push_back(w);
            }
        return out;
    }

    // Cohorts sharing a partition are pooled by share.
    EquilibriumCandidate to_candidate(Mode mode, const Divergence& d) const {
        EquilibriumCandidate c;
        c.mode = mode;
        c.divergence = d;
        for (int p = 0; p < 2; ++p) {
            c.lambda[p] = lambda(p);
            auto& ps = c.profile.player[p];
            ps.support = c.lambda[p].support;
            for (std::size_t s = 0; s < ps.support.size(); ++s) {
                std::vector<Mixed> play;
                for (const auto& co : cohorts[std::size_t(p)]) {
                    if (co.partition != ps.support[s] || !(co.share > 0)) continue;
                    if (play.empty()) play.assign(co.play.size(), Mixed(co.play.front().size(), 0.0));
                    for (std::size_t g = 0; g < play.size(); ++g)
                        for (std::size_t a = 0; a < play[g].size(); ++a)
                            play[g][a] += co.share / c.lambda[p].weights[s] * co.play[g][a];
                }
                ps.play.push_back(std::move(play));
            }
        }
        return c;
    }
};

inline void recompute_aggregate(const Environment& env, PopulationState& st) {
    for (int p = 0; p < 2; ++p) {
        auto& agg = st.aggregate[std::size_t(p)];
        agg.assign(env.n_games(), Mixed(env.n_actions(p), 0.0));
        for (const auto& c : st.cohorts[std::size_t(p)])
            for (std::size_t g = 0; g < env.n_games(); ++g)
                for (std::size_t a = 0; a < agg[g].size(); ++a) agg[g][a] += c.share * c.play[g][a];
    }
}

inline PopulationState state_from_candidate(const Environment& env, const EquilibriumCandidate& cand) {
    PopulationState st;
    auto agg = aggregate(cand.profile, cand.lambda);
    for (int p = 0; p < 2; ++p)
        for (std::size_t s = 0; s < cand.lambda[p].support.size(); ++s) {
            const auto& part = cand.lambda[p].support[s];
            const auto* play = cand.profile.player[p].find(part);
            if (!play) throw Error("candidate has no play for a support partition");
            st.cohorts[std::size_t(p)].push_back(
                {part, consistent_expectation(env, part, agg[opponent(p)]), *play, cand.lambda[p].weights[s]});
        }
    st.aggregate = std::move(agg);
    return st;
}

namespace detail {

// Mixed reply over the best-reply set; keeps the incumbent when it is supported there.
inline Mixed resolve_reply(const BestReply& br, std::size_t n_actions, const Mixed* incumbent, TiePolicy ties) {
    if (br.actions.size() > 1 && ties == TiePolicy::Incumbent && incumbent && incumbent->size() == n_actions) {
        double outside = 0;
        for (std::size_t a = 0; a < n_actions; ++a)
            if (std::find(br.actions.begin(), br.actions.end(), a) == br.actions.end()) outside += (*incumbent)[a];
        if (outside <= kSolverTol) return *incumbent;
    }
    Mixed m(n_actions, 0.0);
    for (auto a : br.actions) m[a] = 1.0 / double(br.actions.size());
    return m;
}

inline const Cohort* find_cohort(const std::vector<Cohort>& cs, const Partition& part) {
    for (const auto& c : cs)
        if (c.partition == part) return &c;
    return nullptr;
}

inline void merge_equal(std::vector<Cohort>& cs) {
    std::vector<Cohort> out;
    for (auto& c : cs) {
        bool merged = false;
        for (auto& o : out) {
            if (o.partition != c.partition) continue;
            double diff = 0;
            for (std::size_t g = 0; g < c.play.size(); ++g)
                for (std::size_t a = 0; a < c.play[g].size(); ++a)
                    diff = std::max(diff, std::abs(c.play[g][a] - o.play[g][a]));
            if (diff > 1e-12) continue;
            o.share += c.share;
            merged = true;
            break;
        }
        if (!merged) out.push_back(std::move(c));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Cohort& a, const Cohort& b) { return a.partition < b.partition; });
    cs = std::move(out);
}

// Subjects are drawn in fixed-size blocks, one generator per block, so paths do
// not depend on the thread count.
inline constexpr std::size_t kSubjectBlock = 256;

inline std::mt19937_64 block_rng(std::uint64_t seed, long t, int role, std::size_t block) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(t), std::uint32_t(role),
                      std::uint32_t(block), std::uint32_t(std::uint64_t(block) >> 32)};
    return std::mt19937_64(seq);
}

// dispersion() without per-call allocation.
struct DispersionScratch {
    std::vector<Mixed> protos;
    std::vector<double> mass;

    double operator()(const std::vector<Mixed>& data, const Partition& part, const std::vector<double>& prior,
                      const Divergence& d) {
        std::size_t k = std::size_t(part.n_classes()), n = data.front().size();
        if (protos.size() < k) protos.resize(k);
        mass.assign(k, 0.0);
        for (std::size_t c = 0; c < k; ++c) protos[c].assign(n, 0.0);
        for (std::size_t g = 0; g < data.size(); ++g) {
            auto c = std::size_t(part.label[g]);
            mass[c] += prior[g];
            for (std::size_t a = 0; a < n; ++a) protos[c][a] += prior[g] * data[g][a];
        }
        for (std::size_t c = 0; c < k; ++c)
            for (auto& v : protos[c]) v /= mass[c];
        double s = 0;
        for (std::size_t g = 0; g < data.size(); ++g)
            s += prior[g] * divergence_eval(d, data[g], protos[std::size_t(part.label[g])]);
        return s;
    }
};

template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    std::size_t k = std::size_t(std::max(1, threads));
    if (k == 1 || n < 2 * k) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t chunk = (n + k - 1) / k;
    for (std::size_t w = 0; w < k; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w * chunk; i < std::min(n, (w + 1) * chunk); ++i) fn(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace detail

struct Model1Options {
    TiePolicy ties = TiePolicy::Uniform;
    bool lloyd = false;  // subjects run Lloyd from their cohort's prototypes instead of enumerating
    std::size_t population = 10000;
    int threads = 1;
};

namespace detail {

inline std::vector<Cohort> model1_continuum_role(const Environment& env, const PopulationState& st, int p, int K,
                                                 const Divergence& d, const Model1Options& opt) {
    const auto& data = st.aggregate[std::size_t(opponent(p))];
    const auto& incumbents = st.cohorts[std::size_t(p)];
    auto dp = divergence_for(env, d, p);
    std::vector<std::pair<Partition, double>> chosen;
    if (opt.lloyd) {
        for (const auto& c : incumbents) {
            auto init = c.prototypes.empty() ? prototypes(data, c.partition, env.prior) : c.prototypes;
            chosen.emplace_back(kmeans_lloyd(data, env.prior, K, dp, init).partition, c.share);
        }
    } else {
        auto mins = global_cluster(data, env.prior, K, dp).minimizers;
        std::vector<double> w(mins.size(), 0.0);
        double total = 0;
        if (opt.ties == TiePolicy::Incumbent)
            for (std::size_t k = 0; k < mins.size(); ++k) {
                for (const auto& c : incumbents)
                    if (c.partition == mins[k]) w[k] += c.share;
                total += w[k];
            }
        if (!(total > 0)) {
            std::fill(w.begin(), w.end(), 1.0);
            total = double(mins.size());
        }
        for (std::size_t k = 0; k < mins.size(); ++k)
            if (w[k] > 0) chosen.emplace_back(mins[k], w[k] / total);
    }
    std::vector<Cohort> out;
    for (auto& [part, share] : chosen) {
        Cohort c;
        c.partition = part;
        c.share = share;
        c.prototypes = consistent_expectation(env, part, data);
        const Cohort* inc = find_cohort(incumbents, part);
        for (std::size_t g = 0; g < env.n_games(); ++g) {
            auto br = analogy_best_response(env, p, g, c.prototypes[std::size_t(part.label[g])]);
            c.play.push_back(resolve_reply(br, env.n_actions(p), inc ? &inc->play[g] : nullptr, opt.ties));
        }
        out.push_back(std::move(c));
    }
    merge_equal(out);
    return out;
}

inline std::vector<Cohort> model1_sampled_role(const Environment& env, const PopulationState& st, int p, int K,
                                               const Divergence& d, const PerturbationSpec& pert,
                                               const Model1Options& opt) {
    const auto& data = st.aggregate[std::size_t(opponent(p))];
    const auto& incumbents = st.cohorts[std::size_t(p)];
    const std::size_t n_games = env.n_games(), n_opp = env.n_actions(opponent(p)), n_own = env.n_actions(p);
    const double eps = pert.epsilon;
    auto dp = divergence_for(env, d, p);
    std::vector<Partition> parts;
    if (!opt.lloyd || incumbents.empty()) parts = enumerate_partitions(n_games, K);
    std::vector<double> cum;
    for (const auto& c : incumbents) cum.push_back((cum.empty() ? 0 : cum.back()) + c.share);

    const std::size_t N = opt.population;
    std::vector<Partition> subj_part(N);
    std::vector<std::vector<std::uint32_t>> subj_act(N);
    const std::size_t blocks = (N + kSubjectBlock - 1) / kSubjectBlock;
    parallel_for(blocks, opt.threads, [&](std::size_t blk) {
        auto rng = block_rng(pert.seed, st.t, p, blk);
        std::gamma_distribution<double> gam(pert.dirichlet_alpha, 1.0);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        std::vector<Mixed> seen(n_games, Mixed(n_opp));
        Mixed eta(n_opp);
        DispersionScratch disp;
        for (std::size_t n = blk * kSubjectBlock; n < std::min(N, (blk + 1) * kSubjectBlock); ++n) {
            for (std::size_t g = 0; g < n_games; ++g) {
                double s = 0;
                for (auto& v : eta) s += (v = gam(rng));
                for (std::size_t a = 0; a < n_opp; ++a) seen[g][a] = (data[g][a] + eps * eta[a] / s) / (1 + eps);
            }
            Partition part;
            if (parts.empty()) {
                // subject n inherits the cohort covering position (n + 1/2) / N
                double pos = (double(n) + 0.5) / double(N) * cum.back();
                auto k = std::size_t(std::lower_bound(cum.begin(), cum.end(), pos) - cum.begin());
                const auto& c = incumbents[std::min(k, incumbents.size() - 1)];
                auto init = c.prototypes.empty() ? prototypes(seen, c.partition, env.prior) : c.prototypes;
                part = kmeans_lloyd(seen, env.prior, K, dp, init).partition;
            } else {
                double best = std::numeric_limits<double>::infinity();
                std::size_t arg = 0;
                for (std::size_t q = 0; q < parts.size(); ++q) {
                    double v = disp(seen, parts[q], env.prior, dp);
                    if (v < best) {
                        best = v;
                        arg = q;
                    }
                }
                part = parts[arg];
            }
            auto beta = prototypes(seen, part, env.prior);
            std::vector<std::uint32_t> acts(n_games);
            for (std::size_t g = 0; g < n_games; ++g) {
                auto vals = action_values_against(env, p, g, beta[std::size_t(part.label[g])]);
                std::size_t arg = 0;
                double bv = -std::numeric_limits<double>::infinity();
                for (std::size_t a = 0; a < n_own; ++a) {
                    double rho = pert.payoff_noise ? pert.payoff_noise(rng) : uni(rng);
                    double v = vals[a] + eps * rho;
                    if (v > bv) {
                        bv = v;
                        arg = a;
                    }
                }
                acts[g] = std::uint32_t(arg);
            }
            subj_part[n] = std::move(part);
            subj_act[n] = std::move(acts);
        }
    });

    // reduction in subject order
    std::map<Partition, std::pair<std::size_t, std::vector<std::vector<std::size_t>>>> tally;
    for (std::size_t n = 0; n < N; ++n) {
        auto& [count, acts] = tally[subj_part[n]];
        if (acts.empty()) acts.assign(n_games, std::vector<std::size_t>(n_own, 0));
        ++count;
        for (std::size_t g = 0; g < n_games; ++g) ++acts[g][subj_act[n][g]];
    }
    std::vector<Cohort> out;
    for (auto& [part, rec] : tally) {
        Cohort c;
        c.partition = part;
        c.share = double(rec.first) / double(N);
        c.prototypes = consistent_expectation(env, part, data);
        for (std::size_t g = 0; g < n_games; ++g) {
            Mixed m(n_own);
            for (std::size_t a = 0; a < n_own; ++a) m[a] = double(rec.second[g][a]) / double(rec.first);
            c.play.push_back(std::move(m));
        }
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace detail

// Learning model 1: subjects cluster last period's aggregate (perturbed by
// measurement noise), form class prototypes and best-respond under payoff noise.
// With epsilon = 0 the population is treated as a continuum and the step is exact.
inline PopulationState model1_step(const Environment& env, const PopulationState& st, std::array<int, 2> K,
                                   const Divergence& d, const PerturbationSpec& pert, const Model1Options& opt = {}) {
    auto v = pert.validate();
    if (!v.empty()) throw Error("perturbation: " + v.front());
    if (opt.population < 1) throw Error("population size must be at least 1");
    PopulationState next;
    next.t = st.t + 1;
    for (int p = 0; p < 2; ++p)
        next.cohorts[std::size_t(p)] = pert.epsilon == 0
                                           ? detail::model1_continuum_role(env, st, p, K[p], d, opt)
                                           : detail::model1_sampled_role(env, st, p, K[p], d, pert, opt);
    recompute_aggregate(env, next);
    return next;
}

struct StationarityReport {
    double aggregate_drift = 0;  // max step-to-step change of any aggregate frequency
    double lambda_drift = 0;     // max step-to-step change of any partition share
    long window_start = 0;       // first period of the last-quarter window
};

inline double lambda_change(const PopulationState& a, const PopulationState& b) {
    double out = 0;
    for (int p = 0; p < 2; ++p) {
        std::map<Partition, double> diff;
        auto la = a.lambda(p), lb = b.lambda(p);
        for (std::size_t s = 0; s < la.support.size(); ++s) diff[la.support[s]] += la.weights[s];
        for (std::size_t s = 0; s < lb.support.size(); ++s) diff[lb.support[s]] -= lb.weights[s];
        for (auto& [_, w] : diff) out = std::max(out, std::abs(w));
    }
    return out;
}

inline double aggregate_change(const PopulationState& a, const PopulationState& b) {
    double out = 0;
    for (std::size_t p = 0; p < 2; ++p)
        for (std::size_t g = 0; g < a.aggregate[p].size(); ++g)
            for (std::size_t k = 0; k < a.aggregate[p][g].size(); ++k)
                out = std::max(out, std::abs(a.aggregate[p][g][k] - b.aggregate[p][g][k]));
    return out;
}

inline StationarityReport stationarity(const std::vector<PopulationState>& traj) {
    StationarityReport r;
    if (traj.size() < 2) return r;
    std::size_t steps = traj.size() - 1;
    std::size_t from = steps - std::max<std::size_t>(1, steps / 4);
    r.window_start = traj[from].t;
    for (std::size_t k = from + 1; k < traj.size(); ++k) {
        r.aggregate_drift = std::max(r.aggregate_drift, aggregate_change(traj[k - 1], traj[k]));
        r.lambda_drift = std::max(r.lambda_drift, lambda_change(traj[k - 1], traj[k]));
    }
    return r;
}

struct Trajectory {
    std::vector<PopulationState> states;  // initial state first
    StationarityReport report;
};

inline Trajectory model1_run(const Environment& env, const PopulationState& init, long T, std::array<int, 2> K,
                             const Divergence& d, const PerturbationSpec& pert, const Model1Options& opt = {}) {
    if (T < 1) throw Error("model1_run needs at least one step");
    Trajectory tr;
    tr.states.push_back(init);
    for (long k = 0; k < T; ++k) tr.states.push_back(model1_step(env, tr.states.back(), K, d, pert, opt));
    tr.report = stationarity(tr.states);
    return tr;
}

struct Model2Options {
    TiePolicy ties = TiePolicy::Uniform;
};

// Learning model 2: each dynasty best-responds to inherited prototypes, then
// reassigns games to the nearest inherited prototype given the new aggregate and
// recomputes prototypes for the resulting partition.
inline PopulationState model2_step(const Environment& env, const PopulationState& st, const Divergence& d,
                                   const Model2Options& opt = {}) {
    PopulationState next;
    next.t = st.t + 1;
    for (int p = 0; p < 2; ++p)
        for (const auto& c : st.cohorts[std::size_t(p)]) {
            if (c.prototypes.size() != std::size_t(c.partition.n_classes()))
                throw Error("dynasty without prototypes for every class");
            Cohort n = c;
            n.play.clear();
            for (std::size_t g = 0; g < env.n_games(); ++g) {
                auto br = analogy_best_response(env, p, g, c.prototypes[std::size_t(c.partition.label[g])]);
                n.play.push_back(detail::resolve_reply(br, env.n_actions(p),
                                                       g < c.play.size() ? &c.play[g] : nullptr, opt.ties));
            }
            next.cohorts[std::size_t(p)].push_back(std::move(n));
        }
    recompute_aggregate(env, next);
    for (int p = 0; p < 2; ++p) {
        const auto& data = next.aggregate[std::size_t(opponent(p))];
        auto dp = divergence_for(env, d, p);
        for (std::size_t k = 0; k < next.cohorts[std::size_t(p)].size(); ++k) {
            auto& c = next.cohorts[std::size_t(p)][k];
            std::vector<int> assign(env.n_games());
            for (std::size_t g = 0; g < env.n_games(); ++g) {
                int best = c.partition.label[g];
                double bd = divergence_eval(dp, data[g], c.prototypes[std::size_t(best)]);
                for (int q = 0; q < int(c.prototypes.size()); ++q) {
                    double v = divergence_eval(dp, data[g], c.prototypes[std::size_t(q)]);
                    if (v < bd) {
                        bd = v;
                        best = q;
                    }
                }
                assign[g] = best;
            }
            for (int q = 0; q < int(c.prototypes.size()); ++q)
                if (std::find(assign.begin(), assign.end(), q) == assign.end())
                    next.events.push_back("player " + std::to_string(p) + " dynasty " + std::to_string(k) +
                                          ": class " + std::to_string(q) + " emptied, dropped");
            c.partition = Partition(assign, c.partition.capacity);
            c.prototypes = consistent_expectation(env, c.partition, data);
        }
        detail::merge_equal(next.cohorts[std::size_t(p)]);
    }
    return next;
}

// Dynasties with uniformly drawn partitions (at most K classes) and interior prototypes.
inline PopulationState model2_random_state(const Environment& env, std::array<int, 2> K, std::size_t dynasties,
                                           std::uint64_t seed) {
    if (dynasties < 1) throw Error("need at least one dynasty");
    std::mt19937_64 rng(seed);
    PopulationState st;
    for (int p = 0; p < 2; ++p) {
        auto parts = enumerate_partitions(env.n_games(), K[p]);
        std::uniform_int_distribution<std::size_t> pick(0, parts.size() - 1);
        for (std::size_t k = 0; k < dynasties; ++k) {
            Cohort c;
            c.partition = parts[pick(rng)];
            for (int q = 0; q < c.partition.n_classes(); ++q)
                c.prototypes.push_back(detail::interior_draw(env.n_actions(opponent(p)), rng));
            c.play.assign(env.n_games(), uniform_mixed(env.n_actions(p)));
            c.share = 1.0 / double(dynasties);
            st.cohorts[std::size_t(p)].push_back(std::move(c));
        }
    }
    recompute_aggregate(env, st);
    return st;
}

inline Trajectory model2_run(const Environment& env, const PopulationState& init, long T, const Divergence& d,
                             const Model2Options& opt = {}) {
    if (T < 1) throw Error("model2_run needs at least one step");
    Trajectory tr;
    tr.states.push_back(init);
    for (long k = 0; k < T; ++k) tr.states.push_back(model2_step(env, tr.states.back(), d, opt));
    tr.report = stationarity(tr.states);
    return tr;
}

struct StateMove {
    double size = 0;
    std::string witness;
};

// Largest coordinate difference between two states (aggregates, shares, per-partition play).
inline StateMove state_move(const Environment& env, const PopulationState& a, const PopulationState& b) {
    StateMove m;
    auto bump = [&](double v, const std::string& what) {
        if (v > m.size) {
            m.size = v;
            m.witness = what;
        }
    };
    for (int p = 0; p < 2; ++p)
        for (std::size_t g = 0; g < env.n_games(); ++g)
            for (std::size_t k = 0; k < env.n_actions(p); ++k)
                bump(std::abs(a.aggregate[std::size_t(p)][g][k] - b.aggregate[std::size_t(p)][g][k]),
                     "player " + std::to_string(p) + " aggregate in game " + env.games[g] + " action " +
                         env.actions[std::size_t(p)][k]);
    auto ca = a.to_candidate(Mode::Global, Divergence::l2()), cb = b.to_candidate(Mode::Global, Divergence::l2());
    for (int p = 0; p < 2; ++p) {
        const auto& la = ca.lambda[p];
        const auto& lb = cb.lambda[p];
        for (std::size_t s = 0; s < la.support.size(); ++s) {
            std::string name = "player " + std::to_string(p) + " partition " + la.support[s].to_string(&env.games);
            auto it = std::find(lb.support.begin(), lb.support.end(), la.support[s]);
            if (it == lb.support.end()) {
                bump(la.weights[s], name + " share");
                continue;
            }
            auto t = std::size_t(it - lb.support.begin());
            bump(std::abs(la.weights[s] - lb.weights[t]), name + " share");
            const auto& pa = ca.profile.player[p].play[s];
            const auto& pb = cb.profile.player[p].play[t];
            for (std::size_t g = 0; g < pa.size(); ++g)
                for (std::size_t k = 0; k < pa[g].size(); ++k)
                    bump(std::abs(pa[g][k] - pb[g][k]), name + " play in game " + env.games[g]);
        }
        for (std::size_t t = 0; t < lb.support.size(); ++t)
            if (std::find(la.support.begin(), la.support.end(), lb.support[t]) == la.support.end())
                bump(lb.weights[t],
                     "player " + std::to_string(p) + " partition " + lb.support[t].to_string(&env.games) + " share");
    }
    return m;
}

struct SteadyStateReport {
    bool steady = false;
    double max_move = 0;
    std::string witness;  // moved coordinate when not steady
    std::optional<bool> equilibrium;  // cd_abee_verify outcome when steady
    std::string equilibrium_witness;
};

// Global mode applies the unperturbed model-1 step, local mode the model-2 step.
inline SteadyStateReport steady_state_check(const Environment& env, const PopulationState& st, Mode mode,
                                            const Divergence& d, std::array<int, 2> K,
                                            TiePolicy ties = TiePolicy::Incumbent, double tol = kSolverTol) {
    PopulationState next;
    if (mode == Mode::Global) {
        Model1Options o;
        o.ties = ties;
        next = model1_step(env, st, K, d, PerturbationSpec{}, o);
    } else {
        next = model2_step(env, st, d, Model2Options{ties});
    }
    SteadyStateReport r;
    auto mv = state_move(env, st, next);
    r.max_move = mv.size;
    r.steady = mv.size <= tol;
    if (!r.steady) {
        r.witness = mv.witness;
        return r;
    }
    auto chk = cd_abee_verify(env, st.to_candidate(mode, d));
    r.equilibrium = chk.ok;
    r.equilibrium_witness = chk.witness;
    return r;
}

inline std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

// t,role,game,action,frequency
inline void write_aggregate_csv(std::ostream& os, const Environment& env, const std::vector<PopulationState>& states) {
    os << "t,role,game,action,frequency\n";
    for (const auto& st : states)
        for (int p = 0; p < 2; ++p)
            for (std::size_t g = 0; g < env.n_games(); ++g)
                for (std::size_t a = 0; a < env.n_actions(p); ++a)
                    os << st.t << ',' << p << ',' << env.games[g] << ',' << env.actions[std::size_t(p)][a] << ','
                       << fmt_num(st.aggregate[std::size_t(p)][g][a]) << '\n';
}

// t,role,partition,share
inline void write_lambda_csv(std::ostream& os, const Environment& env, const std::vector<PopulationState>& states) {
    os << "t,role,partition,share\n";
    for (const auto& st : states)
        for (int p = 0; p < 2; ++p) {
            auto l = st.lambda(p);
            for (std::size_t s = 0; s < l.support.size(); ++s)
                os << st.t << ',' << p << ',' << csv_quote(l.support[s].to_string(&env.games)) << ','
                   << fmt_num(l.weights[s]) << '\n';
        }
}

}  // namespace cabee
