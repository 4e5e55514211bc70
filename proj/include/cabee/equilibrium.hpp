#pragma once

#include <map>

#include "cabee/abee.hpp"

namespace cabee {

enum class Mode { Local, Global };

inline const char* mode_name(Mode m) { return m == Mode::Local ? "local" : "global"; }
inline Mode parse_mode(const std::string& s) {
    if (s == "local") return Mode::Local;
    if (s == "global") return Mode::Global;
    throw Error("unknown mode '" + s + "'");
}

struct EquilibriumCandidate {
    std::array<PartitionDistribution, 2> lambda;
    StrategyProfile profile;
    Mode mode = Mode::Global;
    Divergence divergence = Divergence::l2();
};

struct EquilibriumCheck {
    bool ok = false;
    double max_gain = 0;
    std::string witness;
    explicit operator bool() const { return ok; }
};

// Divergence on player p's data, i.e. on the opponent's action set.
inline Divergence divergence_for(const Environment& env, const Divergence& d, int p) {
    return d.for_actions(env.action_values[opponent(p)]);
}

// Empty string when every support partition is clustered against the opponent aggregate.
inline std::string clustering_failure(const Environment& env, const std::array<PartitionDistribution, 2>& lambda,
                                      const AggregateStrategy& agg, Mode mode, const Divergence& d) {
    for (int p = 0; p < 2; ++p) {
        const auto& data = agg[opponent(p)];
        auto dp = divergence_for(env, d, p);
        for (const auto& part : lambda[p].support) {
            if (mode == Mode::Local) {
                auto lc = is_locally_clustered(data, part, env.prior, dp);
                if (!lc.ok)
                    return "player " + std::to_string(p) + " partition " + part.to_string(&env.games) +
                           " not locally clustered: game " + env.games[lc.witness->game] + " closer to class " +
                           std::to_string(lc.witness->better_class);
            } else if (!is_globally_clustered(data, part, env.prior, dp)) {
                return "player " + std::to_string(p) + " partition " + part.to_string(&env.games) +
                       " not globally clustered";
            }
        }
    }
    return {};
}

inline EquilibriumCheck cd_abee_verify(const Environment& env, const EquilibriumCandidate& c) {
    EquilibriumCheck out;
    for (int p = 0; p < 2; ++p) {
        auto v = c.lambda[p].validate();
        if (!v.empty()) {
            out.witness = "player " + std::to_string(p) + ": " + v.front();
            return out;
        }
    }
    auto r = dist_abee_verify(env, c.lambda, c.profile);
    out.max_gain = r.max_gain;
    if (!r.ok) {
        out.witness = r.witness;
        return out;
    }
    out.witness = clustering_failure(env, c.lambda, aggregate(c.profile, c.lambda), c.mode, c.divergence);
    out.ok = out.witness.empty();
    return out;
}

inline EquilibriumCheck cabee_verify(const Environment& env, const EquilibriumCandidate& c) {
    if (c.lambda[0].support.size() != 1 || c.lambda[1].support.size() != 1) {
        EquilibriumCheck out;
        out.witness = "lambda is not degenerate";
        return out;
    }
    return cd_abee_verify(env, c);
}

// Image of the grand mapping in vertex form: the clustering-optimal partitions
// and, for each, the pure best replies per game against consistent expectations.
struct GrandMapImage {
    AggregateStrategy aggregate;
    std::array<std::vector<Partition>, 2> partitions;
    std::array<std::vector<std::vector<std::vector<std::size_t>>>, 2> best_replies;  // [p][k][game]
};

inline GrandMapImage grand_map(const Environment& env, const EquilibriumCandidate& state, std::array<int, 2> K) {
    GrandMapImage img;
    img.aggregate = aggregate(state.profile, state.lambda);
    for (int p = 0; p < 2; ++p) {
        const auto& data = img.aggregate[opponent(p)];
        auto dp = divergence_for(env, state.divergence, p);
        if (state.mode == Mode::Global) {
            img.partitions[p] = global_cluster(data, env.prior, K[p], dp).minimizers;
        } else {
            for_each_partition(env.n_games(), K[p], [&](const Partition& part) {
                if (is_locally_clustered(data, part, env.prior, dp)) img.partitions[p].push_back(part);
            });
        }
        for (const auto& part : img.partitions[p]) {
            auto beta = consistent_expectation(env, part, data);
            std::vector<std::vector<std::size_t>> brs;
            for (std::size_t g = 0; g < env.n_games(); ++g)
                brs.push_back(analogy_best_response(env, p, g, beta[std::size_t(part.label[g])]).actions);
            img.best_replies[p].push_back(std::move(brs));
        }
    }
    return img;
}

inline bool grand_map_contains(const GrandMapImage& img, const EquilibriumCandidate& state, double tol = kSolverTol) {
    for (int p = 0; p < 2; ++p)
        for (const auto& part : state.lambda[p].support) {
            auto it = std::find(img.partitions[p].begin(), img.partitions[p].end(), part);
            if (it == img.partitions[p].end()) return false;
            const auto& brs = img.best_replies[p][std::size_t(it - img.partitions[p].begin())];
            const auto* play = state.profile.player[p].find(part);
            if (!play) return false;
            for (std::size_t g = 0; g < play->size(); ++g) {
                double outside = 0;
                for (std::size_t a = 0; a < (*play)[g].size(); ++a)
                    if (std::find(brs[g].begin(), brs[g].end(), a) == brs[g].end()) outside += (*play)[g][a];
                if (outside > tol) return false;
            }
        }
    return true;
}

struct SearchOptions {
    long budget_ms = 30000;
    int max_support = 3;
    bool distributional = true;  // run the second layer
    double lambda_min = 1e-6;
    SolveOptions solve;  // used for shapes outside the support enumeration
};

enum class SearchVerdict { Found, NotFound, ExhaustivelyRefuted };

inline const char* verdict_name(SearchVerdict v) {
    switch (v) {
        case SearchVerdict::Found: return "found";
        case SearchVerdict::NotFound: return "not found within budget";
        case SearchVerdict::ExhaustivelyRefuted: return "exhaustively refuted";
    }
    return "?";
}

struct SearchReport {
    std::vector<EquilibriumCandidate> candidates;
    SearchVerdict verdict = SearchVerdict::NotFound;
    bool layer1_complete = false;
    bool layer2_complete = false;
    std::size_t supports_examined = 0;
    std::size_t lp_count = 0;
    std::vector<std::string> notes;
};

namespace detail {

inline double candidate_distance(const EquilibriumCandidate& a, const EquilibriumCandidate& b) {
    double d = 0;
    for (int p = 0; p < 2; ++p) {
        if (a.lambda[p].support != b.lambda[p].support) return std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < a.lambda[p].weights.size(); ++s)
            d = std::max(d, std::abs(a.lambda[p].weights[s] - b.lambda[p].weights[s]));
    }
    return std::max(d, profile_distance(a.profile, b.profile));
}

inline void add_unique_candidate(std::vector<EquilibriumCandidate>& out, EquilibriumCandidate c) {
    for (const auto& o : out)
        if (candidate_distance(o, c) <= kDedupTol) return;
    out.push_back(std::move(c));
}

inline std::vector<std::vector<std::size_t>> subsets_upto(std::size_t n, int max_size) {
    std::vector<std::vector<std::size_t>> out;
    for (int k = 1; k <= max_size && std::size_t(k) <= n; ++k) {
        std::vector<std::size_t> idx(static_cast<std::size_t>(k));
        std::iota(idx.begin(), idx.end(), 0);
        while (true) {
            out.push_back(idx);
            int i = k - 1;
            while (i >= 0 && idx[std::size_t(i)] == n - std::size_t(k) + std::size_t(i)) --i;
            if (i < 0) break;
            ++idx[std::size_t(i)];
            for (std::size_t j = std::size_t(i) + 1; j < std::size_t(k); ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    return out;
}

inline EquilibriumCandidate candidate_from_point(const std::array<std::vector<Partition>, 2>& support,
                                                 const PatternPoint& pt, Mode mode, const Divergence& d) {
    EquilibriumCandidate c;
    c.mode = mode;
    c.divergence = d;
    c.profile = profile_from_point(support, pt);
    for (int p = 0; p < 2; ++p) {
        c.lambda[p].support = support[p];
        double s = 0;
        for (double w : pt.lambda[p]) s += w;
        for (double w : pt.lambda[p]) c.lambda[p].weights.push_back(w / s);
    }
    return c;
}

// Searches one pattern polytope for a point whose support partitions are clustered.
// Tries the LP point, coordinate extreme vertices and their centroid, then bisects
// clustering ties (global) or scans segments (local).
inline std::vector<EquilibriumCandidate> refine_leaf(const Environment& env, const SupportEnumerator::Leaf& leaf,
                                                     const std::array<std::vector<Partition>, 2>& support, Mode mode,
                                                     const Divergence& d, std::size_t& lp_count) {
    std::vector<EquilibriumCandidate> found;
    auto make = [&](const std::vector<double>& x) {
        return candidate_from_point(support, leaf.decode(x), mode, d);
    };
    auto try_point = [&](const std::vector<double>& x) {
        auto c = make(x);
        if (cd_abee_verify(env, c)) {
            add_unique_candidate(found, std::move(c));
            return true;
        }
        return false;
    };
    if (try_point(leaf.x)) return found;
    std::vector<std::vector<double>> pts{leaf.x};
    for (std::size_t v = 0; v < leaf.lp.n; ++v)
        for (double sign : {1.0, -1.0}) {
            LinearProgram lp = leaf.lp;
            lp.cost.assign(lp.n, 0.0);
            lp.cost[v] = sign;
            ++lp_count;
            if (auto x = Tableau::solve(lp)) pts.push_back(*x);
        }
    std::vector<double> centre(leaf.lp.n, 0.0);
    for (auto& p : pts)
        for (std::size_t k = 0; k < centre.size(); ++k) centre[k] += p[k] / double(pts.size());
    pts.push_back(centre);
    for (auto& p : pts)
        if (try_point(p)) return found;

    auto lerp = [](const std::vector<double>& a, const std::vector<double>& b, double t) {
        std::vector<double> r(a.size());
        for (std::size_t k = 0; k < a.size(); ++k) r[k] = (1 - t) * a[k] + t * b[k];
        return r;
    };
    if (mode == Mode::Global) {
        // one tie equation: the first player mixing over exactly two partitions
        int tp = -1;
        for (int p = 0; p < 2; ++p)
            if (support[p].size() == 2) {
                tp = p;
                break;
            }
        if (tp < 0) return found;
        auto dp = divergence_for(env, d, tp);
        auto tie = [&](const std::vector<double>& x) {
            auto c = make(x);
            auto agg = aggregate(c.profile, c.lambda);
            const auto& data = agg[opponent(tp)];
            return dispersion(data, support[tp][1], env.prior, dp) - dispersion(data, support[tp][0], env.prior, dp);
        };
        std::vector<double> h;
        for (auto& p : pts) h.push_back(tie(p));
        for (std::size_t a = 0; a < pts.size(); ++a)
            for (std::size_t b = a + 1; b < pts.size(); ++b) {
                if (!(h[a] < 0 && h[b] > 0) && !(h[a] > 0 && h[b] < 0)) continue;
                double lo = 0, hi = 1, hlo = h[a];
                for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
                    double mid = 0.5 * (lo + hi);
                    double hm = tie(lerp(pts[a], pts[b], mid));
                    if ((hm < 0) == (hlo < 0)) {
                        lo = mid;
                        hlo = hm;
                    } else {
                        hi = mid;
                    }
                }
                try_point(lerp(pts[a], pts[b], 0.5 * (lo + hi)));
            }
    } else {
        for (std::size_t k = 0; k + 1 < pts.size(); ++k)
            for (int i = 1; i < 16; ++i)
                if (try_point(lerp(centre, pts[k], i / 16.0))) return found;
    }
    return found;
}

}  // namespace detail

inline SearchReport cd_abee_search(const Environment& env, std::array<int, 2> K, Mode mode, const Divergence& d,
                                   const SearchOptions& opt = {}) {
    require_valid(env);
    SearchReport rep;
    auto deadline = detail::Deadline::after_ms(opt.budget_ms);
    std::array<std::vector<Partition>, 2> parts{enumerate_partitions(env.n_games(), K[0]),
                                                enumerate_partitions(env.n_games(), K[1])};
    if (!detail::binary_shape(env)) {
        rep.notes.push_back("action sets are not binary: degenerate layer only, fixed-point solver");
        rep.layer1_complete = true;
        for (const auto& a : parts[0])
            for (const auto& b : parts[1]) {
                if (deadline.expired()) {
                    rep.layer1_complete = false;
                    break;
                }
                auto res = abee_solve(env, {a, b}, opt.solve);
                ++rep.supports_examined;
                for (auto& prof : res.profiles) {
                    EquilibriumCandidate c{degenerate_lambda({a, b}), std::move(prof), mode, d};
                    if (cabee_verify(env, c)) detail::add_unique_candidate(rep.candidates, std::move(c));
                }
            }
        rep.verdict = !rep.candidates.empty() ? SearchVerdict::Found : SearchVerdict::NotFound;
        return rep;
    }
    const int max_s = opt.distributional ? std::max(1, opt.max_support) : 1;
    auto subs0 = detail::subsets_upto(parts[0].size(), max_s);
    auto subs1 = detail::subsets_upto(parts[1].size(), max_s);
    struct Combo {
        std::size_t a, b;
    };
    std::vector<Combo> combos;
    for (std::size_t a = 0; a < subs0.size(); ++a)
        for (std::size_t b = 0; b < subs1.size(); ++b) combos.push_back({a, b});
    std::stable_sort(combos.begin(), combos.end(), [&](const Combo& x, const Combo& y) {
        std::size_t sx = subs0[x.a].size() + subs1[x.b].size(), sy = subs0[y.a].size() + subs1[y.b].size();
        return sx < sy;
    });
    bool complete = true;
    bool layer1 = true;
    for (const auto& cb : combos) {
        bool degenerate = subs0[cb.a].size() == 1 && subs1[cb.b].size() == 1;
        if (!degenerate && layer1) {
            rep.layer1_complete = complete;
            layer1 = false;
        }
        if (deadline.expired()) {
            complete = false;
            break;
        }
        std::array<std::vector<Partition>, 2> support;
        std::array<std::vector<double>, 2> fixed;
        for (auto i : subs0[cb.a]) support[0].push_back(parts[0][i]);
        for (auto i : subs1[cb.b]) support[1].push_back(parts[1][i]);
        for (int p = 0; p < 2; ++p)
            if (support[p].size() == 1) fixed[p] = {1.0};
        detail::SupportEnumerator en(env, support, fixed, opt.lambda_min);
        bool done = en.run(
            [&](const detail::SupportEnumerator::Leaf& leaf) {
                for (auto& c : detail::refine_leaf(env, leaf, support, mode, d, rep.lp_count))
                    detail::add_unique_candidate(rep.candidates, std::move(c));
                return !deadline.expired();
            },
            deadline);
        rep.lp_count += en.lp_count();
        ++rep.supports_examined;
        if (!done || deadline.expired()) {
            complete = false;
            break;
        }
    }
    if (layer1) rep.layer1_complete = complete;
    rep.layer2_complete = max_s > 1 && complete;
    if (!rep.candidates.empty())
        rep.verdict = SearchVerdict::Found;
    else
        rep.verdict = complete ? SearchVerdict::ExhaustivelyRefuted : SearchVerdict::NotFound;
    return rep;
}

}  // namespace cabee
