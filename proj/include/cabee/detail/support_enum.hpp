#pragma once

// Support enumeration for environments where both players have two actions.
//
// Each analogy class of each support partition is assigned a pattern: either
// its expectation (probability of the opponent's first action) sits in a closed
// interval between consecutive indifference points, or it sits exactly on one.
// A pattern fixes pure play in every game except the indifferent ones, and the
// remaining unknowns enter linearly once play is written as z = lambda * y.
// Feasibility of each pattern is a small LP; a depth-first search over classes
// prunes infeasible partial patterns.

#include <chrono>
#include <algorithm>
#include <functional>
#include <memory>
#include <optional>

#include "cabee/detail/simplex.hpp"
#include "cabee/strategy.hpp"

namespace cabee::detail {

struct Deadline {
    std::chrono::steady_clock::time_point end = std::chrono::steady_clock::time_point::max();
    static Deadline after_ms(long ms) {
        Deadline d;
        if (ms >= 0) d.end = std::chrono::steady_clock::now() + std::chrono::milliseconds(ms);
        return d;
    }
    bool expired() const { return std::chrono::steady_clock::now() >= end; }
};

enum class Play { Pure0, Pure1, Free };

// Affine expression over LP variables.
struct Affine {
    std::vector<std::pair<std::size_t, double>> terms;
    double c = 0;
    void add(const Affine& o, double w) {
        c += w * o.c;
        for (auto [v, k] : o.terms) terms.emplace_back(v, w * k);
    }
};

struct PatternPoint {
    std::array<std::vector<double>, 2> lambda;
    std::array<std::vector<std::vector<double>>, 2> y;  // P(first action) per [s][game]
};

class SupportEnumerator {
public:
    struct Leaf {
        LinearProgram lp;
        std::vector<double> x;  // a feasible point
        std::function<PatternPoint(const std::vector<double>&)> decode;
    };

    SupportEnumerator(const Environment& env, std::array<std::vector<Partition>, 2> support,
                      std::array<std::vector<double>, 2> fixed_lambda, double lambda_min = 1e-6)
        : env_(env), support_(std::move(support)), fixed_(std::move(fixed_lambda)), lambda_min_(lambda_min) {
        if (env.n_actions(0) != 2 || env.n_actions(1) != 2)
            throw UnsupportedShape("support enumeration needs two actions per player");
        build_units();
    }

    // Visits every feasible full pattern. on_leaf returns false to stop.
    // Returns false when the deadline expired before the search finished.
    bool run(const std::function<bool(const Leaf&)>& on_leaf, const Deadline& deadline) {
        choice_.assign(units_.size(), -1);
        stopped_ = false;
        expired_ = false;
        dfs(0, on_leaf, deadline);
        return !expired_;
    }

    std::size_t lp_count() const { return lp_count_; }

private:
    struct Option {
        bool critical = false;
        double t = 0, lo = 0, hi = 1;
        std::vector<Play> play;  // per game of the unit
    };
    struct Unit {
        int p;
        std::size_t s;
        std::vector<std::size_t> games;
        std::vector<Option> options;
    };

    const Environment& env_;
    std::array<std::vector<Partition>, 2> support_;
    std::array<std::vector<double>, 2> fixed_;
    double lambda_min_;
    std::vector<Unit> units_;
    // unit index of (p, s, game)
    std::array<std::vector<std::vector<std::size_t>>, 2> unit_of_;
    std::vector<int> choice_;
    bool stopped_ = false, expired_ = false;
    std::size_t lp_count_ = 0;

    // D(b) = u(first) - u(second) when the opponent plays its first action with prob b.
    std::pair<double, double> diff(int p, std::size_t g) const {
        double d1 = env_.u(p, 0, 0, g) - env_.u(p, 1, 0, g);
        double d0 = env_.u(p, 0, 1, g) - env_.u(p, 1, 1, g);
        return {d0, d1 - d0};
    }

    Play play_at(int p, std::size_t g, double b) const {
        auto [c0, slope] = diff(p, g);
        double scale = std::max({std::abs(c0), std::abs(c0 + slope), 1.0}) * 1e-12;
        double v = c0 + slope * b;
        if (std::abs(v) <= scale) return Play::Free;
        return v > 0 ? Play::Pure0 : Play::Pure1;
    }

    void build_units() {
        for (int p = 0; p < 2; ++p) {
            unit_of_[p].assign(support_[p].size(), std::vector<std::size_t>(env_.n_games(), 0));
            for (std::size_t s = 0; s < support_[p].size(); ++s) {
                auto cls = support_[p][s].classes();
                for (auto& games : cls) {
                    Unit u{p, s, games, {}};
                    std::vector<double> bps;
                    for (auto g : games) {
                        auto [c0, slope] = diff(p, g);
                        if (std::abs(slope) <= 1e-12 * std::max(std::abs(c0), 1.0)) continue;
                        double t = -c0 / slope;
                        if (t >= -1e-12 && t <= 1 + 1e-12) bps.push_back(std::clamp(t, 0.0, 1.0));
                    }
                    std::sort(bps.begin(), bps.end());
                    std::vector<double> uniq;
                    for (double t : bps)
                        if (uniq.empty() || t - uniq.back() > 1e-12) uniq.push_back(t);
                    std::vector<double> pts{0.0};
                    for (double t : uniq)
                        if (t - pts.back() > 1e-12) pts.push_back(t);
                    if (1.0 - pts.back() > 1e-12) pts.push_back(1.0);
                    for (double t : uniq) {
                        Option o;
                        o.critical = true;
                        o.t = o.lo = o.hi = t;
                        for (auto g : games) o.play.push_back(play_at(p, g, t));
                        u.options.push_back(o);
                    }
                    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
                        Option o;
                        o.lo = pts[k];
                        o.hi = pts[k + 1];
                        double mid = 0.5 * (o.lo + o.hi);
                        for (auto g : games) o.play.push_back(play_at(p, g, mid));
                        u.options.push_back(o);
                    }
                    for (auto g : games) unit_of_[p][s][g] = units_.size();
                    units_.push_back(std::move(u));
                }
            }
        }
        // Interleave players so that constraints bind early in the search.
        std::vector<Unit> order;
        std::size_t ia = 0, ib = 0;
        std::vector<std::size_t> idx_a, idx_b;
        for (std::size_t k = 0; k < units_.size(); ++k) (units_[k].p == 0 ? idx_a : idx_b).push_back(k);
        std::vector<std::size_t> perm;
        while (ia < idx_a.size() || ib < idx_b.size()) {
            if (ia < idx_a.size()) perm.push_back(idx_a[ia++]);
            if (ib < idx_b.size()) perm.push_back(idx_b[ib++]);
        }
        std::vector<std::size_t> inv(units_.size());
        for (std::size_t k = 0; k < perm.size(); ++k) {
            order.push_back(units_[perm[k]]);
            inv[perm[k]] = k;
        }
        units_ = std::move(order);
        for (int p = 0; p < 2; ++p)
            for (auto& row : unit_of_[p])
                for (auto& v : row) v = inv[v];
    }

    Play current_play(int p, std::size_t s, std::size_t g) const {
        std::size_t u = unit_of_[p][s][g];
        if (choice_[u] < 0) return Play::Free;
        const auto& unit = units_[u];
        auto it = std::find(unit.games.begin(), unit.games.end(), g);
        return unit.options[std::size_t(choice_[u])].play[std::size_t(it - unit.games.begin())];
    }

    struct Model {
        LinearProgram lp;
        std::array<std::vector<Affine>, 2> lam;                // per s
        std::array<std::vector<std::vector<Affine>>, 2> z;     // per s, game
    };

    Model build() const {
        Model m;
        for (int p = 0; p < 2; ++p) {
            const bool var = fixed_[p].empty();
            std::vector<std::pair<std::size_t, double>> sum_row;
            for (std::size_t s = 0; s < support_[p].size(); ++s) {
                Affine a;
                if (var) {
                    std::size_t v = m.lp.add_var(1.0);
                    a.terms.emplace_back(v, 1.0);
                    sum_row.emplace_back(v, 1.0);
                    m.lp.add_row({{v, 1.0}}, Sense::Ge, lambda_min_);
                } else {
                    a.c = fixed_[p][s];
                }
                m.lam[p].push_back(a);
            }
            if (var) m.lp.add_row(sum_row, Sense::Eq, 1.0);
            m.z[p].resize(support_[p].size());
            for (std::size_t s = 0; s < support_[p].size(); ++s)
                for (std::size_t g = 0; g < env_.n_games(); ++g) {
                    Affine e;
                    switch (current_play(p, s, g)) {
                        case Play::Pure0: e = m.lam[p][s]; break;
                        case Play::Pure1: break;
                        case Play::Free: {
                            std::size_t v = m.lp.add_var(var ? std::numeric_limits<double>::infinity() : fixed_[p][s]);
                            e.terms.emplace_back(v, 1.0);
                            if (var) m.lp.add_row({{v, 1.0}, {m.lam[p][s].terms[0].first, -1.0}}, Sense::Le, 0.0);
                            break;
                        }
                    }
                    m.z[p][s].push_back(e);
                }
        }
        for (std::size_t u = 0; u < units_.size(); ++u) {
            if (choice_[u] < 0) continue;
            const auto& unit = units_[u];
            const auto& opt = unit.options[std::size_t(choice_[u])];
            const int q = opponent(unit.p);
            double w = 0;
            for (auto g : unit.games) w += env_.prior[g];
            Affine e;
            for (auto g : unit.games)
                for (std::size_t t = 0; t < support_[q].size(); ++t) e.add(m.z[q][t][g], env_.prior[g] / w);
            if (e.terms.empty()) {
                // constant expectation: check directly
                if (opt.critical ? std::abs(e.c - opt.t) > 1e-12 : (e.c < opt.lo - 1e-12 || e.c > opt.hi + 1e-12))
                    m.lp.add_row({}, Sense::Eq, 1.0);  // infeasible marker
                continue;
            }
            if (opt.critical) {
                m.lp.add_row(e.terms, Sense::Eq, opt.t - e.c);
            } else {
                if (opt.lo > 0) m.lp.add_row(e.terms, Sense::Ge, opt.lo - e.c);
                if (opt.hi < 1) m.lp.add_row(e.terms, Sense::Le, opt.hi - e.c);
            }
        }
        return m;
    }

    PatternPoint decode(const Model& m, const std::vector<double>& x) const {
        auto val = [&](const Affine& a) {
            double v = a.c;
            for (auto [i, k] : a.terms) v += k * x[i];
            return v;
        };
        PatternPoint pt;
        for (int p = 0; p < 2; ++p) {
            pt.y[p].resize(support_[p].size());
            for (std::size_t s = 0; s < support_[p].size(); ++s) {
                double lam = val(m.lam[p][s]);
                pt.lambda[p].push_back(lam);
                for (std::size_t g = 0; g < env_.n_games(); ++g) {
                    double z = val(m.z[p][s][g]);
                    pt.y[p][s].push_back(lam > 0 ? std::clamp(z / lam, 0.0, 1.0) : 0.0);
                }
            }
        }
        return pt;
    }

    void dfs(std::size_t depth, const std::function<bool(const Leaf&)>& on_leaf, const Deadline& deadline) {
        if (stopped_ || expired_) return;
        if ((lp_count_ & 63) == 0 && deadline.expired()) {
            expired_ = true;
            return;
        }
        Model m = build();
        ++lp_count_;
        auto x = Tableau::solve(m.lp);
        if (!x) return;
        if (depth == units_.size()) {
            Leaf leaf;
            leaf.lp = m.lp;
            leaf.x = *x;
            auto shared = std::make_shared<Model>(std::move(m));
            leaf.decode = [this, shared](const std::vector<double>& v) { return decode(*shared, v); };
            if (!on_leaf(leaf)) stopped_ = true;
            return;
        }
        for (std::size_t o = 0; o < units_[depth].options.size(); ++o) {
            choice_[depth] = int(o);
            dfs(depth + 1, on_leaf, deadline);
            if (stopped_ || expired_) break;
        }
        choice_[depth] = -1;
    }
};

// Turns a decoded point into per-partition mixed strategies.
inline StrategyProfile profile_from_point(const std::array<std::vector<Partition>, 2>& support,
                                          const PatternPoint& pt) {
    StrategyProfile prof;
    for (int p = 0; p < 2; ++p) {
        prof.player[p].support = support[p];
        for (std::size_t s = 0; s < support[p].size(); ++s) {
            std::vector<Mixed> play;
            for (double y : pt.y[p][s]) play.push_back(Mixed{y, 1.0 - y});
            prof.player[p].play.push_back(std::move(play));
        }
    }
    return prof;
}

}  // namespace cabee::detail
