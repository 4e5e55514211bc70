#pragma once

#include <optional>

#include "cabee/applications/density.hpp"
#include "cabee/clustering.hpp"
#include "cabee/strategy.hpp"

namespace cabee {

// U_i = -(1-r)(a_i - theta)^2 - r(a_i - a_j)^2 over a weighted grid of fundamentals.
struct BeautyContestSpec {
    double r = 0.5;
    std::vector<double> theta;    // ascending
    std::vector<double> weights;  // sums to 1
    int K = 2;

    std::vector<std::string> validate() const {
        std::vector<std::string> out;
        if (!(r > 0 && r < 1)) out.push_back("r must lie in (0,1)");
        if (theta.empty()) out.push_back("theta grid empty");
        if (theta.size() != weights.size()) out.push_back("theta grid and weights differ in size");
        double s = 0;
        for (double w : weights) {
            if (!(w > 0)) out.push_back("grid weight not positive");
            s += w;
        }
        if (std::abs(s - 1) > 1e-9) out.push_back("grid weights sum to " + fmt_num(s));
        for (std::size_t k = 1; k < theta.size(); ++k)
            if (!(theta[k] > theta[k - 1])) {
                out.push_back("theta grid must be strictly increasing");
                break;
            }
        if (K < 1) out.push_back("K must be at least 1");
        return out;
    }
};

inline void require_valid(const BeautyContestSpec& s) {
    auto v = s.validate();
    if (!v.empty()) throw Error("beauty contest: " + v.front());
}

// Cell midpoints of [lo, hi] with density weights.
inline BeautyContestSpec beauty_grid(double r, std::size_t n, int K, const Density& f = Density::uniform(),
                                     double lo = 0, double hi = 1) {
    BeautyContestSpec s;
    s.r = r;
    s.K = K;
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double a = lo + (hi - lo) * double(i) / double(n), b = lo + (hi - lo) * double(i + 1) / double(n);
        s.theta.push_back(0.5 * (a + b));
        s.weights.push_back(interval_mass(f, a, b));
        total += s.weights.back();
    }
    for (auto& w : s.weights) w /= total;
    return s;
}

// Partition of grid indices into consecutive blocks starting at the given cut indices.
inline Partition contiguous_partition(std::size_t n, const std::vector<std::size_t>& cuts, int cap) {
    std::vector<int> lab(n);
    int c = 0;
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (next < cuts.size() && cuts[next] == i) {
            if (i > 0) ++c;
            ++next;
        }
        lab[i] = c;
    }
    return Partition(lab, cap);
}

inline std::vector<double> class_means(const BeautyContestSpec& s, const Partition& part) {
    std::vector<double> num(std::size_t(part.n_classes()), 0.0), den(num.size(), 0.0);
    for (std::size_t i = 0; i < s.theta.size(); ++i) {
        num[std::size_t(part.label[i])] += s.weights[i] * s.theta[i];
        den[std::size_t(part.label[i])] += s.weights[i];
    }
    for (std::size_t k = 0; k < num.size(); ++k) num[k] /= den[k];
    return num;
}

// Symmetric ABEE in mean actions: a(theta) = (1-r) theta + r * mean of theta in its class.
inline std::vector<double> beauty_abee(const BeautyContestSpec& s, const Partition& part) {
    require_valid(s);
    if (part.n_games() != s.theta.size()) throw Error("partition does not match the theta grid");
    auto m = class_means(s, part);
    std::vector<double> a(s.theta.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = (1 - s.r) * s.theta[i] + s.r * m[std::size_t(part.label[i])];
    return a;
}

struct BeautyCheck {
    bool ok = false;
    double margin = 0;  // min over points and rival classes of (a - rival)^2 - (a - own)^2
    std::optional<std::size_t> witness;  // grid index (or endpoint index) attaining the margin
};

inline BeautyCheck scalar_local_check(const std::vector<double>& a, const std::vector<int>& label,
                                      const std::vector<double>& proto) {
    BeautyCheck out;
    out.margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.size(); ++i) {
        double own = a[i] - proto[std::size_t(label[i])];
        for (std::size_t k = 0; k < proto.size(); ++k) {
            if (int(k) == label[i]) continue;
            double other = a[i] - proto[k];
            double v = other * other - own * own;
            if (v < out.margin) {
                out.margin = v;
                out.witness = i;
            }
        }
    }
    out.ok = out.margin >= -kLocalTieTol;
    return out;
}

// Local clustering of the grid ABEE under the squared difference of means.
// Prototypes are the class means of the ABEE actions, which equal the theta means.
inline BeautyCheck beauty_cabee_check(const BeautyContestSpec& s, const Partition& part) {
    auto a = beauty_abee(s, part);
    auto m = class_means(s, part);
    for (std::size_t k = 0; k < m.size(); ++k)
        for (std::size_t j = k + 1; j < m.size(); ++j)
            if (std::abs(m[k] - m[j]) < 1e-12) throw Error("class means are not distinct");
    return scalar_local_check(a, part.label, m);
}

// Same check on a continuum [e_0, e_K] split into intervals. Actions are affine on
// each interval, so interval endpoints bind.
inline BeautyCheck beauty_interval_check(double r, const std::vector<double>& endpoints,
                                         const Density& f = Density::uniform()) {
    if (!(r > 0 && r < 1)) throw Error("r must lie in (0,1)");
    std::vector<double> m;
    for (std::size_t k = 1; k < endpoints.size(); ++k) {
        if (!(endpoints[k] > endpoints[k - 1])) throw Error("endpoints must be strictly increasing");
        m.push_back(conditional_mean(f, endpoints[k - 1], endpoints[k]));
    }
    std::vector<double> a;
    std::vector<int> label;
    for (std::size_t k = 0; k < m.size(); ++k)
        for (double th : {endpoints[k], endpoints[k + 1]}) {
            a.push_back((1 - r) * th + r * m[k]);
            label.push_back(int(k));
        }
    return scalar_local_check(a, label, m);
}

// Smallest r in (0,1) at which the interval partition is locally clustered, by
// bisection (the clustered set of r is an up-set). nullopt if it fails at r -> 1.
inline std::optional<double> beauty_binding_r(const std::vector<double>& endpoints,
                                              const Density& f = Density::uniform(), double tol = 1e-9) {
    double hi = 1 - 1e-9;
    if (!beauty_interval_check(hi, endpoints, f).ok) return std::nullopt;
    double lo = 1e-9;
    if (beauty_interval_check(lo, endpoints, f).ok) return lo;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        (beauty_interval_check(mid, endpoints, f).ok ? hi : lo) = mid;
    }
    return hi;
}

// ---- finite-action discretisation ----

inline std::vector<double> beauty_action_grid(const BeautyContestSpec& s, std::size_t m) {
    if (m < 2) throw Error("action grid needs at least two points");
    std::vector<double> a(m);
    for (std::size_t k = 0; k < m; ++k)
        a[k] = s.theta.front() + (s.theta.back() - s.theta.front()) * double(k) / double(m - 1);
    return a;
}

inline constexpr std::size_t kBeautyEnvLimit = 20'000'000;  // payoff entries

// One game per grid point, the same action grid for both players.
inline Environment discretize_beauty(const BeautyContestSpec& s, std::size_t n_actions) {
    require_valid(s);
    if (s.theta.size() < std::size_t(s.K)) throw Error("grid has fewer points than classes");
    std::size_t n = s.theta.size();
    if (2 * n * n_actions * n_actions > kBeautyEnvLimit)
        throw SizeError("discretised beauty contest with " + std::to_string(n) + " games and " +
                        std::to_string(n_actions) + " actions exceeds the payoff table limit");
    auto grid = beauty_action_grid(s, n_actions);
    auto env = Environment::make(n, n_actions, n_actions);
    env.prior = s.weights;
    for (std::size_t g = 0; g < n; ++g) env.games[g] = "t" + std::to_string(g);
    for (int p = 0; p < 2; ++p) {
        env.action_values[std::size_t(p)] = grid;
        for (std::size_t k = 0; k < n_actions; ++k) env.actions[std::size_t(p)][k] = fmt_num(grid[k]);
    }
    for (std::size_t g = 0; g < n; ++g)
        for (std::size_t i = 0; i < n_actions; ++i)
            for (std::size_t j = 0; j < n_actions; ++j) {
                double v = -(1 - s.r) * (grid[i] - s.theta[g]) * (grid[i] - s.theta[g]) -
                           s.r * (grid[i] - grid[j]) * (grid[i] - grid[j]);
                env.u(0, i, j, g) = v;
                env.u(1, i, j, g) = v;
            }
    return env;
}

struct BeautyDiscreteAbee {
    std::vector<Mixed> play;           // per game, over the action grid (both players)
    std::vector<double> class_expect;  // mean opponent action per class
    std::vector<double> mean_action;   // per game
};

namespace detail {

// Grid point nearest to x; the lower one on an exact tie.
inline std::size_t nearest_action(const std::vector<double>& grid, double x) {
    auto it = std::lower_bound(grid.begin(), grid.end(), x);
    if (it == grid.begin()) return 0;
    if (it == grid.end()) return grid.size() - 1;
    auto k = std::size_t(it - grid.begin());
    return (grid[k] - x < x - grid[k - 1]) ? k : k - 1;
}

}  // namespace detail

// Symmetric ABEE of the discretised game. The best reply to an expectation with
// mean m is the grid point nearest (1-r) theta + r m, so each class reduces to a
// scalar fixed point m = F(m); F is a nondecreasing step function and the jump
// at the root is closed by mixing the games that switch there.
inline BeautyDiscreteAbee beauty_discrete_abee(const BeautyContestSpec& s, const std::vector<double>& grid,
                                               const Partition& part) {
    require_valid(s);
    if (part.n_games() != s.theta.size()) throw Error("partition does not match the theta grid");
    BeautyDiscreteAbee out;
    out.play.assign(s.theta.size(), Mixed(grid.size(), 0.0));
    out.mean_action.assign(s.theta.size(), 0.0);
    for (const auto& cls : part.classes()) {
        double mass = 0;
        for (auto g : cls) mass += s.weights[g];
        auto F = [&](double m) {
            double v = 0;
            for (auto g : cls) v += s.weights[g] * grid[detail::nearest_action(grid, (1 - s.r) * s.theta[g] + s.r * m)];
            return v / mass;
        };
        double lo = grid.front(), hi = grid.back();
        for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
            double mid = 0.5 * (lo + hi);
            (F(mid) >= mid ? lo : hi) = mid;
        }
        double f_lo = F(lo), f_hi = F(hi);
        double m = f_lo, q = 1;
        if (f_lo != f_hi) {
            m = 0.5 * (lo + hi);
            q = std::clamp((m - f_hi) / (f_lo - f_hi), 0.0, 1.0);
        }
        for (auto g : cls) {
            auto a_lo = detail::nearest_action(grid, (1 - s.r) * s.theta[g] + s.r * lo);
            auto a_hi = detail::nearest_action(grid, (1 - s.r) * s.theta[g] + s.r * hi);
            out.play[g][a_lo] += q;
            out.play[g][a_hi] += 1 - q;
            out.mean_action[g] = q * grid[a_lo] + (1 - q) * grid[a_hi];
        }
        out.class_expect.push_back(m);
    }
    return out;
}

// ---- global clustering restricted to contiguous partitions ----

struct ContiguousPartition {
    std::vector<std::size_t> cuts;  // first index of every class after the first
    double dispersion = 0;
};

namespace detail {

struct PrefixSums {
    std::vector<double> w, wa, waa;
    PrefixSums(const std::vector<double>& a, const std::vector<double>& weight)
        : w(a.size() + 1, 0.0), wa(w), waa(w) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            w[i + 1] = w[i] + weight[i];
            wa[i + 1] = wa[i] + weight[i] * a[i];
            waa[i + 1] = waa[i] + weight[i] * a[i] * a[i];
        }
    }
    // weighted squared deviation from the weighted mean on [i, j)
    double sse(std::size_t i, std::size_t j) const {
        double m = w[j] - w[i], s = wa[j] - wa[i];
        return std::max(0.0, waa[j] - waa[i] - s * s / m);
    }
};

inline void for_each_cut_set(std::size_t n, int K, const std::function<void(const std::vector<std::size_t>&)>& fn) {
    std::vector<std::size_t> cuts;
    std::function<void(std::size_t)> rec = [&](std::size_t from) {
        fn(cuts);
        if (int(cuts.size()) + 1 >= K) return;
        for (std::size_t c = from; c < n; ++c) {
            cuts.push_back(c);
            rec(c + 1);
            cuts.pop_back();
        }
    };
    rec(1);
}

inline double contiguous_dispersion(const PrefixSums& ps, std::size_t n, const std::vector<std::size_t>& cuts) {
    double s = 0;
    std::size_t start = 0;
    for (auto c : cuts) {
        s += ps.sse(start, c);
        start = c;
    }
    return s + ps.sse(start, n);
}

}  // namespace detail

// Minimum-dispersion contiguous partitions (at most K classes) of scalar data on the grid.
inline std::vector<ContiguousPartition> best_contiguous(const std::vector<double>& a, const std::vector<double>& w,
                                                        int K, double tie = kGlobalTieTol) {
    detail::PrefixSums ps(a, w);
    std::vector<ContiguousPartition> all;
    double best = std::numeric_limits<double>::infinity();
    detail::for_each_cut_set(a.size(), K, [&](const std::vector<std::size_t>& cuts) {
        double v = detail::contiguous_dispersion(ps, a.size(), cuts);
        if (v <= best + tie) all.push_back({cuts, v});
        best = std::min(best, v);
    });
    std::vector<ContiguousPartition> out;
    for (auto& c : all)
        if (c.dispersion <= best + tie) out.push_back(std::move(c));
    return out;
}

// Contiguous partitions that are globally clustered (among contiguous partitions
// with at most K classes) with respect to their own ABEE.
inline std::vector<ContiguousPartition> beauty_contiguous_cabee(const BeautyContestSpec& s) {
    require_valid(s);
    const std::size_t n = s.theta.size();
    std::vector<ContiguousPartition> out;
    detail::for_each_cut_set(n, s.K, [&](const std::vector<std::size_t>& cuts) {
        auto a = beauty_abee(s, contiguous_partition(n, cuts, s.K));
        detail::PrefixSums ps(a, s.weights);
        double own = detail::contiguous_dispersion(ps, n, cuts);
        bool ok = true;
        detail::for_each_cut_set(n, s.K, [&](const std::vector<std::size_t>& other) {
            if (ok && detail::contiguous_dispersion(ps, n, other) < own - kGlobalTieTol) ok = false;
        });
        if (ok) out.push_back({cuts, own});
    });
    return out;
}

// Cuts of the equal-mass split into K contiguous blocks of a uniform grid.
inline std::vector<std::size_t> equal_split_cuts(std::size_t n, int K) {
    if (n % std::size_t(K) != 0) throw Error("grid size is not a multiple of K");
    std::vector<std::size_t> cuts;
    for (int k = 1; k < K; ++k) cuts.push_back(n / std::size_t(K) * std::size_t(k));
    return cuts;
}

// Scalars embedded as two-point distributions on {lo, hi}, so that the
// squared-mean divergence on them is the squared difference of the scalars.
inline std::vector<Mixed> scalars_as_mixed(const std::vector<double>& a, double lo, double hi) {
    std::vector<Mixed> out;
    for (double v : a) out.push_back(Mixed{(hi - v) / (hi - lo), (v - lo) / (hi - lo)});
    return out;
}

}  // namespace cabee
