#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cabee {

// Probability vector over one player's action set.
using Mixed = std::vector<double>;

inline constexpr double kValidationTol = 1e-12;
inline constexpr double kSolverTol = 1e-9;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnsupportedShape : Error {
    using Error::Error;
};
struct SizeError : Error {
    using Error::Error;
};
struct HypothesesUnmet : Error {
    using Error::Error;
};

inline std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

// Two players, indexed 0 ("i", row) and 1 ("j", column).
inline constexpr int opponent(int p) { return 1 - p; }

struct Environment {
    std::vector<std::string> games;
    std::vector<double> prior;
    std::array<std::vector<std::string>, 2> actions;
    // real value of each action; only the mean divergence reads these
    std::array<std::vector<double>, 2> action_values;
    // payoff[p] flattened as ((own * |A_q|) + other) * |games| + game
    std::array<std::vector<double>, 2> payoff;

    std::size_t n_games() const { return games.size(); }
    std::size_t n_actions(int p) const { return actions[p].size(); }

    std::size_t index(int p, std::size_t own, std::size_t other, std::size_t game) const {
        return (own * n_actions(opponent(p)) + other) * n_games() + game;
    }
    double u(int p, std::size_t own, std::size_t other, std::size_t game) const {
        return payoff[p][index(p, own, other, game)];
    }
    double& u(int p, std::size_t own, std::size_t other, std::size_t game) {
        return payoff[p][index(p, own, other, game)];
    }

    // Allocates zero payoffs for the given shape.
    static Environment make(std::size_t n_games, std::size_t n_ai, std::size_t n_aj) {
        Environment env;
        for (std::size_t g = 0; g < n_games; ++g) env.games.push_back("g" + std::to_string(g));
        env.prior.assign(n_games, n_games ? 1.0 / double(n_games) : 0.0);
        for (std::size_t a = 0; a < n_ai; ++a) env.actions[0].push_back("a" + std::to_string(a));
        for (std::size_t a = 0; a < n_aj; ++a) env.actions[1].push_back("a" + std::to_string(a));
        for (int p = 0; p < 2; ++p) {
            env.action_values[p].resize(env.actions[p].size());
            std::iota(env.action_values[p].begin(), env.action_values[p].end(), 0.0);
        }
        env.payoff[0].assign(n_ai * n_aj * n_games, 0.0);
        env.payoff[1].assign(n_ai * n_aj * n_games, 0.0);
        return env;
    }
};

inline Mixed pure(std::size_t n, std::size_t a) {
    Mixed m(n, 0.0);
    m[a] = 1.0;
    return m;
}

inline Mixed uniform_mixed(std::size_t n) { return Mixed(n, 1.0 / double(n)); }

inline bool is_distribution(const Mixed& m, double tol = kValidationTol) {
    if (m.empty()) return false;
    double s = 0;
    for (double v : m) {
        if (!(v >= -tol && v <= 1 + tol)) return false;
        s += v;
    }
    return std::abs(s - 1.0) <= tol * double(m.size());
}

inline std::vector<std::string> validate_environment(const Environment& env) {
    std::vector<std::string> out;
    const char* pname[2] = {"A_i", "A_j"};
    if (env.games.empty()) out.push_back("games empty");
    if (env.prior.size() != env.games.size())
        out.push_back("prior has " + std::to_string(env.prior.size()) + " entries for " +
                      std::to_string(env.games.size()) + " games");
    double s = 0;
    for (std::size_t g = 0; g < env.prior.size(); ++g) {
        if (!(env.prior[g] > 0)) out.push_back("prior[" + std::to_string(g) + "] not strictly positive");
        s += env.prior[g];
    }
    if (!env.prior.empty() && !(std::abs(s - 1.0) <= kValidationTol))
        out.push_back("prior sums to " + fmt_num(s));
    for (int p = 0; p < 2; ++p) {
        if (env.actions[p].empty()) out.push_back(std::string(pname[p]) + " empty");
        if (!env.action_values[p].empty() && env.action_values[p].size() != env.actions[p].size())
            out.push_back(std::string(pname[p]) + " values size mismatch");
    }
    std::size_t expect = env.actions[0].size() * env.actions[1].size() * env.games.size();
    const char* uname[2] = {"payoff_i", "payoff_j"};
    for (int p = 0; p < 2; ++p) {
        if (env.payoff[p].size() != expect)
            out.push_back(std::string(uname[p]) + " has " + std::to_string(env.payoff[p].size()) +
                          " entries, expected " + std::to_string(expect));
        else if (std::any_of(env.payoff[p].begin(), env.payoff[p].end(),
                             [](double v) { return !std::isfinite(v); }))
            out.push_back(std::string(uname[p]) + " has non-finite entries");
    }
    return out;
}

inline void require_valid(const Environment& env) {
    auto v = validate_environment(env);
    if (!v.empty()) throw Error("invalid environment: " + v.front());
}

inline void check_game(const Environment& env, std::size_t game) {
    if (game >= env.n_games()) throw Error("unknown game id " + std::to_string(game));
}

inline double expected_utility(const Environment& env, int player, std::size_t game, const Mixed& own,
                               const Mixed& other) {
    check_game(env, game);
    const int q = opponent(player);
    if (own.size() != env.n_actions(player) || other.size() != env.n_actions(q))
        throw Error("mixed action size does not match action set");
    double v = 0;
    for (std::size_t a = 0; a < own.size(); ++a) {
        if (own[a] == 0) continue;
        double row = 0;
        for (std::size_t b = 0; b < other.size(); ++b) row += other[b] * env.u(player, a, b, game);
        v += own[a] * row;
    }
    return v;
}

// Payoff of each pure action against a mixed opponent action.
inline std::vector<double> action_values_against(const Environment& env, int player, std::size_t game,
                                                 const Mixed& other) {
    std::vector<double> v(env.n_actions(player), 0.0);
    for (std::size_t a = 0; a < v.size(); ++a)
        for (std::size_t b = 0; b < other.size(); ++b) v[a] += other[b] * env.u(player, a, b, game);
    return v;
}

// Largest gain from a pure deviation by `player` in one game.
inline double deviation_gain(const Environment& env, int player, std::size_t game, const Mixed& own,
                             const Mixed& other) {
    auto v = action_values_against(env, player, game, other);
    double cur = 0;
    for (std::size_t a = 0; a < v.size(); ++a) cur += own[a] * v[a];
    return *std::max_element(v.begin(), v.end()) - cur;
}

inline std::pair<Mixed, Mixed> nash_solve_2x2(const Environment& env, std::size_t game) {
    check_game(env, game);
    if (env.n_actions(0) != 2 || env.n_actions(1) != 2)
        throw UnsupportedShape("nash_solve_2x2 needs two actions per player");
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) {
            bool ok_i = env.u(0, a, b, game) >= env.u(0, 1 - a, b, game) - kSolverTol;
            bool ok_j = env.u(1, b, a, game) >= env.u(1, 1 - b, a, game) - kSolverTol;
            if (ok_i && ok_j) return {pure(2, a), pure(2, b)};
        }
    // No pure equilibrium: each player mixes to make the other indifferent.
    // Column indifferent: q*(V00 - V10) + (1-q)*(V01 - V11) = 0 with q = P(row plays 0).
    double c1 = env.u(1, 0, 0, game) - env.u(1, 1, 0, game);
    double c0 = env.u(1, 0, 1, game) - env.u(1, 1, 1, game);
    double q = c0 / (c0 - c1);
    double r1 = env.u(0, 0, 0, game) - env.u(0, 1, 0, game);
    double r0 = env.u(0, 0, 1, game) - env.u(0, 1, 1, game);
    double s = r0 / (r0 - r1);
    return {Mixed{q, 1 - q}, Mixed{s, 1 - s}};
}

// Analogy partition stored as canonical restricted-growth labels, one per game.
struct Partition {
    std::vector<int> label;
    int capacity = 0;

    Partition() = default;
    Partition(std::vector<int> labels, int cap) : label(canonical(std::move(labels))), capacity(cap) {
        if (capacity <= 0) capacity = n_classes();
    }

    static std::vector<int> canonical(std::vector<int> labels) {
        std::vector<int> seen;
        for (int& l : labels) {
            auto it = std::find(seen.begin(), seen.end(), l);
            if (it == seen.end()) {
                seen.push_back(l);
                l = int(seen.size()) - 1;
            } else {
                l = int(it - seen.begin());
            }
        }
        return labels;
    }

    static Partition from_classes(const std::vector<std::vector<std::size_t>>& classes, std::size_t n_games,
                                  int cap) {
        std::vector<int> lab(n_games, -1);
        for (std::size_t c = 0; c < classes.size(); ++c)
            for (auto g : classes[c]) {
                if (g >= n_games || lab[g] != -1) throw Error("classes are not a partition of the games");
                lab[g] = int(c);
            }
        if (std::find(lab.begin(), lab.end(), -1) != lab.end()) throw Error("classes do not cover the games");
        return Partition(lab, cap);
    }
    static Partition finest(std::size_t n, int cap = 0) {
        std::vector<int> lab(n);
        std::iota(lab.begin(), lab.end(), 0);
        return Partition(lab, cap ? cap : int(n));
    }
    static Partition coarsest(std::size_t n, int cap = 1) { return Partition(std::vector<int>(n, 0), cap); }

    std::size_t n_games() const { return label.size(); }
    int n_classes() const { return label.empty() ? 0 : *std::max_element(label.begin(), label.end()) + 1; }

    std::vector<std::vector<std::size_t>> classes() const {
        std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(n_classes()));
        for (std::size_t g = 0; g < label.size(); ++g) out[std::size_t(label[g])].push_back(g);
        return out;
    }

    bool valid() const { return !label.empty() && n_classes() <= capacity; }

    std::string to_string(const std::vector<std::string>* names = nullptr) const {
        std::string s = "{";
        auto cls = classes();
        for (std::size_t c = 0; c < cls.size(); ++c) {
            s += c ? ",{" : "{";
            for (std::size_t k = 0; k < cls[c].size(); ++k) {
                if (k) s += ",";
                s += names ? (*names)[cls[c][k]] : std::to_string(cls[c][k]);
            }
            s += "}";
        }
        return s + "}";
    }

    friend bool operator==(const Partition& a, const Partition& b) { return a.label == b.label; }
    friend bool operator!=(const Partition& a, const Partition& b) { return !(a == b); }
    friend bool operator<(const Partition& a, const Partition& b) { return a.label < b.label; }
};

}  // namespace cabee
