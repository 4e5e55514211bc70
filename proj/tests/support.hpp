#pragma once

#include <random>

#include "cabee/cabee.hpp"

namespace cabee::gen {

// Hand-rolled generators for property tests; every draw comes from one seeded engine.
struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}

    double unit() { return std::uniform_real_distribution<double>(0, 1)(rng); }
    double range(double lo, double hi) { return lo + (hi - lo) * unit(); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

    // Interior point of the simplex, bounded away from the faces so KL stays finite.
    Mixed simplex(std::size_t n, double floor = 1e-3) {
        Mixed m(n);
        double s = 0;
        for (auto& v : m) s += v = -std::log(std::max(unit(), 1e-300));
        for (auto& v : m) v = floor + (1 - floor * double(n)) * v / s;
        return m;
    }

    std::vector<double> prior(std::size_t n) { return simplex(n, 0.02); }

    std::vector<Mixed> data(std::size_t n, std::size_t dim) {
        std::vector<Mixed> d(n);
        for (auto& x : d) x = simplex(dim);
        return d;
    }

    // Sorted interior endpoints of an interval partition of [lo, hi] with K classes.
    std::vector<double> endpoints(int K, double lo, double hi, double min_gap = 0.02) {
        for (;;) {
            std::vector<double> e{lo, hi};
            for (int k = 1; k < K; ++k) e.push_back(range(lo, hi));
            std::sort(e.begin(), e.end());
            bool ok = true;
            for (std::size_t k = 1; k < e.size(); ++k) ok = ok && e[k] - e[k - 1] >= min_gap;
            if (ok) return e;
        }
    }

    Environment environment(std::size_t games, std::size_t na, std::size_t nb) {
        auto env = Environment::make(games, na, nb);
        env.prior = prior(games);
        for (int p = 0; p < 2; ++p)
            for (auto& v : env.payoff[p]) v = range(-1, 1);
        return env;
    }
};

inline std::size_t bell(std::size_t n) {
    // Bell triangle
    std::vector<std::size_t> row{1};
    for (std::size_t i = 1; i <= n; ++i) {
        std::vector<std::size_t> next{row.back()};
        for (auto v : row) next.push_back(next.back() + v);
        row = std::move(next);
    }
    return row.front();
}

// Number of partitions of n items into exactly k blocks.
inline std::size_t stirling2(std::size_t n, std::size_t k) {
    if (n == k) return 1;
    if (k == 0 || k > n) return 0;
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1);
}

inline std::vector<Mixed> scalars(std::initializer_list<double> xs) {
    std::vector<Mixed> out;
    for (double x : xs) out.push_back({1 - x, x});  // mean x under action values (0, 1)
    return out;
}

}  // namespace cabee::gen
