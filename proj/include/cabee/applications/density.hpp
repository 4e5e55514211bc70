#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cabee/env.hpp"

namespace cabee {

inline constexpr double kQuadratureTol = 1e-10;

// Unnormalised density on a parameter interval. Polynomial coefficients are in
// increasing degree; no coefficients means uniform. `custom` overrides both.
struct Density {
    std::vector<double> poly;
    std::function<double(double)> custom;

    static Density uniform() { return {}; }
    static Density polynomial(std::vector<double> c) { return {std::move(c), {}}; }

    double operator()(double x) const {
        if (custom) return custom(x);
        if (poly.empty()) return 1.0;
        double v = 0;
        for (std::size_t i = poly.size(); i-- > 0;) v = v * x + poly[i];
        return v;
    }

    std::string describe() const {
        if (custom) return "custom";
        if (poly.empty()) return "uniform";
        std::string s = "poly[";
        for (std::size_t i = 0; i < poly.size(); ++i) s += (i ? "," : "") + fmt_num(poly[i]);
        return s + "]";
    }
};

namespace detail {

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                           double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6 * (fa + 4 * flm + fm), right = (b - m) / 6 * (fm + 4 * frm + fb);
    double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15 * tol) return left + right + diff / 15;
    return simpson_step(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

}  // namespace detail

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = kQuadratureTol, int max_depth = 48) {
    if (a == b) return 0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6 * (fa + 4 * fm + fb);
    return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

inline double interval_mass(const Density& f, double a, double b) {
    return adaptive_simpson([&](double x) { return f(x); }, a, b);
}

inline double conditional_mean(const Density& f, double a, double b) {
    double mass = interval_mass(f, a, b);
    if (!(mass > 0)) throw Error("interval (" + fmt_num(a) + ", " + fmt_num(b) + "] carries no mass");
    return adaptive_simpson([&](double x) { return x * f(x); }, a, b) / mass;
}

// Nonnegative on [lo, hi], strictly positive in the interior (checked on a grid).
inline void require_positive(const Density& f, double lo, double hi, int samples = 1000) {
    for (int k = 0; k <= samples; ++k) {
        double x = lo + (hi - lo) * k / samples;
        double v = f(x);
        bool interior = k > 0 && k < samples;
        if (!std::isfinite(v) || v < 0 || (interior && !(v > 0)))
            throw Error("density " + f.describe() + " is not positive at " + fmt_num(x));
    }
}

}  // namespace cabee
