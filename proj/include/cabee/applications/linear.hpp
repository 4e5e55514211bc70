#pragma once

#include <limits>
#include <optional>
#include <ostream>

#include "cabee/applications/density.hpp"

namespace cabee {

enum class Regime { Complements, Substitutes };

inline const char* regime_name(Regime r) { return r == Regime::Complements ? "complements" : "substitutes"; }
inline Regime parse_regime(const std::string& s) {
    if (s == "complements") return Regime::Complements;
    if (s == "substitutes") return Regime::Substitutes;
    throw Error("unknown regime '" + s + "'");
}

// Best reply A + mu B + mu C E[a_j], mu in [0,1] (complements) or [-1,0] (substitutes).
struct LinearFamilySpec {
    double A = 1, B = 1, C = 0.8;
    Regime regime = Regime::Complements;
    Density density;
    int K = 4;

    double lo() const { return regime == Regime::Complements ? 0.0 : -1.0; }
    double hi() const { return regime == Regime::Complements ? 1.0 : 0.0; }

    std::vector<std::string> validate() const {
        std::vector<std::string> out;
        if (!(C > 0 && C < 1)) out.push_back("C must lie in (0,1)");
        if (K < 1) out.push_back("K must be at least 1");
        try {
            require_positive(density, lo(), hi());
        } catch (const Error& e) {
            out.push_back(e.what());
        }
        return out;
    }
};

inline void require_valid(const LinearFamilySpec& s) {
    auto v = s.validate();
    if (!v.empty()) throw Error("linear family: " + v.front());
}

inline double linear_nash(const LinearFamilySpec& s, double mu) { return (s.A + mu * s.B) / (1 - mu * s.C); }

struct LinearClass {
    double lo = 0, hi = 0;
    double mean = 0;   // E[mu | class]
    double beta = 0;   // expected opponent mean action
    double slope = 0;  // action is A + slope * mu
    double action(double A, double mu) const { return A + slope * mu; }
};

struct LinearAbee {
    std::vector<LinearClass> classes;
    std::size_t class_of(double mu) const {
        for (std::size_t k = 0; k + 1 < classes.size(); ++k)
            if (mu <= classes[k].hi) return k;
        return classes.size() - 1;
    }
};

inline void check_endpoints(const LinearFamilySpec& s, const std::vector<double>& e) {
    if (e.size() < 2) throw Error("need at least two endpoints");
    if (std::abs(e.front() - s.lo()) > 1e-12 || std::abs(e.back() - s.hi()) > 1e-12)
        throw Error("endpoints must span [" + fmt_num(s.lo()) + ", " + fmt_num(s.hi()) + "]");
    for (std::size_t k = 1; k < e.size(); ++k)
        if (!(e[k] > e[k - 1])) throw Error("endpoints must be strictly increasing");
}

inline LinearAbee linear_abee(const LinearFamilySpec& s, const std::vector<double>& endpoints) {
    require_valid(s);
    check_endpoints(s, endpoints);
    LinearAbee out;
    for (std::size_t k = 1; k < endpoints.size(); ++k) {
        LinearClass c;
        c.lo = endpoints[k - 1];
        c.hi = endpoints[k];
        c.mean = conditional_mean(s.density, c.lo, c.hi);
        c.beta = (s.A + s.B * c.mean) / (1 - s.C * c.mean);
        c.slope = (s.B + s.A * s.C) / (1 - s.C * c.mean);
        out.classes.push_back(c);
    }
    return out;
}

struct BoundarySlack {
    double mu = 0;
    // (a - beta_other)^2 - (a - beta_own)^2 on each side of the boundary; >= 0 means clustered
    double left = 0, right = 0;
    bool ok(double tol) const { return left >= -tol && right >= -tol; }
};

struct LinearLocalCheck {
    bool ok = true;
    std::vector<BoundarySlack> boundaries;
    double margin = std::numeric_limits<double>::infinity();  // min slack over every class/endpoint pair
};

// Actions are linear within a class and the slack against a fixed prototype is
// linear in the action, so class endpoints are the binding points.
inline LinearLocalCheck linear_local_check(const LinearFamilySpec& s, const std::vector<double>& endpoints,
                                           double tol = 1e-12) {
    auto ab = linear_abee(s, endpoints);
    LinearLocalCheck out;
    auto slack = [&](double a, std::size_t own, std::size_t other) {
        double dn = a - ab.classes[own].beta, dt = a - ab.classes[other].beta;
        return dt * dt - dn * dn;
    };
    for (std::size_t k = 0; k < ab.classes.size(); ++k)
        for (double mu : {ab.classes[k].lo, ab.classes[k].hi})
            for (std::size_t j = 0; j < ab.classes.size(); ++j)
                if (j != k) out.margin = std::min(out.margin, slack(ab.classes[k].action(s.A, mu), k, j));
    for (std::size_t k = 0; k + 1 < ab.classes.size(); ++k) {
        BoundarySlack b;
        b.mu = ab.classes[k].hi;
        b.left = slack(ab.classes[k].action(s.A, b.mu), k, k + 1);
        b.right = slack(ab.classes[k + 1].action(s.A, b.mu), k + 1, k);
        out.boundaries.push_back(b);
    }
    out.ok = ab.classes.size() < 2 || out.margin >= -tol;
    return out;
}

// Smallest x in (a, hi] with E[mu | (a, x]] = target, or nullopt if even (a, hi] falls short.
inline std::optional<double> invert_conditional_mean(const Density& f, double a, double target, double hi) {
    if (!(a < hi) || conditional_mean(f, a, hi) < target) return std::nullopt;
    double lo_x = a, hi_x = hi;
    for (int it = 0; it < 200 && hi_x - lo_x > 1e-15; ++it) {
        double mid = 0.5 * (lo_x + hi_x);
        if (mid <= a || conditional_mean(f, a, mid) < target)
            lo_x = mid;
        else
            hi_x = mid;
    }
    return hi_x;
}

// Shooting on mu_1: mu_k solves E[mu | (mu_{k-1}, mu_k]] = 2 mu_{k-1} - E[mu | (mu_{k-2}, mu_{k-1}]].
inline std::vector<double> equidistant_partition(const Density& f, int K, double lo = 0, double hi = 1) {
    require_positive(f, lo, hi);
    if (K < 1) throw Error("K must be at least 1");
    if (K == 1) return {lo, hi};
    // returns the sequence, or nullopt when some mu_k would have to exceed hi
    auto shoot = [&](double mu1) -> std::optional<std::vector<double>> {
        std::vector<double> mu{lo, mu1};
        for (int k = 2; k <= K; ++k) {
            double prev = conditional_mean(f, mu[std::size_t(k - 2)], mu[std::size_t(k - 1)]);
            auto next = invert_conditional_mean(f, mu[std::size_t(k - 1)], 2 * mu[std::size_t(k - 1)] - prev, hi);
            if (!next) return std::nullopt;
            mu.push_back(*next);
        }
        return mu;
    };
    double a = lo, b = hi;
    std::vector<double> best;
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        double m = 0.5 * (a + b);
        auto seq = shoot(m);
        if (!seq || seq->back() > hi) {
            b = m;
        } else {
            a = m;
            best = *seq;
            if (hi - seq->back() <= 1e-13) break;
        }
    }
    if (best.empty()) throw Error("equidistant shooting failed");
    if (std::abs(best.back() - hi) > 1e-10) throw Error("equidistant shooting did not reach the upper end");
    best.back() = hi;
    return best;
}

struct CabeeWindow {
    double lower = 0, upper = 0;  // open interval of admissible positions for one boundary
    double center = 0;            // the equidistant point
};

// Per interior boundary of the equidistant partition, the open range of positions
// (others held fixed) for which the partition stays locally clustered.
inline std::vector<CabeeWindow> linear_cabee_window(const LinearFamilySpec& s, double tol = 1e-9) {
    require_valid(s);
    if (s.regime != Regime::Complements) throw Error("CABEE windows are defined for the complements regime only");
    auto eq = equidistant_partition(s.density, s.K, s.lo(), s.hi());
    if (!linear_local_check(s, eq).ok) throw HypothesesUnmet("equidistant partition is not locally clustered");
    std::vector<CabeeWindow> out;
    for (std::size_t k = 1; k + 1 < eq.size(); ++k) {
        auto passes = [&](double x) {
            if (!(x > eq[k - 1] && x < eq[k + 1])) return false;
            auto e = eq;
            e[k] = x;
            return linear_local_check(s, e).ok;
        };
        auto edge = [&](double limit) {
            // scan outward from the centre, then bisect the first failure
            const int steps = 400;
            double in = eq[k];
            for (int j = 1; j <= steps; ++j) {
                double x = eq[k] + (limit - eq[k]) * j / steps;
                if (!passes(x)) {
                    double out_x = x;
                    while (std::abs(out_x - in) > tol) {
                        double mid = 0.5 * (in + out_x);
                        (passes(mid) ? in : out_x) = mid;
                    }
                    return out_x;
                }
                in = x;
            }
            return limit;
        };
        CabeeWindow w;
        w.center = eq[k];
        w.lower = edge(eq[k - 1]);
        w.upper = edge(eq[k + 1]);
        out.push_back(w);
    }
    return out;
}

struct FigureRow {
    double mu = 0;
    double nash = 0;
    double abee = 0;
    std::size_t class_index = 0;
};

// Sampled NE and ABEE curves; each interior boundary appears twice, once with the
// left-class action and once with the right-hand limit.
inline std::vector<FigureRow> linear_figure(const LinearFamilySpec& s, const std::vector<double>& endpoints,
                                            int samples_per_class = 100) {
    auto ab = linear_abee(s, endpoints);
    std::vector<FigureRow> rows;
    for (std::size_t k = 0; k < ab.classes.size(); ++k) {
        const auto& c = ab.classes[k];
        for (int j = 0; j <= samples_per_class; ++j) {
            double mu = j == samples_per_class ? c.hi : c.lo + (c.hi - c.lo) * j / samples_per_class;
            rows.push_back({mu, linear_nash(s, mu), c.action(s.A, mu), k});
        }
    }
    return rows;
}

inline void write_figure_csv(std::ostream& os, const std::vector<FigureRow>& rows) {
    os << "mu,nash_action,abee_action,class_index\n";
    for (const auto& r : rows)
        os << fmt_num(r.mu) << ',' << fmt_num(r.nash) << ',' << fmt_num(r.abee) << ',' << r.class_index << '\n';
}

// Two polylines (NE dashed, ABEE solid, one segment per class) on a fixed canvas.
inline void write_figure_svg(std::ostream& os, const std::vector<FigureRow>& rows, const std::string& title) {
    if (rows.empty()) return;
    const double W = 640, H = 400, pad = 40;
    double x0 = rows.front().mu, x1 = rows.back().mu, y0 = rows.front().abee, y1 = y0;
    for (const auto& r : rows) {
        y0 = std::min({y0, r.nash, r.abee});
        y1 = std::max({y1, r.nash, r.abee});
    }
    if (y1 - y0 < 1e-12) y1 = y0 + 1;
    auto X = [&](double v) { return pad + (v - x0) / (x1 - x0) * (W - 2 * pad); };
    auto Y = [&](double v) { return H - pad - (v - y0) / (y1 - y0) * (H - 2 * pad); };
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<text x=\"" << pad << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n";
    os << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << W - 2 * pad << "\" height=\"" << H - 2 * pad
       << "\" fill=\"none\" stroke=\"#999\"/>\n";
    os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-dasharray=\"4 3\" points=\"";
    for (const auto& r : rows) os << X(r.mu) << ',' << Y(r.nash) << ' ';
    os << "\"/>\n";
    std::size_t start = 0;
    while (start < rows.size()) {
        std::size_t end = start;
        while (end < rows.size() && rows[end].class_index == rows[start].class_index) ++end;
        os << "<polyline fill=\"none\" stroke=\"#ff7f0e\" stroke-width=\"2\" points=\"";
        for (std::size_t k = start; k < end; ++k) os << X(rows[k].mu) << ',' << Y(rows[k].abee) << ' ';
        os << "\"/>\n";
        start = end;
    }
    os << "</svg>\n";
}

}  // namespace cabee
