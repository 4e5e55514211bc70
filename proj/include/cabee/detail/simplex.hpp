#pragma once

// Small dense two-phase simplex (Bland's rule). Sized for the indifference
// systems of the support enumeration: tens of variables and rows.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace cabee::detail {

enum class Sense { Le, Eq, Ge };

struct LinearProgram {
    std::size_t n = 0;  // variables, all >= 0
    std::vector<double> upper;  // +inf when unbounded above
    struct Row {
        std::vector<std::pair<std::size_t, double>> coef;
        Sense sense;
        double rhs;
    };
    std::vector<Row> rows;
    std::vector<double> cost;  // minimised when non-empty

    std::size_t add_var(double ub = std::numeric_limits<double>::infinity()) {
        upper.push_back(ub);
        return n++;
    }
    void add_row(std::vector<std::pair<std::size_t, double>> coef, Sense s, double rhs) {
        rows.push_back({std::move(coef), s, rhs});
    }
};

class Tableau {
public:
    static constexpr double kEps = 1e-11;

    // Returns a feasible (optimal when cost is set) point or nullopt.
    static std::optional<std::vector<double>> solve(const LinearProgram& lp) {
        Tableau t;
        return t.run(lp);
    }

private:
    std::size_t m_ = 0, cols_ = 0;  // cols_ excludes rhs
    std::vector<double> a_;         // (m_+1) x (cols_+1), last row = objective
    std::vector<std::size_t> basis_;
    std::size_t n_struct_ = 0, first_art_ = 0;

    double& at(std::size_t r, std::size_t c) { return a_[r * (cols_ + 1) + c]; }

    void pivot(std::size_t r, std::size_t c) {
        double pv = at(r, c);
        for (std::size_t k = 0; k <= cols_; ++k) at(r, k) /= pv;
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == r) continue;
            double f = at(i, c);
            if (f == 0) continue;
            for (std::size_t k = 0; k <= cols_; ++k) at(i, k) -= f * at(r, k);
        }
        basis_[r] = c;
    }

    // Minimise the objective row over columns < limit. False when unbounded.
    bool optimise(std::size_t limit) {
        for (int iter = 0; iter < 50000; ++iter) {
            std::size_t enter = cols_;
            for (std::size_t c = 0; c < limit; ++c)
                if (at(m_, c) < -kEps) {
                    enter = c;
                    break;
                }
            if (enter == cols_) return true;
            std::size_t leave = m_;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < m_; ++r) {
                double v = at(r, enter);
                if (v > kEps) {
                    double ratio = at(r, cols_) / v;
                    if (ratio < best - 1e-14 || (leave != m_ && std::abs(ratio - best) <= 1e-14 && basis_[r] < basis_[leave])) {
                        best = ratio;
                        leave = r;
                    }
                }
            }
            if (leave == m_) return false;
            pivot(leave, enter);
        }
        return false;
    }

    std::optional<std::vector<double>> run(const LinearProgram& lp) {
        // Collect rows: user rows plus finite upper bounds.
        struct R {
            std::vector<std::pair<std::size_t, double>> coef;
            Sense sense;
            double rhs;
        };
        std::vector<R> rows;
        for (const auto& r : lp.rows) rows.push_back({r.coef, r.sense, r.rhs});
        for (std::size_t v = 0; v < lp.n; ++v)
            if (std::isfinite(lp.upper[v])) rows.push_back({{{v, 1.0}}, Sense::Le, lp.upper[v]});
        for (auto& r : rows)
            if (r.rhs < 0) {
                for (auto& [i, c] : r.coef) c = -c;
                r.rhs = -r.rhs;
                r.sense = r.sense == Sense::Le ? Sense::Ge : r.sense == Sense::Ge ? Sense::Le : Sense::Eq;
            }
        m_ = rows.size();
        n_struct_ = lp.n;
        std::size_t n_slack = 0, n_art = 0;
        for (auto& r : rows) {
            if (r.sense != Sense::Eq) ++n_slack;
            if (r.sense != Sense::Le) ++n_art;
        }
        first_art_ = n_struct_ + n_slack;
        cols_ = first_art_ + n_art;
        a_.assign((m_ + 1) * (cols_ + 1), 0.0);
        basis_.assign(m_, 0);
        std::size_t s = n_struct_, art = first_art_;
        for (std::size_t i = 0; i < m_; ++i) {
            for (auto& [v, c] : rows[i].coef) at(i, v) += c;
            at(i, cols_) = rows[i].rhs;
            if (rows[i].sense == Sense::Le) {
                at(i, s) = 1;
                basis_[i] = s++;
            } else {
                if (rows[i].sense == Sense::Ge) at(i, s++) = -1;
                at(i, art) = 1;
                basis_[i] = art++;
            }
        }
        // Phase 1: minimise the sum of artificials.
        if (n_art) {
            for (std::size_t i = 0; i < m_; ++i)
                if (basis_[i] >= first_art_)
                    for (std::size_t k = 0; k <= cols_; ++k) at(m_, k) -= at(i, k);
            for (std::size_t k = first_art_; k < cols_; ++k) at(m_, k) = 0;
            optimise(first_art_);
            if (-at(m_, cols_) > 1e-9) return std::nullopt;
            // drive remaining artificials out of the basis
            for (std::size_t i = 0; i < m_; ++i) {
                if (basis_[i] < first_art_) continue;
                for (std::size_t c = 0; c < first_art_; ++c)
                    if (std::abs(at(i, c)) > 1e-9) {
                        pivot(i, c);
                        break;
                    }
            }
        }
        // Phase 2 over structural + slack columns only.
        if (!lp.cost.empty()) {
            for (std::size_t k = 0; k <= cols_; ++k) at(m_, k) = 0;
            for (std::size_t v = 0; v < lp.n; ++v) at(m_, v) = lp.cost[v];
            for (std::size_t i = 0; i < m_; ++i) {
                std::size_t b = basis_[i];
                double f = at(m_, b);
                if (f != 0)
                    for (std::size_t k = 0; k <= cols_; ++k) at(m_, k) -= f * at(i, k);
            }
            if (!optimise(first_art_)) return std::nullopt;
        }
        std::vector<double> x(lp.n, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] < n_struct_) x[basis_[i]] = std::max(0.0, at(i, cols_));
        return x;
    }
};

}  // namespace cabee::detail
