#pragma once

#include <optional>

#include "cabee/equilibrium.hpp"

namespace cabee {

// Employer (player 0: C = control, D = delegate) facing worker types a, b, c
// (player 1: e=0 low effort, e=1 high effort).
struct MonitoringSpec {
    double pa = 0.4, pb = 0.4, pc = 0.2;
    double nu = 0.5;  // employer controls iff P(e=0) >= nu
    double mu = 0.3;  // type c shirks iff P(C) <= mu

    std::vector<std::string> validate() const {
        std::vector<std::string> out;
        if (!(pa > 0 && pb > 0 && pc > 0)) out.push_back("type probabilities must be positive");
        if (std::abs(pa + pb + pc - 1) > kValidationTol) out.push_back("type probabilities must sum to 1");
        if (!(pc <= std::min(pa, pb))) out.push_back("need p_c <= min(p_a, p_b)");
        if (!(pc / (pa + pc) < nu && nu < pb / (pb + pc))) out.push_back("nu outside (p_c/(p_a+p_c), p_b/(p_b+p_c))");
        if (!(mu > 0 && mu < 1)) out.push_back("mu outside (0,1)");
        return out;
    }
};

inline constexpr std::array<int, 2> kMonitoringCapacity{2, 3};

inline Environment build_monitoring(const MonitoringSpec& s) {
    auto v = s.validate();
    if (!v.empty()) throw Error("monitoring: " + v.front());
    auto env = Environment::make(3, 2, 2);
    env.games = {"a", "b", "c"};
    env.prior = {s.pa, s.pb, s.pc};
    env.actions = {std::vector<std::string>{"C", "D"}, std::vector<std::string>{"e0", "e1"}};
    for (std::size_t g = 0; g < 3; ++g) {
        env.u(0, 0, 0, g) = 1 - s.nu;
        env.u(0, 0, 1, g) = -s.nu;
        env.u(0, 1, 0, g) = 0;
        env.u(0, 1, 1, g) = 0;
    }
    // worker [own effort][employer action][type]
    env.u(1, 0, 0, 0) = env.u(1, 0, 1, 0) = 1;  // type a: e=0 dominant
    env.u(1, 1, 0, 1) = env.u(1, 1, 1, 1) = 1;  // type b: e=1 dominant
    env.u(1, 0, 0, 2) = s.mu - 1;
    env.u(1, 0, 1, 2) = s.mu;
    return env;
}

// Employer partitions in canonical label order.
inline Partition monitoring_ac_b() { return Partition({0, 1, 0}, 2); }
inline Partition monitoring_bc_a() { return Partition({0, 1, 1}, 2); }
inline Partition monitoring_ab_c() { return Partition({0, 0, 1}, 2); }

// Worker plays e=0 in a, e=1 in b and e=0 with probability zeta in c; the employer
// mixes {ac},{b} (weight mu) with {bc},{a} and best-responds under each partition.
inline EquilibriumCandidate monitoring_candidate(const MonitoringSpec& s, double zeta, Mode mode,
                                                 const Divergence& d) {
    auto env = build_monitoring(s);
    EquilibriumCandidate c;
    c.mode = mode;
    c.divergence = d;
    auto worker = Partition::finest(3, kMonitoringCapacity[1]);
    std::vector<Mixed> wplay{Mixed{1, 0}, Mixed{0, 1}, Mixed{zeta, 1 - zeta}};
    // canonical order: {bc},{a} = (0,1,1) after {ac},{b} = (0,1,0)
    std::vector<Partition> emp{monitoring_ac_b(), monitoring_bc_a()};
    c.lambda[0] = {emp, {s.mu, 1 - s.mu}};
    c.lambda[1] = PartitionDistribution::degenerate(worker);
    c.profile.player[0].support = emp;
    for (const auto& part : emp) {
        auto beta = consistent_expectation(env, part, wplay);
        std::vector<Mixed> play;
        for (std::size_t g = 0; g < 3; ++g) {
            auto br = analogy_best_response(env, 0, g, beta[std::size_t(part.label[g])]);
            play.push_back(pure(2, br.actions.front()));
        }
        c.profile.player[0].play.push_back(play);
    }
    c.profile.player[1].support = {worker};
    c.profile.player[1].play = {wplay};
    return c;
}

struct MonitoringSolution {
    std::vector<EquilibriumCandidate> candidates;
    SearchVerdict verdict = SearchVerdict::NotFound;
    // local mode: detected open interval of zeta
    std::optional<std::pair<double, double>> zeta_range;
};

// Finds the endpoints of {zeta : candidate passes} by a grid scan refined with bisection.
inline std::optional<std::pair<double, double>> monitoring_zeta_range(const MonitoringSpec& s, Mode mode,
                                                                      const Divergence& d, double step = 1e-3,
                                                                      double tol = 1e-10) {
    auto env = build_monitoring(s);
    auto passes = [&](double z) { return cd_abee_verify(env, monitoring_candidate(s, z, mode, d)).ok; };
    int n = int(std::lround(1 / step));
    int first = -1, last = -1;
    for (int k = 1; k < n; ++k) {
        if (passes(k * step)) {
            if (first < 0) first = k;
            last = k;
        }
    }
    if (first < 0) return std::nullopt;
    auto edge = [&](double in, double out) {
        for (int it = 0; it < 200 && std::abs(in - out) > tol; ++it) {
            double mid = 0.5 * (in + out);
            (passes(mid) ? in : out) = mid;
        }
        return 0.5 * (in + out);
    };
    double lo = edge(first * step, (first - 1) * step);
    double hi = edge(last * step, (last + 1) * step);
    return std::make_pair(lo, hi);
}

inline MonitoringSolution solve_monitoring_cdabee(const MonitoringSpec& s, Mode mode, const Divergence& d,
                                                  long budget_ms = 30000) {
    auto env = build_monitoring(s);
    MonitoringSolution out;
    if (mode == Mode::Global) {
        SearchOptions opt;
        opt.budget_ms = budget_ms;
        opt.max_support = 2;
        auto rep = cd_abee_search(env, kMonitoringCapacity, mode, d, opt);
        out.candidates = std::move(rep.candidates);
        out.verdict = rep.verdict;
        return out;
    }
    if (std::abs(s.pa - s.pb) > 1e-12 || !(s.pa > 1.0 / 3) || std::abs(s.nu - 0.5) < 1e-12)
        throw HypothesesUnmet("local range needs p_a = p_b = p > 1/3 and nu != 1/2");
    out.zeta_range = monitoring_zeta_range(s, mode, d);
    if (out.zeta_range) {
        double mid = 0.5 * (out.zeta_range->first + out.zeta_range->second);
        auto c = monitoring_candidate(s, mid, mode, d);
        if (cd_abee_verify(env, c)) out.candidates.push_back(std::move(c));
    }
    out.verdict = out.candidates.empty() ? SearchVerdict::NotFound : SearchVerdict::Found;
    return out;
}

}  // namespace cabee
