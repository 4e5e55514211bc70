#pragma once

#include "cabee/equilibrium.hpp"

namespace cabee {

// Three matching-pennies games G_x, x in {a, b, c}; the row payoff on (U, L) is 1 + x.
struct MatchingPenniesSpec {
    double a = 0.5, b = 1.0, c = 1.5;

    std::vector<std::string> validate() const {
        std::vector<std::string> out;
        if (!(0 < a && a < b && b < c && c < 2)) out.push_back("need 0 < a < b < c < 2");
        return out;
    }
};

inline Environment build_matching_pennies(const MatchingPenniesSpec& s) {
    auto v = s.validate();
    if (!v.empty()) throw Error("matching pennies: " + v.front());
    auto env = Environment::make(3, 2, 2);
    env.games = {"a", "b", "c"};
    env.prior = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    env.actions = {std::vector<std::string>{"U", "D"}, std::vector<std::string>{"L", "R"}};
    const double x[3] = {s.a, s.b, s.c};
    for (std::size_t g = 0; g < 3; ++g) {
        // row: (U,L)=1+x, (U,R)=0, (D,L)=0, (D,R)=1
        env.u(0, 0, 0, g) = 1 + x[g];
        env.u(0, 0, 1, g) = 0;
        env.u(0, 1, 0, g) = 0;
        env.u(0, 1, 1, g) = 1;
        // column, indexed [own column][other row]: (U,L)=0, (U,R)=1, (D,L)=1, (D,R)=0
        env.u(1, 0, 0, g) = 0;
        env.u(1, 1, 0, g) = 1;
        env.u(1, 0, 1, g) = 1;
        env.u(1, 1, 1, g) = 0;
    }
    return env;
}

// Row player: two classes; column player: unrestricted.
inline constexpr std::array<int, 2> kMatchingPenniesCapacity{2, 3};

// Row mixes An_a = {{a},{b,c}} and An_c = {{c},{a,b}} with weight 1/2 each.
// With p_x the column's L-probability in game x, row is indifferent in c under
// An_a and in a under An_c, and the column mixes everywhere against an aggregate
// row U-probability of 1/2:
//   (p_a + p_b)/2 = (3 p_a + p_c)/4 = 1/(2+a),  (p_b + p_c)/2 = (p_a + 3 p_c)/4 = 1/(2+c),
//   p_b = (p_a + p_c)/2.
inline EquilibriumCandidate solve_matching_pennies_cdabee(const MatchingPenniesSpec& s) {
    auto env = build_matching_pennies(s);
    const double ta = 1 / (2 + s.a), tc = 1 / (2 + s.c);
    const double pa = (3 * ta - tc) / 2, pc = (3 * tc - ta) / 2, pb = (pa + pc) / 2;
    for (double v : {pa, pb, pc})
        if (!(v >= 0 && v <= 1)) throw HypothesesUnmet("column probabilities fall outside [0,1]");
    Partition an_a({0, 1, 1}, 2), an_c({0, 0, 1}, 2);
    EquilibriumCandidate c;
    c.mode = Mode::Global;
    c.divergence = Divergence::l2();
    auto col = Partition::finest(3, kMatchingPenniesCapacity[1]);
    // canonical order: {{a,b},{c}} labels (0,0,1) sorts before {{a},{b,c}} labels (0,1,1)
    c.lambda[0] = {{an_c, an_a}, {0.5, 0.5}};
    c.lambda[1] = PartitionDistribution::degenerate(col);
    const Mixed U{1, 0}, D{0, 1};
    c.profile.player[0].support = {an_c, an_a};
    c.profile.player[0].play = {{D, U, D}, {U, D, U}};
    c.profile.player[1].support = {col};
    c.profile.player[1].play = {{Mixed{pa, 1 - pa}, Mixed{pb, 1 - pb}, Mixed{pc, 1 - pc}}};
    auto chk = cd_abee_verify(env, c);
    if (!chk) throw HypothesesUnmet("constructed candidate fails verification: " + chk.witness);
    return c;
}

}  // namespace cabee
