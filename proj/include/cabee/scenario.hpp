#pragma once

#include <chrono>
#include <cstdlib>

#include "cabee/applications/beauty.hpp"
#include "cabee/applications/linear.hpp"
#include "cabee/applications/matching_pennies.hpp"
#include "cabee/applications/monitoring.hpp"
#include "cabee/io.hpp"
#include "cabee/learning.hpp"

namespace cabee {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitBudget = 3;

// Command-line overrides; unset fields fall back to the scenario file.
struct RunFlags {
    std::optional<std::string> mode, divergence;
    std::optional<std::uint64_t> seed;
    std::optional<long> budget_ms;
    int threads = 1;
};

struct OutputFile {
    std::string name;  // relative to the output directory
    std::string content;
};

struct RunOutcome {
    int exit_code = kExitOk;
    json result;
    std::vector<OutputFile> files;
    std::string message;
};

namespace detail {

struct Settings {
    std::string kind, solver, name;
    Mode mode = Mode::Global;
    std::string divergence = "l2";
    std::uint64_t seed = 0;
    long budget_ms = 30000;
    int threads = 1;
    json params;
};

inline Settings read_settings(const json& sc, const RunFlags& f) {
    Settings s;
    auto fmt = get_field<std::string>(sc, "format", "");
    if (fmt != kScenarioFormat) throw FieldError("format", "expected " + std::string(kScenarioFormat));
    s.name = get_field<std::string>(sc, "name", "");
    s.kind = get_field<std::string>(sc, "kind", "");
    s.solver = get_field<std::string>(sc, "solver", "");
    static const std::vector<std::string> kinds{"custom-env", "matching-pennies", "monitoring", "beauty", "linear"};
    static const std::vector<std::string> solvers{"abee", "cabee", "cdabee", "learn1", "learn2", "cluster"};
    if (std::find(kinds.begin(), kinds.end(), s.kind) == kinds.end()) throw FieldError("kind", "unknown kind '" + s.kind + "'");
    if (std::find(solvers.begin(), solvers.end(), s.solver) == solvers.end())
        throw FieldError("solver", "unknown solver '" + s.solver + "'");
    try {
        s.mode = parse_mode(f.mode.value_or(get_or<std::string>(sc, "mode", "global", "")));
    } catch (const FieldError&) {
        throw;
    } catch (const Error& e) {
        throw FieldError("mode", e.what());
    }
    s.divergence = f.divergence.value_or(get_or<std::string>(sc, "divergence", "l2", ""));
    try {
        parse_divergence(s.divergence);
    } catch (const Error& e) {
        throw FieldError("divergence", e.what());
    }
    s.seed = f.seed.value_or(get_or<std::uint64_t>(sc, "seed", 0, ""));
    s.budget_ms = f.budget_ms.value_or(get_or<long>(sc, "budget_ms", 30000, ""));
    s.threads = std::max(1, f.threads);
    s.params = sc.contains("params") ? sc["params"] : json::object();
    return s;
}

inline Divergence make_divergence(const std::string& name) {
    auto k = parse_divergence(name);
    if (k == DivergenceKind::KullbackLeibler) return Divergence::kl();
    if (k == DivergenceKind::SquaredMean) return Divergence::mean({});
    return Divergence::l2();
}

inline json verify_json(const EquilibriumCheck& c) {
    return {{"ok", c.ok}, {"max_gain", c.max_gain}, {"witness", c.witness}};
}

inline json candidate_entry(const Environment& env, const EquilibriumCandidate& c, const std::string& check) {
    json j = candidate_to_json(c, env);
    j["check"] = check;
    EquilibriumCheck chk;
    if (check == "abee") {
        auto r = dist_abee_verify(env, c.lambda, c.profile);
        chk.ok = r.ok;
        chk.max_gain = r.max_gain;
        chk.witness = r.witness;
    } else {
        chk = check == "cabee" ? cabee_verify(env, c) : cd_abee_verify(env, c);
    }
    j["verification"] = verify_json(chk);
    return j;
}

inline std::array<int, 2> read_capacity(const json& p, std::array<int, 2> fallback) {
    if (!p.contains("K")) return fallback;
    auto k = get_field<std::vector<int>>(p, "K", "params");
    if (k.size() != 2 || k[0] < 1 || k[1] < 1) throw FieldError("params.K", "need two positive capacities");
    return {k[0], k[1]};
}

inline MatchingPenniesSpec read_mp(const json& p) {
    MatchingPenniesSpec s;
    s.a = get_or<double>(p, "a", s.a, "params");
    s.b = get_or<double>(p, "b", s.b, "params");
    s.c = get_or<double>(p, "c", s.c, "params");
    auto v = s.validate();
    if (!v.empty()) throw FieldError("params", v.front());
    return s;
}

inline MonitoringSpec read_monitoring(const json& p) {
    MonitoringSpec s;
    s.pa = get_or<double>(p, "pa", s.pa, "params");
    s.pb = get_or<double>(p, "pb", s.pb, "params");
    s.pc = get_or<double>(p, "pc", s.pc, "params");
    s.nu = get_or<double>(p, "nu", s.nu, "params");
    s.mu = get_or<double>(p, "mu", s.mu, "params");
    auto v = s.validate();
    if (!v.empty()) throw FieldError("params", v.front());
    return s;
}

inline Density read_density(const json& p) {
    if (!p.contains("density")) return Density::uniform();
    const auto& d = p["density"];
    auto kind = get_field<std::string>(d, "kind", "params.density");
    if (kind == "uniform") return Density::uniform();
    if (kind == "polynomial") return Density::polynomial(get_field<std::vector<double>>(d, "coefficients", "params.density"));
    throw FieldError("params.density.kind", "unknown density '" + kind + "'");
}

inline json density_json(const Density& d) {
    if (d.poly.empty()) return {{"kind", "uniform"}};
    return {{"kind", "polynomial"}, {"coefficients", d.poly}};
}

inline LinearFamilySpec read_linear(const json& p) {
    LinearFamilySpec s;
    s.A = get_or<double>(p, "A", s.A, "params");
    s.B = get_or<double>(p, "B", s.B, "params");
    s.C = get_or<double>(p, "C", s.C, "params");
    s.regime = parse_regime(get_or<std::string>(p, "regime", "complements", "params"));
    s.K = get_or<int>(p, "K", s.K, "params");
    s.density = read_density(p);
    auto v = s.validate();
    if (!v.empty()) throw FieldError("params", v.front());
    return s;
}

inline std::vector<double> read_endpoints(const json& p, const LinearFamilySpec& s) {
    if (p.contains("endpoints")) {
        auto e = get_field<std::vector<double>>(p, "endpoints", "params");
        try {
            check_endpoints(s, e);
        } catch (const Error& err) {
            throw FieldError("params.endpoints", err.what());
        }
        return e;
    }
    return equidistant_partition(s.density, s.K, s.lo(), s.hi());
}

inline BeautyContestSpec read_beauty(const json& p) {
    double r = get_or<double>(p, "r", 0.5, "params");
    auto n = get_or<std::size_t>(p, "n", 100, "params");
    int K = get_or<int>(p, "K", 2, "params");
    if (n < 1) throw FieldError("params.n", "must be positive");
    auto s = beauty_grid(r, n, K, read_density(p));
    auto v = s.validate();
    if (!v.empty()) throw FieldError("params", v.front());
    return s;
}

// Cuts of an interval partition of [0,1] mapped onto grid midpoints.
inline Partition beauty_partition_from_endpoints(const BeautyContestSpec& s, const std::vector<double>& e) {
    std::vector<std::size_t> cuts;
    for (std::size_t k = 1; k + 1 < e.size(); ++k) {
        auto it = std::upper_bound(s.theta.begin(), s.theta.end(), e[k]);
        cuts.push_back(std::size_t(it - s.theta.begin()));
    }
    return contiguous_partition(s.theta.size(), cuts, std::max(s.K, int(e.size()) - 1));
}

inline PerturbationSpec read_perturbation(const json& l, std::uint64_t seed) {
    PerturbationSpec p;
    p.epsilon = get_or<double>(l, "epsilon", 0.0, "params.learning");
    p.dirichlet_alpha = get_or<double>(l, "dirichlet_alpha", 1.0, "params.learning");
    p.seed = seed;
    auto v = p.validate();
    if (!v.empty()) throw FieldError("params.learning", v.front());
    return p;
}

struct FiniteSetup {
    Environment env;
    std::array<int, 2> K{1, 1};
    std::optional<EquilibriumCandidate> equilibrium;  // used to seed learning runs
};

inline FiniteSetup finite_setup(const Settings& s, const Divergence& d) {
    FiniteSetup f;
    if (s.kind == "matching-pennies") {
        auto spec = read_mp(s.params);
        f.env = build_matching_pennies(spec);
        f.K = read_capacity(s.params, kMatchingPenniesCapacity);
        try {
            f.equilibrium = solve_matching_pennies_cdabee(spec);
        } catch (const HypothesesUnmet&) {
        }
    } else if (s.kind == "monitoring") {
        auto spec = read_monitoring(s.params);
        f.env = build_monitoring(spec);
        f.K = read_capacity(s.params, kMonitoringCapacity);
        double zeta = get_or<double>(s.params, "zeta", 0.5, "params");
        f.equilibrium = monitoring_candidate(spec, zeta, s.mode, d);
    } else if (s.kind == "custom-env") {
        f.env = env_from_json(field(s.params, "env", "params"), "params.env");
        f.K = read_capacity(s.params, {int(f.env.n_games()), int(f.env.n_games())});
    } else {
        throw FieldError("kind", "solver '" + s.solver + "' needs a finite environment");
    }
    return f;
}

inline std::array<Partition, 2> read_partitions(const json& p, const Environment& env, std::array<int, 2> K) {
    auto labels = get_field<std::vector<std::vector<int>>>(p, "partitions", "params");
    if (labels.size() != 2) throw FieldError("params.partitions", "need one label vector per player");
    std::array<Partition, 2> out;
    for (int q = 0; q < 2; ++q) {
        if (labels[std::size_t(q)].size() != env.n_games())
            throw FieldError("params.partitions", "label vector does not match the game count");
        out[std::size_t(q)] = Partition(labels[std::size_t(q)], K[q]);
        if (!out[std::size_t(q)].valid()) throw FieldError("params.partitions", "partition exceeds capacity");
    }
    return out;
}

inline json search_json(const SearchReport& r) {
    return {{"verdict", verdict_name(r.verdict)},
            {"layer1_complete", r.layer1_complete},
            {"layer2_complete", r.layer2_complete},
            {"supports_examined", r.supports_examined},
            {"lp_count", r.lp_count},
            {"notes", r.notes}};
}

inline json state_json(const Environment& env, const PopulationState& st) {
    json players = json::array();
    for (int p = 0; p < 2; ++p) {
        auto l = st.lambda(p);
        json lam = json::array();
        for (std::size_t k = 0; k < l.support.size(); ++k)
            lam.push_back({{"partition", l.support[k].to_string(&env.games)}, {"share", l.weights[k]}});
        players.push_back({{"lambda", lam}, {"aggregate", st.aggregate[std::size_t(p)]}});
    }
    return {{"t", st.t}, {"players", players}, {"events", st.events}};
}

// ---- handlers ----

inline void run_mp_refutation(const Settings& s, RunOutcome& out) {
    double step = get_or<double>(s.params, "grid_step", 0.1, "params");
    if (!(step > 0 && step < 1)) throw FieldError("params.grid_step", "must lie in (0,1)");
    int n = int(std::lround(2 / step));
    long triples = 0, failures = 0;
    double structure_err = 0;
    json counterexamples = json::array();
    for (int i = 1; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                MatchingPenniesSpec spec{i * step, j * step, k * step};
                auto env = build_matching_pennies(spec);
                ++triples;
                const double x[3] = {spec.a, spec.b, spec.c};
                auto col = Partition::finest(3, 3);
                for (auto lab : {std::vector<int>{0, 0, 1}, std::vector<int>{0, 1, 0}, std::vector<int>{0, 1, 1}}) {
                    Partition row(lab, 2);
                    auto res = abee_solve(env, {row, col});
                    // bundled pair x1 < x2, singleton x3
                    std::vector<std::size_t> pair;
                    for (std::size_t g = 0; g < 3; ++g)
                        if (std::count(lab.begin(), lab.end(), lab[g]) == 2) pair.push_back(g);
                    std::size_t x1 = pair[0];
                    for (const auto& prof : res.profiles) {
                        double pl = prof.player[1].play[0][x1][0];
                        structure_err = std::max(structure_err, std::abs(pl - 2 / (2 + x[x1])));
                        for (Mode m : {Mode::Local, Mode::Global}) {
                            EquilibriumCandidate c{degenerate_lambda({row, col}), prof, m, Divergence::l2()};
                            if (cabee_verify(env, c)) {
                                ++failures;
                                if (counterexamples.size() < 10)
                                    counterexamples.push_back(candidate_entry(env, c, "cabee"));
                            }
                        }
                    }
                    if (res.profiles.empty()) ++failures;
                }
            }
    out.result["summary"] = {{"triples", triples},
                             {"grid_step", step},
                             {"refuted", failures == 0},
                             {"abee_structure_max_error", structure_err}};
    out.result["counterexamples"] = counterexamples;
}

inline void run_finite(const Settings& s, RunOutcome& out) {
    auto d = make_divergence(s.divergence);
    if (s.kind == "matching-pennies" && s.solver == "cabee" && s.params.contains("grid_step")) {
        run_mp_refutation(s, out);
        return;
    }
    auto f = finite_setup(s, d);
    out.result["environment"] = env_to_json(f.env);
    json cands = json::array();
    if (s.solver == "abee") {
        auto parts = read_partitions(s.params, f.env, f.K);
        SolveOptions so;
        so.seed = s.seed;
        so.budget_ms = s.budget_ms;
        auto res = abee_solve(f.env, parts, so);
        for (auto& prof : res.profiles)
            cands.push_back(candidate_entry(f.env, {degenerate_lambda(parts), prof, s.mode, d}, "abee"));
        out.result["summary"] = {{"route", res.route}, {"exhaustive", res.exhaustive},
                                 {"found", res.profiles.size()}};
        if (res.status == SolveStatus::NotFoundWithinBudget) out.exit_code = kExitBudget;
    } else if (s.solver == "cabee" || s.solver == "cdabee") {
        bool distributional = s.solver == "cdabee";
        if (distributional && s.kind == "matching-pennies" && !get_or<bool>(s.params, "search", false, "params")) {
            auto c = solve_matching_pennies_cdabee(read_mp(s.params));
            cands.push_back(candidate_entry(f.env, c, "cd_abee"));
            out.result["summary"] = {{"route", "closed-form"}};
        } else if (distributional && s.kind == "monitoring") {
            auto spec = read_monitoring(s.params);
            if (s.params.contains("nu_sweep")) {
                json sweep = json::array();
                for (double nu : get_field<std::vector<double>>(s.params, "nu_sweep", "params")) {
                    auto sp = spec;
                    sp.nu = nu;
                    auto sol = solve_monitoring_cdabee(sp, s.mode, d, s.budget_ms);
                    json e{{"nu", nu}, {"verdict", verdict_name(sol.verdict)}, {"candidates", json::array()}};
                    auto env = build_monitoring(sp);
                    for (const auto& c : sol.candidates) e["candidates"].push_back(candidate_entry(env, c, "cd_abee"));
                    sweep.push_back(e);
                }
                out.result["nu_sweep"] = sweep;
            }
            auto sol = solve_monitoring_cdabee(spec, s.mode, d, s.budget_ms);
            for (const auto& c : sol.candidates) cands.push_back(candidate_entry(f.env, c, "cd_abee"));
            json summ{{"verdict", verdict_name(sol.verdict)}};
            if (sol.zeta_range) summ["zeta_range"] = {sol.zeta_range->first, sol.zeta_range->second};
            out.result["summary"] = summ;
            if (sol.verdict == SearchVerdict::NotFound && s.mode == Mode::Global) out.exit_code = kExitBudget;
        } else {
            SearchOptions so;
            so.budget_ms = s.budget_ms;
            so.distributional = distributional;
            so.max_support = get_or<int>(s.params, "max_support", 2, "params");
            so.solve.seed = s.seed;
            auto rep = cd_abee_search(f.env, f.K, s.mode, d, so);
            for (const auto& c : rep.candidates)
                cands.push_back(candidate_entry(f.env, c, distributional ? "cd_abee" : "cabee"));
            json summ = search_json(rep);
            if (f.equilibrium && s.kind == "matching-pennies") {
                bool hit = false;
                for (const auto& c : rep.candidates) hit = hit || detail::candidate_distance(c, *f.equilibrium) < 1e-7;
                summ["recovers_closed_form"] = hit;
            }
            out.result["summary"] = summ;
            if (rep.verdict == SearchVerdict::NotFound) out.exit_code = kExitBudget;
        }
    } else if (s.solver == "learn1" || s.solver == "learn2") {
        const json l = s.params.contains("learning") ? s.params["learning"] : json::object();
        auto init_kind = get_or<std::string>(l, "init", "equilibrium", "params.learning");
        auto steps = get_or<long>(l, "steps", 100, "params.learning");
        auto ties = parse_tie_policy(get_or<std::string>(l, "ties", "uniform", "params.learning"));
        PopulationState init;
        if (init_kind == "equilibrium") {
            if (!f.equilibrium) throw FieldError("params.learning.init", "no closed-form equilibrium for this kind");
            init = state_from_candidate(f.env, *f.equilibrium);
        } else if (init_kind == "random") {
            init = model2_random_state(f.env, f.K, get_or<std::size_t>(l, "dynasties", 8, "params.learning"), s.seed);
        } else {
            throw FieldError("params.learning.init", "expected 'equilibrium' or 'random'");
        }
        Trajectory tr;
        if (s.solver == "learn1") {
            auto pert = read_perturbation(l, s.seed);
            Model1Options o;
            o.ties = ties;
            o.lloyd = get_or<bool>(l, "lloyd", false, "params.learning");
            o.population = get_or<std::size_t>(l, "population", 10000, "params.learning");
            o.threads = s.threads;
            tr = model1_run(f.env, init, steps, f.K, d, pert, o);
        } else {
            tr = model2_run(f.env, init, steps, d, Model2Options{ties});
        }
        auto steady = steady_state_check(f.env, tr.states.back(), s.solver == "learn1" ? Mode::Global : Mode::Local,
                                         d, f.K, ties);
        out.result["summary"] = {
            {"steps", steps},
            {"stationarity", {{"aggregate_drift", tr.report.aggregate_drift},
                              {"lambda_drift", tr.report.lambda_drift},
                              {"window_start", tr.report.window_start}}},
            {"final_state", state_json(f.env, tr.states.back())},
            {"steady", steady.steady},
            {"steady_witness", steady.witness},
            {"steady_is_equilibrium", steady.equilibrium ? json(*steady.equilibrium) : json(nullptr)}};
        std::ostringstream agg, lam;
        write_aggregate_csv(agg, f.env, tr.states);
        write_lambda_csv(lam, f.env, tr.states);
        out.files.push_back({s.name + ".aggregate.csv", agg.str()});
        out.files.push_back({s.name + ".lambda.csv", lam.str()});
    } else if (s.solver == "cluster") {
        throw FieldError("solver", "cluster runs on explicit data; use kind custom-env with params.data");
    }
    out.result["candidates"] = cands;
}

inline void run_cluster(const Settings& s, RunOutcome& out) {
    auto data = get_field<std::vector<Mixed>>(s.params, "data", "params");
    if (data.empty()) throw FieldError("params.data", "empty");
    auto prior = get_or<std::vector<double>>(s.params, "prior", std::vector<double>(data.size(), 1.0 / double(data.size())),
                                            "params");
    if (prior.size() != data.size()) throw FieldError("params.prior", "size differs from data");
    for (std::size_t g = 0; g < data.size(); ++g)
        if (!is_distribution(data[g], 1e-9)) throw FieldError("params.data[" + std::to_string(g) + "]", "not a distribution");
    int K = get_or<int>(s.params, "clusters", 2, "params");
    auto d = make_divergence(s.divergence);
    if (d.kind == DivergenceKind::SquaredMean) {
        auto values = get_field<std::vector<double>>(s.params, "action_values", "params");
        d = Divergence::mean(values);
    }
    auto g = global_cluster(data, prior, K, d);
    json mins = json::array();
    for (const auto& p : g.minimizers) mins.push_back({{"labels", p.label}, {"classes", p.to_string()}});
    std::vector<Mixed> init;
    for (int k = 0; k < std::min<int>(K, int(data.size())); ++k) init.push_back(data[std::size_t(k)]);
    auto km = kmeans_lloyd(data, prior, K, d, init);
    out.result["summary"] = {
        {"global", {{"dispersion", g.dispersion}, {"minimizers", mins}}},
        {"lloyd", {{"partition", km.partition.to_string()}, {"dispersion", km.dispersion},
                   {"history", km.history}, {"locally_clustered", km.locally_clustered}, {"events", km.events}}}};
    out.result["candidates"] = json::array();
}

inline void run_beauty(const Settings& s, RunOutcome& out) {
    auto spec = read_beauty(s.params);
    auto endpoints = get_or<std::vector<double>>(s.params, "endpoints", {}, "params");
    auto density = read_density(s.params);
    json claims = json::array();
    if (s.solver == "cabee") {
        if (endpoints.size() < 2) throw FieldError("params.endpoints", "need an interval partition of [0,1]");
        auto chk = beauty_interval_check(spec.r, endpoints, density);
        auto bind = beauty_binding_r(endpoints, density);
        auto grid_chk = beauty_cabee_check(spec, beauty_partition_from_endpoints(spec, endpoints));
        claims.push_back({{"type", "beauty_interval_local"},
                          {"r", spec.r},
                          {"endpoints", endpoints},
                          {"density", density_json(density)},
                          {"ok", chk.ok}});
        json rgrid = json::array();
        for (double r : get_or<std::vector<double>>(s.params, "r_grid", {}, "params"))
            rgrid.push_back({{"r", r}, {"ok", beauty_interval_check(r, endpoints, density).ok}});
        out.result["summary"] = {{"locally_clustered", chk.ok},
                                 {"margin", chk.margin},
                                 {"grid_locally_clustered", grid_chk.ok},
                                 {"binding_r", bind ? json(*bind) : json(nullptr)},
                                 {"r_grid", rgrid}};
    } else if (s.solver == "abee") {
        auto part = endpoints.size() >= 2 ? beauty_partition_from_endpoints(spec, endpoints)
                                          : contiguous_partition(spec.theta.size(), equal_split_cuts(spec.theta.size(), spec.K), spec.K);
        auto grid = beauty_action_grid(spec, get_or<std::size_t>(s.params, "actions", spec.theta.size(), "params"));
        auto disc = beauty_discrete_abee(spec, grid, part);
        auto closed = beauty_abee(spec, part);
        double dev = 0;
        for (std::size_t i = 0; i < closed.size(); ++i) dev = std::max(dev, std::abs(disc.mean_action[i] - closed[i]));
        std::ostringstream csv;
        csv << "theta,closed_form,discrete_mean,class_index\n";
        for (std::size_t i = 0; i < closed.size(); ++i)
            csv << fmt_num(spec.theta[i]) << ',' << fmt_num(closed[i]) << ',' << fmt_num(disc.mean_action[i]) << ','
                << part.label[i] << '\n';
        out.files.push_back({s.name + ".csv", csv.str()});
        out.result["summary"] = {{"max_deviation", dev},
                                 {"action_cell", grid[1] - grid[0]},
                                 {"class_expectations", disc.class_expect},
                                 {"class_means", class_means(spec, part)}};
    } else if (s.solver == "cluster") {
        auto sols = beauty_contiguous_cabee(spec);
        json arr = json::array();
        for (const auto& c : sols) arr.push_back({{"cuts", c.cuts}, {"dispersion", c.dispersion}});
        bool equal_unique = false;
        if (spec.theta.size() % std::size_t(spec.K) == 0)
            equal_unique = sols.size() == 1 && sols[0].cuts == equal_split_cuts(spec.theta.size(), spec.K);
        out.result["summary"] = {{"globally_clustered_contiguous", arr}, {"equal_split_unique", equal_unique}};
    } else {
        throw FieldError("solver", "beauty supports abee, cabee and cluster");
    }
    out.result["claims"] = claims;
    out.result["candidates"] = json::array();
}

inline void run_linear(const Settings& s, RunOutcome& out) {
    auto spec = read_linear(s.params);
    auto endpoints = read_endpoints(s.params, spec);
    json claims = json::array();
    auto lc = linear_local_check(spec, endpoints);
    json bounds = json::array();
    for (const auto& b : lc.boundaries) bounds.push_back({{"mu", b.mu}, {"left", b.left}, {"right", b.right}});
    claims.push_back({{"type", "linear_local"},
                      {"A", spec.A}, {"B", spec.B}, {"C", spec.C},
                      {"regime", regime_name(spec.regime)},
                      {"density", density_json(spec.density)},
                      {"endpoints", endpoints},
                      {"ok", lc.ok}});
    json summ{{"endpoints", endpoints}, {"locally_clustered", lc.ok}, {"margin", lc.margin}, {"boundaries", bounds}};
    if (s.solver == "abee") {
        auto ab = linear_abee(spec, endpoints);
        json cls = json::array();
        for (const auto& c : ab.classes)
            cls.push_back({{"lo", c.lo}, {"hi", c.hi}, {"mean", c.mean}, {"beta", c.beta}, {"slope", c.slope}});
        summ["classes"] = cls;
        auto rows = linear_figure(spec, endpoints, get_or<int>(s.params, "samples_per_class", 100, "params"));
        std::ostringstream csv, svg;
        write_figure_csv(csv, rows);
        write_figure_svg(svg, rows, s.name);
        out.files.push_back({s.name + ".csv", csv.str()});
        out.files.push_back({s.name + ".svg", svg.str()});
    } else if (s.solver == "cabee") {
        if (spec.regime == Regime::Complements) {
            json win = json::array();
            for (const auto& w : linear_cabee_window(spec))
                win.push_back({{"center", w.center}, {"lower", w.lower}, {"upper", w.upper}});
            summ["windows"] = win;
        }
    } else {
        throw FieldError("solver", "linear supports abee and cabee");
    }
    out.result["summary"] = summ;
    out.result["claims"] = claims;
    out.result["candidates"] = json::array();
}

}  // namespace detail

// Dispatches one scenario document. Validation problems become exit code 2 with
// the offending field named in the message.
inline RunOutcome run_scenario(const json& scenario, const RunFlags& flags = {}) {
    RunOutcome out;
    auto t0 = std::chrono::steady_clock::now();
    try {
        auto s = detail::read_settings(scenario, flags);
        out.result = {{"format", kResultFormat},
                      {"version", kVersion},
                      {"scenario", scenario},
                      {"effective", {{"mode", mode_name(s.mode)},
                                     {"divergence", s.divergence},
                                     {"seed", s.seed},
                                     {"budget_ms", s.budget_ms}}}};
        if (s.solver == "cluster" && s.kind == "custom-env")
            detail::run_cluster(s, out);
        else if (s.kind == "beauty")
            detail::run_beauty(s, out);
        else if (s.kind == "linear")
            detail::run_linear(s, out);
        else
            detail::run_finite(s, out);
        out.result["status"] = out.exit_code == kExitBudget ? "budget_exhausted" : "ok";
    } catch (const HypothesesUnmet& e) {
        out.exit_code = kExitValidation;
        out.message = std::string("hypotheses unmet: ") + e.what();
        out.result["status"] = "hypotheses_unmet";
        out.result["error"] = out.message;
    } catch (const Error& e) {
        out.exit_code = kExitValidation;
        out.message = e.what();
        out.result["status"] = "invalid";
        out.result["error"] = out.message;
    } catch (const json::exception& e) {
        out.exit_code = kExitValidation;
        out.message = e.what();
        out.result["status"] = "invalid";
        out.result["error"] = out.message;
    }
    out.result["timing"] = {
        {"wall_ms", std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count()}};
    return out;
}

struct VerifyOutcome {
    bool ok = true;
    std::vector<std::string> lines;
    std::vector<std::string> warnings;
};

// Re-checks every stored candidate against the stored environment and recomputes
// every stored application claim. Seeds play no role.
inline VerifyOutcome verify_result(const json& result) {
    VerifyOutcome v;
    if (get_or<std::string>(result, "format", "", "") != kResultFormat)
        throw FieldError("format", "not a result document");
    auto ver = get_or<std::string>(result, "version", "", "");
    if (ver != kVersion) v.warnings.push_back("result written by version " + ver + ", verifying with " + kVersion);
    const json cands = result.contains("candidates") ? result["candidates"] : json::array();
    std::optional<Environment> env;
    if (!cands.empty()) env = env_from_json(field(result, "environment", ""), "environment");
    for (std::size_t k = 0; k < cands.size(); ++k) {
        std::string path = "candidates[" + std::to_string(k) + "]";
        auto c = candidate_from_json(cands[k], path);
        auto check = get_or<std::string>(cands[k], "check", "cd_abee", path);
        EquilibriumCheck chk;
        if (check == "abee") {
            auto r = dist_abee_verify(*env, c.lambda, c.profile);
            chk.ok = r.ok;
            chk.witness = r.witness;
        } else {
            chk = check == "cabee" ? cabee_verify(*env, c) : cd_abee_verify(*env, c);
        }
        v.ok = v.ok && chk.ok;
        v.lines.push_back(path + " (" + check + "): " + (chk.ok ? "ok" : "FAILED " + chk.witness));
    }
    const json claims = result.contains("claims") ? result["claims"] : json::array();
    for (std::size_t k = 0; k < claims.size(); ++k) {
        std::string path = "claims[" + std::to_string(k) + "]";
        const auto& c = claims[k];
        auto type = get_field<std::string>(c, "type", path);
        bool claimed = get_field<bool>(c, "ok", path), actual = false;
        if (type == "linear_local") {
            auto spec = detail::read_linear(c);
            actual = linear_local_check(spec, get_field<std::vector<double>>(c, "endpoints", path)).ok;
        } else if (type == "beauty_interval_local") {
            actual = beauty_interval_check(get_field<double>(c, "r", path),
                                           get_field<std::vector<double>>(c, "endpoints", path), detail::read_density(c))
                         .ok;
        } else {
            throw FieldError(path + ".type", "unknown claim '" + type + "'");
        }
        bool ok = claimed == actual;
        v.ok = v.ok && ok;
        v.lines.push_back(path + " (" + type + "): " + (ok ? "ok" : "FAILED claim does not reproduce"));
    }
    return v;
}

struct ScenarioInfo {
    std::string name, description, path;
};

inline std::string scenario_dir() {
    if (const char* e = std::getenv("CABEE_SCENARIOS")) return e;
#ifdef CABEE_SCENARIO_DIR
    return CABEE_SCENARIO_DIR;
#else
    return "scenarios";
#endif
}

inline std::vector<ScenarioInfo> list_scenarios(const std::string& dir = scenario_dir()) {
    std::vector<ScenarioInfo> out;
    if (!std::filesystem::is_directory(dir)) return out;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.path().extension() != ".json") continue;
        auto j = read_json_file(e.path().string());
        out.push_back({get_or<std::string>(j, "name", e.path().stem().string(), ""),
                       get_or<std::string>(j, "description", "", ""), e.path().string()});
    }
    std::sort(out.begin(), out.end(), [](const ScenarioInfo& a, const ScenarioInfo& b) { return a.name < b.name; });
    return out;
}

// Bundled name or filesystem path.
inline std::string resolve_scenario(const std::string& ref) {
    if (std::filesystem::exists(ref)) return ref;
    auto p = std::filesystem::path(scenario_dir()) / (ref + ".json");
    if (std::filesystem::exists(p)) return p.string();
    throw Error("no scenario '" + ref + "' (not a file, not bundled in " + scenario_dir() + ")");
}

}  // namespace cabee
