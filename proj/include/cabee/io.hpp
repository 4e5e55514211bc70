#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "cabee/equilibrium.hpp"

namespace cabee {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kScenarioFormat = "cabee-scenario/1";
inline constexpr const char* kResultFormat = "cabee-result/1";

// Field-addressed validation failure; `path` is a dotted JSON path.
struct FieldError : Error {
    FieldError(const std::string& path, const std::string& what) : Error("field '" + path + "': " + what) {}
};

inline const json& field(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw FieldError(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw FieldError(path.empty() ? key : path + "." + key, "missing");
    return *it;
}

template <class T>
T get_as(const json& j, const std::string& path) {
    try {
        return j.get<T>();
    } catch (const json::exception& e) {
        throw FieldError(path, std::string("wrong type (") + e.what() + ")");
    }
}

template <class T>
T get_field(const json& j, const std::string& key, const std::string& path) {
    return get_as<T>(field(j, key, path), path.empty() ? key : path + "." + key);
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return get_field<T>(j, key, path);
}

// ---- environment ----

inline json env_to_json(const Environment& env) {
    json j;
    j["games"] = env.games;
    j["prior"] = env.prior;
    j["actions"] = json::array({env.actions[0], env.actions[1]});
    j["action_values"] = json::array({env.action_values[0], env.action_values[1]});
    json pay = json::array();
    for (int p = 0; p < 2; ++p) {
        json per_game = json::array();
        for (std::size_t g = 0; g < env.n_games(); ++g) {
            json m = json::array();
            for (std::size_t a = 0; a < env.n_actions(p); ++a) {
                json row = json::array();
                for (std::size_t b = 0; b < env.n_actions(opponent(p)); ++b) row.push_back(env.u(p, a, b, g));
                m.push_back(row);
            }
            per_game.push_back(m);
        }
        pay.push_back(per_game);
    }
    j["payoffs"] = pay;  // [player][game][own action][opponent action]
    return j;
}

inline Environment env_from_json(const json& j, const std::string& path = "env") {
    auto games = get_field<std::vector<std::string>>(j, "games", path);
    auto actions = get_field<std::vector<std::vector<std::string>>>(j, "actions", path);
    if (actions.size() != 2) throw FieldError(path + ".actions", "need one action list per player");
    if (games.empty()) throw FieldError(path + ".games", "empty");
    if (actions[0].empty()) throw FieldError(path + ".actions", "A_i empty");
    if (actions[1].empty()) throw FieldError(path + ".actions", "A_j empty");
    auto env = Environment::make(games.size(), actions[0].size(), actions[1].size());
    env.games = games;
    env.actions = {actions[0], actions[1]};
    env.prior = get_field<std::vector<double>>(j, "prior", path);
    if (j.contains("action_values")) {
        auto av = get_field<std::vector<std::vector<double>>>(j, "action_values", path);
        if (av.size() != 2) throw FieldError(path + ".action_values", "need one list per player");
        env.action_values = {av[0], av[1]};
    }
    const auto& pay = field(j, "payoffs", path);
    if (!pay.is_array() || pay.size() != 2) throw FieldError(path + ".payoffs", "need one table per player");
    for (int p = 0; p < 2; ++p) {
        std::string pp = path + ".payoffs[" + std::to_string(p) + "]";
        auto t = get_as<std::vector<std::vector<std::vector<double>>>>(pay[std::size_t(p)], pp);
        if (t.size() != env.n_games()) throw FieldError(pp, "expected one matrix per game");
        for (std::size_t g = 0; g < t.size(); ++g) {
            if (t[g].size() != env.n_actions(p)) throw FieldError(pp, "wrong row count in game " + games[g]);
            for (std::size_t a = 0; a < t[g].size(); ++a) {
                if (t[g][a].size() != env.n_actions(opponent(p)))
                    throw FieldError(pp, "wrong column count in game " + games[g]);
                for (std::size_t b = 0; b < t[g][a].size(); ++b) env.u(p, a, b, g) = t[g][a][b];
            }
        }
    }
    auto problems = validate_environment(env);
    if (!problems.empty()) {
        std::string where = path;
        const auto& msg = problems.front();
        if (msg.find("prior") != std::string::npos) where += ".prior";
        else if (msg.find("values") != std::string::npos) where += ".action_values";
        throw FieldError(where, msg);
    }
    return env;
}

// ---- partitions, candidates ----

inline json partition_to_json(const Partition& p, const Environment& env) {
    return {{"labels", p.label}, {"capacity", p.capacity}, {"classes", p.to_string(&env.games)}};
}

inline Partition partition_from_json(const json& j, const std::string& path) {
    auto labels = get_field<std::vector<int>>(j, "labels", path);
    int cap = get_or<int>(j, "capacity", 0, path);
    Partition p(labels, cap);
    if (!p.valid()) throw FieldError(path, "partition exceeds its capacity");
    return p;
}

inline json divergence_to_json(const Divergence& d) {
    json j{{"kind", divergence_name(d.kind)}};
    if (!d.values.empty()) j["values"] = d.values;
    return j;
}

inline Divergence divergence_from_json(const json& j, const std::string& path) {
    Divergence d;
    d.kind = parse_divergence(get_field<std::string>(j, "kind", path));
    if (j.contains("values")) d.values = get_field<std::vector<double>>(j, "values", path);
    return d;
}

inline json candidate_to_json(const EquilibriumCandidate& c, const Environment& env) {
    json players = json::array();
    for (int p = 0; p < 2; ++p) {
        json parts = json::array();
        for (std::size_t s = 0; s < c.lambda[p].support.size(); ++s) {
            const auto& part = c.lambda[p].support[s];
            json e = partition_to_json(part, env);
            e["weight"] = c.lambda[p].weights[s];
            const auto* play = c.profile.player[p].find(part);
            e["play"] = play ? json(*play) : json::array();
            parts.push_back(e);
        }
        players.push_back({{"partitions", parts}});
    }
    return {{"mode", mode_name(c.mode)}, {"divergence", divergence_to_json(c.divergence)}, {"players", players}};
}

inline EquilibriumCandidate candidate_from_json(const json& j, const std::string& path) {
    EquilibriumCandidate c;
    c.mode = parse_mode(get_field<std::string>(j, "mode", path));
    c.divergence = divergence_from_json(field(j, "divergence", path), path + ".divergence");
    const auto& players = field(j, "players", path);
    if (!players.is_array() || players.size() != 2) throw FieldError(path + ".players", "need two players");
    for (int p = 0; p < 2; ++p) {
        std::string pp = path + ".players[" + std::to_string(p) + "].partitions";
        const auto& parts = field(players[std::size_t(p)], "partitions", path + ".players[" + std::to_string(p) + "]");
        for (std::size_t s = 0; s < parts.size(); ++s) {
            std::string ps = pp + "[" + std::to_string(s) + "]";
            auto part = partition_from_json(parts[s], ps);
            c.lambda[p].support.push_back(part);
            c.lambda[p].weights.push_back(get_field<double>(parts[s], "weight", ps));
            c.profile.player[p].support.push_back(part);
            c.profile.player[p].play.push_back(get_field<std::vector<Mixed>>(parts[s], "play", ps));
        }
    }
    return c;
}

// ---- files ----

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        // the parser message carries line and column
        throw Error(path + ": " + e.what());
    }
}

// Write to a sibling temporary and rename over the target.
inline void write_atomic(const std::filesystem::path& target, const std::string& content) {
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    auto tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw Error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

}  // namespace cabee
