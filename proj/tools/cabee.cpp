#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "cabee/scenario.hpp"

namespace {

int env_threads() {
    if (const char* t = std::getenv("CABEE_THREADS")) {
        int n = std::atoi(t);
        if (n > 0) return n;
    }
    return 1;
}

int cmd_run(const std::string& scenario, const cabee::RunFlags& flags, const std::string& out_dir) {
    cabee::json doc;
    try {
        doc = cabee::read_json_file(cabee::resolve_scenario(scenario));
    } catch (const cabee::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cabee::kExitValidation;
    }
    auto res = cabee::run_scenario(doc, flags);
    if (res.exit_code == cabee::kExitValidation) {
        std::cerr << "error: " << res.message << '\n';
        return res.exit_code;
    }
    std::string name = doc.value("name", "result");
    std::filesystem::path dir(out_dir);
    cabee::write_atomic(dir / (name + ".json"), res.result.dump(2) + "\n");
    for (const auto& f : res.files) cabee::write_atomic(dir / f.name, f.content);
    std::cout << "status: " << res.result.value("status", "?") << '\n';
    if (res.result.contains("summary")) std::cout << res.result["summary"].dump(2) << '\n';
    std::cout << "wrote " << (dir / (name + ".json")).string() << '\n';
    if (res.exit_code == cabee::kExitBudget) std::cerr << "budget exhausted before the search finished\n";
    return res.exit_code;
}

int cmd_verify(const std::string& path) {
    try {
        auto v = cabee::verify_result(cabee::read_json_file(path));
        for (const auto& w : v.warnings) std::cerr << "warning: " << w << '\n';
        for (const auto& l : v.lines) std::cout << l << '\n';
        std::cout << (v.ok ? "verified" : "verification FAILED") << '\n';
        return v.ok ? 0 : 1;
    } catch (const cabee::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cabee::kExitValidation;
    }
}

int cmd_list() {
    for (const auto& s : cabee::list_scenarios()) std::cout << s.name << "\t" << s.description << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Clustering equilibria solver"};
    app.set_version_flag("--version", std::string(cabee::kVersion));
    app.require_subcommand(1);

    std::string scenario, out_dir = "out", mode, divergence, result_path;
    std::uint64_t seed = 0;
    long budget_ms = 0;
    int threads = 0;

    auto* run = app.add_subcommand("run", "Run a scenario and write a result document");
    run->add_option("--scenario", scenario, "Bundled scenario name or path to a JSON file")->required();
    run->add_option("--mode", mode, "local or global")->check(CLI::IsMember({"local", "global"}));
    run->add_option("--divergence", divergence, "l2, kl or mean")->check(CLI::IsMember({"l2", "kl", "mean"}));
    auto* seed_opt = run->add_option("--seed", seed, "RNG seed");
    auto* budget_opt = run->add_option("--budget-ms", budget_ms, "Search budget in milliseconds")->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--threads", threads, "Worker threads (default $CABEE_THREADS or 1)")->check(CLI::PositiveNumber);

    auto* verify = app.add_subcommand("verify", "Re-check a result document");
    verify->add_option("--result", result_path, "Result JSON")->required();

    auto* list = app.add_subcommand("list_scenarios", "List bundled scenarios");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            cabee::RunFlags f;
            if (!mode.empty()) f.mode = mode;
            if (!divergence.empty()) f.divergence = divergence;
            if (seed_opt->count()) f.seed = seed;
            if (budget_opt->count()) f.budget_ms = budget_ms;
            f.threads = threads > 0 ? threads : env_threads();
            return cmd_run(scenario, f, out_dir);
        }
        if (verify->parsed()) return cmd_verify(result_path);
        if (list->parsed()) return cmd_list();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
