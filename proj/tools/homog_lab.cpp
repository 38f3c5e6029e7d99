#include <cstdio>
#include <exception>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "homog/config.hpp"
#include "homog/experiments.hpp"
#include "homog/report.hpp"

int main(int argc, char** argv) {
    CLI::App app{"homog-lab: simulation laboratory for a singular random 1D parabolic problem"};
    app.require_subcommand(1);

    auto* list_cmd = app.add_subcommand("list", "enumerate experiments and their criteria");

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    int workers = 0;
    bool have_seed = false, have_out = false;

    std::vector<CLI::App*> exp_cmds;
    for (const auto& info : homog::experiment_registry()) {
        auto* c = app.add_subcommand(info.name, info.description);
        c->add_option("--config", config_path, "key = value config file");
        c->add_option("--seed", seed, "master seed")->each([&](const std::string&) {
            have_seed = true;
        });
        c->add_option("--workers", workers, "worker thread count (0 = hardware)");
        c->add_option("--out", out_dir, "output directory")->each([&](const std::string&) {
            have_out = true;
        });
        exp_cmds.push_back(c);
    }

    CLI11_PARSE(app, argc, argv);

    if (list_cmd->parsed()) {
        for (const auto& info : homog::experiment_registry()) {
            std::string crit;
            for (const auto& c : info.criteria) crit += (crit.empty() ? "" : ", ") + c;
            std::printf("%-24s %s [%s]\n", info.name.c_str(), info.description.c_str(),
                        crit.c_str());
        }
        return 0;
    }

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        homog::ExperimentConfig cfg = homog::default_experiment_config(name);
        if (!config_path.empty()) {
            const homog::Config file = homog::Config::parse_file(config_path);
            file.require_known(homog::known_config_keys());
            // defaults for this experiment, then file values on top
            homog::ExperimentConfig parsed = homog::experiment_config_from(file, name);
            // experiment_config_from starts from global defaults; re-apply the
            // per-experiment ones for keys the file does not set
            homog::ExperimentConfig merged = cfg;
            if (file.has("run.epsilons")) merged.epsilons = parsed.epsilons;
            if (file.has("run.points")) merged.points = parsed.points;
            if (file.has("run.g")) merged.g_name = parsed.g_name;
            if (file.has("run.n_fields")) merged.n_fields = parsed.n_fields;
            if (file.has("run.n_paths")) merged.n_paths = parsed.n_paths;
            if (file.has("run.n_w")) merged.n_w = parsed.n_w;
            if (file.has("run.c_dt")) merged.c_dt = parsed.c_dt;
            if (file.has("run.dt_limit")) merged.dt_limit = parsed.dt_limit;
            if (file.has("run.delta_bin")) merged.delta_bin = parsed.delta_bin;
            if (file.has("run.delta_w")) merged.delta_w = parsed.delta_w;
            if (file.has("run.pde_dt")) merged.pde_dt = parsed.pde_dt;
            if (file.has("run.trunc_tol")) merged.trunc_tol = parsed.trunc_tol;
            if (file.has("run.n_moll")) merged.n_moll = parsed.n_moll;
            if (file.has("run.gamma")) merged.gamma = parsed.gamma;
            if (file.has("run.xi_radius")) merged.xi_radius = parsed.xi_radius;
            if (file.has("run.seed")) merged.seed = parsed.seed;
            if (file.has("run.workers")) merged.workers = parsed.workers;
            if (file.has("run.out_dir")) merged.out_dir = parsed.out_dir;
            merged.field = parsed.field;
            cfg = merged;
        }
        if (have_seed) cfg.seed = seed;
        if (workers > 0)
            cfg.workers = workers;
        else if (cfg.workers <= 1)
            cfg.workers = static_cast<int>(std::thread::hardware_concurrency());
        if (have_out) cfg.out_dir = out_dir;
        cfg.validate();

        const homog::ExperimentReport report = homog::run_experiment(cfg);
        homog::emit_report(report, cfg.out_dir);
        for (const auto& v : report.verdicts)
            std::printf("%-6s %-24s measured=%-14s threshold=%-12s\n",
                        v.pass ? "PASS" : "FAIL", v.criterion_id.c_str(),
                        homog::format_number(v.measured).c_str(),
                        homog::format_number(v.threshold).c_str());
        std::printf("report written to %s (%.1f s)\n", cfg.out_dir.c_str(),
                    report.runtime_seconds);
        return report.all_pass() ? 0 : 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
