#include "nsesplit/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nsesplit/config.hpp"
#include "nsesplit/io.hpp"
#include "nsesplit/validate.hpp"

namespace nsesplit {

namespace {

namespace fs = std::filesystem;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream os(file);
    if (!os) throw std::runtime_error("cannot write " + file.string());
    os << text;
}

int run_validate(const ExperimentConfig& cfg, const fs::path& out) {
    const auto checks = run_invariant_suite(cfg);
    std::cout << invariant_table(checks);
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    bool hard_fail = false, warn = false;
    for (const auto& c : checks) {
        j.push_back({{"group", c.group},
                     {"name", c.name},
                     {"measured", c.measured},
                     {"bound", c.bound},
                     {"passed", c.passed}});
        if (!c.passed) (c.group == "assumptions" ? warn : hard_fail) = true;
    }
    write_text(out / "report.json", j.dump(2) + "\n");
    if (hard_fail) {
        std::cout << "validation FAILED\n";
        return 1;
    }
    if (warn) {
        std::cout << "assumption warnings present\n";
        return cfg.strict ? 2 : 0;
    }
    std::cout << "all invariants hold\n";
    return 0;
}

int run_simulate(const ExperimentConfig& cfg, const fs::path& out) {
    SchemeConfig sc = cfg.harness.scheme;
    sc.seed = cfg.harness.master_seed;
    check_scheme_config(sc);
    const BrownianPath path =
        sample_path(sc.diffusion.basis, sc.n * sc.inner_steps, sc.T, sc.seed);
    TrajectoryOptions opts;
    opts.dense_norms = true;
    opts.y_norms = true;
    opts.x_norms = true;
    const SchemeTrajectory traj = run_scheme(sc, path, opts);

    std::vector<std::vector<std::string>> rows;
    for (const auto& r : traj.dense)
        rows.push_back({format_full(r.t), format_full(r.u_h), format_full(r.u_v),
                        format_full(r.u_da), format_full(r.u_x), format_full(r.y_h),
                        format_full(r.y_v), format_full(r.u_v * r.u_v)});
    write_csv(out / "trajectory.csv",
              {"t", "u_h", "u_v", "u_da", "u_x", "y_h", "y_v", "enstrophy"}, rows);

    if (cfg.snapshots) {
        const fs::path fields = out / "fields";
        fs::create_directories(fields);
        for (int k = 0; k <= traj.n && k < static_cast<int>(traj.u_plus.size()); ++k) {
            char name[32];
            std::snprintf(name, sizeof(name), "u_plus_%04d.snap", k);
            write_field(fields / name, traj.u_plus[k]);
        }
    }
    nlohmann::ordered_json j;
    j["config_hash"] = fnv1a(config_to_json(cfg));
    j["seed"] = sc.seed;
    j["n"] = traj.n;
    j["failed"] = traj.failed();
    if (traj.failed()) {
        j["failure_interval"] = traj.failure->interval;
        j["failure_what"] = traj.failure->what;
    }
    j["terminal_h_norm"] = traj.failed() ? 0.0 : h_norm(traj.u_plus.back());
    write_text(out / "report.json", j.dump(2) + "\n");
    return traj.failed() ? 1 : 0;
}

int warn_status(const ExperimentConfig& cfg) {
    const auto rep = validate_assumptions(cfg.harness.scheme.diffusion,
                                          cfg.harness.scheme.coriolis, cfg.harness.scheme.eps,
                                          std::max(2, cfg.harness.p));
    if (!rep.all_satisfied()) {
        std::cout << "assumption warnings:\n" << rep.to_text();
        return cfg.strict ? 2 : 0;
    }
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"splitting-scheme experiment harness for the stochastic "
                 "Navier-Stokes equations on the torus"};
    app.name("nse-split");

    std::string experiment;
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int workers = 0;
    bool strict = false;
    bool print_default = false;

    app.add_option("experiment", experiment,
                   "validate | simulate | moments | diffs | rate | exceedance "
                   "(defaults to the config's experiment)");
    app.add_option("--config", config_path, "JSON config file");
    auto* seed_opt = app.add_option("--seed", seed, "override the master seed");
    app.add_option("--workers", workers, "cap sample-level parallelism");
    app.add_option("--out", out_dir, "output directory");
    app.add_flag("--strict", strict, "treat assumption warnings as errors");
    app.add_flag("--print-default-config", print_default, "dump the default config and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (print_default) {
            std::cout << default_config_json() << "\n";
            return 0;
        }
        ExperimentConfig cfg = config_path.empty()
                                   ? parse_config_text(default_config_json())
                                   : load_config(config_path);
        if (!experiment.empty()) cfg.experiment = experiment;
        if (seed_opt->count() > 0) cfg.harness.master_seed = seed;
        if (workers > 0) cfg.harness.workers = workers;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (strict) cfg.strict = true;

        const fs::path out(cfg.out_dir);
        std::filesystem::create_directories(out);
        write_text(out / "manifest.json", manifest_json(cfg) + "\n");

        if (cfg.experiment == "validate") return run_validate(cfg, out);
        if (cfg.experiment == "simulate") return run_simulate(cfg, out);

        const int warn = warn_status(cfg);
        if (warn == 2) return 2;

        if (cfg.experiment == "moments") {
            const MomentReport rep = moment_estimates(cfg.harness);
            write_report_csv(out / "report.csv", rep);
            write_text(out / "report.json", report_json(rep) + "\n");
            emit_plots(out, "moments", {"report.csv"}, {});
            std::cout << "moments: " << rep.rows.size() << " resolutions, "
                      << cfg.harness.samples << " samples\n";
            return 0;
        }
        if (cfg.experiment == "diffs") {
            const DiffReport rep = diff_estimates(cfg.harness);
            write_report_csv(out / "report.csv", rep);
            write_text(out / "report.json", report_json(rep) + "\n");
            emit_plots(out, "diffs", {"report.csv"}, rep.slopes);
            for (const auto& s : rep.slopes)
                std::cout << "slope[" << s.stat << "] = " << s.fit.slope << " +- "
                          << s.fit.half_width << "\n";
            return 0;
        }
        if (cfg.experiment == "rate" || cfg.experiment == "exceedance") {
            const RateReport rep = rate_experiment(cfg.harness);
            write_report_csv(out / "report.csv", rep);
            write_exceedance_csv(out / "exceedance.csv", rep);
            write_text(out / "report.json", report_json(rep) + "\n");
            emit_plots(out, "rate", {"report.csv", "exceedance.csv"}, rep.slopes);
            std::cout << "M = " << rep.M << " (" << rep.m_rule << ")\n";
            for (const auto& s : rep.slopes)
                std::cout << "slope[" << s.stat << "] = " << s.fit.slope << " +- "
                          << s.fit.half_width << "\n";
            for (const auto& ex : rep.exceedance)
                std::cout << "exceedance n=" << ex.n << ": " << ex.fraction << "\n";
            if (!rep.reference_check_passed)
                std::cout << "warning: reference halving check failed\n";
            return 0;
        }
        std::cerr << "unknown experiment: " << cfg.experiment << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace nsesplit
