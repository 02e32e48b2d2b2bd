#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nsesplit/cli.hpp"
#include "nsesplit/config.hpp"
#include "nsesplit/io.hpp"
#include "nsesplit/presets.hpp"

using namespace nsesplit;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("nsesplit_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

int cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("nse-split");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string tiny_diffs_config(const fs::path& out) {
    std::ostringstream os;
    os << R"({
  "experiment": "diffs",
  "scheme": {
    "T": 0.25, "eps": 0.0, "inner_steps": 2,
    "grid": {"N": 16},
    "initial_condition": {"kind": "mixed", "amplitude": 0.5, "smooth_fraction": 0.25}
  },
  "noise": {"family": "additive", "n_modes": 4, "amplitude": 0.8, "decay": 1.0},
  "experiment_params": {"n_list": [4, 8, 16, 32], "samples": 8, "p": 2, "master_seed": 5},
  "output": {"dir": ")" << out.string() << R"("}
})";
    return os.str();
}

} // namespace

TEST_CASE("config serialization round-trips exactly") {
    const ExperimentConfig cfg = parse_config_text(default_config_json());
    const ExperimentConfig back = parse_config_text(config_to_json(cfg));
    CHECK(back == cfg);

    const ExperimentConfig from_manifest = config_from_manifest(manifest_json(cfg));
    CHECK(from_manifest == cfg);

    CHECK_THROWS_AS(parse_config_text("{ not json"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text(R"({"scheme": {"grid": {"N": 3}}})"),
                    std::invalid_argument);
}

TEST_CASE("field snapshots round-trip bit-exactly") {
    const fs::path dir = fresh_dir("snap");
    const GridSpec g = make_grid(12, 3.5);
    const VelocityField u = random_band_limited(g, 4);
    write_field(dir / "u.snap", u);
    const VelocityField back = read_field(dir / "u.snap");
    CHECK(back.grid().modes_per_dim == 12);
    CHECK(back.grid().domain_length == 3.5);
    CHECK(back.data() == u.data());

    CHECK_THROWS(read_field(dir / "missing.snap"));
    std::ofstream(dir / "junk.snap") << "nope";
    CHECK_THROWS(read_field(dir / "junk.snap"));
}

TEST_CASE("full-precision formatting survives a parse round trip") {
    for (double v : {1.0 / 3.0, 6.02214076e23, -3.14159e-12, 0.1}) {
        const std::string s = format_full(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("validate runs green on the default configuration") {
    const fs::path dir = fresh_dir("validate");
    CHECK(cli({"validate", "--out", dir.string()}) == 0);
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(fs::exists(dir / "report.json"));
    // manifest round-trips to the same configuration
    ExperimentConfig cfg = parse_config_text(default_config_json());
    cfg.experiment = "validate";
    cfg.out_dir = dir.string();
    CHECK(config_from_manifest(slurp(dir / "manifest.json")) == cfg);
}

TEST_CASE("missing or broken configs exit nonzero") {
    CHECK(cli({"validate", "--config", "/nonexistent/config.json"}) == 1);
    const fs::path dir = fresh_dir("badcfg");
    std::ofstream(dir / "bad.json") << "{ nope";
    CHECK(cli({"validate", "--config", (dir / "bad.json").string()}) == 1);
    CHECK(cli({"frobnicate", "--out", dir.string()}) == 1);
}

TEST_CASE("simulate writes the norm table and snapshots") {
    const fs::path dir = fresh_dir("simulate");
    const fs::path cfg_file = dir / "cfg.json";
    std::ofstream(cfg_file) << R"({
  "experiment": "simulate",
  "scheme": {"T": 0.25, "n": 4, "eps": 0.0, "inner_steps": 2, "grid": {"N": 16},
             "initial_condition": {"kind": "taylor_green", "amplitude": 1.0}},
  "noise": {"family": "additive", "n_modes": 2, "amplitude": 0.3},
  "experiment_params": {"master_seed": 9},
  "output": {"dir": ")" << (dir / "out").string() << R"(", "snapshots": true}
})";
    CHECK(cli({"--config", cfg_file.string()}) == 0);
    CHECK(fs::exists(dir / "out" / "trajectory.csv"));
    CHECK(fs::exists(dir / "out" / "fields" / "u_plus_0000.snap"));
    CHECK(fs::exists(dir / "out" / "fields" / "u_plus_0004.snap"));
    const VelocityField u0 = read_field(dir / "out" / "fields" / "u_plus_0000.snap");
    CHECK(h_norm(u0) == doctest::Approx(h_norm(taylor_green(make_grid(16), 1.0))));

    // the norm table has one row per dense node plus a header
    const std::string csv = slurp(dir / "out" / "trajectory.csv");
    const long rows = std::count(csv.begin(), csv.end(), '\n');
    CHECK(rows == 1 + 4 * (2 + 1));
}

TEST_CASE("diffs experiment writes reports and reruns are byte-identical") {
    const fs::path dir = fresh_dir("diffs");
    const fs::path cfg_file = dir / "cfg.json";
    std::ofstream(cfg_file) << tiny_diffs_config(dir / "out1");
    CHECK(cli({"--config", cfg_file.string()}) == 0);
    CHECK(cli({"--config", cfg_file.string(), "--out", (dir / "out2").string()}) == 0);
    CHECK(slurp(dir / "out1" / "report.csv") == slurp(dir / "out2" / "report.csv"));
    CHECK(slurp(dir / "out1" / "report.json") == slurp(dir / "out2" / "report.json"));
    CHECK(fs::exists(dir / "out1" / "plots" / "diffs_loglog.gp"));

    // a different seed changes the report
    CHECK(cli({"--config", cfg_file.string(), "--seed", "99",
               "--out", (dir / "out3").string()}) == 0);
    CHECK(slurp(dir / "out1" / "report.csv") != slurp(dir / "out3" / "report.csv"));

    // the CSV has a header line plus one row per tested resolution
    const std::string csv = slurp(dir / "out1" / "report.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4);
}

TEST_CASE("rate experiment emits the error and exceedance tables") {
    const fs::path dir = fresh_dir("rate");
    const fs::path cfg_file = dir / "cfg.json";
    std::ofstream(cfg_file) << R"({
  "experiment": "rate",
  "scheme": {"T": 0.25, "eps": 0.0, "inner_steps": 2, "grid": {"N": 16},
             "initial_condition": {"kind": "mixed", "amplitude": 0.5, "smooth_fraction": 0.25}},
  "noise": {"family": "diagonal_multiplicative", "n_modes": 4, "amplitude": 1.0},
  "experiment_params": {"n_list": [4, 8], "n_ref": 64, "samples": 8, "p": 2, "master_seed": 5},
  "output": {"dir": ")" << (dir / "out").string() << R"("}
})";
    CHECK(cli({"--config", cfg_file.string()}) == 0);
    const std::string csv = slurp(dir / "out" / "report.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2);
    CHECK(fs::exists(dir / "out" / "exceedance.csv"));
    CHECK(fs::exists(dir / "out" / "plots" / "rate_loglog.gp"));
    CHECK(fs::exists(dir / "out" / "plots" / "exceedance.gp"));

    // plot scripts reference data by relative path only
    for (const char* name : {"rate_loglog.gp", "exceedance.gp"}) {
        const std::string script = slurp(dir / "out" / "plots" / name);
        CHECK(script.find("'../") != std::string::npos);
        CHECK(script.find(dir.string()) == std::string::npos);
    }
}

TEST_CASE("plot emission requires report names") {
    CHECK_THROWS_AS(emit_plots(fs::temp_directory_path(), "rate", {}, {}),
                    std::invalid_argument);
}

TEST_CASE("strict mode turns assumption warnings into exit code 2") {
    const fs::path dir = fresh_dir("strict");
    const fs::path cfg_file = dir / "cfg.json";
    // gradient-scaled family with a large declared L2 breaks the
    // split-parabolicity inequality at eps = 0.9
    std::ofstream(cfg_file) << R"({
  "experiment": "moments",
  "scheme": {"T": 0.25, "eps": 0.9, "inner_steps": 2, "grid": {"N": 16},
             "initial_condition": {"kind": "taylor_green", "amplitude": 0.5}},
  "noise": {"family": "gradient_scaled", "n_modes": 2, "amplitude": 0.3, "grad_amplitude": 4.0},
  "experiment_params": {"n_list": [4, 8], "samples": 8, "p": 1, "master_seed": 5},
  "output": {"dir": ")" << (dir / "out").string() << R"("}
})";
    CHECK(cli({"--config", cfg_file.string(), "--strict"}) == 2);
    CHECK(cli({"--config", cfg_file.string()}) == 0);
}
