#include "nsesplit/config.hpp"

#include <fstream>

#include <json.hpp>

#include "nsesplit/cli.hpp"

namespace nsesplit {

using nlohmann::ordered_json;

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
    return experiment == o.experiment && harness == o.harness && out_dir == o.out_dir &&
           strict == o.strict && snapshots == o.snapshots;
}

namespace {

ordered_json constants_json(const GrowthConstants& c) {
    return ordered_json{{"K0", c.K0}, {"K1", c.K1}, {"K2", c.K2}, {"L1", c.L1}, {"L2", c.L2}};
}

GrowthConstants constants_from(const ordered_json& j) {
    GrowthConstants c;
    c.K0 = j.at("K0").get<double>();
    c.K1 = j.at("K1").get<double>();
    c.K2 = j.at("K2").get<double>();
    c.L1 = j.at("L1").get<double>();
    c.L2 = j.at("L2").get<double>();
    return c;
}

} // namespace

std::string config_to_json(const ExperimentConfig& cfg) {
    const HarnessConfig& h = cfg.harness;
    const SchemeConfig& s = h.scheme;
    ordered_json j;
    j["experiment"] = cfg.experiment;

    ordered_json js;
    js["T"] = s.T;
    js["n"] = s.n;
    js["eps"] = s.eps;
    js["inner_steps"] = s.inner_steps;
    js["grid"] = {{"N", s.grid.modes_per_dim}, {"L", s.grid.domain_length}};
    js["initial_condition"] = {{"kind", s.ic.kind},
                               {"amplitude", s.ic.amplitude},
                               {"decay_exponent", s.ic.decay_exponent},
                               {"smooth_fraction", s.ic.smooth_fraction},
                               {"j1", s.ic.j1},
                               {"j2", s.ic.j2},
                               {"seed", s.ic.seed},
                               {"per_sample", s.ic.per_sample}};
    j["scheme"] = js;

    ordered_json jn;
    jn["family"] = family_name(s.diffusion.family);
    jn["n_modes"] = s.diffusion.basis.n_modes;
    jn["amplitude"] = s.diffusion.amplitude;
    jn["decay"] = s.diffusion.decay;
    jn["grad_amplitude"] = s.diffusion.grad_amplitude;
    jn["constants_g1"] = constants_json(s.diffusion.g1);
    jn["constants_g2"] = constants_json(s.diffusion.g2);
    j["noise"] = jn;

    j["coriolis"] = {{"c0", s.coriolis.c0},
                     {"R0", s.coriolis.declared_R0},
                     {"R1", s.coriolis.declared_R1}};

    ordered_json je;
    je["n_list"] = h.n_list;
    je["n_ref"] = h.n_ref;
    je["samples"] = h.samples;
    je["p"] = h.p;
    je["master_seed"] = h.master_seed;
    je["workers"] = h.workers;
    if (h.fixed_M.has_value()) je["M"] = *h.fixed_M;
    je["m_percentile"] = h.m_percentile;
    je["reference_check"] = h.reference_check;
    je["z_schedule"] = h.z_schedule;
    je["z_scale"] = h.z_scale;
    j["experiment_params"] = je;

    j["output"] = {{"dir", cfg.out_dir}, {"strict", cfg.strict}, {"snapshots", cfg.snapshots}};
    return j.dump(2);
}

ExperimentConfig parse_config_text(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }
    ExperimentConfig cfg;
    try {
        cfg.experiment = j.value("experiment", std::string("validate"));

        const auto& js = j.at("scheme");
        SchemeConfig& s = cfg.harness.scheme;
        s.T = js.value("T", 1.0);
        s.n = js.value("n", 8);
        s.eps = js.value("eps", 0.0);
        s.inner_steps = js.value("inner_steps", 4);
        const auto& jg = js.at("grid");
        s.grid = make_grid(jg.at("N").get<int>(), jg.value("L", 2.0 * M_PI));
        if (js.contains("initial_condition")) {
            const auto& ji = js.at("initial_condition");
            s.ic.kind = ji.value("kind", std::string("taylor_green"));
            s.ic.amplitude = ji.value("amplitude", 1.0);
            s.ic.decay_exponent = ji.value("decay_exponent", 4.0);
            s.ic.smooth_fraction = ji.value("smooth_fraction", 0.5);
            s.ic.j1 = ji.value("j1", 1);
            s.ic.j2 = ji.value("j2", 0);
            s.ic.seed = ji.value("seed", std::uint64_t{0});
            s.ic.per_sample = ji.value("per_sample", true);
        }

        if (j.contains("noise")) {
            const auto& jn = j.at("noise");
            s.diffusion = make_diffusion(
                family_from_name(jn.value("family", std::string("additive"))),
                jn.value("n_modes", 0), jn.value("amplitude", 0.0), jn.value("decay", 0.0),
                jn.value("grad_amplitude", 0.0), s.eps, s.grid.wavenumber_unit());
            if (jn.contains("constants_g1")) s.diffusion.g1 = constants_from(jn.at("constants_g1"));
            if (jn.contains("constants_g2")) s.diffusion.g2 = constants_from(jn.at("constants_g2"));
        }

        if (j.contains("coriolis")) {
            const auto& jc = j.at("coriolis");
            s.coriolis = make_coriolis(jc.value("c0", 0.0));
            if (jc.contains("R0")) s.coriolis.declared_R0 = jc.at("R0").get<double>();
            if (jc.contains("R1")) s.coriolis.declared_R1 = jc.at("R1").get<double>();
        }

        if (j.contains("experiment_params")) {
            const auto& je = j.at("experiment_params");
            HarnessConfig& h = cfg.harness;
            h.n_list = je.value("n_list", std::vector<int>{});
            h.n_ref = je.value("n_ref", 0);
            h.samples = je.value("samples", 16);
            h.p = je.value("p", 1);
            h.master_seed = je.value("master_seed", std::uint64_t{1});
            h.workers = je.value("workers", 1);
            if (je.contains("M")) h.fixed_M = je.at("M").get<double>();
            h.m_percentile = je.value("m_percentile", 0.95);
            h.reference_check = je.value("reference_check", true);
            h.z_schedule = je.value("z_schedule", std::string("log"));
            h.z_scale = je.value("z_scale", 1.0);
        }

        if (j.contains("output")) {
            const auto& jo = j.at("output");
            cfg.out_dir = jo.value("dir", std::string("out"));
            cfg.strict = jo.value("strict", false);
            cfg.snapshots = jo.value("snapshots", false);
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config field error: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw std::runtime_error("cannot open config file " + file.string());
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return parse_config_text(text);
}

std::string manifest_json(const ExperimentConfig& cfg) {
    ordered_json j;
    j["tool"] = "nse-split";
    j["version"] = kVersion;
    j["config"] = ordered_json::parse(config_to_json(cfg));
    return j.dump(2);
}

ExperimentConfig config_from_manifest(const std::string& manifest_text) {
    const auto j = ordered_json::parse(manifest_text);
    return parse_config_text(j.at("config").dump());
}

std::string default_config_json() {
    ExperimentConfig cfg;
    cfg.experiment = "validate";
    SchemeConfig& s = cfg.harness.scheme;
    s.T = 0.5;
    s.n = 64;
    s.eps = 0.0;
    s.inner_steps = 4;
    s.grid = make_grid(32, 2.0 * M_PI);
    s.ic.kind = "mixed";
    s.ic.amplitude = 1.0;
    s.ic.decay_exponent = 4.0;
    s.ic.smooth_fraction = 0.5;
    s.diffusion = make_diffusion(DiffusionFamily::additive, 8, 0.15, 1.0, 0.0, s.eps,
                                 s.grid.wavenumber_unit());
    s.coriolis = make_coriolis(0.0);
    cfg.harness.n_list = {8, 16, 32, 64};
    cfg.harness.n_ref = 512;
    cfg.harness.samples = 64;
    cfg.harness.p = 1;
    cfg.harness.master_seed = 1;
    cfg.harness.workers = 1;
    return config_to_json(cfg);
}

} // namespace nsesplit
