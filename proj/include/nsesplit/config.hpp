#pragma once

#include <filesystem>
#include <string>

#include "nsesplit/harness.hpp"

namespace nsesplit {

/// Everything a run needs, parsed from one JSON config file. Every model
/// constant (eps, K_i, L_i, R_i, c0, p, M, ...) is a named key.
struct ExperimentConfig {
    std::string experiment = "validate"; // validate | simulate | moments |
                                         // diffs | rate | exceedance
    HarnessConfig harness;
    std::string out_dir = "out";
    bool strict = false;     // warnings from assumption checks fail the run
    bool snapshots = false;  // simulate: write .snap fields per grid point

    bool operator==(const ExperimentConfig& o) const;
};

ExperimentConfig parse_config_text(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& file);
std::string config_to_json(const ExperimentConfig& cfg);

/// manifest.json payload: tool version + the full config (round-trips to
/// an identical ExperimentConfig).
std::string manifest_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_manifest(const std::string& manifest_text);

std::string default_config_json();

} // namespace nsesplit
