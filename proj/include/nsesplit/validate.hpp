#pragma once

#include <string>
#include <vector>

#include "nsesplit/config.hpp"

namespace nsesplit {

/// One line of the `validate` experiment's pass/fail table.
struct InvariantCheck {
    std::string group;
    std::string name;
    double measured = 0.0;
    double bound = 0.0;
    bool passed = false;
};

/// Runs the structural invariant suite against the configured model:
/// spectral identities on random fields, normalization, noise statistics
/// and growth/Lipschitz monitors, scheme chaining and linear exactness,
/// and the assumption ledger for the configured constants.
std::vector<InvariantCheck> run_invariant_suite(const ExperimentConfig& cfg);

std::string invariant_table(const std::vector<InvariantCheck>& checks);
bool all_passed(const std::vector<InvariantCheck>& checks);

} // namespace nsesplit
