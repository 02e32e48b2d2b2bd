#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nsesplit/rates.hpp"
#include "nsesplit/scheme.hpp"

namespace nsesplit {

/// One estimate with its Monte-Carlo standard error.
struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

/// Common per-n bookkeeping for every statistical report.
struct ReportRow {
    int n = 0;
    int samples = 0;
    int failed = 0; // blow-up guard hits (never silently dropped)
    std::map<std::string, Estimate> stats;
};

struct FittedSlope {
    std::string stat;
    RateFit fit;
};

/// Mean-square differences between the two scheme branches and the
/// auxiliary process, with log-log slope fits.
struct DiffReport {
    int p = 2;
    std::vector<ReportRow> rows;
    std::vector<FittedSlope> slopes; // present when >= 4 values of n
};

/// Uniform-in-n moment estimates plus boundedness diagnostics.
struct MomentReport {
    int p = 1;
    std::vector<std::string> warnings; // unmet assumption hypotheses
    std::vector<ReportRow> rows;
    // per statistic: max/min ratio across n and Kendall trend test
    struct Trend {
        std::string stat;
        double max_over_min = 0.0;
        bool bounded = false; // max <= 1.2 * min
        KendallResult kendall;
    };
    std::vector<Trend> trends;
};

/// Localized errors against a finer coupled reference, slope fits, the
/// localization budget M actually used, and the exceedance curve.
struct RateReport {
    int n_ref = 0;
    double M = 0.0;
    std::string m_rule; // "fixed" or "percentile:<q>"
    std::vector<ReportRow> rows;
    std::vector<FittedSlope> slopes;
    struct ReferenceCheck { // halving self-consistency
        int n = 0;
        double err_full = 0.0;
        double err_half = 0.0;
        double rel_gap = 0.0;
    };
    std::vector<ReferenceCheck> reference_checks;
    bool reference_check_passed = true;
    struct ExceedanceRow {
        int n = 0;
        double threshold = 0.0; // z(n)/sqrt(n)
        double fraction = 0.0;  // empirical P(e_n >= threshold)
        int samples = 0;
    };
    std::vector<ExceedanceRow> exceedance;
};

/// Shared experiment inputs.
struct HarnessConfig {
    SchemeConfig scheme;      // n is overridden per run
    std::vector<int> n_list;  // sorted, each divides n_ref (rate) or
                              // max(n_list) (diff/moment experiments)
    int n_ref = 0;            // rate experiments only
    int samples = 16;
    int p = 1;
    std::uint64_t master_seed = 1;
    int workers = 1;
    std::optional<double> fixed_M;  // otherwise percentile rule
    double m_percentile = 0.95;
    bool reference_check = true;    // run the halving consistency sweep
    std::string z_schedule = "log"; // exceedance threshold z(n)
    double z_scale = 1.0;

    bool operator==(const HarnessConfig&) const = default;
};

void check_harness_config(const HarnessConfig& cfg, bool needs_reference);

/// Localization diagnostics of one sample: the time integral of
/// |u_ref|_X^4 + |u_n|_X^4, its indicator at level M, and the first
/// crossing time.
struct Localization {
    double integral = 0.0;
    bool inside = false;
    double tau = 0.0;
};
Localization localization(const std::vector<double>& times_n, const std::vector<double>& x4_n,
                          const std::vector<double>& times_ref, const std::vector<double>& x4_ref,
                          double M, double T);

/// Trajectory form; both runs must carry dense L^4 diagnostics.
Localization localization(const SchemeTrajectory& traj, const SchemeTrajectory& reference,
                          double M);

/// The same splitting scheme run at the path's finest resolution, used as
/// the comparison target for rate experiments (n_ref >> tested n).
SchemeTrajectory reference_solution(const SchemeConfig& cfg, const BrownianPath& path, int n_ref,
                                    const TrajectoryOptions& opts = {});

DiffReport diff_estimates(const HarnessConfig& cfg);
MomentReport moment_estimates(const HarnessConfig& cfg);
RateReport rate_experiment(const HarnessConfig& cfg);

double z_threshold(const std::string& schedule, double scale, int n);

} // namespace nsesplit
