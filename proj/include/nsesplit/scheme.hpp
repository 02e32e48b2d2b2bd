#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nsesplit/noise.hpp"
#include "nsesplit/operators.hpp"
#include "nsesplit/presets.hpp"

namespace nsesplit {

/// Piecewise-constant grid maps: d_n(t) = t_i and d*_n(t) = t_{i+1} for
/// t in [t_i, t_{i+1}), with the last interval closed at T.
struct GridTimes {
    double lower = 0.0; // d_n(t)
    double upper = 0.0; // d*_n(t)
    int index = 0;      // i
};
GridTimes grid_functions(double t, int n, double T);

struct SchemeConfig {
    double T = 1.0;
    int n = 8;
    double eps = 0.0;    // viscosity split, in [0, 1)
    int inner_steps = 4; // m, deterministic substep refinement
    GridSpec grid;
    DiffusionSpec diffusion;
    CoriolisSpec coriolis;
    InitialConditionSpec ic;
    std::uint64_t seed = 0;

    double mesh() const { return T / n; }

    bool operator==(const SchemeConfig&) const = default;
};

void check_scheme_config(const SchemeConfig& cfg);

/// What a run records beyond the mandatory grid-point fields. The
/// y-branch records reconstruct the noise-substep state inside each
/// interval and therefore need the Wiener partial sums: n * inner_steps
/// must divide the path's finest resolution.
struct TrajectoryOptions {
    bool dense_norms = true;      // u-branch norms per inner node
    bool y_norms = false;         // y-branch norms per inner node
    bool pair_diffs = false;      // |u-y|, |z-u|, |z-y| per inner node
    bool x_norms = false;         // L^4 norms (adds transforms per node)
    bool dense_fields = false;    // keep u(s) (and y(s)) fields per node
    bool grid_fields = true;      // keep u_plus / u_minus per grid point
    std::vector<double> snapshot_times; // extra u-branch field snapshots
};

/// Scalar diagnostics at one dense time node.
struct DenseRow {
    double t = 0.0;
    double u_h = 0.0, u_v = 0.0, u_da = 0.0, u_x = 0.0;
    double y_h = 0.0, y_v = 0.0, y_da = 0.0;
    double uy_h = 0.0, uy_v = 0.0; // |u - y|
    double zu_h = 0.0, zu_v = 0.0; // |z - u|
    double zy_v = 0.0;             // |z - y| in V
};

struct StepFailure {
    int interval = -1;
    int inner_step = -1;
    std::string what;
};

/// States produced by one run. Grid point k carries
/// u_plus[k] = u(t_k^+) = y(t_k^-) = z(t_k) and u_minus[k] = u(t_k^-).
struct SchemeTrajectory {
    double T = 0.0;
    int n = 0;
    int inner_steps = 0;
    double eps = 0.0;
    std::uint64_t path_hash = 0; // content hash of the consumed path

    std::vector<VelocityField> u_plus;  // size n+1 (index k = 0..n)
    std::vector<VelocityField> u_minus; // size n+1, slot 0 unused

    // per mesh interval, the aggregated Wiener increments consumed
    std::vector<std::vector<double>> increments_used;

    // Dense rows come in blocks of inner_steps+1 per interval; interval
    // endpoints carry the one-sided limits, so grid times appear twice.
    std::vector<DenseRow> dense;
    std::vector<VelocityField> dense_u;   // optional, parallel to dense
    std::vector<VelocityField> dense_y;   // optional, parallel to dense
    std::vector<double> snapshot_times;   // resolved request times
    std::vector<VelocityField> snapshots; // u-branch states at those times

    std::optional<StepFailure> failure;

    bool failed() const { return failure.has_value(); }
    double mesh() const { return T / n; }
    int rows_per_interval() const { return inner_steps + 1; }

    const VelocityField& z_at(int k) const { return u_plus.at(k); }
    const VelocityField& y_minus_at(int k) const { return u_plus.at(k); }
};

/// Trapezoid of f over the dense rows, interval by interval.
double dense_integral(const SchemeTrajectory& traj, double (*f)(const DenseRow&));

/// Largest f over all dense rows.
double dense_sup(const SchemeTrajectory& traj, double (*f)(const DenseRow&));

/// Deterministic substep: integrates
///   du/dt + (1-eps) A u + B(u,u) + R(t,u) = 0
/// over [t0, t0+h] with m integrating-factor Heun steps (exact on the
/// Stokes part). Appends inner states to `inner` when provided.
struct DeterministicSubstepResult {
    VelocityField u_end;
    bool finite = true;
    int failed_inner_step = -1;
};
DeterministicSubstepResult deterministic_substep(const VelocityField& y_in, double t0, double h,
                                                 double eps, int m, const CoriolisSpec& coriolis,
                                                 std::vector<VelocityField>* inner = nullptr);

/// Stochastic substep over one mesh interval: exponential Euler-Maruyama
///   y = exp(-eps h A) (u_in + G(t0, u_in) dW),
/// a pure stochastic integral when eps = 0.
VelocityField stochastic_substep(const VelocityField& u_in, double t0, double h, double eps,
                                 const DiffusionSpec& spec, std::span<const double> dW);

/// Noise-substep state within an interval: same map at elapsed time
/// s - t0 with the Wiener partial sum up to s.
VelocityField stochastic_substep_partial(const VelocityField& u_in, double t0, double elapsed,
                                         double eps, const DiffusionSpec& spec,
                                         std::span<const double> dW_partial);

/// Full splitting run over [0, T] driven by `path` (finest_n divisible
/// by n; also by n*m when pair_diffs or dense y records are on).
SchemeTrajectory run_scheme(const SchemeConfig& cfg, const BrownianPath& path,
                            const TrajectoryOptions& opts = {});

/// Reconstructs the auxiliary process z(t) from a recorded trajectory:
/// the u-branch state plus the frozen-coefficient noise partial since
/// d_n(t). Requires dense fields; t must lie on the dense grid (or be a
/// grid point) and on the path's finest grid.
VelocityField dense_z(const SchemeConfig& cfg, const BrownianPath& path,
                      const SchemeTrajectory& traj, double t);

} // namespace nsesplit
