#include "nsesplit/scheme.hpp"

#include <cmath>
#include <stdexcept>

namespace nsesplit {

GridTimes grid_functions(double t, int n, double T) {
    if (t < 0.0 || t > T) throw std::out_of_range("grid_functions: t outside [0, T]");
    const double h = T / n;
    int i = static_cast<int>(std::floor(t / h));
    if (i > n - 1) i = n - 1; // closed last interval
    GridTimes g;
    g.index = i;
    g.lower = i * h;
    g.upper = (i + 1) * h;
    return g;
}

void check_scheme_config(const SchemeConfig& cfg) {
    if (!(cfg.T > 0.0)) throw std::invalid_argument("scheme: horizon must be positive");
    if (cfg.n < 1) throw std::invalid_argument("scheme: need at least one step");
    if (!(cfg.eps >= 0.0 && cfg.eps < 1.0))
        throw std::invalid_argument("scheme: eps must lie in [0, 1)");
    if (cfg.inner_steps < 1) throw std::invalid_argument("scheme: inner_steps must be >= 1");
    if (cfg.grid.modes_per_dim < 4) throw std::invalid_argument("scheme: grid not initialized");
}

namespace {

// -B(u,u) - P R(t,u)
VelocityField drift(const VelocityField& u, double t, const CoriolisSpec& coriolis) {
    VelocityField f = bilinear_B(u, u);
    if (coriolis.c0 != 0.0) f += apply_R(coriolis, t, u);
    f *= -1.0;
    return f;
}

} // namespace

DeterministicSubstepResult deterministic_substep(const VelocityField& y_in, double t0, double h,
                                                 double eps, int m, const CoriolisSpec& coriolis,
                                                 std::vector<VelocityField>* inner) {
    if (!(h > 0.0)) throw std::invalid_argument("deterministic_substep: h must be positive");
    if (m < 1) throw std::invalid_argument("deterministic_substep: m must be >= 1");
    const double nu = 1.0 - eps;
    const double dt = h / m;

    DeterministicSubstepResult res;
    VelocityField u = y_in;
    if (inner) {
        inner->clear();
        inner->reserve(m + 1);
        inner->push_back(u);
    }
    for (int l = 0; l < m; ++l) {
        const double t = t0 + l * dt;
        // integrating-factor Heun: exact on the Stokes part
        VelocityField k1 = drift(u, t, coriolis);
        VelocityField pred = u;
        pred.axpy(dt, k1);
        stokes_semigroup_inplace(pred, nu, dt);
        VelocityField k2 = drift(pred, t + dt, coriolis);

        stokes_semigroup_inplace(u, nu, dt);
        stokes_semigroup_inplace(k1, nu, dt);
        u.axpy(0.5 * dt, k1);
        u.axpy(0.5 * dt, k2);

        if (!u.finite()) {
            res.finite = false;
            res.failed_inner_step = l;
            res.u_end = std::move(u);
            return res;
        }
        if (inner) inner->push_back(u);
    }
    res.u_end = std::move(u);
    return res;
}

VelocityField stochastic_substep_partial(const VelocityField& u_in, double t0, double elapsed,
                                         double eps, const DiffusionSpec& spec,
                                         std::span<const double> dW_partial) {
    VelocityField y = u_in;
    if (!spec.is_zero()) y += apply_G(spec, t0, u_in, dW_partial);
    if (eps > 0.0) stokes_semigroup_inplace(y, eps, elapsed);
    return y;
}

VelocityField stochastic_substep(const VelocityField& u_in, double t0, double h, double eps,
                                 const DiffusionSpec& spec, std::span<const double> dW) {
    return stochastic_substep_partial(u_in, t0, h, eps, spec, dW);
}

namespace {

struct SnapshotRequest {
    int interval;
    int node; // inner node index, 0..m; -1 marks the final u_plus[n]
    double time;
    std::size_t order;
};

std::vector<SnapshotRequest> resolve_snapshots(const std::vector<double>& times, int n, int m,
                                               double T) {
    std::vector<SnapshotRequest> reqs;
    const double node_dt = T / (static_cast<double>(n) * m);
    for (std::size_t s = 0; s < times.size(); ++s) {
        const double t = times[s];
        if (t < 0.0 || t > T) throw std::out_of_range("snapshot time outside [0, T]");
        const long idx = std::lround(t / node_dt);
        if (std::abs(idx * node_dt - t) > 1e-9 * std::max(1.0, T))
            throw std::invalid_argument("snapshot time not on the dense grid");
        SnapshotRequest r;
        r.order = s;
        r.time = idx * node_dt;
        if (idx >= static_cast<long>(n) * m) {
            r.interval = n - 1;
            r.node = -1; // u(T^+) = y(T^-)
        } else {
            r.interval = static_cast<int>(idx / m);
            r.node = static_cast<int>(idx % m);
        }
        reqs.push_back(r);
    }
    return reqs;
}

} // namespace

SchemeTrajectory run_scheme(const SchemeConfig& cfg, const BrownianPath& path,
                            const TrajectoryOptions& opts) {
    check_scheme_config(cfg);
    if (path.n_modes() != static_cast<int>(cfg.diffusion.basis.modes.size()))
        throw std::invalid_argument("run_scheme: path/basis mode count mismatch");
    if (std::abs(path.horizon - cfg.T) > 1e-12 * std::max(1.0, cfg.T))
        throw std::invalid_argument("run_scheme: path horizon does not match the scheme");
    if (path.finest_n % cfg.n != 0)
        throw std::invalid_argument("run_scheme: scheme resolution must divide the path");

    const int n = cfg.n;
    const int m = cfg.inner_steps;
    const double h = cfg.mesh();
    const int r = path.finest_n / n;
    const bool need_y = opts.y_norms || opts.pair_diffs || opts.dense_fields;
    if (need_y && r % m != 0)
        throw std::invalid_argument(
            "run_scheme: y-branch records need n*inner_steps to divide the path resolution");
    const int q = need_y ? r / m : 0;
    const int n_modes = path.n_modes();

    SchemeTrajectory traj;
    traj.T = cfg.T;
    traj.n = n;
    traj.inner_steps = m;
    traj.eps = cfg.eps;
    traj.path_hash = path.content_hash();

    const auto snap_reqs =
        resolve_snapshots(opts.snapshot_times, n, m, cfg.T);
    traj.snapshots.resize(snap_reqs.size());
    traj.snapshot_times.resize(snap_reqs.size());
    for (const auto& rq : snap_reqs) traj.snapshot_times[rq.order] = rq.time;

    VelocityField u_cur = build_initial_condition(cfg.ic, cfg.grid, derive_seed(cfg.seed, 7));
    if (opts.grid_fields) {
        traj.u_plus.reserve(n + 1);
        traj.u_minus.resize(1); // slot 0 unused
        traj.u_plus.push_back(u_cur);
    }
    const bool record_dense = opts.dense_norms || need_y || opts.x_norms;
    if (record_dense) traj.dense.reserve(static_cast<std::size_t>(n) * (m + 1));

    std::vector<VelocityField> inner;
    std::vector<double> dw_full(n_modes), dw_part(n_modes);

    for (int i = 0; i < n; ++i) {
        const double t_i = i * h;
        auto det = deterministic_substep(u_cur, t_i, h, cfg.eps, m, cfg.coriolis, &inner);
        if (!det.finite) {
            traj.failure = StepFailure{i, det.failed_inner_step, "non-finite state"};
            return traj;
        }
        const VelocityField& u_in = det.u_end; // u(t_{i+1}^-)

        for (int mo = 0; mo < n_modes; ++mo) {
            double s = 0.0;
            for (int j = 0; j < r; ++j) s += path.increments[mo][i * r + j];
            dw_full[mo] = s;
        }
        traj.increments_used.push_back(dw_full);

        VelocityField y_end;
        for (int l = 0; l <= m; ++l) {
            const double t_l = t_i + l * (h / m);
            VelocityField y_l, gw;
            bool have_y = false;
            if (need_y || l == m) {
                if (l == m) {
                    dw_part = dw_full;
                } else {
                    for (int mo = 0; mo < n_modes; ++mo) {
                        double s = 0.0;
                        for (int j = 0; j < l * q; ++j) s += path.increments[mo][i * r + j];
                        dw_part[mo] = s;
                    }
                }
                gw = cfg.diffusion.is_zero() ? VelocityField(cfg.grid)
                                             : apply_G(cfg.diffusion, t_i, u_in, dw_part);
                y_l = u_in;
                y_l += gw;
                if (cfg.eps > 0.0) stokes_semigroup_inplace(y_l, cfg.eps, t_l - t_i);
                have_y = true;
            }
            if (l == m) y_end = y_l;

            if (record_dense) {
                DenseRow row;
                row.t = t_l;
                const VelocityField& u_l = inner[static_cast<std::size_t>(l)];
                if (opts.dense_norms || opts.y_norms || opts.pair_diffs) {
                    row.u_h = h_norm(u_l);
                    row.u_v = v_norm(u_l);
                    row.u_da = da_norm(u_l);
                }
                if (opts.x_norms) row.u_x = x_norm(u_l);
                if (opts.y_norms && have_y) {
                    row.y_h = h_norm(y_l);
                    row.y_v = v_norm(y_l);
                    row.y_da = da_norm(y_l);
                }
                if (opts.pair_diffs && have_y) {
                    VelocityField d = u_l;
                    d -= y_l;
                    row.uy_h = h_norm(d);
                    row.uy_v = v_norm(d);
                    row.zu_h = h_norm(gw); // z - u is the frozen noise partial
                    row.zu_v = v_norm(gw);
                    VelocityField zy = u_l;
                    zy += gw;
                    zy -= y_l;
                    row.zy_v = v_norm(zy);
                }
                traj.dense.push_back(row);
            }
            if (opts.dense_fields) {
                traj.dense_u.push_back(inner[static_cast<std::size_t>(l)]);
                traj.dense_y.push_back(have_y ? y_l : VelocityField(cfg.grid));
            }
        }
        if (!y_end.finite()) {
            traj.failure = StepFailure{i, -1, "non-finite state after the noise substep"};
            return traj;
        }

        for (const auto& rq : snap_reqs)
            if (rq.interval == i && rq.node >= 0)
                traj.snapshots[rq.order] = inner[static_cast<std::size_t>(rq.node)];

        if (opts.grid_fields) {
            traj.u_minus.push_back(u_in);
            traj.u_plus.push_back(y_end);
        }
        u_cur = std::move(y_end);
    }

    for (const auto& rq : snap_reqs)
        if (rq.node < 0) traj.snapshots[rq.order] = u_cur; // u(T^+) = y(T^-)

    if (!opts.grid_fields) {
        traj.u_plus.clear();
        traj.u_minus.clear();
        traj.u_plus.push_back(u_cur); // keep the terminal state reachable
    }
    return traj;
}

double dense_integral(const SchemeTrajectory& traj, double (*f)(const DenseRow&)) {
    const int rows = traj.rows_per_interval();
    const double w = traj.mesh() / traj.inner_steps;
    double total = 0.0;
    for (std::size_t start = 0; start + rows <= traj.dense.size();
         start += static_cast<std::size_t>(rows)) {
        for (int l = 0; l < rows - 1; ++l) {
            const double a = f(traj.dense[start + l]);
            const double b = f(traj.dense[start + l + 1]);
            total += 0.5 * w * (a + b);
        }
    }
    return total;
}

double dense_sup(const SchemeTrajectory& traj, double (*f)(const DenseRow&)) {
    double s = 0.0;
    for (const auto& row : traj.dense) s = std::max(s, f(row));
    return s;
}

VelocityField dense_z(const SchemeConfig& cfg, const BrownianPath& path,
                      const SchemeTrajectory& traj, double t) {
    if (traj.dense_u.empty())
        throw std::invalid_argument("dense_z: missing dense field diagnostics");
    if (t < 0.0 || t > cfg.T) throw std::out_of_range("dense_z: t outside [0, T]");

    const int n = traj.n;
    const int m = traj.inner_steps;
    if (t >= cfg.T) return traj.u_plus.at(n); // z(T) is the stored terminal grid value

    const double node_dt = cfg.T / (static_cast<double>(n) * m);
    const long idx = std::lround(t / node_dt);
    if (std::abs(idx * node_dt - t) > 1e-9 * std::max(1.0, cfg.T))
        throw std::invalid_argument("dense_z: t not on the recorded dense grid");
    const int i = static_cast<int>(idx / m);
    const int l = static_cast<int>(idx % m);
    if (l == 0) return traj.u_plus.at(i); // grid point: stored z value

    // u-branch state at the node plus the frozen-coefficient noise partial
    const std::size_t row = static_cast<std::size_t>(i) * (m + 1) + l;
    VelocityField z = traj.dense_u.at(row);
    if (!cfg.diffusion.is_zero()) {
        const int r = path.finest_n / n;
        if (r % m != 0)
            throw std::invalid_argument("dense_z: path resolution does not cover the dense grid");
        const int q = r / m;
        std::vector<double> dw(path.n_modes(), 0.0);
        for (int mo = 0; mo < path.n_modes(); ++mo) {
            double s = 0.0;
            for (int j = 0; j < l * q; ++j) s += path.increments[mo][i * r + j];
            dw[mo] = s;
        }
        z += apply_G(cfg.diffusion, i * traj.mesh(), traj.u_minus.at(i + 1), dw);
    }
    return z;
}

} // namespace nsesplit
