#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nsesplit/rates.hpp"
#include "nsesplit/scheme.hpp"

using namespace nsesplit;

namespace {

SchemeConfig base_config(int N, int n, double T, double eps, int m) {
    SchemeConfig cfg;
    cfg.T = T;
    cfg.n = n;
    cfg.eps = eps;
    cfg.inner_steps = m;
    cfg.grid = make_grid(N);
    cfg.diffusion = make_diffusion(DiffusionFamily::additive, 0, 0.0);
    cfg.coriolis = make_coriolis(0.0);
    cfg.ic.kind = "taylor_green";
    cfg.ic.amplitude = 1.0;
    cfg.seed = 11;
    return cfg;
}

} // namespace

TEST_CASE("mesh maps select the enclosing interval with a closed last one") {
    auto g = grid_functions(0.3, 4, 1.0);
    CHECK(g.lower == doctest::Approx(0.25));
    CHECK(g.upper == doctest::Approx(0.5));
    g = grid_functions(1.0, 4, 1.0);
    CHECK(g.lower == doctest::Approx(0.75));
    CHECK(g.upper == doctest::Approx(1.0));
    g = grid_functions(0.0, 4, 1.0);
    CHECK(g.lower == 0.0);
    CHECK(g.upper == doctest::Approx(0.25));
    CHECK_THROWS_AS(grid_functions(-0.1, 4, 1.0), std::out_of_range);
    CHECK_THROWS_AS(grid_functions(1.1, 4, 1.0), std::out_of_range);
}

TEST_CASE("viscous substep is exact on single modes") {
    const GridSpec g = make_grid(16);
    const CoriolisSpec cor = make_coriolis(0.0);
    for (double eps : {0.0, 0.4}) {
        const VelocityField u0 = single_mode(g, 2, 1, 1.0); // |k|^2 = 5
        const auto res = deterministic_substep(u0, 0.0, 0.125, eps, 3, cor);
        REQUIRE(res.finite);
        const double factor = std::exp(-(1.0 - eps) * 5.0 * 0.125);
        VelocityField expect = u0;
        expect *= factor;
        expect -= res.u_end;
        CHECK(h_norm(expect) <= 1e-12 * factor * h_norm(u0));
    }
}

TEST_CASE("viscous substep reproduces the decaying vortex solution") {
    const GridSpec g = make_grid(32);
    const CoriolisSpec cor = make_coriolis(0.0);
    const double h = 1.0 / 64;
    VelocityField u = taylor_green(g, 1.0);
    for (int i = 0; i < 16; ++i) {
        const auto res = deterministic_substep(u, i * h, h, 0.0, 8, cor);
        REQUIRE(res.finite);
        u = res.u_end;
    }
    VelocityField expect = taylor_green(g, std::exp(-2.0 * 16 * h));
    expect -= u;
    CHECK(h_norm(expect) <= 1e-10 * h_norm(u));
}

TEST_CASE("viscous substep dissipates energy and enstrophy") {
    const GridSpec g = make_grid(32);
    const CoriolisSpec cor = make_coriolis(0.0);
    const double h = 1.0 / 256;
    const int m = 16;
    VelocityField u0 = taylor_green(g, 1.0);
    u0 += random_smooth(g, 4.0, 21, 0.5);

    std::vector<VelocityField> inner;
    const auto res = deterministic_substep(u0, 0.0, h, 0.0, m, cor, &inner);
    REQUIRE(res.finite);
    REQUIRE(inner.size() == std::size_t(m + 1));

    std::vector<double> t(m + 1), v2(m + 1), da2(m + 1);
    for (int l = 0; l <= m; ++l) {
        t[l] = l * h / m;
        v2[l] = v_norm(inner[l]) * v_norm(inner[l]);
        da2[l] = da_norm(inner[l]) * da_norm(inner[l]);
    }
    const double h2_in = h_norm(u0) * h_norm(u0);
    const double lhs_h = h_norm(res.u_end) * h_norm(res.u_end) + 2.0 * trapezoid(t, v2);
    CHECK(lhs_h <= h2_in * (1.0 + 1e-8));

    // curl-level analogue
    const double v2_in = v_norm(u0) * v_norm(u0);
    const double lhs_v = v_norm(res.u_end) * v_norm(res.u_end) + 2.0 * trapezoid(t, da2);
    CHECK(lhs_v <= v2_in * (1.0 + 1e-8));

    // plain monotone decay of the H norm
    for (int l = 0; l < m; ++l)
        CHECK(h_norm(inner[l + 1]) <= h_norm(inner[l]) * (1.0 + 1e-12));
}

TEST_CASE("inner refinement converges at second order") {
    const GridSpec g = make_grid(32);
    const CoriolisSpec cor = make_coriolis(0.0);
    VelocityField u0 = taylor_green(g, 1.0);
    u0 += random_smooth(g, 4.0, 13, 0.5);
    const double h = 1.0 / 16;

    auto advance = [&](int m) {
        VelocityField u = u0;
        for (int i = 0; i < 4; ++i) {
            const auto res = deterministic_substep(u, i * h, h, 0.0, m, cor);
            REQUIRE(res.finite);
            u = res.u_end;
        }
        return u;
    };
    const VelocityField ref = advance(64);
    double prev_err = 0.0;
    for (int m : {2, 4, 8}) {
        VelocityField d = advance(m);
        d -= ref;
        const double err = h_norm(d);
        if (m > 2) {
            const double order = std::log2(prev_err / err);
            CHECK(order >= 1.8);
        }
        prev_err = err;
    }
}

TEST_CASE("noise substep: identity, pure decay, and the stochastic integral") {
    const GridSpec g = make_grid(16);
    const DiffusionSpec spec = make_diffusion(DiffusionFamily::additive, 2, 0.5, 0.0, 0.0, 0.0);
    const VelocityField u = single_mode(g, 1, 2, 1.0); // |k|^2 = 5
    const std::vector<double> zero(2, 0.0);

    VelocityField y = stochastic_substep(u, 0.0, 0.25, 0.0, spec, zero);
    y -= u;
    CHECK(h_norm(y) == 0.0);

    VelocityField yd = stochastic_substep(u, 0.0, 0.25, 0.6, spec, zero);
    VelocityField expect = u;
    expect *= std::exp(-0.6 * 5.0 * 0.25);
    expect -= yd;
    CHECK(h_norm(expect) <= 1e-13);

    // mean-square displacement matches the increment variance (2000 draws)
    const double h = 0.125;
    double acc = 0.0;
    const int samples = 2000;
    for (int s = 0; s < samples; ++s) {
        const BrownianPath p = sample_path(spec.basis, 1, h, derive_seed(5, s));
        std::vector<double> dw = {p.increments[0][0], p.increments[1][0]};
        VelocityField ys = stochastic_substep(u, 0.0, h, 0.0, spec, dw);
        ys -= u;
        acc += h_norm(ys) * h_norm(ys);
    }
    acc /= samples;
    double expect_iso = 0.0;
    for (double a : spec.mode_amplitudes()) expect_iso += a * a * h;
    CHECK(std::abs(acc - expect_iso) <= 3.0 * expect_iso * std::sqrt(2.0 / samples));
}

TEST_CASE("one-interval run is one viscous solve plus one noise application") {
    SchemeConfig cfg = base_config(16, 1, 0.25, 0.3, 4);
    cfg.diffusion = make_diffusion(DiffusionFamily::additive, 2, 0.4, 0.0, 0.0, cfg.eps);
    const BrownianPath path = sample_path(cfg.diffusion.basis, cfg.n * cfg.inner_steps,
                                          cfg.T, 3);
    const SchemeTrajectory traj = run_scheme(cfg, path, TrajectoryOptions{});
    REQUIRE_FALSE(traj.failed());

    const VelocityField u0 = build_initial_condition(cfg.ic, cfg.grid, derive_seed(cfg.seed, 7));
    const auto det = deterministic_substep(u0, 0.0, cfg.T, cfg.eps, cfg.inner_steps,
                                           cfg.coriolis);
    const auto agg = aggregate(path, 1);
    std::vector<double> dw = {agg[0][0], agg[1][0]};
    VelocityField expect = stochastic_substep(det.u_end, 0.0, cfg.T, cfg.eps, cfg.diffusion, dw);

    VelocityField d0 = traj.u_plus[0];
    d0 -= u0;
    CHECK(h_norm(d0) == 0.0);
    VelocityField dm = traj.u_minus[1];
    dm -= det.u_end;
    CHECK(h_norm(dm) == 0.0);
    expect -= traj.u_plus[1];
    CHECK(h_norm(expect) == 0.0);
}

TEST_CASE("without noise the composite map is the full viscous flow on single modes") {
    SchemeConfig cfg = base_config(16, 8, 0.5, 0.35, 2);
    cfg.ic.kind = "single_mode";
    cfg.ic.j1 = 1;
    cfg.ic.j2 = 2; // |k|^2 = 5
    const BrownianPath path = sample_path(cfg.diffusion.basis, cfg.n * cfg.inner_steps,
                                          cfg.T, 5);
    const SchemeTrajectory traj = run_scheme(cfg, path, TrajectoryOptions{});
    REQUIRE_FALSE(traj.failed());
    // (1-eps)-viscosity substep times eps-viscosity substep = unit viscosity
    const double expect = std::exp(-5.0 * cfg.T);
    const double got = h_norm(traj.u_plus[cfg.n]) / h_norm(traj.u_plus[0]);
    CHECK(got == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("reruns are bit-identical and states stay structurally valid") {
    SchemeConfig cfg = base_config(16, 4, 0.5, 0.2, 2);
    cfg.ic.kind = "mixed";
    cfg.ic.amplitude = 0.6;
    cfg.ic.smooth_fraction = 0.3;
    cfg.diffusion = make_diffusion(DiffusionFamily::diagonal_multiplicative, 4, 0.8, 0.0,
                                   0.0, cfg.eps);
    const BrownianPath path = sample_path(cfg.diffusion.basis, cfg.n * cfg.inner_steps,
                                          cfg.T, 6);
    TrajectoryOptions opts;
    opts.dense_norms = true;
    opts.y_norms = true;
    opts.pair_diffs = true;
    const SchemeTrajectory a = run_scheme(cfg, path, opts);
    const SchemeTrajectory b = run_scheme(cfg, path, opts);
    REQUIRE_FALSE(a.failed());
    for (int k = 0; k <= cfg.n; ++k) {
        CHECK(a.u_plus[k].data() == b.u_plus[k].data());
        CHECK(divergence_defect(a.u_plus[k]) <= 1e-12);
        CHECK(hermitian_defect(a.u_plus[k]) <= 1e-12);
        CHECK(mean_mode_magnitude(a.u_plus[k]) <= 1e-14 * h_norm(a.u_plus[k]));
    }
    REQUIRE(a.dense.size() == std::size_t(cfg.n * (cfg.inner_steps + 1)));
    for (std::size_t r = 0; r < a.dense.size(); ++r) CHECK(a.dense[r].uy_h == b.dense[r].uy_h);

    // grid rows: the y branch left-limit at t_{i+1} equals the next u_plus
    for (int i = 0; i < cfg.n; ++i) {
        const DenseRow& last = a.dense[(i + 1) * (cfg.inner_steps + 1) - 1];
        CHECK(last.y_h == doctest::Approx(h_norm(a.u_plus[i + 1])).epsilon(1e-12));
        CHECK(last.u_h == doctest::Approx(h_norm(a.u_minus[i + 1])).epsilon(1e-12));
    }
}

TEST_CASE("auxiliary process reconstruction matches the stored grid values") {
    SchemeConfig cfg = base_config(16, 4, 0.5, 0.0, 4);
    cfg.ic.kind = "mixed";
    cfg.ic.amplitude = 0.6;
    cfg.ic.smooth_fraction = 0.3;
    cfg.diffusion = make_diffusion(DiffusionFamily::additive, 4, 0.5, 0.0, 0.0, cfg.eps);
    const BrownianPath path = sample_path(cfg.diffusion.basis, cfg.n * cfg.inner_steps,
                                          cfg.T, 8);
    TrajectoryOptions opts;
    opts.dense_fields = true;
    opts.y_norms = true;
    const SchemeTrajectory traj = run_scheme(cfg, path, opts);
    REQUIRE_FALSE(traj.failed());

    const double h = cfg.mesh();
    for (int k = 0; k <= cfg.n; ++k) {
        VelocityField z = dense_z(cfg, path, traj, k * h);
        z -= traj.z_at(k);
        CHECK(h_norm(z) <= 1e-8 * h_norm(traj.z_at(k)));
    }
    VelocityField z0 = dense_z(cfg, path, traj, 0.0);
    z0 -= traj.u_plus[0];
    CHECK(h_norm(z0) == 0.0);

    // between grid points the reconstruction carries the noise partial
    const double t_mid = h + h / cfg.inner_steps;
    const VelocityField zmid = dense_z(cfg, path, traj, t_mid);
    const VelocityField& umid = traj.dense_u[(cfg.inner_steps + 1) + 1];
    VelocityField diff = zmid;
    diff -= umid;
    CHECK(h_norm(diff) > 0.0); // the partial is almost surely nonzero

    // no noise, eps = 0: the auxiliary process equals the viscous branch
    SchemeConfig quiet = cfg;
    quiet.diffusion = make_diffusion(DiffusionFamily::additive, 0, 0.0);
    const BrownianPath empty = sample_path(quiet.diffusion.basis,
                                           quiet.n * quiet.inner_steps, quiet.T, 9);
    const SchemeTrajectory qt = run_scheme(quiet, empty, opts);
    for (std::size_t r = 0; r < qt.dense_u.size(); ++r) {
        VelocityField z = dense_z(quiet, empty, qt, qt.dense[r].t);
        z -= qt.dense_u[r];
        CHECK(h_norm(z) <= 1e-14);
    }

    SchemeTrajectory bare = run_scheme(cfg, path, TrajectoryOptions{});
    CHECK_THROWS_AS(dense_z(cfg, path, bare, 0.1), std::invalid_argument);
}

TEST_CASE("blow-up is reported as a step failure, not a crash") {
    SchemeConfig cfg = base_config(16, 4, 1.0, 0.0, 2);
    cfg.ic.kind = "random_smooth";
    cfg.ic.amplitude = 1e9;
    cfg.ic.decay_exponent = 0.5;
    cfg.ic.per_sample = false;
    const BrownianPath path = sample_path(cfg.diffusion.basis, cfg.n * cfg.inner_steps,
                                          cfg.T, 10);
    const SchemeTrajectory traj = run_scheme(cfg, path, TrajectoryOptions{});
    CHECK(traj.failed());
    CHECK(traj.failure->interval >= 0);
}

TEST_CASE("consuming aggregated increments equals consuming summed fine ones") {
    SchemeConfig cfg = base_config(16, 4, 0.5, 0.2, 2);
    cfg.diffusion = make_diffusion(DiffusionFamily::additive, 4, 0.6, 0.0, 0.0, cfg.eps);
    const BrownianPath fine = sample_path(cfg.diffusion.basis, 16, cfg.T, 12);

    BrownianPath coarse;
    coarse.finest_n = cfg.n;
    coarse.horizon = cfg.T;
    coarse.seed = fine.seed;
    coarse.increments = aggregate(fine, cfg.n);

    const SchemeTrajectory a = run_scheme(cfg, fine, TrajectoryOptions{});
    const SchemeTrajectory b = run_scheme(cfg, coarse, TrajectoryOptions{});
    for (int k = 0; k <= cfg.n; ++k) CHECK(a.u_plus[k].data() == b.u_plus[k].data());
}

TEST_CASE("path resolution mismatches are rejected") {
    SchemeConfig cfg = base_config(16, 4, 0.5, 0.0, 4);
    cfg.diffusion = make_diffusion(DiffusionFamily::additive, 2, 0.5);
    const BrownianPath coarse = sample_path(cfg.diffusion.basis, 6, cfg.T, 3);
    CHECK_THROWS_AS(run_scheme(cfg, coarse, TrajectoryOptions{}), std::invalid_argument);

    // y-branch records need the inner grid resolved by the path
    const BrownianPath exact = sample_path(cfg.diffusion.basis, 4, cfg.T, 3);
    TrajectoryOptions opts;
    opts.y_norms = true;
    CHECK_THROWS_AS(run_scheme(cfg, exact, opts), std::invalid_argument);
    TrajectoryOptions plain;
    plain.dense_norms = true;
    CHECK_FALSE(run_scheme(cfg, exact, plain).failed());
}
