#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nsesplit/harness.hpp"
#include "nsesplit/io.hpp"

using namespace nsesplit;

namespace {

HarnessConfig small_config() {
    HarnessConfig cfg;
    cfg.scheme.T = 0.25;
    cfg.scheme.eps = 0.0;
    cfg.scheme.inner_steps = 2;
    cfg.scheme.grid = make_grid(16);
    cfg.scheme.ic.kind = "mixed";
    cfg.scheme.ic.amplitude = 0.5;
    cfg.scheme.ic.smooth_fraction = 0.25;
    cfg.scheme.ic.decay_exponent = 4.0;
    cfg.scheme.diffusion = make_diffusion(DiffusionFamily::additive, 4, 0.8, 1.0);
    cfg.scheme.coriolis = make_coriolis(0.0);
    cfg.n_list = {8, 16, 32, 64};
    cfg.samples = 8;
    cfg.p = 2;
    cfg.master_seed = 3;
    cfg.workers = 1;
    return cfg;
}

} // namespace

TEST_CASE("log-log fits recover exact power laws") {
    std::vector<std::pair<double, double>> pairs;
    for (int n : {8, 16, 32, 64}) pairs.emplace_back(n, 3.0 / n);
    RateFit fit = fit_rate(pairs);
    CHECK(fit.slope == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(fit.half_width <= 1e-10);

    pairs.clear();
    for (int n : {8, 16, 32, 64, 128}) pairs.emplace_back(n, 2.0 / std::sqrt(double(n)));
    CHECK(fit_rate(pairs).slope == doctest::Approx(-0.5).epsilon(1e-12));

    pairs.clear();
    for (int n : {8, 16, 32, 64}) pairs.emplace_back(n, 0.7);
    CHECK(fit_rate(pairs).slope == doctest::Approx(0.0));

    pairs.clear();
    for (int n : {8, 16, 32}) pairs.emplace_back(n, 1.0 / n);
    CHECK_THROWS_AS(fit_rate(pairs), std::invalid_argument); // fewer than 4 points

    pairs.emplace_back(64, -1.0);
    CHECK_THROWS_AS(fit_rate(pairs), std::invalid_argument); // nonpositive error
}

TEST_CASE("kendall trend statistics with exact small-sample tails") {
    const std::vector<double> n = {8, 16, 32, 64, 128};
    const KendallResult up = kendall_tau(n, {1, 2, 3, 4, 5});
    CHECK(up.tau == doctest::Approx(1.0));
    CHECK(up.p_positive == doctest::Approx(1.0 / 120).epsilon(1e-12));

    const KendallResult down = kendall_tau(n, {5, 4, 3, 2, 1});
    CHECK(down.tau == doctest::Approx(-1.0));
    CHECK(down.p_positive == doctest::Approx(1.0));

    const KendallResult mixed = kendall_tau(n, {1.0, 3.0, 2.0, 2.5, 1.5});
    CHECK(mixed.p_positive > 0.05);
}

TEST_CASE("percentile uses the nearest rank") {
    CHECK(percentile({1, 2, 3, 4, 5}, 0.5) == 3);
    CHECK(percentile({1, 2, 3, 4, 5}, 1.0) == 5);
    CHECK(percentile({5, 1, 3}, 0.0) == 1);
    std::vector<double> v;
    for (int i = 1; i <= 100; ++i) v.push_back(i);
    CHECK(percentile(v, 0.95) == 95);
}

TEST_CASE("localization indicator, crossing time, and monotonicity in M") {
    const std::vector<double> t = {0.0, 0.5, 1.0};
    const std::vector<double> one = {1.0, 1.0, 1.0}; // integral reaches 1 at T
    const Localization inf_m = localization(t, one, t, one, 1e30, 1.0);
    CHECK(inf_m.inside);
    CHECK(inf_m.tau == 1.0);

    const Localization zero_m = localization(t, one, t, one, 0.0, 1.0);
    CHECK_FALSE(zero_m.inside);
    CHECK(zero_m.tau == 0.0);

    const Localization mid = localization(t, one, t, one, 1.0, 1.0);
    CHECK_FALSE(mid.inside); // total is 2
    CHECK(mid.tau == doctest::Approx(0.5));

    for (double m1 : {0.1, 0.5, 1.5}) {
        const Localization a = localization(t, one, t, one, m1, 1.0);
        const Localization b = localization(t, one, t, one, m1 + 0.5, 1.0);
        CHECK((!a.inside || b.inside)); // inside is monotone in M
        CHECK(a.tau <= b.tau + 1e-15);
    }
}

TEST_CASE("deterministic-only branch differences decay at least linearly") {
    HarnessConfig cfg = small_config();
    cfg.scheme.diffusion = make_diffusion(DiffusionFamily::additive, 0, 0.0);
    cfg.scheme.ic.kind = "taylor_green";
    cfg.scheme.ic.amplitude = 1.0;
    const DiffReport rep = diff_estimates(cfg);
    REQUIRE(rep.rows.size() == 4);
    double slope = 0.0;
    for (const auto& s : rep.slopes)
        if (s.stat == "int_uy_h2") slope = s.fit.slope;
    CHECK(slope <= -0.9);
    for (const auto& row : rep.rows) CHECK(row.failed == 0);
}

TEST_CASE("noisy branch differences show the linear-in-mesh decay") {
    HarnessConfig cfg = small_config();
    cfg.samples = 16;
    const DiffReport rep = diff_estimates(cfg);
    double slope_h = 0.0, slope_v = 0.0;
    for (const auto& s : rep.slopes) {
        if (s.stat == "int_uy_h2") slope_h = s.fit.slope;
        if (s.stat == "int_uy_v2") slope_v = s.fit.slope;
    }
    CHECK(slope_h <= -0.7);
    CHECK(slope_h >= -1.4);
    CHECK(slope_v <= -0.7);
    CHECK(slope_v >= -1.5);
    // standard errors accompany every estimate
    for (const auto& row : rep.rows)
        for (const auto& [name, est] : row.stats) CHECK(est.se >= 0.0);
}

TEST_CASE("standard errors shrink like one over root samples") {
    HarnessConfig cfg = small_config();
    cfg.n_list = {4, 8};
    cfg.samples = 8;
    const DiffReport small = diff_estimates(cfg);
    cfg.samples = 32;
    const DiffReport big = diff_estimates(cfg);
    const double se_small = small.rows[0].stats.at("int_uy_h2").se;
    const double se_big = big.rows[0].stats.at("int_uy_h2").se;
    const double ratio = se_small / se_big; // expected 2 at 4x the samples
    CHECK(ratio >= 1.4);
    CHECK(ratio <= 2.6);
}

TEST_CASE("viscous-branch integrability of the noise branch holds for eps > 0") {
    HarnessConfig cfg = small_config();
    cfg.scheme.eps = 0.5;
    cfg.scheme.diffusion = make_diffusion(DiffusionFamily::additive, 4, 0.5, 1.0, 0.0, 0.5);
    cfg.p = 1;
    cfg.n_list = {8, 16, 32};
    cfg.samples = 16;
    const MomentReport rep = moment_estimates(cfg);
    double lo = 1e300, hi = 0.0;
    for (const auto& row : rep.rows) {
        const double v = row.stats.at("int_y_v2").value;
        CHECK(std::isfinite(v));
        CHECK(v > 0.0);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(hi <= 1.5 * lo); // stable across the tested resolutions
}

TEST_CASE("without noise the reference run matches the viscous solver at grid points") {
    HarnessConfig cfg = small_config();
    cfg.scheme.diffusion = make_diffusion(DiffusionFamily::additive, 0, 0.0);
    cfg.scheme.ic.kind = "taylor_green";
    SchemeConfig sc = cfg.scheme;
    sc.n = 16;
    sc.seed = 12;
    const BrownianPath path = sample_path(sc.diffusion.basis, 16, sc.T, 12);
    const SchemeTrajectory ref = reference_solution(sc, path, 16, TrajectoryOptions{});

    VelocityField u = build_initial_condition(sc.ic, sc.grid, derive_seed(sc.seed, 7));
    const double h = sc.mesh();
    for (int i = 0; i < sc.n; ++i) {
        const auto res = deterministic_substep(u, i * h, h, sc.eps, sc.inner_steps, sc.coriolis);
        REQUIRE(res.finite);
        u = res.u_end;
        VelocityField d = ref.u_plus[i + 1];
        d -= u;
        CHECK(h_norm(d) <= 1e-14 * h_norm(u));
    }
}

TEST_CASE("reports are identical across worker counts") {
    HarnessConfig cfg = small_config();
    cfg.n_list = {4, 8};
    cfg.samples = 8;
    cfg.workers = 1;
    const DiffReport a = diff_estimates(cfg);
    cfg.workers = 3;
    const DiffReport b = diff_estimates(cfg);
    CHECK(report_json(a) == report_json(b));
}

TEST_CASE("moment estimates: pure decay stays below the initial energy") {
    HarnessConfig cfg = small_config();
    cfg.scheme.diffusion = make_diffusion(DiffusionFamily::additive, 0, 0.0);
    cfg.scheme.ic.kind = "taylor_green";
    cfg.scheme.ic.amplitude = 0.8;
    cfg.p = 1;
    const MomentReport rep = moment_estimates(cfg);
    const double e0 = std::pow(h_norm(taylor_green(cfg.scheme.grid, 0.8)), 2);
    for (const auto& row : rep.rows) {
        CHECK(row.stats.at("sup_e_y_h2p").value <= e0 * (1 + 1e-10));
        CHECK(row.stats.at("sup_e_u_int_h2p").value <= e0 * (1 + 1e-10));
    }
    CHECK(rep.trends.size() >= 4);
}

TEST_CASE("rate experiment: shape, retained fractions, and coupling") {
    HarnessConfig cfg = small_config();
    cfg.n_list = {4, 8};
    cfg.n_ref = 64;
    cfg.samples = 8;
    cfg.scheme.diffusion =
        make_diffusion(DiffusionFamily::diagonal_multiplicative, 4, 1.0, 0.0, 0.0, 0.0);
    const RateReport rep = rate_experiment(cfg);
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.slopes.empty()); // fewer than 4 resolutions: no fit
    for (const auto& row : rep.rows) {
        const double retained = row.stats.at("retained").value;
        CHECK(retained >= 0.0);
        CHECK(retained <= 1.0);
        CHECK(row.stats.at("loc_sup_h2").value >= 0.0);
        CHECK(row.stats.at("loc_int_v2").value >=
              row.stats.at("loc_int_u_v2").value - 1e-15);
    }
    CHECK(rep.exceedance.size() == 2);
    REQUIRE_FALSE(rep.reference_checks.empty());
    // errors shrink with n
    CHECK(rep.rows[1].stats.at("loc_sup_h2").value <
          rep.rows[0].stats.at("loc_sup_h2").value);

    // identical reruns produce identical reports
    const RateReport again = rate_experiment(cfg);
    CHECK(report_json(rep) == report_json(again));
}

TEST_CASE("reference runs echo the tested scheme at equal resolution") {
    HarnessConfig cfg = small_config();
    SchemeConfig sc = cfg.scheme;
    sc.n = 8;
    sc.seed = 4;
    const BrownianPath path = sample_path(sc.diffusion.basis, 8, sc.T, 4);
    const SchemeTrajectory a = run_scheme(sc, path, TrajectoryOptions{});
    const SchemeTrajectory b = reference_solution(sc, path, 8, TrajectoryOptions{});
    for (int k = 0; k <= 8; ++k) CHECK(a.u_plus[k].data() == b.u_plus[k].data());
    CHECK_THROWS_AS(reference_solution(sc, path, 16, TrajectoryOptions{}),
                    std::invalid_argument);

    // the consumed increments are exactly the aggregated path
    const auto agg = aggregate(path, 8);
    REQUIRE(a.increments_used.size() == 8);
    for (int i = 0; i < 8; ++i)
        for (std::size_t mo = 0; mo < agg.size(); ++mo)
            CHECK(a.increments_used[i][mo] == agg[mo][i]);
}

TEST_CASE("trajectory-level localization mirrors the array form") {
    HarnessConfig cfg = small_config();
    SchemeConfig sc = cfg.scheme;
    sc.n = 4;
    sc.seed = 6;
    const BrownianPath path =
        sample_path(sc.diffusion.basis, sc.n * sc.inner_steps, sc.T, 6);
    TrajectoryOptions opts;
    opts.x_norms = true;
    const SchemeTrajectory traj = run_scheme(sc, path, opts);
    const Localization inf_m = localization(traj, traj, 1e30);
    CHECK(inf_m.inside);
    const Localization zero_m = localization(traj, traj, 0.0);
    CHECK_FALSE(zero_m.inside);
    CHECK(zero_m.tau == 0.0);

    const SchemeTrajectory bare = run_scheme(sc, path, TrajectoryOptions{});
    CHECK_THROWS_AS(localization(bare, traj, 1.0), std::invalid_argument);
}

TEST_CASE("localized errors and retained fractions are monotone in M") {
    HarnessConfig cfg = small_config();
    cfg.n_list = {4, 8};
    cfg.n_ref = 64;
    cfg.samples = 8;
    cfg.scheme.diffusion =
        make_diffusion(DiffusionFamily::diagonal_multiplicative, 4, 1.0, 0.0, 0.0, 0.0);
    cfg.reference_check = false;

    std::vector<double> levels = {0.01, 0.05, 0.2, 1.0, 1e6};
    double prev_err = -1.0, prev_ret = -1.0;
    for (double M : levels) {
        cfg.fixed_M = M;
        const RateReport rep = rate_experiment(cfg);
        const double err = rep.rows[0].stats.at("loc_sup_h2").value;
        const double ret = rep.rows[0].stats.at("retained").value;
        CHECK(err >= prev_err - 1e-15);
        CHECK(ret >= prev_ret);
        prev_err = err;
        prev_ret = ret;
    }
}

TEST_CASE("exceedance thresholds cover the trivial extremes") {
    HarnessConfig cfg = small_config();
    cfg.n_list = {4, 8};
    cfg.n_ref = 64;
    cfg.samples = 8;

    cfg.z_schedule = "constant";
    cfg.z_scale = 1e12;
    const RateReport huge = rate_experiment(cfg);
    for (const auto& ex : huge.exceedance) CHECK(ex.fraction == 0.0);

    cfg.z_scale = 0.0;
    const RateReport zero = rate_experiment(cfg);
    for (const auto& ex : zero.exceedance) CHECK(ex.fraction == 1.0);
}

TEST_CASE("configuration preconditions are enforced") {
    HarnessConfig cfg = small_config();
    cfg.samples = 4;
    CHECK_THROWS_AS(diff_estimates(cfg), std::invalid_argument);

    cfg = small_config();
    cfg.n_list = {8, 12};
    CHECK_THROWS_AS(diff_estimates(cfg), std::invalid_argument); // 12 does not divide 64

    cfg = small_config();
    cfg.n_list = {8, 16};
    cfg.n_ref = 64; // below 8x the finest resolution
    CHECK_THROWS_AS(rate_experiment(cfg), std::invalid_argument);

    cfg = small_config();
    cfg.n_list = {16, 8};
    CHECK_THROWS_AS(moment_estimates(cfg), std::invalid_argument); // unsorted
}

TEST_CASE("blown-up trajectories are counted, never silently dropped") {
    HarnessConfig cfg = small_config();
    cfg.scheme.ic.kind = "random_smooth";
    cfg.scheme.ic.amplitude = 1e9;
    cfg.scheme.ic.decay_exponent = 0.5;
    cfg.n_list = {4, 8};
    cfg.samples = 8;
    const DiffReport rep = diff_estimates(cfg);
    for (const auto& row : rep.rows) {
        CHECK(row.failed == row.samples);
        CHECK(row.stats.at("int_uy_h2").value == 0.0);
    }
}
