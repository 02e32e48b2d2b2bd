#include "nsesplit/validate.hpp"

#include <cmath>
#include <sstream>

#include "nsesplit/scheme.hpp"
#include "nsesplit/transform.hpp"

namespace nsesplit {

namespace {

double rel(double defect, double scale) { return scale > 0.0 ? defect / scale : defect; }

} // namespace

std::vector<InvariantCheck> run_invariant_suite(const ExperimentConfig& cfg) {
    std::vector<InvariantCheck> checks;
    auto add = [&](const std::string& group, const std::string& name, double measured,
                   double bound) {
        checks.push_back({group, name, measured, bound, measured <= bound});
    };

    const GridSpec grid = cfg.harness.scheme.grid;
    const std::uint64_t seed0 = cfg.harness.master_seed;

    // ---- spectral identities on random band-limited fields ----
    {
        double worst_skew = 0.0, worst_zero = 0.0, worst_ab = 0.0, worst_curlb = 0.0;
        double worst_deltacurl = 0.0, worst_gradcurl = 0.0, worst_roundtrip = 0.0;
        double worst_herm = 0.0, worst_div = 0.0, worst_mean = 0.0;
        const int trials = 25;
        for (int t = 0; t < trials; ++t) {
            const VelocityField u = random_band_limited(grid, derive_seed(seed0, 100 + t));
            const VelocityField v = random_band_limited(grid, derive_seed(seed0, 200 + t));
            const VelocityField z = random_band_limited(grid, derive_seed(seed0, 300 + t));

            const VelocityField Buv = bilinear_B(u, v);
            const VelocityField Buz = bilinear_B(u, z);
            const double scale3 = v_norm(u) * v_norm(v) * v_norm(z);
            worst_skew = std::max(worst_skew,
                                  std::abs(inner_h(Buv, z) + inner_h(Buz, v)) / scale3);
            worst_zero = std::max(worst_zero,
                                  std::abs(inner_h(Buv, v)) / (v_norm(u) * v_norm(v) * v_norm(v)));

            const VelocityField Buu = bilinear_B(u, u);
            const VelocityField Au = apply_A(u);
            worst_ab = std::max(worst_ab,
                                std::abs(inner_h(Au, Buu)) / (da_norm(u) * v_norm(u) * v_norm(u)));

            const VorticityField xi = curl(u);
            const VorticityField curl_Buu = curl(Buu);
            const VorticityField adv = advect_scalar(u, xi);
            const VorticityField w = curl(z);
            worst_curlb =
                std::max(worst_curlb, std::abs(inner_l2(curl_Buu, w) - inner_l2(adv, w)) /
                                          (v_norm(u) * da_norm(u) * l2_norm(w)));

            worst_deltacurl =
                std::max(worst_deltacurl,
                         std::abs(da_norm(u) * da_norm(u) - grad_l2_norm(xi) * grad_l2_norm(xi)) /
                             (da_norm(u) * da_norm(u)));
            worst_gradcurl = std::max(
                worst_gradcurl, std::abs(v_norm(u) - l2_norm(xi)) / v_norm(u));

            VelocityField back = velocity_from_vorticity(xi);
            back -= u;
            worst_roundtrip = std::max(worst_roundtrip, h_norm(back) / h_norm(u));

            worst_herm = std::max(worst_herm, hermitian_defect(Buv));
            worst_div = std::max(worst_div, divergence_defect(Buv));
            worst_mean = std::max(worst_mean, rel(mean_mode_magnitude(Buv), h_norm(Buv)));
        }
        add("spectral", "skew_symmetry", worst_skew, 1e-10);
        add("spectral", "zero_form", worst_zero, 1e-10);
        add("spectral", "stokes_convection_orthogonality", worst_ab, 1e-10);
        add("spectral", "curl_transport", worst_curlb, 1e-10);
        add("spectral", "laplacian_curl_identity", worst_deltacurl, 1e-12);
        add("spectral", "gradient_curl_identity", worst_gradcurl, 1e-12);
        add("spectral", "vorticity_roundtrip", worst_roundtrip, 1e-12);
        add("spectral", "hermitian_preserved", worst_herm, 1e-12);
        add("spectral", "divergence_free_preserved", worst_div, 1e-12);
        add("spectral", "mean_zero_preserved", worst_mean, 1e-12);
    }

    // ---- normalization: coefficient norm vs physical integral ----
    {
        const VelocityField u = random_band_limited(grid, derive_seed(seed0, 42));
        const int M = product_grid_size(grid);
        std::vector<Complex> p1, p2;
        to_physical(grid, M, u.data().data(), p1);
        to_physical(grid, M,
                    u.data().data() + static_cast<std::size_t>(grid.modes_per_dim) *
                                          grid.modes_per_dim,
                    p2);
        double integral = 0.0;
        for (std::size_t i = 0; i < p1.size(); ++i)
            integral += p1[i].real() * p1[i].real() + p2[i].real() * p2[i].real();
        const double cell = grid.domain_length / M;
        integral *= cell * cell;
        const double h2 = h_norm(u) * h_norm(u);
        add("spectral", "parseval_normalization", std::abs(integral - h2) / h2, 1e-12);
    }

    // ---- interpolation inequality: |u|_X^2 <= C |u| ||u|| ----
    {
        double worst_ratio = 0.0;
        for (int t = 0; t < 200; ++t) {
            const VelocityField u = random_band_limited(grid, derive_seed(seed0, 1000 + t));
            const double ratio = x_norm(u) * x_norm(u) / (h_norm(u) * v_norm(u));
            worst_ratio = std::max(worst_ratio, ratio);
        }
        // frozen empirical envelope, stable across N in {16, 32, 64}
        add("spectral", "l4_interpolation_constant", worst_ratio, 0.75);
    }

    // ---- noise statistics ----
    {
        const auto& diff = cfg.harness.scheme.diffusion;
        const NoiseBasisSpec basis = diff.basis.n_modes > 0 ? diff.basis : make_noise_basis(2);
        const double T = cfg.harness.scheme.T;
        const int steps = 16;
        const int samples = 100000 / steps;
        double sum = 0.0, sumsq = 0.0, sum_sib = 0.0;
        long count = 0;
        for (int s = 0; s < samples; ++s) {
            const BrownianPath path =
                sample_path(basis, steps, T, derive_seed(seed0, 5000 + s));
            for (int i = 0; i < steps; ++i) {
                const double w = path.increments[0][i];
                sum += w;
                sumsq += w * w;
                ++count;
            }
            for (int i = 0; i + 1 < steps; i += 2)
                sum_sib += path.increments[0][i] * path.increments[0][i + 1];
        }
        const double var_th = T / steps;
        const double mean = sum / count;
        const double var = sumsq / count - mean * mean;
        const double se_mean = std::sqrt(var_th / count);
        const double se_var = var_th * std::sqrt(2.0 / (count - 1.0));
        add("noise", "increment_mean_4se", std::abs(mean), 4.0 * se_mean);
        add("noise", "increment_variance_4se", std::abs(var - var_th), 4.0 * se_var);
        const double cov_sib = sum_sib / (count / 2);
        add("noise", "sibling_independence_4se", std::abs(cov_sib),
            4.0 * var_th / std::sqrt(count / 2.0));

        // dyadic consistency: cov(parent, child) = var(child)
        double sum_pc = 0.0;
        long pairs = 0;
        for (int s = 0; s < samples; ++s) {
            const BrownianPath path = sample_path(basis, steps, T, derive_seed(seed0, 5000 + s));
            for (int i = 0; i + 1 < steps; i += 2) {
                const double child = path.increments[0][i];
                const double parent = child + path.increments[0][i + 1];
                sum_pc += parent * child;
                ++pairs;
            }
        }
        add("noise", "parent_child_covariance_4se", std::abs(sum_pc / pairs - var_th),
            4.0 * var_th * std::sqrt(3.0 / pairs));
    }

    // ---- growth and Lipschitz monitors for the configured family ----
    if (!cfg.harness.scheme.diffusion.is_zero()) {
        const auto& diff = cfg.harness.scheme.diffusion;
        const double eps = cfg.harness.scheme.eps;
        double worst_g1 = 0.0, worst_g2 = 0.0, worst_lip = 0.0, worst_curl_r = 0.0;
        for (int t = 0; t < 200; ++t) {
            VelocityField u = random_band_limited(grid, derive_seed(seed0, 2000 + t));
            u *= 0.25 + 3.0 * (t % 7) / 7.0; // spread of magnitudes
            const double uh2 = h_norm(u) * h_norm(u);
            const double uv2 = v_norm(u) * v_norm(u);
            const double bound1 = diff.g1.K0 + diff.g1.K1 * uh2 + eps * diff.g1.K2 * uv2;
            worst_g1 = std::max(worst_g1, hs_norm_sq(diff, 0.0, u) - bound1);

            const VorticityField xi = curl(u);
            const double xi2 = l2_norm(xi) * l2_norm(xi);
            const double da2 = da_norm(u) * da_norm(u);
            const double bound2 = diff.g2.K0 + diff.g2.K1 * xi2 + eps * diff.g2.K2 * da2;
            worst_g2 = std::max(worst_g2, hs_norm_sq_curl(diff, 0.0, u) - bound2);

            const VelocityField v = random_band_limited(grid, derive_seed(seed0, 3000 + t));
            VelocityField d = u;
            d -= v;
            const double lip_bound =
                diff.g1.L1 * h_norm(d) * h_norm(d) + eps * diff.g1.L2 * v_norm(d) * v_norm(d);
            // measured |G(u) - G(v)|_HS^2 via per-mode differences
            std::vector<double> unit(diff.basis.modes.size(), 0.0);
            double lip = 0.0;
            for (std::size_t jm = 0; jm < diff.basis.modes.size(); ++jm) {
                unit.assign(diff.basis.modes.size(), 0.0);
                unit[jm] = 1.0;
                VelocityField gu = apply_G(diff, 0.0, u, unit);
                gu -= apply_G(diff, 0.0, v, unit);
                lip += h_norm(gu) * h_norm(gu);
            }
            worst_lip = std::max(worst_lip, lip - lip_bound);

            const VelocityField ru = apply_R(cfg.harness.scheme.coriolis, 0.0, u);
            worst_curl_r = std::max(worst_curl_r, l2_norm(curl(ru)));
        }
        add("noise", "growth_bound_velocity", worst_g1, 1e-12);
        add("noise", "growth_bound_curl", worst_g2, 1e-12);
        add("noise", "lipschitz_bound", worst_lip, 1e-10);
        add("noise", "curl_rotation_bound",
            worst_curl_r, cfg.harness.scheme.coriolis.declared_R0 + 1e-10);
    }

    // ---- scheme structure on a short run ----
    {
        SchemeConfig sc = cfg.harness.scheme;
        sc.n = 4;
        sc.T = std::min(sc.T, 0.25);
        sc.seed = derive_seed(seed0, 77);
        const BrownianPath path =
            sample_path(sc.diffusion.basis, sc.n * sc.inner_steps, sc.T, sc.seed);
        TrajectoryOptions opts;
        opts.dense_norms = true;
        opts.y_norms = true;
        const SchemeTrajectory a = run_scheme(sc, path, opts);
        const SchemeTrajectory b = run_scheme(sc, path, opts);
        double worst_rerun = 0.0, worst_div = 0.0, worst_mean = 0.0;
        for (int k = 0; k <= sc.n; ++k) {
            VelocityField d = a.u_plus[k];
            d -= b.u_plus[k];
            worst_rerun = std::max(worst_rerun, h_norm(d));
            worst_div = std::max(worst_div, divergence_defect(a.u_plus[k]));
            worst_mean =
                std::max(worst_mean, rel(mean_mode_magnitude(a.u_plus[k]), h_norm(a.u_plus[k])));
        }
        add("scheme", "rerun_determinism", worst_rerun, 0.0);
        add("scheme", "divergence_free_states", worst_div, 1e-12);
        add("scheme", "mean_zero_states", worst_mean, 1e-12);

        // linear exactness: single mode, no drift contribution
        const GridSpec g = sc.grid;
        SchemeConfig lc = sc;
        lc.ic.kind = "single_mode";
        lc.ic.j1 = 1;
        lc.ic.j2 = 2;
        lc.ic.amplitude = 1.0;
        lc.diffusion = make_diffusion(DiffusionFamily::additive, 0, 0.0);
        const BrownianPath zero_path = sample_path(lc.diffusion.basis, lc.n, lc.T, 1);
        const SchemeTrajectory lin = run_scheme(lc, zero_path, TrajectoryOptions{});
        const double k2 = g.wavenumber_unit() * g.wavenumber_unit() * 5.0;
        const double expected = std::exp(-k2 * lc.T); // composite factor over [0, T]
        const double got = h_norm(lin.u_plus[lc.n]) / h_norm(lin.u_plus[0]);
        add("scheme", "linear_mode_exactness", std::abs(got - expected) / expected, 1e-12);
    }

    // ---- assumption ledger ----
    {
        const ValidationReport rep =
            validate_assumptions(cfg.harness.scheme.diffusion, cfg.harness.scheme.coriolis,
                                 cfg.harness.scheme.eps, std::max(cfg.harness.p, 2));
        for (const auto& item : rep.items)
            checks.push_back({"assumptions", item.name, item.satisfied ? 0.0 : 1.0, 0.0,
                              item.satisfied});
    }

    return checks;
}

std::string invariant_table(const std::vector<InvariantCheck>& checks) {
    std::ostringstream os;
    std::string group;
    for (const auto& c : checks) {
        if (c.group != group) {
            group = c.group;
            os << "[" << group << "]\n";
        }
        os << "  " << (c.passed ? "PASS" : "FAIL") << "  " << c.name << "  (measured "
           << c.measured << ", bound " << c.bound << ")\n";
    }
    return os.str();
}

bool all_passed(const std::vector<InvariantCheck>& checks) {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

} // namespace nsesplit
