#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nsesplit/noise.hpp"
#include "nsesplit/operators.hpp"
#include "nsesplit/presets.hpp"

using namespace nsesplit;

TEST_CASE("noise basis enumeration is shell-ordered with unit-norm elements") {
    const NoiseBasisSpec basis = make_noise_basis(8);
    REQUIRE(basis.modes.size() == 8);
    // first shell |j|^2 = 1: (0,1) then (1,0), cosine before sine
    CHECK(basis.modes[0].j1 == 0);
    CHECK(basis.modes[0].j2 == 1);
    CHECK_FALSE(basis.modes[0].sine);
    CHECK(basis.modes[1].sine);
    CHECK(basis.modes[2].j1 == 1);
    CHECK(basis.modes[2].j2 == 0);

    const GridSpec g = make_grid(16);
    for (const NoiseMode& mode : basis.modes) {
        VelocityField e(g);
        add_basis_field(mode, g, 1.0, e);
        CHECK(h_norm(e) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(hermitian_defect(e) <= 1e-14);
        CHECK(divergence_defect(e) <= 1e-14);
        CHECK(mean_mode_magnitude(e) == 0.0);
        // curl of a unit element has magnitude |k|
        const double kmag = std::hypot(double(mode.j1), double(mode.j2));
        CHECK(l2_norm(curl(e)) == doctest::Approx(kmag).epsilon(1e-13));
    }
}

TEST_CASE("path sampling is seed-deterministic with the right statistics") {
    const NoiseBasisSpec basis = make_noise_basis(2);
    const BrownianPath a = sample_path(basis, 16, 1.0, 42);
    const BrownianPath b = sample_path(basis, 16, 1.0, 42);
    CHECK(a.increments == b.increments);
    const BrownianPath c = sample_path(basis, 16, 1.0, 43);
    CHECK(a.increments != c.increments);

    // mean 0 and variance T/finest within 4 standard errors at 1e5 draws
    const double T = 2.0;
    const int steps = 8;
    double sum = 0.0, sumsq = 0.0;
    long count = 0;
    for (int s = 0; s < 100000 / steps; ++s) {
        const BrownianPath p = sample_path(basis, steps, T, derive_seed(9, s));
        for (double w : p.increments[1]) {
            sum += w;
            sumsq += w * w;
            ++count;
        }
    }
    const double var_th = T / steps;
    const double mean = sum / count;
    const double var = sumsq / count - mean * mean;
    CHECK(std::abs(mean) <= 4.0 * std::sqrt(var_th / count));
    CHECK(std::abs(var - var_th) <= 4.0 * var_th * std::sqrt(2.0 / (count - 1.0)));
}

TEST_CASE("aggregation reproduces coarse increments exactly") {
    const NoiseBasisSpec basis = make_noise_basis(3);
    const BrownianPath p = sample_path(basis, 8, 1.0, 7);

    const auto same = aggregate(p, 8);
    CHECK(same == p.increments);

    const auto one = aggregate(p, 1);
    for (int m = 0; m < 3; ++m) {
        double total = 0.0;
        for (double w : p.increments[m]) total += w;
        CHECK(one[m][0] == total); // bit-exact left-to-right sum
    }

    const auto half = aggregate(p, 4);
    for (int m = 0; m < 3; ++m)
        for (int i = 0; i < 4; ++i)
            CHECK(half[m][i] == p.increments[m][2 * i] + p.increments[m][2 * i + 1]);

    CHECK_THROWS_AS(aggregate(p, 3), std::invalid_argument);
}

TEST_CASE("additive coefficient acts linearly on increments") {
    const GridSpec g = make_grid(16);
    const DiffusionSpec spec = make_diffusion(DiffusionFamily::additive, 4, 0.7, 1.0);
    const VelocityField u = random_band_limited(g, 3);
    const auto amps = spec.mode_amplitudes();

    std::vector<double> dW(4, 0.0);
    dW[2] = 1.0;
    const VelocityField gu = apply_G(spec, 0.0, u, dW);
    VelocityField expect(g);
    add_basis_field(spec.basis.modes[2], g, amps[2], expect);
    expect -= gu;
    CHECK(h_norm(expect) <= 1e-14);

    std::vector<double> zero(4, 0.0);
    CHECK(h_norm(apply_G(spec, 0.0, u, zero)) == 0.0);

    std::vector<double> wrong(3, 0.0);
    CHECK_THROWS_AS(apply_G(spec, 0.0, u, wrong), std::invalid_argument);
}

TEST_CASE("hilbert-schmidt norms match the declared growth bounds") {
    const GridSpec g = make_grid(16);

    const DiffusionSpec add = make_diffusion(DiffusionFamily::additive, 6, 0.4, 0.5);
    const auto amps = add.mode_amplitudes();
    double expect = 0.0;
    for (double a : amps) expect += a * a;
    const VelocityField u = random_band_limited(g, 5);
    CHECK(hs_norm_sq(add, 0.0, u) == doctest::Approx(expect).epsilon(1e-13));
    CHECK(hs_norm_sq(add, 0.0, 3.0 * u) == doctest::Approx(expect).epsilon(1e-13));
    CHECK(add.g1.K0 == doctest::Approx(expect).epsilon(1e-13));

    const DiffusionSpec none = make_diffusion(DiffusionFamily::additive, 6, 0.0);
    CHECK(hs_norm_sq(none, 0.0, u) == 0.0);

    // gradient part disappears entirely at eps = 0
    const DiffusionSpec grad0 =
        make_diffusion(DiffusionFamily::gradient_scaled, 6, 0.4, 0.0, 2.0, 0.0);
    const DiffusionSpec plain = make_diffusion(DiffusionFamily::additive, 6, 0.4, 0.0);
    CHECK(hs_norm_sq(grad0, 0.0, u) == doctest::Approx(hs_norm_sq(plain, 0.0, u)).epsilon(1e-13));

    const DiffusionSpec grad =
        make_diffusion(DiffusionFamily::gradient_scaled, 6, 0.4, 0.0, 2.0, 0.5);
    CHECK(hs_norm_sq(grad, 0.0, u) != doctest::Approx(hs_norm_sq(plain, 0.0, u)).epsilon(1e-6));

    // growth and Lipschitz monitors over random fields, all families
    for (const DiffusionSpec& spec :
         {add, grad, make_diffusion(DiffusionFamily::diagonal_multiplicative, 6, 0.8, 0.0, 0.0,
                                    0.5)}) {
        const double eps = spec.eps;
        for (int t = 0; t < 200; ++t) {
            VelocityField w = random_band_limited(g, 100 + t);
            w *= 0.2 + 2.0 * (t % 5);
            const double wh2 = h_norm(w) * h_norm(w);
            const double wv2 = v_norm(w) * v_norm(w);
            CHECK(hs_norm_sq(spec, 0.0, w) <=
                  spec.g1.K0 + spec.g1.K1 * wh2 + eps * spec.g1.K2 * wv2 + 1e-12);
            const double xi2 = std::pow(l2_norm(curl(w)), 2);
            const double da2 = da_norm(w) * da_norm(w);
            CHECK(hs_norm_sq_curl(spec, 0.0, w) <=
                  spec.g2.K0 + spec.g2.K1 * xi2 + eps * spec.g2.K2 * da2 + 1e-12);

            const VelocityField v = random_band_limited(g, 300 + t);
            VelocityField d = w;
            d -= v;
            std::vector<double> unit(spec.basis.modes.size(), 0.0);
            double lip = 0.0;
            for (std::size_t j = 0; j < spec.basis.modes.size(); ++j) {
                unit.assign(spec.basis.modes.size(), 0.0);
                unit[j] = 1.0;
                VelocityField gw = apply_G(spec, 0.0, w, unit);
                gw -= apply_G(spec, 0.0, v, unit);
                lip += h_norm(gw) * h_norm(gw);
            }
            CHECK(lip <= spec.g1.L1 * h_norm(d) * h_norm(d) +
                             eps * spec.g1.L2 * v_norm(d) * v_norm(d) + 1e-10);
        }
    }
}

TEST_CASE("rotation term is a projected quarter-turn with zero curl") {
    const GridSpec g = make_grid(16);
    const CoriolisSpec cor = make_coriolis(0.8);
    CHECK(cor.declared_R1 == doctest::Approx(0.8));
    CHECK(cor.declared_R0 == 0.0);

    const VelocityField zero(g);
    CHECK(h_norm(apply_R(cor, 0.0, zero)) == 0.0);

    for (int t = 0; t < 20; ++t) {
        const VelocityField u = random_band_limited(g, 40 + t);
        const VelocityField v = random_band_limited(g, 60 + t);
        VelocityField du = u;
        du -= v;
        VelocityField dr = apply_R(cor, 0.0, u);
        dr -= apply_R(cor, 0.0, v);
        CHECK(h_norm(dr) <= cor.declared_R1 * h_norm(du) * (1 + 1e-12));
        CHECK(l2_norm(curl(apply_R(cor, 0.0, u))) <= 1e-12);
    }
}

TEST_CASE("assumption checks evaluate the stated inequalities") {
    const CoriolisSpec cor = make_coriolis(0.0);

    const DiffusionSpec add = make_diffusion(DiffusionFamily::additive, 4, 0.5);
    CHECK(validate_assumptions(add, cor, 0.3, 4).all_satisfied());

    // K2 = 0.3 fails the localized-rate constraint K2 < 2/7
    DiffusionSpec strong = add;
    strong.g1.K2 = 0.3;
    strong.g1.L2 = 0.3;
    const ValidationReport rep = validate_assumptions(strong, cor, 0.1, 4);
    bool found = false;
    for (const auto& item : rep.items)
        if (item.name.find("localized-rate") != std::string::npos) {
            found = true;
            CHECK_FALSE(item.satisfied);
            CHECK(item.inequality.find("0.3") != std::string::npos);
        }
    CHECK(found);

    // eps * L2 < 2 (1 - eps): 0.5 * 1.9 = 0.95 < 1 passes, 0.5 * 2.1 fails
    DiffusionSpec l2ok = add;
    l2ok.g1.L2 = 1.9;
    DiffusionSpec l2bad = add;
    l2bad.g1.L2 = 2.1;
    auto find_parab = [](const ValidationReport& r) {
        for (const auto& item : r.items)
            if (item.name.find("split-parabolicity") != std::string::npos) return item;
        return ValidationItem{};
    };
    CHECK(find_parab(validate_assumptions(l2ok, cor, 0.5, 2)).satisfied);
    CHECK_FALSE(find_parab(validate_assumptions(l2bad, cor, 0.5, 2)).satisfied);
}

TEST_CASE("seed derivation separates streams") {
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    // repeated derivation is stable
    CHECK(derive_seed(123, 7) == derive_seed(123, 7));
}
