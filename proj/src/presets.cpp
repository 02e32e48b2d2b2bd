#include "nsesplit/presets.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "nsesplit/operators.hpp"

namespace nsesplit {

VelocityField taylor_green(const GridSpec& grid, double amplitude) {
    VelocityField u(grid);
    const Complex iq(0.0, 0.25 * amplitude); // i/4 scaled
    // u1 = a cos(k x1) sin(k x2), u2 = -a sin(k x1) cos(k x2)
    u.at(0, 1, 1) = -iq;
    u.at(0, 1, -1) = iq;
    u.at(0, -1, 1) = -iq;
    u.at(0, -1, -1) = iq;
    u.at(1, 1, 1) = iq;
    u.at(1, 1, -1) = iq;
    u.at(1, -1, 1) = -iq;
    u.at(1, -1, -1) = -iq;
    return u;
}

namespace {

// Visits the canonical half lattice (j1 > 0, or j1 == 0 and j2 > 0) of
// the cutoff band in a fixed order.
template <typename F> void for_each_half_mode(const GridSpec& g, F&& f) {
    const int kc = g.dealias_cutoff;
    for (int j2 = 1; j2 <= kc; ++j2) f(0, j2);
    for (int j1 = 1; j1 <= kc; ++j1)
        for (int j2 = -kc; j2 <= kc; ++j2) f(j1, j2);
}

void set_divfree_pair(VelocityField& u, int j1, int j2, Complex scalar) {
    const double mag = std::hypot(double(j1), double(j2));
    const Complex c1 = scalar * (-double(j2) / mag);
    const Complex c2 = scalar * (double(j1) / mag);
    u.at(0, j1, j2) = c1;
    u.at(1, j1, j2) = c2;
    u.at(0, -j1, -j2) = std::conj(c1);
    u.at(1, -j1, -j2) = std::conj(c2);
}

VelocityField random_divfree(const GridSpec& grid, double decay_exponent, std::uint64_t seed,
                             double h_target) {
    VelocityField u(grid);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for_each_half_mode(grid, [&](int j1, int j2) {
        const double jj = double(j1) * j1 + double(j2) * j2;
        const double rho = std::pow(1.0 + jj, -0.5 * decay_exponent);
        const double re = gauss(rng), im = gauss(rng);
        set_divfree_pair(u, j1, j2, rho * Complex(re, im) * M_SQRT1_2);
    });
    const double h = h_norm(u);
    if (h > 0.0 && h_target > 0.0) u *= h_target / h;
    return u;
}

} // namespace

VelocityField random_smooth(const GridSpec& grid, double decay_exponent, std::uint64_t seed,
                            double h_norm_target) {
    return random_divfree(grid, decay_exponent, seed, h_norm_target);
}

VelocityField single_mode(const GridSpec& grid, int j1, int j2, double amplitude) {
    if (j1 == 0 && j2 == 0) throw std::invalid_argument("single_mode: zero wavevector");
    const int kc = grid.dealias_cutoff;
    if (std::abs(j1) > kc || std::abs(j2) > kc)
        throw std::invalid_argument("single_mode: offset outside the dealias band");
    VelocityField u(grid);
    const double L = grid.domain_length;
    set_divfree_pair(u, j1, j2, Complex(amplitude / (M_SQRT2 * L), 0.0));
    return u;
}

VelocityField random_band_limited(const GridSpec& grid, std::uint64_t seed) {
    return random_divfree(grid, 1.5, seed, 1.0);
}

VorticityField random_scalar_band_limited(const GridSpec& grid, std::uint64_t seed) {
    VorticityField xi(grid);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for_each_half_mode(grid, [&](int j1, int j2) {
        const double jj = double(j1) * j1 + double(j2) * j2;
        const double rho = std::pow(1.0 + jj, -0.75);
        const Complex c = rho * Complex(gauss(rng), gauss(rng)) * M_SQRT1_2;
        xi.at(j1, j2) = c;
        xi.at(-j1, -j2) = std::conj(c);
    });
    return xi;
}

VelocityField build_initial_condition(const InitialConditionSpec& ic, const GridSpec& grid,
                                      std::uint64_t sample_seed) {
    const std::uint64_t seed = ic.per_sample ? sample_seed : ic.seed;
    if (ic.kind == "taylor_green") return taylor_green(grid, ic.amplitude);
    if (ic.kind == "random_smooth")
        return random_smooth(grid, ic.decay_exponent, seed, ic.amplitude);
    if (ic.kind == "single_mode") return single_mode(grid, ic.j1, ic.j2, ic.amplitude);
    if (ic.kind == "mixed") {
        VelocityField u = taylor_green(grid, ic.amplitude);
        u += random_smooth(grid, ic.decay_exponent, seed, ic.smooth_fraction);
        return u;
    }
    throw std::invalid_argument("unknown initial condition preset: " + ic.kind);
}

} // namespace nsesplit
