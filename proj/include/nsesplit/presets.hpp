#pragma once

#include <cstdint>
#include <string>

#include "nsesplit/field.hpp"

namespace nsesplit {

/// u = (cos x1 sin x2, -sin x1 cos x2); an exact Navier-Stokes solution
/// on the 2*pi box (the projected convection term vanishes).
VelocityField taylor_green(const GridSpec& grid, double amplitude = 1.0);

/// Random divergence-free field with coefficient decay
/// (1 + |j|^2)^(-decay_exponent/2), rescaled to the requested H norm.
VelocityField random_smooth(const GridSpec& grid, double decay_exponent, std::uint64_t seed,
                            double h_norm_target = 1.0);

/// Single conjugate mode pair at offset (j1, j2), unit H norm by default.
VelocityField single_mode(const GridSpec& grid, int j1, int j2, double amplitude = 1.0);

/// Band-limited random field for identity tests (divergence-free,
/// mean-zero, Hermitian by construction).
VelocityField random_band_limited(const GridSpec& grid, std::uint64_t seed);

/// Random mean-zero scalar field on the cutoff band.
VorticityField random_scalar_band_limited(const GridSpec& grid, std::uint64_t seed);

/// Initial-condition recipe as named in experiment configs.
struct InitialConditionSpec {
    std::string kind = "taylor_green"; // taylor_green | random_smooth | single_mode | mixed
    double amplitude = 1.0;
    double decay_exponent = 4.0; // random_smooth / mixed
    double smooth_fraction = 0.5; // mixed: H norm of the random part
    int j1 = 1, j2 = 0;          // single_mode
    std::uint64_t seed = 0;      // random_smooth / mixed base seed
    bool per_sample = true;      // re-draw the random part per MC sample

    bool operator==(const InitialConditionSpec&) const = default;
};

VelocityField build_initial_condition(const InitialConditionSpec& ic, const GridSpec& grid,
                                      std::uint64_t sample_seed);

} // namespace nsesplit
