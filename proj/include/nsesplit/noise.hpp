#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nsesplit/field.hpp"
#include "nsesplit/operators.hpp"

namespace nsesplit {

/// One Wiener component mapped to a real divergence-free Fourier basis
/// element with unit H norm (cosine or sine phase at wavevector j).
struct NoiseMode {
    int j1 = 0;
    int j2 = 0;
    bool sine = false;

    bool operator==(const NoiseMode&) const = default;
};

/// Truncation of the cylindrical Wiener expansion: the first `n_modes`
/// basis elements ordered by |j|^2, then (j1, j2), cosine before sine.
struct NoiseBasisSpec {
    int n_modes = 0;
    std::vector<NoiseMode> modes;

    bool operator==(const NoiseBasisSpec&) const = default;
};

NoiseBasisSpec make_noise_basis(int n_modes);

/// Writes basis element `mode` scaled by `scale` into `out` (accumulates).
void add_basis_field(const NoiseMode& mode, const GridSpec& grid, double scale,
                     VelocityField& out);

enum class DiffusionFamily { additive, diagonal_multiplicative, gradient_scaled };

std::string family_name(DiffusionFamily f);
DiffusionFamily family_from_name(const std::string& s);

struct GrowthConstants {
    double K0 = 0.0, K1 = 0.0, K2 = 0.0, L1 = 0.0, L2 = 0.0;

    bool operator==(const GrowthConstants&) const = default;
};

/// Diffusion coefficient G. Per mode j the component is
///   additive:                 g_j(u) = a_j e_j
///   diagonal_multiplicative:  g_j(u) = a_j phi(s_j(u)) e_j,
///                             phi(s) = s / sqrt(1 + s^2),
///                             s_j(u) = sqrt(2) L |uhat(k_j)|
///   gradient_scaled:          g_j(u) = a_j e_j
///                                      + sqrt(eps) b |k_j| <u, e_j>_H e_j
/// with a_j = amplitude * (1 + |j|^2)^(-decay/2). The declared constant
/// bundles bound the Hilbert-Schmidt norms at velocity level (g1) and at
/// curl level (g2).
struct DiffusionSpec {
    DiffusionFamily family = DiffusionFamily::additive;
    NoiseBasisSpec basis;
    double amplitude = 0.0;
    double decay = 0.0;
    double grad_amplitude = 0.0; // b, gradient_scaled only
    double eps = 0.0;            // viscosity split; scales the gradient part
    GrowthConstants g1;
    GrowthConstants g2;

    std::vector<double> mode_amplitudes() const;
    bool is_zero() const { return amplitude == 0.0 && grad_amplitude == 0.0; }

    bool operator==(const DiffusionSpec&) const = default;
};

/// Curl-level declared constants assume the default 2*pi box; pass the
/// grid's wavenumber unit otherwise.
DiffusionSpec make_diffusion(DiffusionFamily family, int n_modes, double amplitude,
                             double decay = 0.0, double grad_amplitude = 0.0, double eps = 0.0,
                             double wavenumber_unit = 1.0);

/// Rotation term R(u) = c0 (-u2, u1), applied through the Leray
/// projection. Lipschitz in H with constant |c0|; R(0) = 0.
struct CoriolisSpec {
    double c0 = 0.0;
    double declared_R0 = 0.0;
    double declared_R1 = 0.0;

    bool operator==(const CoriolisSpec&) const = default;
};

CoriolisSpec make_coriolis(double c0);
VelocityField apply_R(const CoriolisSpec& spec, double t, const VelocityField& u);

/// Truncated Wiener increments at the finest time resolution. Coarse
/// views are summed on demand, never stored.
struct BrownianPath {
    int finest_n = 0;
    double horizon = 0.0; // T
    std::uint64_t seed = 0;
    // increments[mode][step] ~ N(0, T/finest_n), independent
    std::vector<std::vector<double>> increments;

    int n_modes() const { return static_cast<int>(increments.size()); }
    double step() const { return horizon / finest_n; }

    /// Content hash of the realized increments (coupling audits).
    std::uint64_t content_hash() const;
};

BrownianPath sample_path(const NoiseBasisSpec& basis, int finest_n, double T,
                         std::uint64_t seed);

/// Exact sums of child increments on a coarser grid (coarse_n must divide
/// finest_n). Summation is left to right, so partial sums taken the same
/// way reproduce these values bit-exactly.
std::vector<std::vector<double>> aggregate(const BrownianPath& path, int coarse_n);

/// Documented (master, index) -> seed splitting rule for independent
/// Monte-Carlo streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Noise field sum_j g_j(t, u) dW_j, Leray-projected.
VelocityField apply_G(const DiffusionSpec& spec, double t, const VelocityField& u,
                      std::span<const double> dW);

/// Squared Hilbert-Schmidt norms sum_j |g_j(t,u)|_H^2 and
/// sum_j |curl g_j(t,u)|^2.
double hs_norm_sq(const DiffusionSpec& spec, double t, const VelocityField& u);
double hs_norm_sq_curl(const DiffusionSpec& spec, double t, const VelocityField& u);

/// One theorem-hypothesis line in the validation report.
struct ValidationItem {
    std::string name;
    std::string inequality; // rendered with the evaluated numbers
    bool satisfied = false;
};

struct ValidationReport {
    std::vector<ValidationItem> items;
    bool all_satisfied() const;
    std::string to_text() const;
};

/// Checks the declared constants against every constant constraint used
/// by the estimates (moment order p). Warnings only, never hard failures.
ValidationReport validate_assumptions(const DiffusionSpec& spec, const CoriolisSpec& coriolis,
                                      double eps, int p);

} // namespace nsesplit
