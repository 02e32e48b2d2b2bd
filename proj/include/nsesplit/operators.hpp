#pragma once

#include "nsesplit/field.hpp"

namespace nsesplit {

/// L^2, H^1-seminorm, Stokes, and L^4 norms of one field.
struct NormBundle {
    double h = 0.0;  // |u|,  L^2
    double v = 0.0;  // ||u|| = |A^{1/2} u|
    double da = 0.0; // |A u|
    double x = 0.0;  // |u|_X, L^4 on the physical grid
};

/// Orthogonal projection onto divergence-free, mean-zero fields.
VelocityField leray_project(const VelocityField& f);

/// Stokes operator: multiplies each mode by |k|^2.
VelocityField apply_A(const VelocityField& u);

/// In-place per-mode scaling by exp(-nu |k|^2 dt) (Stokes semigroup).
void stokes_semigroup_inplace(VelocityField& u, double nu, double dt);

/// Projected convection term P[(u . grad) v], alias-free for inputs that
/// respect the dealias cutoff; output truncated to the cutoff band.
VelocityField bilinear_B(const VelocityField& u, const VelocityField& v);

VorticityField curl(const VelocityField& u);

/// Biot-Savart inversion: the unique mean-zero divergence-free u with
/// curl u = xi.
VelocityField velocity_from_vorticity(const VorticityField& xi);

/// Scalar advection u . grad(xi), truncated to the cutoff band.
VorticityField advect_scalar(const VelocityField& u, const VorticityField& xi);

NormBundle norms(const VelocityField& u);
double h_norm(const VelocityField& u);
double v_norm(const VelocityField& u);
double da_norm(const VelocityField& u);
double x_norm(const VelocityField& u);
double l2_norm(const VorticityField& xi);
double grad_l2_norm(const VorticityField& xi);

double inner_h(const VelocityField& u, const VelocityField& v);
double inner_v(const VelocityField& u, const VelocityField& v);
double inner_l2(const VorticityField& a, const VorticityField& b);

/// Zeroes every mode outside the dealias band.
void dealias_inplace(VelocityField& u);

} // namespace nsesplit
