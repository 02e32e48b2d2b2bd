#include "nsesplit/operators.hpp"

#include <cmath>
#include <stdexcept>

#include "nsesplit/transform.hpp"

namespace nsesplit {

VelocityField leray_project(const VelocityField& f) {
    VelocityField out = f;
    const GridSpec& g = f.grid();
    for_each_mode(g, [&](int j1, int j2) {
        if (j1 == 0 && j2 == 0) {
            out.at(0, 0, 0) = out.at(1, 0, 0) = Complex{0.0, 0.0};
            return;
        }
        const double jj = double(j1) * j1 + double(j2) * j2;
        const Complex kdotf = double(j1) * f.at(0, j1, j2) + double(j2) * f.at(1, j1, j2);
        const Complex s = kdotf / jj;
        out.at(0, j1, j2) = f.at(0, j1, j2) - double(j1) * s;
        out.at(1, j1, j2) = f.at(1, j1, j2) - double(j2) * s;
    });
    return out;
}

VelocityField apply_A(const VelocityField& u) {
    VelocityField out = u;
    const double k2unit = u.grid().wavenumber_unit() * u.grid().wavenumber_unit();
    for_each_mode(u.grid(), [&](int j1, int j2) {
        const double k2 = k2unit * (double(j1) * j1 + double(j2) * j2);
        out.at(0, j1, j2) *= k2;
        out.at(1, j1, j2) *= k2;
    });
    return out;
}

void stokes_semigroup_inplace(VelocityField& u, double nu, double dt) {
    if (nu == 0.0 || dt == 0.0) return;
    const double k2unit = u.grid().wavenumber_unit() * u.grid().wavenumber_unit();
    for_each_mode(u.grid(), [&](int j1, int j2) {
        const double k2 = k2unit * (double(j1) * j1 + double(j2) * j2);
        const double damp = std::exp(-nu * k2 * dt);
        u.at(0, j1, j2) *= damp;
        u.at(1, j1, j2) *= damp;
    });
}

VelocityField bilinear_B(const VelocityField& u, const VelocityField& v) {
    const GridSpec& g = u.grid();
    if (!(g == v.grid())) throw std::invalid_argument("bilinear_B: grid mismatch");
    const int M = product_grid_size(g);
    const std::size_t nn = static_cast<std::size_t>(g.modes_per_dim) * g.modes_per_dim;

    const auto w1 = derivative_weight(g, 0);
    const auto w2 = derivative_weight(g, 1);

    std::vector<Complex> pu1, pu2, d1, d2;
    to_physical(g, M, u.data().data(), pu1);
    to_physical(g, M, u.data().data() + nn, pu2);

    VelocityField out(g);
    std::vector<Complex> prod(static_cast<std::size_t>(M) * M);
    for (int comp = 0; comp < 2; ++comp) {
        const Complex* vc = v.data().data() + static_cast<std::size_t>(comp) * nn;
        to_physical_weighted(g, M, vc, w1, d1);
        to_physical_weighted(g, M, vc, w2, d2);
        for (std::size_t i = 0; i < prod.size(); ++i)
            prod[i] = pu1[i] * d1[i] + pu2[i] * d2[i];
        to_spectral_truncated(g, M, prod, out.data().data() + static_cast<std::size_t>(comp) * nn);
    }
    return leray_project(out);
}

VorticityField curl(const VelocityField& u) {
    const GridSpec& g = u.grid();
    VorticityField xi(g);
    const double kappa = g.wavenumber_unit();
    for_each_mode(g, [&](int j1, int j2) {
        xi.at(j1, j2) = Complex(0.0, 1.0) * kappa *
                        (double(j1) * u.at(1, j1, j2) - double(j2) * u.at(0, j1, j2));
    });
    return xi;
}

VelocityField velocity_from_vorticity(const VorticityField& xi) {
    const GridSpec& g = xi.grid();
    VelocityField u(g);
    const double kappa = g.wavenumber_unit();
    for_each_mode(g, [&](int j1, int j2) {
        if (j1 == 0 && j2 == 0) return;
        const double k2 = kappa * kappa * (double(j1) * j1 + double(j2) * j2);
        const Complex s = Complex(0.0, 1.0) * xi.at(j1, j2) / k2;
        u.at(0, j1, j2) = kappa * double(j2) * s;
        u.at(1, j1, j2) = -kappa * double(j1) * s;
    });
    return u;
}

VorticityField advect_scalar(const VelocityField& u, const VorticityField& xi) {
    const GridSpec& g = u.grid();
    if (!(g == xi.grid())) throw std::invalid_argument("advect_scalar: grid mismatch");
    const int M = product_grid_size(g);

    std::vector<Complex> pu1, pu2, d1, d2;
    to_physical(g, M, u.data().data(), pu1);
    const std::size_t nn = static_cast<std::size_t>(g.modes_per_dim) * g.modes_per_dim;
    to_physical(g, M, u.data().data() + nn, pu2);
    to_physical_weighted(g, M, xi.data().data(), derivative_weight(g, 0), d1);
    to_physical_weighted(g, M, xi.data().data(), derivative_weight(g, 1), d2);

    std::vector<Complex> prod(static_cast<std::size_t>(M) * M);
    for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = pu1[i] * d1[i] + pu2[i] * d2[i];

    VorticityField out(g);
    to_spectral_truncated(g, M, prod, out.data().data());
    out.at(0, 0) = Complex{0.0, 0.0};
    return out;
}

namespace {

// Sums sum_k w(|j|^2) |uhat(k)|^2 over modes and components.
template <typename W> double weighted_sq_sum(const VelocityField& u, W&& w) {
    double s = 0.0;
    for_each_mode(u.grid(), [&](int j1, int j2) {
        const double jj = double(j1) * j1 + double(j2) * j2;
        s += w(jj) * (std::norm(u.at(0, j1, j2)) + std::norm(u.at(1, j1, j2)));
    });
    return s;
}

} // namespace

double h_norm(const VelocityField& u) {
    const double L = u.grid().domain_length;
    return L * std::sqrt(weighted_sq_sum(u, [](double) { return 1.0; }));
}

double v_norm(const VelocityField& u) {
    const double L = u.grid().domain_length;
    const double k2u = u.grid().wavenumber_unit() * u.grid().wavenumber_unit();
    return L * std::sqrt(weighted_sq_sum(u, [&](double jj) { return k2u * jj; }));
}

double da_norm(const VelocityField& u) {
    const double L = u.grid().domain_length;
    const double k2u = u.grid().wavenumber_unit() * u.grid().wavenumber_unit();
    return L * std::sqrt(weighted_sq_sum(u, [&](double jj) { return k2u * k2u * jj * jj; }));
}

double x_norm(const VelocityField& u) {
    const GridSpec& g = u.grid();
    const int M = product_grid_size(g);
    const std::size_t nn = static_cast<std::size_t>(g.modes_per_dim) * g.modes_per_dim;
    std::vector<Complex> p1, p2;
    to_physical(g, M, u.data().data(), p1);
    to_physical(g, M, u.data().data() + nn, p2);
    double s = 0.0;
    for (std::size_t i = 0; i < p1.size(); ++i) {
        const double q = p1[i].real() * p1[i].real() + p2[i].real() * p2[i].real();
        s += q * q;
    }
    const double cell = g.domain_length / M;
    return std::pow(s * cell * cell, 0.25);
}

NormBundle norms(const VelocityField& u) {
    NormBundle nb;
    nb.h = h_norm(u);
    nb.v = v_norm(u);
    nb.da = da_norm(u);
    nb.x = x_norm(u);
    return nb;
}

double l2_norm(const VorticityField& xi) {
    double s = 0.0;
    for (const auto& c : xi.data()) s += std::norm(c);
    return xi.grid().domain_length * std::sqrt(s);
}

double grad_l2_norm(const VorticityField& xi) {
    const GridSpec& g = xi.grid();
    const double k2u = g.wavenumber_unit() * g.wavenumber_unit();
    double s = 0.0;
    for_each_mode(g, [&](int j1, int j2) {
        s += k2u * (double(j1) * j1 + double(j2) * j2) * std::norm(xi.at(j1, j2));
    });
    return g.domain_length * std::sqrt(s);
}

double inner_h(const VelocityField& u, const VelocityField& v) {
    if (!(u.grid() == v.grid())) throw std::invalid_argument("inner_h: grid mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < u.data().size(); ++i)
        s += (u.data()[i] * std::conj(v.data()[i])).real();
    const double L = u.grid().domain_length;
    return L * L * s;
}

double inner_v(const VelocityField& u, const VelocityField& v) {
    if (!(u.grid() == v.grid())) throw std::invalid_argument("inner_v: grid mismatch");
    const GridSpec& g = u.grid();
    const double k2u = g.wavenumber_unit() * g.wavenumber_unit();
    double s = 0.0;
    for_each_mode(g, [&](int j1, int j2) {
        const double w = k2u * (double(j1) * j1 + double(j2) * j2);
        s += w * ((u.at(0, j1, j2) * std::conj(v.at(0, j1, j2))).real() +
                  (u.at(1, j1, j2) * std::conj(v.at(1, j1, j2))).real());
    });
    const double L = g.domain_length;
    return L * L * s;
}

double inner_l2(const VorticityField& a, const VorticityField& b) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument("inner_l2: grid mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        s += (a.data()[i] * std::conj(b.data()[i])).real();
    const double L = a.grid().domain_length;
    return L * L * s;
}

void dealias_inplace(VelocityField& u) {
    const GridSpec& g = u.grid();
    const int kc = g.dealias_cutoff;
    for_each_mode(g, [&](int j1, int j2) {
        if (std::abs(j1) > kc || std::abs(j2) > kc) {
            u.at(0, j1, j2) = Complex{0.0, 0.0};
            u.at(1, j1, j2) = Complex{0.0, 0.0};
        }
    });
}

} // namespace nsesplit
