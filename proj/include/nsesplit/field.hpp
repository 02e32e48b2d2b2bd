#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <vector>

#include "nsesplit/grid.hpp"

namespace nsesplit {

using Complex = std::complex<double>;

// Coefficients follow the plain Fourier-series convention
//   u(x) = sum_j uhat(j) exp(i k(j).x),  k(j) = (2*pi/L) j,
// stored densely over j in [-N/2, N/2)^2, row-major in (j1, j2).
// Real fields keep uhat(-j) = conj(uhat(j)); the H inner product carries
// the L^2 weight so that |u|_H^2 equals the integral of |u|^2 over the box.

namespace detail {
inline int flat_index(const GridSpec& g, int j1, int j2) {
    const int N = g.modes_per_dim;
    return (j1 + N / 2) * N + (j2 + N / 2);
}
} // namespace detail

/// Divergence-free, mean-zero velocity field in coefficient space.
class VelocityField {
  public:
    VelocityField() = default;
    explicit VelocityField(const GridSpec& grid)
        : grid_(grid), coeffs_(2u * static_cast<std::size_t>(grid.modes_per_dim) *
                               static_cast<std::size_t>(grid.modes_per_dim)) {}

    const GridSpec& grid() const { return grid_; }
    int modes() const { return grid_.modes_per_dim; }

    Complex& at(int comp, int j1, int j2) {
        return coeffs_[static_cast<std::size_t>(comp) * modes() * modes() +
                       detail::flat_index(grid_, j1, j2)];
    }
    const Complex& at(int comp, int j1, int j2) const {
        return coeffs_[static_cast<std::size_t>(comp) * modes() * modes() +
                       detail::flat_index(grid_, j1, j2)];
    }

    std::vector<Complex>& data() { return coeffs_; }
    const std::vector<Complex>& data() const { return coeffs_; }

    void set_zero() { std::fill(coeffs_.begin(), coeffs_.end(), Complex{0.0, 0.0}); }

    // in-place linear algebra
    VelocityField& operator+=(const VelocityField& o);
    VelocityField& operator-=(const VelocityField& o);
    VelocityField& operator*=(double s);
    void axpy(double a, const VelocityField& x); // this += a*x

    bool finite() const;

  private:
    GridSpec grid_;
    std::vector<Complex> coeffs_;
};

VelocityField operator+(VelocityField a, const VelocityField& b);
VelocityField operator-(VelocityField a, const VelocityField& b);
VelocityField operator*(double s, VelocityField a);

/// Scalar vorticity-type field (curl of a velocity field).
class VorticityField {
  public:
    VorticityField() = default;
    explicit VorticityField(const GridSpec& grid)
        : grid_(grid), coeffs_(static_cast<std::size_t>(grid.modes_per_dim) *
                               static_cast<std::size_t>(grid.modes_per_dim)) {}

    const GridSpec& grid() const { return grid_; }
    int modes() const { return grid_.modes_per_dim; }

    Complex& at(int j1, int j2) { return coeffs_[detail::flat_index(grid_, j1, j2)]; }
    const Complex& at(int j1, int j2) const { return coeffs_[detail::flat_index(grid_, j1, j2)]; }

    std::vector<Complex>& data() { return coeffs_; }
    const std::vector<Complex>& data() const { return coeffs_; }
    void set_zero() { std::fill(coeffs_.begin(), coeffs_.end(), Complex{0.0, 0.0}); }

  private:
    GridSpec grid_;
    std::vector<Complex> coeffs_;
};

// Structural diagnostics (max relative defect against the field scale).
double hermitian_defect(const VelocityField& u);
double divergence_defect(const VelocityField& u);
double mean_mode_magnitude(const VelocityField& u);
double hermitian_defect(const VorticityField& x);

/// Loop helper: visits every stored offset pair (j1, j2).
template <typename F> void for_each_mode(const GridSpec& g, F&& f) {
    const int h = g.half();
    for (int j1 = -h; j1 < h; ++j1)
        for (int j2 = -h; j2 < h; ++j2)
            f(j1, j2);
}

} // namespace nsesplit
