#include "nsesplit/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nsesplit {

namespace {
void require_same_grid(const GridSpec& a, const GridSpec& b) {
    if (!(a == b)) throw std::invalid_argument("field grids do not match");
}
} // namespace

VelocityField& VelocityField::operator+=(const VelocityField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
}

VelocityField& VelocityField::operator-=(const VelocityField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
}

VelocityField& VelocityField::operator*=(double s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
}

void VelocityField::axpy(double a, const VelocityField& x) {
    require_same_grid(grid_, x.grid_);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += a * x.coeffs_[i];
}

bool VelocityField::finite() const {
    for (const auto& c : coeffs_)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
}

VelocityField operator+(VelocityField a, const VelocityField& b) { return a += b; }
VelocityField operator-(VelocityField a, const VelocityField& b) { return a -= b; }
VelocityField operator*(double s, VelocityField a) { return a *= s; }

namespace {
// max |c| over all modes, used as the relative scale for defects
double max_abs(const VelocityField& u) {
    double m = 0.0;
    for (const auto& c : u.data()) m = std::max(m, std::abs(c));
    return m;
}
} // namespace

double hermitian_defect(const VelocityField& u) {
    const GridSpec& g = u.grid();
    const int h = g.half();
    double worst = 0.0;
    for (int c = 0; c < 2; ++c)
        for (int j1 = -h + 1; j1 < h; ++j1)
            for (int j2 = -h + 1; j2 < h; ++j2)
                worst = std::max(worst,
                                 std::abs(u.at(c, j1, j2) - std::conj(u.at(c, -j1, -j2))));
    // the -N/2 row/column has no mirror inside the stored square
    for (int c = 0; c < 2; ++c)
        for (int j = -h; j < h; ++j) {
            worst = std::max(worst, std::abs(u.at(c, -h, j)));
            worst = std::max(worst, std::abs(u.at(c, j, -h)));
        }
    const double scale = max_abs(u);
    return scale > 0.0 ? worst / scale : worst;
}

double divergence_defect(const VelocityField& u) {
    const GridSpec& g = u.grid();
    const double kappa = g.wavenumber_unit();
    double worst = 0.0;
    double scale = 0.0;
    for_each_mode(g, [&](int j1, int j2) {
        const Complex d = kappa * (double(j1) * u.at(0, j1, j2) + double(j2) * u.at(1, j1, j2));
        const double mag = std::hypot(std::abs(u.at(0, j1, j2)), std::abs(u.at(1, j1, j2)));
        const double kk = kappa * std::hypot(double(j1), double(j2));
        worst = std::max(worst, std::abs(d));
        scale = std::max(scale, kk * mag);
    });
    return scale > 0.0 ? worst / scale : worst;
}

double mean_mode_magnitude(const VelocityField& u) {
    return std::hypot(std::abs(u.at(0, 0, 0)), std::abs(u.at(1, 0, 0)));
}

double hermitian_defect(const VorticityField& x) {
    const GridSpec& g = x.grid();
    const int h = g.half();
    double worst = 0.0, scale = 0.0;
    for (const auto& c : x.data()) scale = std::max(scale, std::abs(c));
    for (int j1 = -h + 1; j1 < h; ++j1)
        for (int j2 = -h + 1; j2 < h; ++j2)
            worst = std::max(worst, std::abs(x.at(j1, j2) - std::conj(x.at(-j1, -j2))));
    for (int j = -h; j < h; ++j) {
        worst = std::max(worst, std::abs(x.at(-h, j)));
        worst = std::max(worst, std::abs(x.at(j, -h)));
    }
    return scale > 0.0 ? worst / scale : worst;
}

} // namespace nsesplit
