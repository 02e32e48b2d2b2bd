#include "nsesplit/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace nsesplit {

NoiseBasisSpec make_noise_basis(int n_modes) {
    if (n_modes < 0) throw std::invalid_argument("make_noise_basis: negative mode count");
    // enumerate wavevectors of the half lattice by |j|^2, then (j1, j2)
    struct Key {
        int jj, j1, j2;
    };
    std::vector<Key> keys;
    const int reach = 8; // enough shells for any reasonable truncation
    for (int j1 = 0; j1 <= reach; ++j1)
        for (int j2 = -reach; j2 <= reach; ++j2) {
            if (j1 == 0 && j2 <= 0) continue;
            keys.push_back({j1 * j1 + j2 * j2, j1, j2});
        }
    std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
        return std::tie(a.jj, a.j1, a.j2) < std::tie(b.jj, b.j1, b.j2);
    });
    NoiseBasisSpec spec;
    spec.n_modes = n_modes;
    for (const Key& k : keys) {
        if (static_cast<int>(spec.modes.size()) >= n_modes) break;
        spec.modes.push_back({k.j1, k.j2, false});
        if (static_cast<int>(spec.modes.size()) >= n_modes) break;
        spec.modes.push_back({k.j1, k.j2, true});
    }
    if (static_cast<int>(spec.modes.size()) < n_modes)
        throw std::invalid_argument("make_noise_basis: truncation exceeds enumerated shells");
    return spec;
}

void add_basis_field(const NoiseMode& mode, const GridSpec& grid, double scale,
                     VelocityField& out) {
    const int kc = grid.dealias_cutoff;
    if (std::abs(mode.j1) > kc || std::abs(mode.j2) > kc)
        throw std::invalid_argument("noise mode outside the dealias band");
    const double L = grid.domain_length;
    const double mag = std::hypot(double(mode.j1), double(mode.j2));
    const double p1 = -double(mode.j2) / mag;
    const double p2 = double(mode.j1) / mag;
    // unit H norm: coefficient 1/(sqrt(2) L) on the conjugate pair
    const Complex c = mode.sine ? Complex(0.0, -scale / (M_SQRT2 * L))
                                : Complex(scale / (M_SQRT2 * L), 0.0);
    out.at(0, mode.j1, mode.j2) += p1 * c;
    out.at(1, mode.j1, mode.j2) += p2 * c;
    out.at(0, -mode.j1, -mode.j2) += p1 * std::conj(c);
    out.at(1, -mode.j1, -mode.j2) += p2 * std::conj(c);
}

std::string family_name(DiffusionFamily f) {
    switch (f) {
        case DiffusionFamily::additive: return "additive";
        case DiffusionFamily::diagonal_multiplicative: return "diagonal_multiplicative";
        case DiffusionFamily::gradient_scaled: return "gradient_scaled";
    }
    return "additive";
}

DiffusionFamily family_from_name(const std::string& s) {
    if (s == "additive") return DiffusionFamily::additive;
    if (s == "diagonal_multiplicative") return DiffusionFamily::diagonal_multiplicative;
    if (s == "gradient_scaled") return DiffusionFamily::gradient_scaled;
    throw std::invalid_argument("unknown diffusion family: " + s);
}

std::vector<double> DiffusionSpec::mode_amplitudes() const {
    std::vector<double> a;
    a.reserve(basis.modes.size());
    for (const NoiseMode& m : basis.modes) {
        const double jj = double(m.j1) * m.j1 + double(m.j2) * m.j2;
        a.push_back(amplitude * std::pow(1.0 + jj, -0.5 * decay));
    }
    return a;
}

DiffusionSpec make_diffusion(DiffusionFamily family, int n_modes, double amplitude, double decay,
                             double grad_amplitude, double eps, double wavenumber_unit) {
    DiffusionSpec spec;
    spec.family = family;
    spec.basis = make_noise_basis(n_modes);
    spec.amplitude = amplitude;
    spec.decay = decay;
    spec.grad_amplitude = family == DiffusionFamily::gradient_scaled ? grad_amplitude : 0.0;
    spec.eps = eps;

    const auto a = spec.mode_amplitudes();
    const double k2u = wavenumber_unit * wavenumber_unit;
    double sum_a2 = 0.0, sum_a2k2 = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const NoiseMode& m = spec.basis.modes[j];
        const double jj = double(m.j1) * m.j1 + double(m.j2) * m.j2;
        sum_a2 += a[j] * a[j];
        sum_a2k2 += a[j] * a[j] * k2u * jj;
    }
    // max over wavevectors of the summed cos+sin amplitudes
    double max_pair = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        double pair = a[j] * a[j];
        if (j + 1 < a.size() && spec.basis.modes[j + 1].j1 == spec.basis.modes[j].j1 &&
            spec.basis.modes[j + 1].j2 == spec.basis.modes[j].j2) {
            pair += a[j + 1] * a[j + 1];
            ++j;
        }
        max_pair = std::max(max_pair, pair);
    }

    const double b = spec.grad_amplitude;
    switch (family) {
        case DiffusionFamily::additive:
            spec.g1 = {sum_a2, 0.0, 0.0, 0.0, 0.0};
            spec.g2 = {sum_a2k2, 0.0, 0.0, 0.0, 0.0};
            break;
        case DiffusionFamily::diagonal_multiplicative:
            spec.g1 = {0.0, max_pair, 0.0, max_pair, 0.0};
            spec.g2 = {0.0, max_pair, 0.0, max_pair, 0.0};
            break;
        case DiffusionFamily::gradient_scaled:
            spec.g1 = {2.0 * sum_a2, 0.0, 2.0 * b * b, 0.0, 2.0 * b * b};
            spec.g2 = {2.0 * sum_a2k2, 0.0, 2.0 * b * b, 0.0, 2.0 * b * b};
            break;
    }
    return spec;
}

CoriolisSpec make_coriolis(double c0) {
    CoriolisSpec spec;
    spec.c0 = c0;
    spec.declared_R0 = 0.0;
    spec.declared_R1 = std::abs(c0);
    return spec;
}

VelocityField apply_R(const CoriolisSpec& spec, double /*t*/, const VelocityField& u) {
    VelocityField r(u.grid());
    if (spec.c0 == 0.0) return r;
    for_each_mode(u.grid(), [&](int j1, int j2) {
        r.at(0, j1, j2) = -spec.c0 * u.at(1, j1, j2);
        r.at(1, j1, j2) = spec.c0 * u.at(0, j1, j2);
    });
    return leray_project(r);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    // splitmix64 step on master + (index+1) * golden ratio increment
    std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

BrownianPath sample_path(const NoiseBasisSpec& basis, int finest_n, double T,
                         std::uint64_t seed) {
    if (finest_n < 1) throw std::invalid_argument("sample_path: finest_n must be positive");
    if (!(T > 0.0)) throw std::invalid_argument("sample_path: horizon must be positive");
    BrownianPath path;
    path.finest_n = finest_n;
    path.horizon = T;
    path.seed = seed;
    path.increments.assign(basis.modes.size(), std::vector<double>(finest_n));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(T / finest_n));
    for (auto& mode : path.increments)
        for (double& dw : mode) dw = gauss(rng);
    return path;
}

std::uint64_t BrownianPath::content_hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const void* p, std::size_t len) {
        const unsigned char* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    };
    mix(&finest_n, sizeof(finest_n));
    mix(&horizon, sizeof(horizon));
    for (const auto& mode : increments) mix(mode.data(), mode.size() * sizeof(double));
    return h;
}

std::vector<std::vector<double>> aggregate(const BrownianPath& path, int coarse_n) {
    if (coarse_n < 1 || path.finest_n % coarse_n != 0)
        throw std::invalid_argument("aggregate: coarse_n must divide finest_n");
    const int r = path.finest_n / coarse_n;
    std::vector<std::vector<double>> coarse(path.increments.size(),
                                            std::vector<double>(coarse_n, 0.0));
    for (std::size_t m = 0; m < path.increments.size(); ++m)
        for (int i = 0; i < coarse_n; ++i) {
            double s = 0.0;
            for (int j = 0; j < r; ++j) s += path.increments[m][i * r + j];
            coarse[m][i] = s;
        }
    return coarse;
}

namespace {

inline double phi_bounded(double s) { return s / std::sqrt(1.0 + s * s); }

// sqrt(2) L |uhat(k_j)| : the modulus of the coefficient pair at the mode
double mode_strength(const VelocityField& u, const NoiseMode& m) {
    const double L = u.grid().domain_length;
    return M_SQRT2 * L *
           std::hypot(std::abs(u.at(0, m.j1, m.j2)), std::abs(u.at(1, m.j1, m.j2)));
}

// <u, e_j>_H for the unit basis element
double basis_projection(const VelocityField& u, const NoiseMode& m) {
    const double L = u.grid().domain_length;
    const double mag = std::hypot(double(m.j1), double(m.j2));
    const double p1 = -double(m.j2) / mag;
    const double p2 = double(m.j1) / mag;
    const Complex c = m.sine ? Complex(0.0, -1.0 / (M_SQRT2 * L)) : Complex(1.0 / (M_SQRT2 * L), 0.0);
    const Complex e0 = p1 * c, e1 = p2 * c;
    // conjugate-pair contribution doubles the real part
    const double s = 2.0 * ((u.at(0, m.j1, m.j2) * std::conj(e0)).real() +
                            (u.at(1, m.j1, m.j2) * std::conj(e1)).real());
    return L * L * s;
}

// scalar factor of g_j(t, u) along e_j
double component_scale(const DiffusionSpec& spec, const std::vector<double>& a, std::size_t j,
                       const VelocityField& u) {
    const NoiseMode& m = spec.basis.modes[j];
    switch (spec.family) {
        case DiffusionFamily::additive: return a[j];
        case DiffusionFamily::diagonal_multiplicative:
            return a[j] * phi_bounded(mode_strength(u, m));
        case DiffusionFamily::gradient_scaled: {
            const double kmag =
                u.grid().wavenumber_unit() * std::hypot(double(m.j1), double(m.j2));
            return a[j] +
                   std::sqrt(spec.eps) * spec.grad_amplitude * kmag * basis_projection(u, m);
        }
    }
    return 0.0;
}

} // namespace

VelocityField apply_G(const DiffusionSpec& spec, double /*t*/, const VelocityField& u,
                      std::span<const double> dW) {
    if (dW.size() != spec.basis.modes.size())
        throw std::invalid_argument("apply_G: increment dimension mismatch");
    VelocityField out(u.grid());
    const auto a = spec.mode_amplitudes();
    for (std::size_t j = 0; j < spec.basis.modes.size(); ++j) {
        const double scale = component_scale(spec, a, j, u) * dW[j];
        if (scale != 0.0) add_basis_field(spec.basis.modes[j], u.grid(), scale, out);
    }
    return leray_project(out);
}

double hs_norm_sq(const DiffusionSpec& spec, double /*t*/, const VelocityField& u) {
    const auto a = spec.mode_amplitudes();
    double s = 0.0;
    for (std::size_t j = 0; j < spec.basis.modes.size(); ++j) {
        const double c = component_scale(spec, a, j, u);
        s += c * c; // basis elements have unit H norm
    }
    return s;
}

double hs_norm_sq_curl(const DiffusionSpec& spec, double /*t*/, const VelocityField& u) {
    const auto a = spec.mode_amplitudes();
    const double k2u = u.grid().wavenumber_unit() * u.grid().wavenumber_unit();
    double s = 0.0;
    for (std::size_t j = 0; j < spec.basis.modes.size(); ++j) {
        const NoiseMode& m = spec.basis.modes[j];
        const double c = component_scale(spec, a, j, u);
        const double k2 = k2u * (double(m.j1) * m.j1 + double(m.j2) * m.j2);
        s += c * c * k2; // |curl e_j| = |k_j|
    }
    return s;
}

bool ValidationReport::all_satisfied() const {
    for (const auto& item : items)
        if (!item.satisfied) return false;
    return true;
}

std::string ValidationReport::to_text() const {
    std::ostringstream os;
    for (const auto& item : items)
        os << (item.satisfied ? "[ ok ] " : "[warn] ") << item.name << ": " << item.inequality
           << "\n";
    return os.str();
}

namespace {
std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}
} // namespace

ValidationReport validate_assumptions(const DiffusionSpec& spec, const CoriolisSpec& coriolis,
                                      double eps, int p) {
    ValidationReport rep;
    const double K2 = std::max(spec.g1.K2, spec.g2.K2);
    const double L2 = std::max(spec.g1.L2, spec.g2.L2);
    auto add = [&](const std::string& name, const std::string& ineq, bool ok) {
        rep.items.push_back({name, ineq, ok});
    };

    add("well-posedness K2<=L2", fmt(K2) + " <= " + fmt(L2), K2 <= L2);
    add("well-posedness L2<2", fmt(L2) + " < 2", L2 < 2.0);
    add("X-integrability K2<2/3", fmt(K2) + " < " + fmt(2.0 / 3.0), K2 < 2.0 / 3.0);
    if (p >= 2) {
        const double bound = 2.0 / (2.0 * p - 1.0);
        add("moment order p=" + std::to_string(p) + " K2<2/(2p-1)",
            fmt(K2) + " < " + fmt(bound), K2 < bound);
    }
    add("branch-difference K2<2/3", fmt(K2) + " < " + fmt(2.0 / 3.0), K2 < 2.0 / 3.0);
    add("localized-rate K2<2/7", fmt(K2) + " < " + fmt(2.0 / 7.0), K2 < 2.0 / 7.0);
    add("split-parabolicity eps*L2<2(1-eps)",
        fmt(eps * L2) + " < " + fmt(2.0 * (1.0 - eps)), eps * L2 < 2.0 * (1.0 - eps));
    add("rotation Lipschitz declared", "R1 = " + fmt(coriolis.declared_R1) + " = |c0|",
        coriolis.declared_R1 >= std::abs(coriolis.c0));
    return rep;
}

} // namespace nsesplit
