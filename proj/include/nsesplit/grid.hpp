#pragma once

#include <cmath>
#include <stdexcept>

namespace nsesplit {

/// Spectral resolution of the periodic box. Wavenumbers are k = (2*pi/L)*j
/// with integer offsets j in [-N/2, N/2). Modes with |j1| > kmax or
/// |j2| > kmax are treated as zero (2/3-rule cutoff).
struct GridSpec {
    int modes_per_dim = 0;      // N, even, >= 4
    double domain_length = 0.0; // L > 0
    int dealias_cutoff = 0;     // kmax = floor(N/3)

    double wavenumber_unit() const { return 2.0 * M_PI / domain_length; }
    int half() const { return modes_per_dim / 2; }

    bool operator==(const GridSpec& o) const {
        return modes_per_dim == o.modes_per_dim && domain_length == o.domain_length &&
               dealias_cutoff == o.dealias_cutoff;
    }
};

GridSpec make_grid(int modes_per_dim, double domain_length = 2.0 * M_PI);

} // namespace nsesplit
