#pragma once

#include <complex>
#include <vector>

#include "nsesplit/field.hpp"

namespace nsesplit {

// Physical-space working grid for quadratic products and the L^4 norm.
// Resolution M x M with M = 2N keeps products of cutoff-band-limited
// fields alias-free. Buffers and FFTW plans are cached per thread.

/// Inverse transform of one coefficient component onto the M x M grid.
/// `spectral` is indexed like a field component (offsets in [-N/2, N/2)),
/// optionally premultiplied per mode via `weight(j1, j2)`.
void to_physical(const GridSpec& grid, int M, const Complex* spectral,
                 std::vector<Complex>& phys);

/// Same, with a per-mode complex multiplier applied while scattering
/// (used for derivatives: weight = i*k).
void to_physical_weighted(const GridSpec& grid, int M, const Complex* spectral,
                          const std::vector<Complex>& mode_weight, std::vector<Complex>& phys);

/// Forward transform of M x M physical samples back to coefficients on
/// `grid`, discarding every mode outside the dealias cutoff.
void to_spectral_truncated(const GridSpec& grid, int M, std::vector<Complex>& phys,
                           Complex* spectral);

/// Per-mode weight array for a directional derivative (i * k_d).
std::vector<Complex> derivative_weight(const GridSpec& grid, int direction);

int product_grid_size(const GridSpec& grid);

} // namespace nsesplit
