#include "nsesplit/transform.hpp"

#include <fftw3.h>

#include <memory>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace nsesplit {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// One complex in-place FFT workspace per (thread, M).
struct FftWorkspace {
    int M = 0;
    fftw_complex* buf = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;

    explicit FftWorkspace(int m) : M(m) {
        std::lock_guard<std::mutex> lock(planner_mutex());
        buf = fftw_alloc_complex(static_cast<std::size_t>(M) * M);
        if (!buf) throw std::bad_alloc();
        fwd = fftw_plan_dft_2d(M, M, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_2d(M, M, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
        if (!fwd || !bwd) throw std::runtime_error("fftw plan creation failed");
    }
    ~FftWorkspace() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (buf) fftw_free(buf);
    }
    FftWorkspace(const FftWorkspace&) = delete;
    FftWorkspace& operator=(const FftWorkspace&) = delete;
};

FftWorkspace& workspace_for(int M) {
    thread_local std::unordered_map<int, std::unique_ptr<FftWorkspace>> cache;
    auto it = cache.find(M);
    if (it == cache.end()) it = cache.emplace(M, std::make_unique<FftWorkspace>(M)).first;
    return *it->second;
}

inline int wrap(int j, int M) { return j >= 0 ? j : j + M; }

// Scatter grid coefficients (offsets in [-N/2, N/2)) into the M x M FFT
// layout, optionally multiplying per mode.
void scatter(const GridSpec& g, int M, const Complex* spectral, const Complex* weight,
             fftw_complex* buf) {
    const std::size_t total = static_cast<std::size_t>(M) * M;
    for (std::size_t i = 0; i < total; ++i) buf[i][0] = buf[i][1] = 0.0;
    const int N = g.modes_per_dim;
    const int h = N / 2;
    for (int j1 = -h; j1 < h; ++j1) {
        const int r = wrap(j1, M);
        for (int j2 = -h; j2 < h; ++j2) {
            const std::size_t src = static_cast<std::size_t>(j1 + h) * N + (j2 + h);
            Complex c = spectral[src];
            if (weight) c *= weight[src];
            const std::size_t dst = static_cast<std::size_t>(r) * M + wrap(j2, M);
            buf[dst][0] = c.real();
            buf[dst][1] = c.imag();
        }
    }
}

} // namespace

int product_grid_size(const GridSpec& grid) { return 2 * grid.modes_per_dim; }

void to_physical(const GridSpec& grid, int M, const Complex* spectral,
                 std::vector<Complex>& phys) {
    to_physical_weighted(grid, M, spectral, {}, phys);
}

void to_physical_weighted(const GridSpec& grid, int M, const Complex* spectral,
                          const std::vector<Complex>& mode_weight, std::vector<Complex>& phys) {
    if (M < grid.modes_per_dim)
        throw std::invalid_argument("physical grid must be at least as fine as the spectral one");
    FftWorkspace& ws = workspace_for(M);
    scatter(grid, M, spectral, mode_weight.empty() ? nullptr : mode_weight.data(), ws.buf);
    fftw_execute(ws.bwd);
    const std::size_t total = static_cast<std::size_t>(M) * M;
    phys.resize(total);
    for (std::size_t i = 0; i < total; ++i) phys[i] = Complex(ws.buf[i][0], ws.buf[i][1]);
}

void to_spectral_truncated(const GridSpec& grid, int M, std::vector<Complex>& phys,
                           Complex* spectral) {
    FftWorkspace& ws = workspace_for(M);
    const std::size_t total = static_cast<std::size_t>(M) * M;
    if (phys.size() != total) throw std::invalid_argument("physical buffer size mismatch");
    for (std::size_t i = 0; i < total; ++i) {
        ws.buf[i][0] = phys[i].real();
        ws.buf[i][1] = phys[i].imag();
    }
    fftw_execute(ws.fwd);
    const int N = grid.modes_per_dim;
    const int h = N / 2;
    const int kc = grid.dealias_cutoff;
    const double inv = 1.0 / (static_cast<double>(M) * M);
    for (int j1 = -h; j1 < h; ++j1)
        for (int j2 = -h; j2 < h; ++j2) {
            const std::size_t dst = static_cast<std::size_t>(j1 + h) * N + (j2 + h);
            if (std::abs(j1) > kc || std::abs(j2) > kc) {
                spectral[dst] = Complex{0.0, 0.0};
                continue;
            }
            const std::size_t src = static_cast<std::size_t>(wrap(j1, M)) * M + wrap(j2, M);
            spectral[dst] = inv * Complex(ws.buf[src][0], ws.buf[src][1]);
        }
}

std::vector<Complex> derivative_weight(const GridSpec& grid, int direction) {
    const int N = grid.modes_per_dim;
    const int h = N / 2;
    const double kappa = grid.wavenumber_unit();
    std::vector<Complex> w(static_cast<std::size_t>(N) * N);
    for (int j1 = -h; j1 < h; ++j1)
        for (int j2 = -h; j2 < h; ++j2) {
            const double k = kappa * (direction == 0 ? j1 : j2);
            w[static_cast<std::size_t>(j1 + h) * N + (j2 + h)] = Complex(0.0, k);
        }
    return w;
}

} // namespace nsesplit
