#pragma once

#include <fftw3.h>

#include <mutex>

#include "mhdcouette/field.hpp"

namespace mhdc {

namespace detail {
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Real <-> spectral transforms on one grid.
///
/// Spectral arrays use the full (kx, j, l) lattice in FFT slot order; the
/// physical side holds the real samples on the Nx x Ny x Nz grid over
/// [0,2pi) x [0,2pi m) x [0,2pi). Coefficients follow the Fourier-series
/// convention f = sum c e^{i(kX + (j/m)Y + lZ)}, so a constant field maps to
/// the (0,0,0) coefficient and e^{iX} to the (1,0,0) coefficient.
///
/// Plans use FFTW_ESTIMATE so results are bit-reproducible across runs. Not
/// thread-safe; give each thread its own instance.
class Fft3d {
 public:
  explicit Fft3d(const GridSpec& grid) : grid_(grid), nzh_(grid.nz / 2 + 1) {
    grid_.validate();
    half_.resize(static_cast<std::size_t>(grid_.nx) * grid_.ny * nzh_);
    RealArray probe(grid_.size());
    std::lock_guard lock(detail::fftw_planner_mutex());
    auto* h = reinterpret_cast<fftw_complex*>(half_.data());
    fwd_ = fftw_plan_dft_r2c_3d(grid_.nx, grid_.ny, grid_.nz, probe.data(), h, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_3d(grid_.nx, grid_.ny, grid_.nz, h, probe.data(), FFTW_ESTIMATE);
    if (fwd_ == nullptr || inv_ == nullptr) throw Error("FFTW planning failed");
  }

  Fft3d(const Fft3d&) = delete;
  Fft3d& operator=(const Fft3d&) = delete;

  ~Fft3d() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }

  const GridSpec& grid() const { return grid_; }

  /// Physical samples of a Hermitian coefficient array.
  void inverse(const CoeffArray& coeffs, RealArray& phys) {
    check(coeffs.size());
    phys.resize(grid_.size());
    const int nx = grid_.nx, ny = grid_.ny, nz = grid_.nz;
    for (int ix = 0; ix < nx; ++ix)
      for (int iy = 0; iy < ny; ++iy) {
        const std::size_t src = (static_cast<std::size_t>(ix) * ny + iy) * nz;
        const std::size_t dst = (static_cast<std::size_t>(ix) * ny + iy) * nzh_;
        for (int iz = 0; iz < nzh_; ++iz) half_[dst + iz] = coeffs[src + iz];
      }
    fftw_execute_dft_c2r(inv_, reinterpret_cast<fftw_complex*>(half_.data()), phys.data());
  }

  /// Coefficients of real samples. The result is exactly Hermitian.
  void forward(const RealArray& phys, CoeffArray& coeffs) {
    check(phys.size());
    coeffs.resize(grid_.size());
    fftw_execute_dft_r2c(fwd_, const_cast<double*>(phys.data()), reinterpret_cast<fftw_complex*>(half_.data()));
    const double scale = 1.0 / static_cast<double>(grid_.size());
    const int nx = grid_.nx, ny = grid_.ny, nz = grid_.nz;
    for (int ix = 0; ix < nx; ++ix)
      for (int iy = 0; iy < ny; ++iy) {
        const std::size_t row = (static_cast<std::size_t>(ix) * ny + iy) * nz;
        const std::size_t hrow = (static_cast<std::size_t>(ix) * ny + iy) * nzh_;
        for (int iz = 0; iz < nzh_; ++iz) coeffs[row + iz] = half_[hrow + iz] * scale;
        const int px = (nx - ix) % nx, py = (ny - iy) % ny;
        const std::size_t prow = (static_cast<std::size_t>(px) * ny + py) * nzh_;
        for (int iz = nzh_; iz < nz; ++iz) coeffs[row + iz] = std::conj(half_[prow + (nz - iz)]) * scale;
      }
    // The l = 0 and l = Nz/2 planes come straight from r2c and are only
    // Hermitian to rounding.
    for (int ix = 0; ix < nx; ++ix)
      for (int iy = 0; iy < ny; ++iy)
        for (int iz : {0, nz / 2}) {
          const std::size_t i = (static_cast<std::size_t>(ix) * ny + iy) * nz + iz;
          const std::size_t pi = grid_.partner(i);
          if (pi < i) continue;
          const cplx a = coeffs[i], b = coeffs[pi];
          coeffs[i] = 0.5 * (a + std::conj(b));
          coeffs[pi] = 0.5 * (b + std::conj(a));
        }
  }

  RealArray to_physical(const SpectralScalarField& f) {
    RealArray out;
    inverse(f.coeffs(), out);
    return out;
  }

  /// Wraps samples as a field carrying the given frame data.
  SpectralScalarField to_spectral(const RealArray& phys, double t_frame = 0.0, std::int64_t shift = 0) {
    if (phys.size() != grid_.size()) throw Error("grid mismatch in fft_forward");
    SpectralScalarField f(grid_, t_frame, shift);
    forward(phys, f.coeffs());
    return f;
  }

 private:
  void check(std::size_t n) const {
    if (n != grid_.size()) throw Error("grid mismatch in fft");
  }

  GridSpec grid_;
  int nzh_;
  CoeffArray half_;
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
};

}  // namespace mhdc
