#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <new>
#include <vector>

#include "mhdcouette/params.hpp"

namespace mhdc {

using cplx = std::complex<double>;

/// 64-byte aligned allocator so FFTW's SIMD codelets can be planned once and
/// reused on any field buffer.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

using CoeffArray = std::vector<cplx, AlignedAllocator<cplx>>;
using RealArray = std::vector<double, AlignedAllocator<double>>;

/// Lattice point: X-wavenumber k, Y-label j (frame eta = j/m for an unshifted
/// field), Z-wavenumber l.
struct ModeIndex {
  int k = 0;
  int j = 0;
  int l = 0;
  friend bool operator==(const ModeIndex&, const ModeIndex&) = default;
};

/// Truncated lattice on T x [0, 2*pi*m) x T. The Y-torus stands in for the
/// real line; eta takes values j/m.
struct GridSpec {
  int nx = 32;
  int ny = 64;
  int nz = 32;
  int m = 4;
  double dealias_fraction = 2.0 / 3.0;

  void validate() const {
    auto even_pos = [](int n) { return n > 0 && n % 2 == 0; };
    if (!even_pos(nx) || !even_pos(ny) || !even_pos(nz))
      throw Error("grid sizes Nx, Ny, Nz must be even and positive");
    if (m < 1) throw Error("Y-torus factor m must be >= 1");
    if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
      throw Error("dealias_fraction must lie in (0, 1]");
  }

  std::size_t size() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
  }

  /// Signed wavenumber stored in FFT slot i of an n-point transform. The
  /// Nyquist slot n/2 reads as -n/2.
  static int wavenumber(int i, int n) { return i < n / 2 ? i : i - n; }
  static int slot(int w, int n) { return w >= 0 ? w : w + n; }

  static int retained_max(int n, double fraction) {
    const int lim = static_cast<int>(std::floor(fraction * n / 2.0 + 1e-12));
    return std::max(0, std::min(lim, n / 2 - 1));
  }
  int kmax() const { return retained_max(nx, dealias_fraction); }
  int jmax() const { return retained_max(ny, dealias_fraction); }
  int lmax() const { return retained_max(nz, dealias_fraction); }

  bool representable(const ModeIndex& q) const {
    return q.k >= -nx / 2 && q.k < nx / 2 && q.j >= -ny / 2 && q.j < ny / 2 && q.l >= -nz / 2 && q.l < nz / 2;
  }

  /// Inside the dealiasing band in every direction.
  bool retained(const ModeIndex& q) const {
    return std::abs(q.k) <= kmax() && std::abs(q.j) <= jmax() && std::abs(q.l) <= lmax();
  }

  std::size_t index(const ModeIndex& q) const {
    if (!representable(q)) throw Error("mode outside grid");
    return (static_cast<std::size_t>(slot(q.k, nx)) * ny + slot(q.j, ny)) * nz + slot(q.l, nz);
  }

  ModeIndex mode(std::size_t idx) const {
    const int iz = static_cast<int>(idx % nz);
    const int iy = static_cast<int>((idx / nz) % ny);
    const int ix = static_cast<int>(idx / (static_cast<std::size_t>(nz) * ny));
    return {wavenumber(ix, nx), wavenumber(iy, ny), wavenumber(iz, nz)};
  }

  /// Slot holding the conjugate partner (-k, -j, -l).
  std::size_t partner(std::size_t idx) const {
    const int iz = static_cast<int>(idx % nz);
    const int iy = static_cast<int>((idx / nz) % ny);
    const int ix = static_cast<int>(idx / (static_cast<std::size_t>(nz) * ny));
    const int px = (nx - ix) % nx, py = (ny - iy) % ny, pz = (nz - iz) % nz;
    return (static_cast<std::size_t>(px) * ny + py) * nz + pz;
  }

  double eta_spacing() const { return 1.0 / m; }
  double ly() const { return 2.0 * M_PI * m; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

}  // namespace mhdc
