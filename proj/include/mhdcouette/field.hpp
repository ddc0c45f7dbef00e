#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

#include "mhdcouette/grid.hpp"
#include "mhdcouette/params.hpp"

namespace mhdc {

/// Fourier coefficients of one scalar component in the sheared frame
/// X = x - y t. The coefficients refer to frame time t_frame: the Y-derivative
/// in that frame has symbol i*(eta - k*t_frame).
///
/// shear_shift n records lattice relabelings done by the shear-frame remap:
/// slot j holds frame wavenumber eta = (j + k*n)/m. It is 0 unless a remap
/// has been applied.
class SpectralScalarField {
 public:
  SpectralScalarField() = default;

  explicit SpectralScalarField(const GridSpec& grid, double t_frame = 0.0, std::int64_t shear_shift = 0)
      : grid_(grid), t_frame_(t_frame), shear_shift_(shear_shift), coeffs_(grid.size(), cplx{}) {
    grid_.validate();
  }

  const GridSpec& grid() const { return grid_; }
  double t_frame() const { return t_frame_; }
  std::int64_t shear_shift() const { return shear_shift_; }
  void set_t_frame(double t) { t_frame_ = t; }
  void set_shear_shift(std::int64_t n) { shear_shift_ = n; }

  const CoeffArray& coeffs() const { return coeffs_; }
  CoeffArray& coeffs() { return coeffs_; }
  std::size_t size() const { return coeffs_.size(); }

  cplx& at(const ModeIndex& q) { return coeffs_[grid_.index(q)]; }
  const cplx& at(const ModeIndex& q) const { return coeffs_[grid_.index(q)]; }

  /// Frame wavenumber eta of the mode stored at lattice label q.
  double frame_eta(const ModeIndex& q) const {
    return (static_cast<double>(q.j) + static_cast<double>(q.k) * static_cast<double>(shear_shift_)) / grid_.m;
  }
  /// eta - k t, the Y-symbol of the moving-frame gradient.
  double sheared_eta(const ModeIndex& q) const { return frame_eta(q) - q.k * t_frame_; }
  /// k^2 + (eta - k t)^2 + l^2, minus the symbol of the moving-frame Laplacian.
  double lap_symbol(const ModeIndex& q) const {
    const double e = sheared_eta(q);
    return static_cast<double>(q.k) * q.k + e * e + static_cast<double>(q.l) * q.l;
  }

  bool same_layout(const SpectralScalarField& o) const {
    return grid_ == o.grid_ && shear_shift_ == o.shear_shift_;
  }

  /// Largest |coeff(-q) - conj(coeff(q))| relative to the largest coefficient.
  double hermitian_defect() const {
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      worst = std::max(worst, std::abs(coeffs_[grid_.partner(i)] - std::conj(coeffs_[i])));
      scale = std::max(scale, std::abs(coeffs_[i]));
    }
    return scale > 0.0 ? worst / scale : 0.0;
  }

  /// Replace c(q) by (c(q) + conj c(-q))/2. Afterwards the symmetry is exact.
  void symmetrize() {
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      const std::size_t pi = grid_.partner(i);
      if (pi < i) continue;
      const cplx a = coeffs_[i], b = coeffs_[pi];
      coeffs_[i] = 0.5 * (a + std::conj(b));
      coeffs_[pi] = 0.5 * (b + std::conj(a));
    }
  }

  /// Zero every slot outside the retained band.
  void dealias() {
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
      if (!grid_.retained(grid_.mode(i))) coeffs_[i] = cplx{};
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& c : coeffs_) m = std::max(m, std::abs(c));
    return m;
  }

 private:
  GridSpec grid_{};
  double t_frame_ = 0.0;
  std::int64_t shear_shift_ = 0;
  CoeffArray coeffs_{};
};

/// Three components in the X, Y, Z directions (index 0, 1, 2).
struct SpectralVectorField {
  std::array<SpectralScalarField, 3> c{};
  bool div_free_moving_frame = false;

  SpectralVectorField() = default;
  explicit SpectralVectorField(const GridSpec& g, double t = 0.0, std::int64_t shift = 0)
      : c{SpectralScalarField(g, t, shift), SpectralScalarField(g, t, shift), SpectralScalarField(g, t, shift)} {}
  SpectralVectorField(SpectralScalarField a, SpectralScalarField b, SpectralScalarField d)
      : c{std::move(a), std::move(b), std::move(d)} {}

  SpectralScalarField& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  const SpectralScalarField& operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

  const GridSpec& grid() const { return c[0].grid(); }
  double t_frame() const { return c[0].t_frame(); }
  void set_t_frame(double t) {
    for (auto& f : c) f.set_t_frame(t);
  }
  double max_abs() const { return std::max({c[0].max_abs(), c[1].max_abs(), c[2].max_abs()}); }
};

/// Velocity and magnetic perturbations in the moving frame at time t.
struct MhdState {
  SpectralVectorField U{};
  SpectralVectorField B{};
  double t = 0.0;
  PhysParams params{};

  MhdState() = default;
  MhdState(const GridSpec& g, const PhysParams& p, double t0 = 0.0) : U(g, t0), B(g, t0), t(t0), params(p) {}

  const GridSpec& grid() const { return U.grid(); }
};

}  // namespace mhdc
