#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mhdcouette/fft.hpp"
#include "mhdcouette/linear_modes.hpp"
#include "mhdcouette/spectral_ops.hpp"

namespace mhdc {

enum class IcKind { random_band, single_mode, file };
enum class RemapPolicy { none, periodic_at_integer_multiples };
/// Amplitude profile of random_band data: equal variance on the band, or
/// variance exp(-|k,eta,l|^2 / ic_width^2) on the same band.
enum class IcProfile { flat, gaussian };

inline const char* to_string(IcKind k) {
  switch (k) {
    case IcKind::random_band: return "random_band";
    case IcKind::single_mode: return "single_mode";
    case IcKind::file: return "file";
  }
  return "?";
}

inline const char* to_string(RemapPolicy r) {
  return r == RemapPolicy::none ? "none" : "periodic_at_integer_multiples";
}

inline const char* to_string(IcProfile p) { return p == IcProfile::flat ? "flat" : "gaussian"; }

struct SimConfig {
  GridSpec grid{};
  PhysParams params{};
  double dt = 0.02;
  double T_final = 1.0;
  double epsilon = 1e-3;
  std::uint64_t seed = 1;
  IcKind ic_kind = IcKind::random_band;
  RemapPolicy remap_policy = RemapPolicy::none;
  double diagnostics_every = 0.5;

  double sobolev_N = 5.0;  // initial data normalized in H^{N+2}
  int ic_band = 4;         // random_band: |k|, |l|, |eta| <= ic_band
  IcProfile ic_profile = IcProfile::flat;
  double ic_width = 1.0;
  ModeIndex ic_mode{1, 0, -1};
  std::string ic_file;
  bool nonlinear = true;
  int store_every = 0;  // keep every n-th diagnostic state in the trajectory (0: none)

  int steps() const { return static_cast<int>(std::llround(T_final / dt)); }
  int steps_per_sample() const { return std::max(1, static_cast<int>(std::llround(diagnostics_every / dt))); }

  void validate() const {
    grid.validate();
    params.validate();
    if (!(dt > 0.0)) throw Error("dt must be > 0");
    if (!(T_final > 0.0)) throw Error("T_final must be > 0");
    if (!(epsilon >= 0.0)) throw Error("epsilon must be >= 0");
    if (!(diagnostics_every > 0.0)) throw Error("diagnostics_every must be > 0");
    if (std::abs(steps() * dt - T_final) > 1e-9 * T_final) throw Error("T_final must be a multiple of dt");
    if (remap_policy == RemapPolicy::periodic_at_integer_multiples) {
      const double per = 1.0 / (grid.m * dt);
      if (std::abs(per - std::round(per)) > 1e-9) throw Error("remap period 1/m must be a multiple of dt");
    }
    if (ic_kind == IcKind::single_mode && !grid.retained(ic_mode)) throw Error("ic_mode outside the retained band");
    if (ic_kind == IcKind::file && ic_file.empty()) throw Error("ic_kind = file needs ic_file");
    if (!(ic_width > 0.0)) throw Error("ic_width must be > 0");
  }
};

// ---------------------------------------------------------------------------
// Snapshots: "MHDC", u32 version, i32 nx ny nz m, f64 t, i64 shear shift,
// then U1 U2 U3 B1 B2 B3, each nx*ny*nz interleaved (re, im) f64 in slot
// order. All little-endian.
// ---------------------------------------------------------------------------

namespace detail {
static_assert(std::endian::native == std::endian::little, "snapshot IO assumes a little-endian host");

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error("truncated snapshot");
  return v;
}
}  // namespace detail

inline void write_snapshot(std::ostream& os, const MhdState& s) {
  const auto& g = s.grid();
  os.write("MHDC", 4);
  detail::put<std::uint32_t>(os, 1);
  for (int v : {g.nx, g.ny, g.nz, g.m}) detail::put<std::int32_t>(os, v);
  detail::put<double>(os, s.t);
  detail::put<std::int64_t>(os, s.U[0].shear_shift());
  for (const auto* f : {&s.U, &s.B})
    for (int i = 0; i < 3; ++i)
      os.write(reinterpret_cast<const char*>((*f)[i].coeffs().data()),
               static_cast<std::streamsize>((*f)[i].size() * sizeof(cplx)));
  if (!os) throw Error("snapshot write failed");
}

inline void write_snapshot(const std::string& path, const MhdState& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  write_snapshot(os, s);
}

inline MhdState read_snapshot(std::istream& is, const PhysParams& params, double dealias_fraction = 2.0 / 3.0) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "MHDC", 4) != 0) throw Error("not a snapshot file");
  if (detail::get<std::uint32_t>(is) != 1) throw Error("unsupported snapshot version");
  GridSpec g;
  g.nx = detail::get<std::int32_t>(is);
  g.ny = detail::get<std::int32_t>(is);
  g.nz = detail::get<std::int32_t>(is);
  g.m = detail::get<std::int32_t>(is);
  g.dealias_fraction = dealias_fraction;
  g.validate();
  const double t = detail::get<double>(is);
  const auto shift = detail::get<std::int64_t>(is);
  MhdState s(g, params, t);
  for (auto* f : {&s.U, &s.B})
    for (int i = 0; i < 3; ++i) {
      (*f)[i].set_shear_shift(shift);
      is.read(reinterpret_cast<char*>((*f)[i].coeffs().data()), static_cast<std::streamsize>(g.size() * sizeof(cplx)));
      if (!is) throw Error("truncated snapshot");
    }
  return s;
}

inline MhdState read_snapshot(const std::string& path, const PhysParams& params, double dealias_fraction = 2.0 / 3.0) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  return read_snapshot(is, params, dealias_fraction);
}

// ---------------------------------------------------------------------------
// Energy bookkeeping
// ---------------------------------------------------------------------------

struct EnergyRecord {
  double t = 0.0;
  double energy = 0.0;       // (|U|^2 + |B|^2)/2
  double dissipation = 0.0;  // nu |grad_L U|^2 + nu |grad_L B|^2
  double stress = 0.0;       // <U1,U2> - <B1,B2>
};

inline EnergyRecord energy_record(const MhdState& s) {
  EnergyRecord r;
  r.t = s.t;
  const auto& g = s.grid();
  double e = 0.0, d = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double a = 0.0;
    for (int c = 0; c < 3; ++c) a += std::norm(s.U[c].coeffs()[i]) + std::norm(s.B[c].coeffs()[i]);
    if (a == 0.0) continue;
    e += a;
    d += s.U[0].lap_symbol(g.mode(i)) * a;
  }
  r.energy = 0.5 * e / g.m;
  r.dissipation = s.params.nu * d / g.m;
  r.stress = inner(s.U[0], s.U[1]) - inner(s.B[0], s.B[1]);
  return r;
}

// ---------------------------------------------------------------------------
// Solver
// ---------------------------------------------------------------------------

struct RemapResult {
  double dropped_energy = 0.0;
  double energy_before = 0.0;
  double dropped_fraction() const { return energy_before > 0.0 ? dropped_energy / energy_before : 0.0; }
};

/// Pseudo-spectral integrator for the perturbation system in the sheared
/// frame. Viscosity and the background-field coupling are integrated exactly
/// per mode; the rest (transport, stretching, lift-up, pressure) goes through
/// classical RK4 in the integrating-factor variables.
class ShearSolver {
 public:
  ShearSolver(const GridSpec& grid, const PhysParams& params) : grid_(grid), params_(params), fft_(grid) {
    grid_.validate();
    for (std::size_t i = 0; i < grid_.size(); ++i)
      if (grid_.retained(grid_.mode(i))) band_.push_back(i);
    for (auto& a : phys_) a.resize(grid_.size());
    for (auto& a : prod_) a.resize(grid_.size());
  }

  const GridSpec& grid() const { return grid_; }
  const PhysParams& params() const { return params_; }
  bool nonlinear = true;

  /// Terms not handled by the integrating factor, evaluated at frame time t.
  void transport_terms(const MhdState& s, double t, MhdState& out) {
    prepare_output(s, t, out);
    if (nonlinear) quadratic_terms(s, t, out);
    for (std::size_t i : band_) {
      const ModeIndex q = grid_.mode(i);
      const double k = q.k, e = s.U[0].frame_eta(q) - q.k * t, l = q.l;
      const double p = k * k + e * e + l * l;
      const cplx u2 = s.U[1].coeffs()[i];
      // lift-up and linear pressure 2 grad_L Delta_L^{-1} d_X U^2
      out.U[0].coeffs()[i] -= u2;
      if (p > 0.0) {
        const cplx lp = 2.0 * k * u2 / p;
        out.U[0].coeffs()[i] += k * lp;
        out.U[1].coeffs()[i] += e * lp;
        out.U[2].coeffs()[i] += l * lp;
      }
      out.B[0].coeffs()[i] += s.B[1].coeffs()[i];
    }
  }

  /// Full right-hand side, including the background-field coupling and
  /// viscosity.
  MhdState nonlinear_rhs(const MhdState& s) {
    check_input(s);
    MhdState out;
    transport_terms(s, s.t, out);
    const double a = params_.alpha, nu = params_.nu;
    for (std::size_t i : band_) {
      const ModeIndex q = grid_.mode(i);
      const double p = s.U[0].lap_symbol(q);
      const cplx ias(0.0, a * params_.sigma.symbol(q.k, q.l));
      for (int c = 0; c < 3; ++c) {
        const cplx u = s.U[c].coeffs()[i], b = s.B[c].coeffs()[i];
        out.U[c].coeffs()[i] += ias * b - nu * p * u;
        out.B[c].coeffs()[i] += ias * u - nu * p * b;
      }
    }
    check_finite(out, "nonlinear_rhs");
    return out;
  }

  /// Exact propagator of the linear part from t0 to t1, in place.
  void integrating_factor(MhdState& s, double t0, double t1) const {
    const double h = t1 - t0;
    for (std::size_t i : band_) {
      const ModeIndex q = grid_.mode(i);
      const linear::Wavevector w{q.k, s.U[0].frame_eta(q), q.l};
      const double decay = std::exp(-params_.nu * linear::lap_integral(w, t0, t1));
      const double th = params_.alpha * params_.sigma.symbol(q.k, q.l) * h;
      const double c = std::cos(th) * decay;
      const cplx is(0.0, std::sin(th) * decay);
      for (int comp = 0; comp < 3; ++comp) {
        cplx& u = s.U[comp].coeffs()[i];
        cplx& b = s.B[comp].coeffs()[i];
        const cplx u0 = u, b0 = b;
        u = c * u0 + is * b0;
        b = is * u0 + c * b0;
      }
    }
  }

  double max_velocity_bound(const MhdState& s) const {
    double v = 0.0;
    for (const auto* f : {&s.U, &s.B})
      for (int c = 0; c < 3; ++c) {
        double a = 0.0;
        for (std::size_t i : band_) a += std::abs((*f)[c].coeffs()[i]);
        v = std::max(v, a);
      }
    return v;
  }

  double min_spacing() const {
    return std::min({2.0 * M_PI / grid_.nx, grid_.ly() / grid_.ny, 2.0 * M_PI / grid_.nz});
  }

  /// Largest pointwise |U_i|, |B_i| of the last transform, or the coefficient
  /// sum bound when no transform has been done.
  double max_velocity(const MhdState& s) const {
    if (!nonlinear) return max_velocity_bound(s);
    double v = 0.0;
    for (const auto& a : phys_)
      for (double x : a) v = std::max(v, std::abs(x));
    return v;
  }

  void check_cfl(const MhdState& s, double dt) const {
    const double v = max_velocity(s);
    if (v > 0.0 && dt > 0.5 * min_spacing() / v) {
      std::ostringstream os;
      os << "CFL violation at t=" << s.t << ": dt=" << dt << " exceeds " << 0.5 * min_spacing() / v;
      throw Error(os.str());
    }
  }

  /// One IF-RK4 step of size h.
  void step(MhdState& s, double h) {
    const double t0 = s.t, tm = t0 + 0.5 * h, t1 = t0 + h;

    transport_terms(s, t0, k1_);
    check_cfl(s, h);
    // stage 2
    stage_ = s;
    axpy(stage_, 0.5 * h, k1_);
    integrating_factor(stage_, t0, tm);
    set_time(stage_, tm);
    transport_terms(stage_, tm, k2_);
    // stage 3
    half_ = s;
    integrating_factor(half_, t0, tm);
    set_time(half_, tm);
    stage_ = half_;
    axpy(stage_, 0.5 * h, k2_);
    transport_terms(stage_, tm, k3_);
    // stage 4
    stage_ = k3_;
    integrating_factor(stage_, tm, t1);
    scale(stage_, h);
    tmp_ = half_;
    integrating_factor(tmp_, tm, t1);
    axpy(stage_, 1.0, tmp_);
    set_time(stage_, t1);
    transport_terms(stage_, t1, k4_);
    // combine: E(tm,t1)[E(t0,tm)(U0 + h/6 k1) + h/3 (k2 + k3)] + h/6 k4
    tmp_ = s;
    axpy(tmp_, h / 6.0, k1_);
    integrating_factor(tmp_, t0, tm);
    axpy(tmp_, h / 3.0, k2_);
    axpy(tmp_, h / 3.0, k3_);
    integrating_factor(tmp_, tm, t1);
    axpy(tmp_, h / 6.0, k4_);

    s.U = std::move(tmp_.U);
    s.B = std::move(tmp_.B);
    s.t = t1;
    set_time(s, t1);
    finalize(s);
  }

  /// Leray-project both fields at their frame time, restore exact Hermitian
  /// symmetry and zero everything outside the band.
  void finalize(MhdState& s) const {
    for (auto* f : {&s.U, &s.B}) {
      for (int c = 0; c < 3; ++c) (*f)[c].dealias();
      leray_project_inplace(*f);
      for (int c = 0; c < 3; ++c) (*f)[c].symmetrize();
    }
    check_finite(s, "step");
  }

  static void check_finite(const MhdState& s, const char* where) {
    const auto& g = s.grid();
    for (const auto* f : {&s.U, &s.B})
      for (int c = 0; c < 3; ++c) {
        const auto& a = (*f)[c].coeffs();
        for (std::size_t i = 0; i < a.size(); ++i)
          if (!std::isfinite(a[i].real()) || !std::isfinite(a[i].imag())) {
            const ModeIndex q = g.mode(i);
            std::ostringstream os;
            os << "non-finite value in " << where << " (" << (f == &s.U ? "U" : "B") << c + 1 << ") at mode k=" << q.k
               << " j=" << q.j << " l=" << q.l << " t=" << s.t;
            throw Error(os.str());
          }
      }
  }

 private:
  void check_input(const MhdState& s) const {
    if (!(s.grid() == grid_)) throw Error("state grid does not match solver grid");
    const double du = div_L_defect(s.U), db = div_L_defect(s.B);
    if (du > 1e-10 || db > 1e-10) {
      std::ostringstream os;
      os << "input is not div_L-free (U defect " << du << ", B defect " << db << ")";
      throw Error(os.str());
    }
    check_finite(s, "nonlinear_rhs input");
  }

  void prepare_output(const MhdState& s, double t, MhdState& out) const {
    if (out.U[0].size() != grid_.size() || out.U[0].shear_shift() != s.U[0].shear_shift()) {
      out = MhdState(grid_, params_, t);
      for (auto* f : {&out.U, &out.B})
        for (int c = 0; c < 3; ++c) (*f)[c].set_shear_shift(s.U[0].shear_shift());
    } else {
      for (auto* f : {&out.U, &out.B})
        for (int c = 0; c < 3; ++c) std::fill((*f)[c].coeffs().begin(), (*f)[c].coeffs().end(), cplx{});
    }
    out.t = t;
    out.params = params_;
    set_time(out, t);
  }

  /// -P div(U U - B B) and -div(B U - U B), pseudo-spectrally with the band
  /// as dealiasing filter.
  void quadratic_terms(const MhdState& s, double t, MhdState& out) {
    for (int c = 0; c < 3; ++c) {
      fft_.inverse(s.U[c].coeffs(), phys_[c]);
      fft_.inverse(s.B[c].coeffs(), phys_[3 + c]);
    }
    const std::size_t n = grid_.size();
    const double *u0 = phys_[0].data(), *u1 = phys_[1].data(), *u2 = phys_[2].data();
    const double *b0 = phys_[3].data(), *b1 = phys_[4].data(), *b2 = phys_[5].data();
    // symmetric S_ij = u_i u_j - b_i b_j: 00 11 22 01 02 12; antisymmetric C_ij = b_i u_j - u_i b_j: 01 02 12
    for (std::size_t x = 0; x < n; ++x) {
      prod_[0][x] = u0[x] * u0[x] - b0[x] * b0[x];
      prod_[1][x] = u1[x] * u1[x] - b1[x] * b1[x];
      prod_[2][x] = u2[x] * u2[x] - b2[x] * b2[x];
      prod_[3][x] = u0[x] * u1[x] - b0[x] * b1[x];
      prod_[4][x] = u0[x] * u2[x] - b0[x] * b2[x];
      prod_[5][x] = u1[x] * u2[x] - b1[x] * b2[x];
      prod_[6][x] = b0[x] * u1[x] - u0[x] * b1[x];
      prod_[7][x] = b0[x] * u2[x] - u0[x] * b2[x];
      prod_[8][x] = b1[x] * u2[x] - u1[x] * b2[x];
    }
    for (int c = 0; c < 9; ++c) fft_.forward(prod_[c], spec_[c]);

    const cplx I(0.0, 1.0);
    for (std::size_t i : band_) {
      const ModeIndex q = grid_.mode(i);
      const double k = q.k, e = s.U[0].frame_eta(q) - q.k * t, l = q.l;
      const double p = k * k + e * e + l * l;
      const cplx s00 = spec_[0][i], s11 = spec_[1][i], s22 = spec_[2][i];
      const cplx s01 = spec_[3][i], s02 = spec_[4][i], s12 = spec_[5][i];
      const cplx c01 = spec_[6][i], c02 = spec_[7][i], c12 = spec_[8][i];
      cplx n0 = -I * (k * s00 + e * s01 + l * s02);
      cplx n1 = -I * (k * s01 + e * s11 + l * s12);
      cplx n2 = -I * (k * s02 + e * s12 + l * s22);
      if (p > 0.0) {
        const cplx d = (k * n0 + e * n1 + l * n2) / p;
        n0 -= k * d;
        n1 -= e * d;
        n2 -= l * d;
      }
      out.U[0].coeffs()[i] += n0;
      out.U[1].coeffs()[i] += n1;
      out.U[2].coeffs()[i] += n2;
      out.B[0].coeffs()[i] += -I * (e * c01 + l * c02);
      out.B[1].coeffs()[i] += -I * (-k * c01 + l * c12);
      out.B[2].coeffs()[i] += -I * (-k * c02 - e * c12);
    }
  }

  static void set_time(MhdState& s, double t) {
    s.t = t;
    s.U.set_t_frame(t);
    s.B.set_t_frame(t);
  }

  void axpy(MhdState& y, double a, const MhdState& x) const {
    for (int c = 0; c < 3; ++c) {
      auto& yu = y.U[c].coeffs();
      auto& yb = y.B[c].coeffs();
      const auto& xu = x.U[c].coeffs();
      const auto& xb = x.B[c].coeffs();
      for (std::size_t i : band_) {
        yu[i] += a * xu[i];
        yb[i] += a * xb[i];
      }
    }
  }

  void scale(MhdState& y, double a) const {
    for (int c = 0; c < 3; ++c)
      for (std::size_t i : band_) {
        y.U[c].coeffs()[i] *= a;
        y.B[c].coeffs()[i] *= a;
      }
  }

  GridSpec grid_;
  PhysParams params_;
  Fft3d fft_;
  std::vector<std::size_t> band_;
  std::array<RealArray, 6> phys_;
  std::array<RealArray, 9> prod_;
  std::array<CoeffArray, 9> spec_;
  MhdState k1_, k2_, k3_, k4_, stage_, half_, tmp_;
};

inline MhdState nonlinear_rhs(const MhdState& s) {
  ShearSolver solver(s.grid(), s.params);
  return solver.nonlinear_rhs(s);
}

// ---------------------------------------------------------------------------
// Shear-frame remap
// ---------------------------------------------------------------------------

/// Moves every coefficient to the slot that labels the same frame wavenumber
/// under shear shift new_shift. Coefficients whose new slot leaves the band
/// are dropped; their energy is returned.
inline RemapResult shift_shear_frame(MhdState& s, std::int64_t new_shift) {
  const auto& g = s.grid();
  const std::int64_t old_shift = s.U[0].shear_shift();
  RemapResult r;
  r.energy_before = energy_record(s).energy;
  const std::int64_t d = new_shift - old_shift;
  if (d == 0) return r;
  double dropped = 0.0;
  for (auto* f : {&s.U, &s.B})
    for (int c = 0; c < 3; ++c) {
      auto& field = (*f)[c];
      CoeffArray next(g.size(), cplx{});
      const auto& cur = field.coeffs();
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (cur[i] == cplx{}) continue;
        const ModeIndex q = g.mode(i);
        const std::int64_t j = static_cast<std::int64_t>(q.j) - static_cast<std::int64_t>(q.k) * d;
        const ModeIndex to{q.k, static_cast<int>(j), q.l};
        if (std::abs(j) > g.jmax() || !g.retained(to)) {
          dropped += std::norm(cur[i]);
          continue;
        }
        next[g.index(to)] = cur[i];
      }
      field.coeffs() = std::move(next);
      field.set_shear_shift(new_shift);
    }
  r.dropped_energy = 0.5 * dropped / g.m;
  return r;
}

/// Relabels to the shift t*m so that slot j holds the mode with current
/// Y-wavenumber eta - k t = j/m. Only defined at times on the 1/m lattice.
inline RemapResult remap_shear_frame(MhdState& s) {
  const double n = s.t * s.grid().m;
  if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, std::abs(n)))
    throw Error("remap called at a non-lattice time (t*m must be an integer)");
  return shift_shear_frame(s, static_cast<std::int64_t>(std::llround(n)));
}

// ---------------------------------------------------------------------------
// Initial data and runs
// ---------------------------------------------------------------------------

inline double state_sobolev_norm(const MhdState& s, double N) {
  const double a = sobolev_norm(s.U, N), b = sobolev_norm(s.B, N);
  return std::sqrt(a * a + b * b);
}

inline MhdState initial_state(const SimConfig& cfg) {
  const auto& g = cfg.grid;
  MhdState s(g, cfg.params, 0.0);
  switch (cfg.ic_kind) {
    case IcKind::random_band: {
      std::mt19937_64 rng(cfg.seed);
      std::normal_distribution<double> n(0.0, 1.0);
      const int b = cfg.ic_band;
      for (auto* f : {&s.U, &s.B})
        for (int c = 0; c < 3; ++c)
          for (std::size_t i = 0; i < g.size(); ++i) {
            // draw for every slot so the stream does not depend on the band
            const double re = n(rng), im = n(rng);
            const ModeIndex q = g.mode(i);
            if (std::abs(q.k) <= b && std::abs(q.l) <= b && std::abs(q.j) <= b * g.m && g.retained(q)) {
              double a = 1.0;
              if (cfg.ic_profile == IcProfile::gaussian) {
                const double eta = static_cast<double>(q.j) / g.m;
                a = std::exp(-0.5 * (q.k * q.k + eta * eta + q.l * q.l) / (cfg.ic_width * cfg.ic_width));
              }
              (*f)[c].coeffs()[i] = a * cplx(re, im);
            }
          }
      break;
    }
    case IcKind::single_mode: {
      const ModeIndex q = cfg.ic_mode;
      s.U[1].at(q) = 1.0;
      s.B[1].at(q) = 1.0;
      s.B[2].at(q) = 1.0;
      if (q.k == 0 && q.l == 0) {
        s.U[0].at(q) = 1.0;
        s.B[0].at(q) = 1.0;
      }
      break;
    }
    case IcKind::file: {
      s = read_snapshot(cfg.ic_file, cfg.params, g.dealias_fraction);
      if (!(s.grid() == g)) throw Error("snapshot grid does not match config grid");
      s.t = 0.0;
      s.U.set_t_frame(0.0);
      s.B.set_t_frame(0.0);
      break;
    }
  }
  for (auto* f : {&s.U, &s.B}) {
    for (int c = 0; c < 3; ++c) {
      (*f)[c].at({0, 0, 0}) = 0.0;
      (*f)[c].dealias();
      (*f)[c].symmetrize();
    }
    leray_project_inplace(*f);
  }
  const double norm = state_sobolev_norm(s, cfg.sobolev_N + 2.0);
  const double a = norm > 0.0 ? cfg.epsilon / norm : 0.0;
  for (auto* f : {&s.U, &s.B})
    for (int c = 0; c < 3; ++c)
      for (auto& v : (*f)[c].coeffs()) v *= a;
  return s;
}

struct Trajectory {
  std::vector<EnergyRecord> energy;  // every step
  std::vector<double> sample_times;  // diagnostic samples
  std::vector<MhdState> states;      // decimated snapshots (store_every)
  std::vector<RemapResult> remaps;
  double max_div_defect = 0.0;
  double max_hermitian_defect = 0.0;
  double dt = 0.0;
};

using SampleObserver = std::function<void(const MhdState&)>;

/// Integrates cfg from its initial data to T_final. The observer sees the
/// state at t = 0 and every diagnostics_every after that.
inline Trajectory run(const SimConfig& cfg, const SampleObserver& observer = {},
                      std::optional<MhdState> initial = std::nullopt) {
  cfg.validate();
  MhdState s = initial ? std::move(*initial) : initial_state(cfg);
  ShearSolver solver(cfg.grid, cfg.params);
  solver.nonlinear = cfg.nonlinear;
  Trajectory tr;
  tr.dt = cfg.dt;
  const int n = cfg.steps(), every = cfg.steps_per_sample();
  const int remap_every = static_cast<int>(std::llround(1.0 / (cfg.grid.m * cfg.dt)));
  int sample_index = 0;

  auto sample = [&]() {
    tr.sample_times.push_back(s.t);
    if (observer) observer(s);
    if (cfg.store_every > 0 && sample_index % cfg.store_every == 0) tr.states.push_back(s);
    ++sample_index;
  };

  tr.energy.push_back(energy_record(s));
  sample();
  for (int i = 1; i <= n; ++i) {
    solver.step(s, cfg.dt);
    // pin the clock to the grid so lattice-time checks stay exact
    s.t = i * cfg.dt;
    s.U.set_t_frame(s.t);
    s.B.set_t_frame(s.t);
    tr.max_div_defect = std::max({tr.max_div_defect, div_L_defect(s.U), div_L_defect(s.B)});
    if (cfg.remap_policy == RemapPolicy::periodic_at_integer_multiples && i % remap_every == 0) {
      s.t = static_cast<double>(i / remap_every) / cfg.grid.m;
      tr.remaps.push_back(remap_shear_frame(s));
      s.t = i * cfg.dt;
    }
    tr.energy.push_back(energy_record(s));
    if (i % every == 0 || i == n) sample();
  }
  for (int c = 0; c < 3; ++c)
    tr.max_hermitian_defect = std::max({tr.max_hermitian_defect, s.U[c].hermitian_defect(), s.B[c].hermitian_defect()});
  return tr;
}

/// Residual of dE/dt + dissipation + stress = 0 over consecutive pairs of
/// steps, by Simpson's rule. Needs uniformly spaced records.
inline std::vector<double> energy_balance_residual(const Trajectory& tr) {
  const auto& e = tr.energy;
  if (e.size() < 3) throw Error("energy balance needs at least 3 records");
  std::vector<double> out;
  for (std::size_t i = 0; i + 2 < e.size(); i += 2) {
    const double h = 0.5 * (e[i + 2].t - e[i].t);
    auto flux = [&](std::size_t j) { return e[j].dissipation + e[j].stress; };
    const double integral = h / 3.0 * (flux(i) + 4.0 * flux(i + 1) + flux(i + 2));
    out.push_back(e[i + 2].energy - e[i].energy + integral);
  }
  return out;
}

}  // namespace mhdc
