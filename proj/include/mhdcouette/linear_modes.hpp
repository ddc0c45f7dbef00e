#pragma once

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mhdcouette/multipliers.hpp"
#include "mhdcouette/params.hpp"

namespace mhdc::linear {

using cplx = std::complex<double>;
using mult::Wavevector;
using ModeState = std::vector<cplx>;

enum class SystemKind { homogeneous_QG, nonhomogeneous_F2, nonhomogeneous_sym_v2, zero_mode_liftup };

inline const char* to_string(SystemKind k) {
  switch (k) {
    case SystemKind::homogeneous_QG: return "homogeneous_QG";
    case SystemKind::nonhomogeneous_F2: return "nonhomogeneous_F2";
    case SystemKind::nonhomogeneous_sym_v2: return "nonhomogeneous_sym_v2";
    case SystemKind::zero_mode_liftup: return "zero_mode_liftup";
  }
  return "?";
}

inline std::size_t dimension(SystemKind k) { return k == SystemKind::zero_mode_liftup ? 6 : 2; }

// ---------------------------------------------------------------------------
// Symbols shared by the exact solutions
// ---------------------------------------------------------------------------

inline double lap_symbol(const Wavevector& w, double t) {
  const double s = w.eta - w.k * t;
  return double(w.k) * w.k + s * s + double(w.l) * w.l;
}

/// int_{t0}^{t1} p(tau) dtau in closed form. Written without dividing by k so
/// the k = 0 case needs no branch.
inline double lap_integral(const Wavevector& w, double t0, double t1) {
  const double h = t1 - t0;
  const double a = w.eta - w.k * t0, b = w.eta - w.k * t1;
  return (double(w.k) * w.k + double(w.l) * w.l) * h + h * (a * a + a * b + b * b) / 3.0;
}

namespace detail {
inline void require_homogeneous(const Wavevector& w, const PhysParams& p) {
  if (w.k == 0 || !p.sigma.resonant(w.k, w.l)) throw Error("wrong mode class: expected homogeneous (k != 0, sigma k + l = 0)");
}
inline void require_nonhomogeneous(const Wavevector& w, const PhysParams& p) {
  if (w.k == 0 || p.sigma.resonant(w.k, w.l))
    throw Error("wrong mode class: expected nonhomogeneous (k != 0, sigma k + l != 0)");
}
inline void require_zero(const Wavevector& w) {
  if (w.k != 0) throw Error("wrong mode class: expected k = 0");
  if (w.eta == 0.0 && w.l == 0) throw Error("zero-mode system needs (eta, l) != (0, 0)");
}
}  // namespace detail

/// Q^2 on a homogeneous mode: exp(-nu int_0^t p).
inline double homogeneous_q2_exact(const Wavevector& w, const PhysParams& p, double t) {
  detail::require_homogeneous(w, p);
  return std::exp(-p.nu * lap_integral(w, 0.0, t));
}

/// G^2 on a homogeneous mode: (p(t)/p(0)) exp(-nu int_0^t p).
inline double homogeneous_g2_exact(const Wavevector& w, const PhysParams& p, double t) {
  detail::require_homogeneous(w, p);
  return lap_symbol(w, t) / lap_symbol(w, 0.0) * std::exp(-p.nu * lap_integral(w, 0.0, t));
}

/// |U^2(t)|/|U^2(0)| on a homogeneous mode, U^2 = Delta_L^{-1} Q^2.
inline std::vector<double> inviscid_damping_curve(const Wavevector& w, const PhysParams& p,
                                                  const std::vector<double>& times) {
  detail::require_homogeneous(w, p);
  std::vector<double> out;
  out.reserve(times.size());
  const double p0 = lap_symbol(w, 0.0);
  for (double t : times) out.push_back(p0 / lap_symbol(w, t) * std::exp(-p.nu * lap_integral(w, 0.0, t)));
  return out;
}

// ---------------------------------------------------------------------------
// ODE systems
// ---------------------------------------------------------------------------

struct LinearModeSystem {
  SystemKind kind = SystemKind::homogeneous_QG;
  Wavevector mode{};
  PhysParams params{};
  ModeState initial{};
  /// F2 only: drop the cross coupling between the two good unknowns.
  bool coupling = true;

  void validate() const {
    switch (kind) {
      case SystemKind::homogeneous_QG: detail::require_homogeneous(mode, params); break;
      case SystemKind::nonhomogeneous_F2:
      case SystemKind::nonhomogeneous_sym_v2: detail::require_nonhomogeneous(mode, params); break;
      case SystemKind::zero_mode_liftup: detail::require_zero(mode); break;
    }
    if (initial.size() != dimension(kind)) {
      std::ostringstream os;
      os << to_string(kind) << " needs " << dimension(kind) << " initial components, got " << initial.size();
      throw Error(os.str());
    }
    if (kind == SystemKind::zero_mode_liftup) {
      // eta U^2 + l U^3 = 0 and the same for B.
      double scale = 0.0;
      for (const auto& c : initial) scale = std::max(scale, std::abs(c));
      const double e = mode.eta, l = mode.l;
      if (std::abs(e * initial[1] + l * initial[2]) > 1e-12 * scale * (std::abs(e) + std::abs(l)) ||
          std::abs(e * initial[4] + l * initial[5]) > 1e-12 * scale * (std::abs(e) + std::abs(l)))
        throw Error("zero-mode initial data is not divergence-free");
    }
  }

  /// sigma k + l, the frequency the background field sees.
  double field_symbol() const { return params.sigma.symbol(mode.k, mode.l); }

  void operator()(const ModeState& y, ModeState& dy, double t) const {
    dy.resize(y.size());
    const double nu = params.nu;
    const double k = mode.k, l = mode.l;
    const double s = mode.eta - k * t;
    const double p = k * k + s * s + l * l;
    switch (kind) {
      case SystemKind::homogeneous_QG:
        dy[0] = -nu * p * y[0];
        dy[1] = (-2.0 * k * s / p - nu * p) * y[1];
        break;
      case SystemKind::nonhomogeneous_F2:
      case SystemKind::nonhomogeneous_sym_v2: {
        const double c = k * s / p;
        const double phase = 2.0 * params.alpha * field_symbol() * t;
        const cplx rot(std::cos(phase), -std::sin(phase));  // e^{-2i alpha (sigma k + l) t}
        const double g = coupling ? c : 0.0;
        const double self = kind == SystemKind::nonhomogeneous_F2 ? -c : 0.0;
        dy[0] = (self - nu * p) * y[0] + g * rot * y[1];
        dy[1] = (self - nu * p) * y[1] + g * std::conj(rot) * y[0];
        break;
      }
      case SystemKind::zero_mode_liftup: {
        const cplx iaL(0.0, params.alpha * l);
        const double damp = nu * p;
        dy[0] = iaL * y[3] - y[1] - damp * y[0];
        dy[1] = iaL * y[4] - damp * y[1];
        dy[2] = iaL * y[5] - damp * y[2];
        dy[3] = iaL * y[0] + y[4] - damp * y[3];
        dy[4] = iaL * y[1] - damp * y[4];
        dy[5] = iaL * y[2] - damp * y[5];
        break;
      }
    }
  }
};

struct IntegratorOptions {
  double abs_tol = 1e-11;
  double rel_tol = 1e-9;
  double max_step = std::numeric_limits<double>::infinity();  // further capped by the oscillation rule
  double min_step = 1e-12;
  int samples = 2001;
  double peak_rel_change = 1e-3;
  int max_refinements = 5;
};

/// Largest step allowed for a system: a tenth of 1/(2 alpha |sigma k + l|).
inline double oscillation_step_cap(const LinearModeSystem& sys) {
  double s = 0.0;
  switch (sys.kind) {
    case SystemKind::homogeneous_QG: return std::numeric_limits<double>::infinity();
    case SystemKind::nonhomogeneous_F2:
    case SystemKind::nonhomogeneous_sym_v2: s = sys.field_symbol(); break;
    case SystemKind::zero_mode_liftup: s = sys.mode.l; break;
  }
  const double f = 2.0 * sys.params.alpha * std::abs(s);
  return f > 0.0 ? 0.1 / f : std::numeric_limits<double>::infinity();
}

/// Dense-output Dormand-Prince 5(4) run sampled at the given times (sorted,
/// starting at 0). Returns one state per sample.
inline std::vector<ModeState> integrate_samples(const LinearModeSystem& sys, const std::vector<double>& times,
                                                const IntegratorOptions& opt) {
  namespace ode = boost::numeric::odeint;
  using Stepper = ode::runge_kutta_dopri5<ModeState>;
  std::vector<ModeState> out;
  out.reserve(times.size());
  if (times.empty()) return out;

  bool zero = true;
  for (const auto& c : sys.initial) zero = zero && c == cplx{};
  if (zero) {
    out.assign(times.size(), sys.initial);
    return out;
  }

  const double T = times.back();
  double cap = std::min(opt.max_step, oscillation_step_cap(sys));
  if (!std::isfinite(cap)) cap = std::max(T, 1e-3) / 50.0;
  auto dense = ode::make_dense_output(opt.abs_tol, opt.rel_tol, cap, Stepper());
  dense.initialize(sys.initial, times.front(), std::min(cap, 1e-3));

  ModeState y(sys.initial.size());
  std::size_t next = 0;
  // No interpolant exists before the first step.
  while (next < times.size() && times[next] <= times.front()) {
    out.push_back(sys.initial);
    ++next;
  }
  try {
    while (next < times.size()) {
      while (next < times.size() && times[next] <= dense.current_time()) {
        dense.calc_state(times[next], y);
        out.push_back(y);
        ++next;
      }
      if (next == times.size()) break;
      dense.do_step(std::cref(sys));
      if (dense.current_time_step() < opt.min_step) {
        std::ostringstream os;
        os << "step-size underflow at t=" << dense.current_time() << " (dt=" << dense.current_time_step() << ")";
        throw Error(os.str());
      }
      for (const auto& c : dense.current_state())
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
          throw Error("non-finite state in linear mode integration");
    }
  } catch (const ode::odeint_error& e) {
    throw Error(std::string("step-size underflow: ") + e.what());
  }
  return out;
}

struct LinearModeSolution {
  SystemKind kind = SystemKind::homogeneous_QG;
  std::vector<double> times;
  std::vector<ModeState> amplitudes;
  /// |y(t)| / |y(0)| (Euclidean over all components); 1 at t = 0.
  std::vector<double> amplification;
  /// The quantity the kind is about: |G^2| for QG, |y| for the W systems,
  /// |U^1|/|y(0)| for the zero-mode lift-up system.
  std::vector<double> tracked;
  double t_peak = 0.0;
  double peak = 0.0;
};

namespace detail {
inline double norm2(const ModeState& y) {
  double a = 0.0;
  for (const auto& c : y) a += std::norm(c);
  return std::sqrt(a);
}

inline LinearModeSolution evaluate(const LinearModeSystem& sys, double T, int samples, const IntegratorOptions& opt) {
  LinearModeSolution sol;
  sol.kind = sys.kind;
  sol.times.resize(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) sol.times[i] = T * i / (samples - 1);
  sol.amplitudes = integrate_samples(sys, sol.times, opt);
  const double n0 = norm2(sys.initial);
  const bool qg = sys.kind == SystemKind::homogeneous_QG;
  const double g0 = qg ? std::abs(sys.initial[1]) : 0.0;
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    const auto& y = sol.amplitudes[i];
    const double a = n0 > 0.0 ? norm2(y) / n0 : 0.0;
    sol.amplification.push_back(a);
    double tr = a;
    if (qg && g0 > 0.0) tr = std::abs(y[1]) / g0;
    if (sys.kind == SystemKind::zero_mode_liftup) tr = n0 > 0.0 ? std::abs(y[0]) / n0 : 0.0;
    sol.tracked.push_back(tr);
    if (tr > sol.peak || i == 0) {
      sol.peak = tr;
      sol.t_peak = sol.times[i];
    }
  }
  return sol;
}
}  // namespace detail

/// Integrates on [0, T], doubling the sample count until the reported peak
/// moves by less than opt.peak_rel_change.
inline LinearModeSolution integrate_system(const LinearModeSystem& sys, double T, const IntegratorOptions& opt = {}) {
  sys.validate();
  if (!(T > 0.0)) throw Error("integration horizon must be > 0");
  int n = std::max(opt.samples, 3);
  auto sol = detail::evaluate(sys, T, n, opt);
  for (int r = 0; r < opt.max_refinements; ++r) {
    n = 2 * n - 1;
    auto finer = detail::evaluate(sys, T, n, opt);
    const double change = std::abs(finer.peak - sol.peak);
    sol = std::move(finer);
    if (change <= opt.peak_rel_change * std::max(sol.peak, 1e-300)) break;
  }
  return sol;
}

inline LinearModeSolution integrate_nonhomogeneous_f2(const Wavevector& w, const PhysParams& p, cplx plus, cplx minus,
                                                      double T, const IntegratorOptions& opt = {},
                                                      bool coupling = true) {
  return integrate_system({SystemKind::nonhomogeneous_F2, w, p, {plus, minus}, coupling}, T, opt);
}

inline LinearModeSolution integrate_sym_v2(const Wavevector& w, const PhysParams& p, cplx plus, cplx minus, double T,
                                           const IntegratorOptions& opt = {}) {
  return integrate_system({SystemKind::nonhomogeneous_sym_v2, w, p, {plus, minus}}, T, opt);
}

/// Components are (U^1, U^2, U^3, B^1, B^2, B^3) at a k = 0 frequency.
inline LinearModeSolution zero_mode_liftup(const Wavevector& w, const PhysParams& p, const ModeState& initial, double T,
                                           const IntegratorOptions& opt = {}) {
  return integrate_system({SystemKind::zero_mode_liftup, w, p, initial}, T, opt);
}

/// Largest singular value of the 2x2 solution operator at each sample time:
/// the envelope over all initial data.
struct OperatorEnvelope {
  std::vector<double> times;
  std::vector<double> norm;
  double t_peak = 0.0;
  double peak = 0.0;
};

inline OperatorEnvelope worst_case_envelope(SystemKind kind, const Wavevector& w, const PhysParams& p, double T,
                                            const IntegratorOptions& opt = {}) {
  if (dimension(kind) != 2) throw Error("worst_case_envelope needs a two-component system");
  LinearModeSystem a{kind, w, p, {1.0, 0.0}};
  LinearModeSystem b{kind, w, p, {0.0, 1.0}};
  a.validate();
  // The step sequence does not depend on the sample times, so one pass on
  // the finest grid serves every refinement level.
  const int n0 = std::max(opt.samples, 3), levels = std::max(opt.max_refinements, 0);
  const long long n_fine = static_cast<long long>(n0 - 1) * (1LL << levels) + 1;
  std::vector<double> fine(static_cast<std::size_t>(n_fine));
  for (long long i = 0; i < n_fine; ++i) fine[i] = T * static_cast<double>(i) / static_cast<double>(n_fine - 1);
  const auto ya = integrate_samples(a, fine, opt);
  const auto yb = integrate_samples(b, fine, opt);
  // Phi = [ya yb]; sigma_max^2 = largest eigenvalue of Phi^H Phi.
  std::vector<double> norm(fine.size());
  for (std::size_t i = 0; i < fine.size(); ++i) {
    const double aa = std::norm(ya[i][0]) + std::norm(ya[i][1]);
    const double bb = std::norm(yb[i][0]) + std::norm(yb[i][1]);
    const cplx ab = std::conj(ya[i][0]) * yb[i][0] + std::conj(ya[i][1]) * yb[i][1];
    const double half = 0.5 * (aa + bb);
    const double disc = std::sqrt(0.25 * (aa - bb) * (aa - bb) + std::norm(ab));
    norm[i] = std::sqrt(half + disc);
  }
  OperatorEnvelope env;
  for (int r = 0; r <= levels; ++r) {
    const std::size_t stride = std::size_t{1} << (levels - r);
    OperatorEnvelope cur;
    for (std::size_t i = 0; i < fine.size(); i += stride) {
      cur.times.push_back(fine[i]);
      cur.norm.push_back(norm[i]);
      if (norm[i] > cur.peak) {
        cur.peak = norm[i];
        cur.t_peak = fine[i];
      }
    }
    const bool done = r > 0 && std::abs(cur.peak - env.peak) <= opt.peak_rel_change * cur.peak;
    env = std::move(cur);
    if (done) break;
  }
  return env;
}

// ---------------------------------------------------------------------------
// Scaling fits
// ---------------------------------------------------------------------------

struct ScalingFit {
  std::vector<double> nus;
  std::vector<double> peaks;
  std::vector<double> t_peaks;
  std::vector<double> etas;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

namespace detail {
/// Least squares on (log x, log y).
inline void loglog_fit(ScalingFit& f) {
  const std::size_t n = f.nus.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(f.nus[i]), y = std::log(f.peaks[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
  f.slope = cxy / vx;
  f.intercept = (sy - f.slope * sx) / n;
  f.r_squared = vy > 0.0 ? std::clamp(cxy * cxy / (vx * vy), 0.0, 1.0) : 1.0;
}

/// max over t >= 0 of f, by a grid scan on [0, T] and golden-section polish.
template <class F>
std::pair<double, double> maximize_in_time(F&& f, double T, int n = 4000) {
  double best_t = 0.0, best = f(0.0);
  const double h = T / n;
  for (int i = 1; i <= n; ++i) {
    const double v = f(i * h);
    if (v > best) {
      best = v;
      best_t = i * h;
    }
  }
  double a = std::max(0.0, best_t - h), b = best_t + h;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 80; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (f(c) > f(d))
      b = d;
    else
      a = c;
  }
  const double tm = 0.5 * (a + b);
  if (f(tm) > best) return {tm, f(tm)};
  return {best_t, best};
}
}  // namespace detail

enum class HomogeneousQuantity { G2, Q2 };

/// Peak amplification of a homogeneous quantity at fixed (k, l), maximized
/// over t and over eta on the lattice j/m_eta, for each nu.
inline ScalingFit fit_homogeneous_scaling(int k, int l, const RationalShearAngle& sigma, const std::vector<double>& nus,
                                          HomogeneousQuantity which = HomogeneousQuantity::G2, int m_eta = 8,
                                          double eta_range = 20.0) {
  if (nus.size() < 3) throw Error("scaling fit needs at least 3 values of nu");
  const auto [lo, hi] = std::minmax_element(nus.begin(), nus.end());
  if (!(*lo > 0.0) || std::log10(*hi / *lo) < 2.0 - 1e-12) throw Error("scaling fit needs nu spanning >= 2 decades");

  ScalingFit fit;
  for (double nu : nus) {
    PhysParams p{nu, 0.0, sigma, 0.0};
    double best = -1.0, best_t = 0.0, best_eta = 0.0;
    const int jmax = static_cast<int>(std::lround(eta_range * m_eta));
    for (int j = -jmax; j <= jmax; ++j) {
      const Wavevector w{k, double(j) / m_eta, l};
      const double T = 10.0 * std::cbrt(1.0 / nu) + std::abs(w.eta / k);
      auto f = [&](double t) {
        return which == HomogeneousQuantity::G2 ? homogeneous_g2_exact(w, p, t) : homogeneous_q2_exact(w, p, t);
      };
      const auto [t, v] = detail::maximize_in_time(f, T);
      if (v > best) {
        best = v;
        best_t = t;
        best_eta = w.eta;
      }
    }
    fit.nus.push_back(nu);
    fit.peaks.push_back(best);
    fit.t_peaks.push_back(best_t);
    fit.etas.push_back(best_eta);
  }
  detail::loglog_fit(fit);
  return fit;
}

inline ScalingFit fit_g2_scaling(int k, int l, const RationalShearAngle& sigma, const std::vector<double>& nus,
                                 int m_eta = 8) {
  return fit_homogeneous_scaling(k, l, sigma, nus, HomogeneousQuantity::G2, m_eta);
}

}  // namespace mhdc::linear
