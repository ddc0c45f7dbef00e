#pragma once

#include <cmath>
#include <utility>

#include "mhdcouette/field.hpp"

namespace mhdc {

enum class ModeClass { zero, homogeneous, nonhomogeneous };

/// k = 0 is the X-average; among k != 0, sigma*k + l = 0 are the modes the
/// background field cannot act on.
inline ModeClass classify(const ModeIndex& q, const RationalShearAngle& sigma) {
  if (q.k == 0) return ModeClass::zero;
  return sigma.resonant(q.k, q.l) ? ModeClass::homogeneous : ModeClass::nonhomogeneous;
}

inline const char* to_string(ModeClass c) {
  switch (c) {
    case ModeClass::zero: return "zero";
    case ModeClass::homogeneous: return "homogeneous";
    case ModeClass::nonhomogeneous: return "nonhomogeneous";
  }
  return "?";
}

inline SpectralScalarField project_modes(const SpectralScalarField& f, ModeClass cls,
                                         const RationalShearAngle& sigma) {
  SpectralScalarField out = f;
  const auto& g = f.grid();
  auto& c = out.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i)
    if (classify(g.mode(i), sigma) != cls) c[i] = cplx{};
  return out;
}

inline SpectralVectorField project_modes(const SpectralVectorField& v, ModeClass cls,
                                         const RationalShearAngle& sigma) {
  SpectralVectorField out(project_modes(v[0], cls, sigma), project_modes(v[1], cls, sigma),
                          project_modes(v[2], cls, sigma));
  out.div_free_moving_frame = v.div_free_moving_frame;
  return out;
}

/// Multiply every coefficient by exp(i a (sigma k + l) t).
inline SpectralScalarField apply_oscillation(const SpectralScalarField& f, double a, double t,
                                             const RationalShearAngle& sigma) {
  SpectralScalarField out = f;
  if (a == 0.0 || t == 0.0) return out;
  const auto& g = f.grid();
  auto& c = out.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const ModeIndex q = g.mode(i);
    const std::int64_t s = sigma.scaled_symbol(q.k, q.l);
    if (s == 0) continue;
    const double phase = a * (static_cast<double>(s) / static_cast<double>(sigma.p())) * t;
    c[i] *= cplx(std::cos(phase), std::sin(phase));
  }
  return out;
}

inline SpectralVectorField apply_oscillation(const SpectralVectorField& v, double a, double t,
                                             const RationalShearAngle& sigma) {
  SpectralVectorField out(apply_oscillation(v[0], a, t, sigma), apply_oscillation(v[1], a, t, sigma),
                          apply_oscillation(v[2], a, t, sigma));
  out.div_free_moving_frame = v.div_free_moving_frame;
  return out;
}

namespace detail {
template <class Op>
SpectralScalarField combine(const SpectralScalarField& a, const SpectralScalarField& b, Op op) {
  if (!a.same_layout(b)) throw Error("field layout mismatch");
  SpectralScalarField out = a;
  auto& c = out.coeffs();
  const auto& cb = b.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = op(c[i], cb[i]);
  return out;
}
template <class Op>
SpectralVectorField combine(const SpectralVectorField& a, const SpectralVectorField& b, Op op) {
  SpectralVectorField out(combine(a[0], b[0], op), combine(a[1], b[1], op), combine(a[2], b[2], op));
  out.div_free_moving_frame = a.div_free_moving_frame && b.div_free_moving_frame;
  return out;
}
}  // namespace detail

inline SpectralVectorField add(const SpectralVectorField& a, const SpectralVectorField& b) {
  return detail::combine(a, b, [](cplx x, cplx y) { return x + y; });
}
inline SpectralVectorField subtract(const SpectralVectorField& a, const SpectralVectorField& b) {
  return detail::combine(a, b, [](cplx x, cplx y) { return x - y; });
}
inline SpectralScalarField add(const SpectralScalarField& a, const SpectralScalarField& b) {
  return detail::combine(a, b, [](cplx x, cplx y) { return x + y; });
}

struct GoodUnknowns {
  SpectralVectorField plus;
  SpectralVectorField minus;
};

/// W^+- = T^{-t}_{+-alpha}(U +- B).
inline GoodUnknowns good_unknowns_forward(const MhdState& s) {
  const auto& sig = s.params.sigma;
  return {apply_oscillation(add(s.U, s.B), -s.params.alpha, s.t, sig),
          apply_oscillation(subtract(s.U, s.B), s.params.alpha, s.t, sig)};
}

/// Inverse of good_unknowns_forward: U = (T^t_a W^+ + T^t_{-a} W^-)/2 and
/// B = (T^t_a W^+ - T^t_{-a} W^-)/2.
inline MhdState good_unknowns_inverse(const GoodUnknowns& w, double t, const PhysParams& params) {
  const auto up = apply_oscillation(w.plus, params.alpha, t, params.sigma);
  const auto um = apply_oscillation(w.minus, -params.alpha, t, params.sigma);
  MhdState s;
  s.U = detail::combine(up, um, [](cplx a, cplx b) { return 0.5 * (a + b); });
  s.B = detail::combine(up, um, [](cplx a, cplx b) { return 0.5 * (a - b); });
  s.t = t;
  s.params = params;
  return s;
}

/// grad_L f with symbols (ik, i(eta - k t), il) at the field's frame time.
inline SpectralVectorField grad_L(const SpectralScalarField& f) {
  SpectralVectorField out(f, f, f);
  const auto& g = f.grid();
  const auto& c = f.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const ModeIndex q = g.mode(i);
    const cplx v = c[i];
    out[0].coeffs()[i] = cplx(0.0, q.k) * v;
    out[1].coeffs()[i] = cplx(0.0, f.sheared_eta(q)) * v;
    out[2].coeffs()[i] = cplx(0.0, q.l) * v;
  }
  return out;
}

inline SpectralScalarField div_L(const SpectralVectorField& v) {
  SpectralScalarField out(v.grid(), v.t_frame(), v[0].shear_shift());
  const auto& g = v.grid();
  auto& c = out.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const ModeIndex q = g.mode(i);
    c[i] = cplx(0.0, 1.0) * (static_cast<double>(q.k) * v[0].coeffs()[i] + v[0].sheared_eta(q) * v[1].coeffs()[i] +
                             static_cast<double>(q.l) * v[2].coeffs()[i]);
  }
  return out;
}

inline SpectralScalarField laplace_L(const SpectralScalarField& f) {
  SpectralScalarField out = f;
  const auto& g = f.grid();
  auto& c = out.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= -f.lap_symbol(g.mode(i));
  return out;
}

enum class MeanPolicy { require_zero, drop };

/// Inverse of laplace_L on mean-free fields. A nonzero (0,0,0) coefficient is
/// an error unless the caller asks for it to be dropped.
inline SpectralScalarField inv_laplace_L(const SpectralScalarField& f, MeanPolicy policy = MeanPolicy::require_zero) {
  SpectralScalarField out = f;
  const auto& g = f.grid();
  auto& c = out.coeffs();
  const std::size_t mean = g.index({0, 0, 0});
  if (c[mean] != cplx{} && policy == MeanPolicy::require_zero) throw Error("mean mode not invertible");
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i == mean) {
      c[i] = cplx{};
      continue;
    }
    c[i] /= -f.lap_symbol(g.mode(i));
  }
  return out;
}

/// v - grad_L inv_laplace_L div_L v. The mean mode passes through unchanged.
inline void leray_project_inplace(SpectralVectorField& v) {
  const auto& g = v.grid();
  const std::size_t n = g.size();
  for (std::size_t i = 0; i < n; ++i) {
    const ModeIndex q = g.mode(i);
    const double a = q.k, b = v[0].sheared_eta(q), d = q.l;
    const double p = a * a + b * b + d * d;
    if (p == 0.0) continue;
    cplx& x = v[0].coeffs()[i];
    cplx& y = v[1].coeffs()[i];
    cplx& z = v[2].coeffs()[i];
    if (a == 0.0 && d == 0.0) {
      y = 0.0;  // exact: the divergence is eta*y alone
      continue;
    }
    const cplx dot = (a * x + b * y + d * z) / p;
    x -= a * dot;
    y -= b * dot;
    z -= d * dot;
  }
  v.div_free_moving_frame = true;
}

inline SpectralVectorField leray_project_moving(const SpectralVectorField& v) {
  SpectralVectorField out = v;
  leray_project_inplace(out);
  return out;
}

/// Evaluates the projection at frame time t (the fields are relabeled to t).
inline SpectralVectorField leray_project_moving(const SpectralVectorField& v, double t) {
  SpectralVectorField out = v;
  out.set_t_frame(t);
  leray_project_inplace(out);
  return out;
}

/// max_q |k v1 + (eta-kt) v2 + l v3| / max|v|.
inline double div_L_defect(const SpectralVectorField& v) {
  const auto& g = v.grid();
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const ModeIndex q = g.mode(i);
    const cplx d = static_cast<double>(q.k) * v[0].coeffs()[i] + v[0].sheared_eta(q) * v[1].coeffs()[i] +
                   static_cast<double>(q.l) * v[2].coeffs()[i];
    worst = std::max(worst, std::abs(d));
  }
  const double scale = v.max_abs();
  return scale > 0.0 ? worst / scale : 0.0;
}

/// <a> = sqrt(1 + |a|^2) applied to (k, eta, l).
inline double japanese_bracket(double k, double eta, double l) { return std::sqrt(1.0 + k * k + eta * eta + l * l); }

/// sqrt( sum <k,eta,l>^{2N} |f|^2 / m ), with eta the frame wavenumber.
inline double sobolev_norm(const SpectralScalarField& f, double N) {
  if (N < 0.0) throw Error("Sobolev index must be >= 0");
  const auto& g = f.grid();
  const auto& c = f.coeffs();
  double acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double a2 = std::norm(c[i]);
    if (a2 == 0.0) continue;
    const ModeIndex q = g.mode(i);
    const double jb = japanese_bracket(q.k, f.frame_eta(q), q.l);
    acc += std::pow(jb, 2.0 * N) * a2;
  }
  return std::sqrt(acc / g.m);
}

inline double sobolev_norm(const SpectralVectorField& v, double N) {
  const double a = sobolev_norm(v[0], N), b = sobolev_norm(v[1], N), c = sobolev_norm(v[2], N);
  return std::sqrt(a * a + b * b + c * c);
}

/// Real L^2 inner product sum Re(a conj b)/m.
inline double inner(const SpectralScalarField& a, const SpectralScalarField& b) {
  double acc = 0.0;
  const auto& ca = a.coeffs();
  const auto& cb = b.coeffs();
  for (std::size_t i = 0; i < ca.size(); ++i) acc += (ca[i] * std::conj(cb[i])).real();
  return acc / a.grid().m;
}

inline double inner(const SpectralVectorField& a, const SpectralVectorField& b) {
  return inner(a[0], b[0]) + inner(a[1], b[1]) + inner(a[2], b[2]);
}

}  // namespace mhdc
