#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <string>

#include "mhdcouette/params.hpp"

namespace mhdc::mult {

/// A frequency with integer X/Z wavenumbers and a real frame eta.
struct Wavevector {
  int k = 0;
  double eta = 0.0;
  int l = 0;
};

enum class Which { M1, M2, M3, Upsilon, M };
enum class Method { closed_form, quadrature, truncated_sum };

inline const char* to_string(Which w) {
  switch (w) {
    case Which::M1: return "M1";
    case Which::M2: return "M2";
    case Which::M3: return "M3";
    case Which::Upsilon: return "Upsilon";
    case Which::M: return "M";
  }
  return "?";
}

inline const char* to_string(Method m) {
  switch (m) {
    case Method::closed_form: return "closed_form";
    case Method::quadrature: return "quadrature";
    case Method::truncated_sum: return "truncated_sum";
  }
  return "?";
}

struct MultiplierSample {
  Which which = Which::M1;
  double t = 0.0;
  Wavevector mode{};
  double value = 1.0;
  Method method = Method::closed_form;
  double error_bound = 0.0;
};

inline constexpr int kDefaultUpsilonKmax = 4096;

// ---------------------------------------------------------------------------
// M1:  d/dt log M1 = -(k^2 + |kl|) / (k^2 + (eta-kt)^2 + l^2)
// ---------------------------------------------------------------------------

inline double m1_rate(double t, const Wavevector& w) {
  if (w.k == 0) return 0.0;
  const double k = w.k, l = w.l, s = w.eta - k * t;
  return -(k * k + std::abs(k * l)) / (k * k + s * s + l * l);
}

/// log(M1(t2)/M1(t1)), from the arctan antiderivative.
inline double m1_log_increment(double t1, double t2, const Wavevector& w) {
  if (w.k == 0) return 0.0;
  const double k = w.k, l = w.l;
  const double r = std::sqrt(k * k + l * l);
  const double amp = (k * k + std::abs(k * l)) / (std::abs(k) * r);
  const double bracket = std::atan((w.eta - k * t1) / r) - std::atan((w.eta - k * t2) / r);
  return -amp * bracket * (k > 0 ? 1.0 : -1.0);
}

inline double m1_value(double t, const Wavevector& w) {
  if (t < 0.0) throw Error("multiplier time must be >= 0");
  return std::exp(m1_log_increment(0.0, t, w));
}

// ---------------------------------------------------------------------------
// M2:  d/dt log M2 = -nu^{1/3} k^2 / (k^2 + nu^{2/3} (eta-kt)^2)
// ---------------------------------------------------------------------------

inline double m2_rate(double t, const Wavevector& w, double nu) {
  if (w.k == 0) return 0.0;
  const double k = w.k, c = std::cbrt(nu), s = w.eta - k * t;
  return -c * k * k / (k * k + c * c * s * s);
}

inline double m2_log_increment(double t1, double t2, const Wavevector& w, double nu) {
  if (w.k == 0) return 0.0;
  if (!(nu > 0.0)) throw Error("M2 requires nu > 0");
  const double k = w.k, ak = std::abs(k), c = std::cbrt(nu);
  const double bracket = std::atan(c * (w.eta - k * t1) / ak) - std::atan(c * (w.eta - k * t2) / ak);
  return -bracket * (k > 0 ? 1.0 : -1.0);
}

inline double m2_value(double t, const Wavevector& w, double nu) {
  if (t < 0.0) throw Error("multiplier time must be >= 0");
  return std::exp(m2_log_increment(0.0, t, w, nu));
}

// Quadrature of the defining rates. These share nothing with the closed forms
// and exist so the two routes can be compared.

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

template <class F>
QuadratureResult integrate(F&& f, double a, double b, double rel_tol = 1e-14, unsigned max_depth = 20) {
  QuadratureResult r;
  double l1 = 0.0;
  r.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, max_depth, rel_tol, &r.error, &l1);
  return r;
}

inline QuadratureResult m1_value_quadrature(double t, const Wavevector& w) {
  if (w.k == 0 || t == 0.0) return {1.0, 0.0};
  auto q = integrate([&](double s) { return m1_rate(s, w); }, 0.0, t);
  const double v = std::exp(q.value);
  return {v, v * q.error};
}

inline QuadratureResult m2_value_quadrature(double t, const Wavevector& w, double nu) {
  if (w.k == 0 || t == 0.0) return {1.0, 0.0};
  auto q = integrate([&](double s) { return m2_rate(s, w, nu); }, 0.0, t);
  const double v = std::exp(q.value);
  return {v, v * q.error};
}

// ---------------------------------------------------------------------------
// Enhanced dissipation: nu^{1/3}/2 <= nu (eta-kt)^2 - d/dt log M2
// ---------------------------------------------------------------------------

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// The constant 1/2 follows from a case split: if nu^{1/3}|eta-kt| >= |k| the
/// viscous term alone is >= nu^{1/3}; otherwise the M2 rate is >= nu^{1/3}/2.
inline InequalityCheck check_enhanced_dissipation_inequality(const Wavevector& w, double t, double nu) {
  if (w.k == 0) throw Error("multiplier undefined branch");
  const double s = w.eta - w.k * t;
  InequalityCheck r;
  r.lhs = 0.5 * std::cbrt(nu);
  r.rhs = nu * s * s - m2_rate(t, w, nu);
  r.holds = r.rhs >= r.lhs;
  return r;
}

// ---------------------------------------------------------------------------
// Upsilon(t,k,eta) = sum_{k' != k} 1/|k-k'| * a / (a^2 + (eta - (k-k')t)^2),
// a = 1 + |k-k'| + |k'|.
// ---------------------------------------------------------------------------

struct UpsilonValue {
  double value = 0.0;
  double error_bound = 0.0;
  int kmax_used = 0;
};

namespace detail {
inline double upsilon_term(double t, int k, double eta, double kp) {
  const double d = std::abs(static_cast<double>(k) - kp);
  const double a = 1.0 + d + std::abs(kp);
  const double b = eta - (static_cast<double>(k) - kp) * t;
  return a / (d * (a * a + b * b));
}
}  // namespace detail

/// Truncated sum over |k'| <= K plus a midpoint-integral estimate of the two
/// tails. error_bound is rigorous: for K >= 2|k| each tail lies in
/// [0, 2/(K+1)] and its estimate in [0, 2/(K+1/2)], so the total error is at
/// most 4/(K+1/2) plus the tail quadrature error.
inline UpsilonValue upsilon(double t, int k, double eta, int kmax = kDefaultUpsilonKmax) {
  if (kmax < 64) throw Error("Upsilon truncation K_max must be >= 64");
  const int K = std::max(kmax, 2 * std::abs(k) + 1);
  double sum = 0.0;
  // Sum small terms first.
  for (int kp = K; kp >= 1; --kp) {
    if (kp != k) sum += detail::upsilon_term(t, k, eta, kp);
    if (-kp != k) sum += detail::upsilon_term(t, k, eta, -kp);
  }
  if (k != 0) sum += detail::upsilon_term(t, k, eta, 0.0);

  const double inf = std::numeric_limits<double>::infinity();
  const double start = K + 0.5;
  auto right = integrate([&](double x) { return detail::upsilon_term(t, k, eta, x); }, start, inf, 1e-10, 12);
  auto left = integrate([&](double x) { return detail::upsilon_term(t, k, eta, -x); }, start, inf, 1e-10, 12);

  UpsilonValue r;
  r.value = sum + right.value + left.value;
  r.error_bound = 4.0 / (K + 0.5) + right.error + left.error;
  r.kmax_used = K;
  return r;
}

/// Plain truncated sum with no tail estimate. Reference route for tests.
inline double upsilon_truncated_sum(double t, int k, double eta, long long K) {
  double sum = 0.0;
  for (long long kp = K; kp >= 1; --kp) {
    if (kp != k) sum += detail::upsilon_term(t, k, eta, static_cast<double>(kp));
    if (-kp != k) sum += detail::upsilon_term(t, k, eta, -static_cast<double>(kp));
  }
  if (k != 0) sum += detail::upsilon_term(t, k, eta, 0.0);
  return sum;
}

struct M3Value {
  double value = 1.0;
  double log_value = 0.0;
  double quad_error = 0.0;     // absolute error estimate of the exponent integral
  double error_bound = 0.0;    // on value, includes the Upsilon truncation bound
};

/// log(M3(t2)/M3(t1)) = -int_{t1}^{t2} Upsilon.
inline M3Value m3_increment(double t1, double t2, int k, double eta, int kmax = kDefaultUpsilonKmax) {
  M3Value r;
  if (t2 == t1) return r;
  double trunc = 0.0;
  auto f = [&](double s) {
    auto u = upsilon(s, k, eta, kmax);
    trunc = std::max(trunc, u.error_bound);
    return u.value;
  };
  auto q = integrate(f, t1, t2, 1e-12, 15);
  if (!(q.error <= 1e-8) || !std::isfinite(q.value)) {
    std::ostringstream os;
    os << "M3 quadrature did not reach 1e-8 absolute tolerance: k=" << k << " eta=" << eta << " t=[" << t1 << ","
       << t2 << "] estimate=" << q.value << " error=" << q.error;
    throw Error(os.str());
  }
  r.log_value = -q.value;
  r.value = std::exp(r.log_value);
  r.quad_error = q.error;
  r.error_bound = r.value * std::expm1(q.error + trunc * std::abs(t2 - t1));
  return r;
}

inline M3Value m3_value(double t, int k, double eta, int kmax = kDefaultUpsilonKmax) {
  if (t < 0.0) throw Error("multiplier time must be >= 0");
  return m3_increment(0.0, t, k, eta, kmax);
}

/// M = e^{delta0 nu^{1/3} t} M1 M2 for k != 0 and M3 for k = 0.
inline double m_combined(double t, const Wavevector& w, const PhysParams& p, int kmax = kDefaultUpsilonKmax) {
  if (t < 0.0) throw Error("multiplier time must be >= 0");
  if (w.k == 0) return m3_value(t, 0, w.eta, kmax).value;
  return std::exp(p.delta0 * std::cbrt(p.nu) * t + m1_log_increment(0.0, t, w) + m2_log_increment(0.0, t, w, p.nu));
}

/// int_R dxi / ((a^2 + xi^2)(b^2 + (c - xi)^2)) = pi/(ab) * (a+b)/((a+b)^2 + c^2).
inline double quadrature_identity_check(double a, double b, double c) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error("quadrature identity requires a, b > 0");
  return M_PI / (a * b) * (a + b) / ((a + b) * (a + b) + c * c);
}

inline QuadratureResult quadrature_identity_numeric(double a, double b, double c) {
  const double inf = std::numeric_limits<double>::infinity();
  return integrate([&](double x) { return 1.0 / ((a * a + x * x) * (b * b + (c - x) * (c - x))); }, -inf, inf, 1e-14, 20);
}

}  // namespace mhdc::mult
