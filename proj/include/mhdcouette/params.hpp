#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mhdc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rational direction sigma = q/p of the background field alpha*(sigma, 0, 1),
/// kept in lowest terms with p >= 1.
///
/// Because sigma is rational, for integer (k, l) the symbol sigma*k + l is
/// either exactly zero or at least 1/p in modulus. All classification is done
/// on the integer numerator q*k + p*l so it never depends on rounding.
class RationalShearAngle {
 public:
  RationalShearAngle() = default;

  RationalShearAngle(std::int64_t q, std::int64_t p) {
    if (p == 0) throw Error("sigma denominator must be nonzero");
    if (p < 0) {
      q = -q;
      p = -p;
    }
    const std::int64_t g = std::gcd(q < 0 ? -q : q, p);
    q_ = q / g;
    p_ = p / g;
  }

  std::int64_t q() const { return q_; }
  std::int64_t p() const { return p_; }
  double value() const { return static_cast<double>(q_) / static_cast<double>(p_); }

  /// p * (sigma*k + l), exact.
  std::int64_t scaled_symbol(std::int64_t k, std::int64_t l) const { return q_ * k + p_ * l; }

  /// sigma*k + l.
  double symbol(std::int64_t k, std::int64_t l) const {
    return static_cast<double>(scaled_symbol(k, l)) / static_cast<double>(p_);
  }

  bool resonant(std::int64_t k, std::int64_t l) const { return scaled_symbol(k, l) == 0; }

  friend bool operator==(const RationalShearAngle&, const RationalShearAngle&) = default;

 private:
  std::int64_t q_ = 1;
  std::int64_t p_ = 1;
};

struct PhysParams {
  double nu = 1e-3;     // viscosity == resistivity
  double alpha = 10.0;  // background field strength
  RationalShearAngle sigma{};
  double delta0 = 1e-3;

  static double default_delta0(double alpha) { return alpha > 0.0 ? 1.0 / (100.0 * alpha) : 0.0; }

  static PhysParams make(double nu, double alpha, RationalShearAngle sigma) {
    PhysParams p{nu, alpha, sigma, default_delta0(alpha)};
    p.validate();
    return p;
  }

  void validate() const {
    if (!(nu >= 0.0) || !std::isfinite(nu)) throw Error("nu must be finite and >= 0");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error("alpha must be finite and >= 0");
    if (!(delta0 >= 0.0)) throw Error("delta0 must be >= 0");
  }

  /// |alpha| > 8p: the field-strength regime in which the stability result applies.
  bool in_theorem_regime() const { return alpha > 8.0 * static_cast<double>(sigma.p()); }
};

}  // namespace mhdc
