#pragma once

#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mhdcouette/multipliers.hpp"
#include "mhdcouette/solver.hpp"

namespace mhdc::diag {

/// Field a norm is taken of. W and F stand for the pair (W^+, W^-) and
/// (F^+, F^-); UB for the pair (U, B). Norms only see per-mode moduli, so the
/// oscillation factors in W^{+-} drop out and |W^{+-}| = |U +- B|.
enum class Quantity { U, B, UB, W, F, Q, G };

/// Symbols whose moduli enter a derivative prefix.
enum class Deriv { one, dX, dY_L, dZ, dXX, dXZ, dZZ, grad_mag };

/// One factor of a prefix: a vector operator listing its components, so
/// (dX, dZ) has |symbol|^2 = k^2 + l^2. A prefix is a product of factors.
/// Squared operator lists such as (1, dZ)^2 are read as the set of distinct
/// products {1, dZ, dZZ}.
using Factor = std::vector<Deriv>;

enum class Weight { none, M, exp_ed };
enum class ModeSel { zero, homogeneous, nonhomogeneous, nonzero };
enum class TimeAgg { Linf, L2, pointwise };
/// Extra per-mode factor used by the pieces of the composite norms.
enum class Extra { none, grad_L, dX_over_grad, sqrt_upsilon };

inline const char* to_string(ModeSel m) {
  switch (m) {
    case ModeSel::zero: return "zero";
    case ModeSel::homogeneous: return "homogeneous";
    case ModeSel::nonhomogeneous: return "nonhomogeneous";
    case ModeSel::nonzero: return "nonzero";
  }
  return "?";
}

struct NormSpec {
  double N = 5.0;  // Sobolev index
  Weight weight = Weight::none;
  std::vector<Factor> derivative_prefix{};
  ModeSel mode_class = ModeSel::nonzero;
  TimeAgg time_aggregate = TimeAgg::Linf;
  double time_power = 0.0;  // multiply by <t>^time_power
  Extra extra = Extra::none;
};

struct FieldSel {
  Quantity q = Quantity::U;
  std::vector<int> comps{0, 1, 2};
};

/// Instantaneous H^N values of one norm along a run.
struct DiagnosticSeries {
  NormSpec spec{};
  FieldSel field{};
  std::vector<double> times{};
  std::vector<double> values{};

  /// Time aggregate over samples with t <= t_end (trapezoid rule for L^2).
  double aggregate(double t_end = std::numeric_limits<double>::infinity()) const {
    double acc = 0.0;
    double last = 0.0;
    for (std::size_t i = 0; i < times.size() && times[i] <= t_end + 1e-12; ++i) {
      last = values[i];
      switch (spec.time_aggregate) {
        case TimeAgg::Linf: acc = std::max(acc, values[i]); break;
        case TimeAgg::L2:
          if (i > 0) acc += 0.5 * (times[i] - times[i - 1]) * (values[i] * values[i] + values[i - 1] * values[i - 1]);
          break;
        case TimeAgg::pointwise: break;
      }
    }
    if (spec.time_aggregate == TimeAgg::L2) return std::sqrt(acc);
    if (spec.time_aggregate == TimeAgg::pointwise) return last;
    return acc;
  }
};

struct Term {
  double coefficient = 1.0;
  NormSpec spec{};
  FieldSel field{};
};

/// Sum of terms bounded by scale * nu^rhs_nu_power * epsilon.
struct Group {
  std::vector<Term> terms{};
  double rhs_nu_power = 0.0;
};

struct Row {
  std::string id;
  std::string inequality;
  ModeSel mode_class = ModeSel::nonzero;
  std::string n_used;
  std::vector<Group> groups{};
};

struct RowResult {
  std::string id;
  std::string inequality;
  double lhs = 0.0;
  double rhs_scale = 0.0;
  double measured_constant = 0.0;
  std::string mode_class;
  std::string n_used;
  bool finite() const { return std::isfinite(lhs) && std::isfinite(measured_constant); }
};

// ---------------------------------------------------------------------------
// Composite norms as lists of terms
// ---------------------------------------------------------------------------

/// |f|_{A^N} = |f|_{L^inf H^N} + nu^{1/2}|grad_L f|_{L^2H^N} + |dX |grad_L|^{-1} f|_{L^2H^N} + nu^{1/6}|f|_{L^2H^N}
inline std::vector<Term> a_norm_terms(double coefficient, NormSpec base, const FieldSel& f, double nu) {
  std::vector<Term> out;
  auto add = [&](double c, TimeAgg agg, Extra e) {
    NormSpec s = base;
    s.time_aggregate = agg;
    s.extra = e;
    out.push_back({coefficient * c, s, f});
  };
  add(1.0, TimeAgg::Linf, Extra::none);
  add(std::sqrt(nu), TimeAgg::L2, Extra::grad_L);
  add(1.0, TimeAgg::L2, Extra::dX_over_grad);
  add(std::pow(nu, 1.0 / 6.0), TimeAgg::L2, Extra::none);
  return out;
}

/// |g|_B = |g|_{L^inf H^N} + nu^{1/2}|grad_L g|_{L^2H^N} + |sqrt(Upsilon) g|_{L^2H^N}
inline std::vector<Term> b_norm_terms(double coefficient, NormSpec base, const FieldSel& f, double nu) {
  std::vector<Term> out;
  auto add = [&](double c, TimeAgg agg, Extra e) {
    NormSpec s = base;
    s.time_aggregate = agg;
    s.extra = e;
    out.push_back({coefficient * c, s, f});
  };
  add(1.0, TimeAgg::Linf, Extra::none);
  add(std::sqrt(nu), TimeAgg::L2, Extra::grad_L);
  add(1.0, TimeAgg::L2, Extra::sqrt_upsilon);
  return out;
}

namespace detail {
inline void append(std::vector<Term>& a, std::vector<Term> b) { a.insert(a.end(), b.begin(), b.end()); }

inline NormSpec spec(double N, ModeSel cls, std::vector<Factor> prefix, Weight w = Weight::M) {
  NormSpec s;
  s.N = N;
  s.weight = w;
  s.derivative_prefix = std::move(prefix);
  s.mode_class = cls;
  return s;
}

inline std::string fmt_n(double N) {
  std::ostringstream os;
  os << N;
  return os.str();
}
}  // namespace detail

/// The fourteen a-priori bounds carried through the stability argument,
/// grouped as non-homogeneous, homogeneous velocity, homogeneous field and
/// zero modes.
inline std::vector<Row> bootstrap_rows(double N, double nu) {
  using detail::append;
  using detail::spec;
  const Factor dXZ{Deriv::dX, Deriv::dZ}, dX{Deriv::dX}, dY{Deriv::dY_L}, grad{Deriv::grad_mag};
  const Factor dXZ2{Deriv::dXX, Deriv::dXZ, Deriv::dZZ}, oneZ2{Deriv::one, Deriv::dZ, Deriv::dZZ};
  const auto NH = ModeSel::nonhomogeneous, H = ModeSel::homogeneous, Z = ModeSel::zero;
  const double n13 = std::cbrt(nu), n12 = std::sqrt(nu), n16 = std::pow(nu, 1.0 / 6.0), n23 = n13 * n13;
  const std::string sN = detail::fmt_n(N), sN1 = detail::fmt_n(N - 1), sN2 = detail::fmt_n(N - 2);
  auto a = [&](double c, double n, ModeSel cls, std::vector<Factor> pre, FieldSel f, double tp = 0.0) {
    NormSpec s = spec(n, cls, std::move(pre));
    s.time_power = tp;
    return a_norm_terms(c, s, f, nu);
  };
  auto b = [&](double c, std::vector<Factor> pre, FieldSel f) { return b_norm_terms(c, spec(N, Z, std::move(pre)), f, nu); };
  auto one = [](std::vector<Term> t, double p) { return std::vector<Group>{Group{std::move(t), p}}; };
  auto sum = [](std::vector<Term> x, std::vector<Term> y) {
    x.insert(x.end(), y.begin(), y.end());
    return x;
  };

  std::vector<Row> rows;
  rows.push_back({"nh_sym_w2", "|(dX,dZ)|grad_L| M W2_NH|_A^N <= 8 eps", NH, sN,
                  one(a(1, N, NH, {dXZ, grad}, {Quantity::W, {1}}), 0.0)});
  rows.push_back({"nh_f2", "|M F2_NH|_A^N <= 8 C0 nu^-1/3 eps", NH, sN, one(a(1, N, NH, {}, {Quantity::F, {1}}), -1.0 / 3)});
  rows.push_back({"nh_w3", "|(dX,dZ)^2 M W3_NH|_A^N <= 8 C0 eps", NH, sN,
                  one(a(1, N, NH, {dXZ2}, {Quantity::W, {2}}), 0.0)});
  rows.push_back({"nh_f3", "|M F3_NH|_A^N <= 8 C0^2 nu^-2/3 eps", NH, sN, one(a(1, N, NH, {}, {Quantity::F, {2}}), -2.0 / 3)});

  rows.push_back({"h_q2", "|M Q2_H|_A^N <= 8 nu^-1/3 eps", H, sN, one(a(1, N, H, {}, {Quantity::Q, {1}}), -1.0 / 3)});
  rows.push_back({"h_q2_low", "|<t>^-1 M Q2_H|_A^(N-1) <= 8 eps", H, sN1,
                  one(a(1, N - 1, H, {}, {Quantity::Q, {1}}, -1.0), 0.0)});
  rows.push_back({"h_u3", "nu^1/3 |dXX M U3_H|_A^N + |dXX M U3_H|_A^(N-2) <= 8 C0 eps", H, sN + "/" + sN2,
                  one(sum(a(n13, N, H, {dX, dX}, {Quantity::U, {2}}), a(1, N - 2, H, {dX, dX}, {Quantity::U, {2}})), 0.0)});
  rows.push_back({"h_q3", "nu^1/3 |M Q3_H|_A^N + |M Q3_H|_A^(N-2) <= 8 C0^2 nu^-2/3 eps", H, sN + "/" + sN2,
                  one(sum(a(n13, N, H, {}, {Quantity::Q, {2}}), a(1, N - 2, H, {}, {Quantity::Q, {2}})), -2.0 / 3)});

  rows.push_back({"h_b2", "|dX M B2_H|_A^N + nu^1/6 |dXX M B2_H|_A^N <= 8 eps", H, sN,
                  one(sum(a(1, N, H, {dX}, {Quantity::B, {1}}), a(n16, N, H, {dX, dX}, {Quantity::B, {1}})), 0.0)});
  {
    auto t = a(n13, N, H, {dY}, {Quantity::B, {1}});
    append(t, a(n12, N, H, {dX, dY}, {Quantity::B, {1}}));
    append(t, a(n23, N, H, {}, {Quantity::G, {1}}));
    rows.push_back({"h_g2", "nu^1/3 |dY_L M B2_H|_A^N + nu^1/2 |dXY_L M B2_H|_A^N + nu^2/3 |M G2_H|_A^N <= 8 C0 eps", H,
                    sN, one(std::move(t), 0.0)});
  }
  rows.push_back({"h_b3", "nu^1/3 |dXX M B3_H|_A^N + |dX M B3_H|_A^N <= 8 C0 eps", H, sN,
                  one(sum(a(n13, N, H, {dX, dX}, {Quantity::B, {2}}), a(1, N, H, {dX}, {Quantity::B, {2}})), 0.0)});
  rows.push_back({"h_g3", "nu^1/3 |M G3_H|_A^N + |M G3_H|_A^(N-2) <= 8 C0^2 nu^-2/3 eps", H, sN + "/" + sN2,
                  one(sum(a(n13, N, H, {}, {Quantity::G, {2}}), a(1, N - 2, H, {}, {Quantity::G, {2}})), -2.0 / 3)});

  rows.push_back({"z_f0", "|M F1_0|_B <= 8 nu^-2/3 eps, |M F2_0|_B <= 8 nu^-1/3 eps, |M F3_0|_B <= 8 nu^-2/3 eps", Z, sN,
                  {Group{b(1, {}, {Quantity::F, {0}}), -2.0 / 3}, Group{b(1, {}, {Quantity::F, {1}}), -1.0 / 3},
                   Group{b(1, {}, {Quantity::F, {2}}), -2.0 / 3}}});
  rows.push_back({"z_w0", "|(1,dZ)^2 M W_0|_B <= 8 eps", Z, sN, one(b(1, {oneZ2}, {Quantity::W, {0, 1, 2}}), 0.0)});
  return rows;
}

/// The six bounds of the main stability statement. Sup-in-time parts carry
/// the weight e^{delta0 nu^{1/3} t}; square-integrated parts are unweighted.
inline std::vector<Row> theorem_rows(double N, double nu) {
  const Factor dXZ{Deriv::dX, Deriv::dZ}, dX{Deriv::dX}, gradL{Deriv::dX, Deriv::dY_L, Deriv::dZ};
  const Factor dXZ2{Deriv::dXX, Deriv::dXZ, Deriv::dZZ}, oneZ2{Deriv::one, Deriv::dZ, Deriv::dZZ};
  const auto NZ = ModeSel::nonzero;
  const double n16 = std::pow(nu, 1.0 / 6.0);
  const std::string sN = detail::fmt_n(N), sN2 = detail::fmt_n(N - 2);
  auto term = [&](double c, double n, ModeSel cls, std::vector<Factor> pre, FieldSel f, TimeAgg agg) {
    NormSpec s = detail::spec(n, cls, std::move(pre), agg == TimeAgg::Linf ? Weight::exp_ed : Weight::none);
    s.time_aggregate = agg;
    return Term{c, s, f};
  };
  auto pair = [&](double n, std::vector<Factor> sup_pre, std::vector<Factor> l2_pre, FieldSel f) {
    return std::vector<Term>{term(1, n, NZ, std::move(sup_pre), f, TimeAgg::Linf),
                             term(n16, n, NZ, std::move(l2_pre), f, TimeAgg::L2)};
  };
  auto one = [](std::vector<Term> t, double p) { return std::vector<Group>{Group{std::move(t), p}}; };

  std::vector<Row> rows;
  rows.push_back({"thm_u1", "|e (dX,dZ)dX U1_ne|_LinfH^(N-2) + nu^1/6 |(dX,dZ)dX U1_ne|_L2H^(N-2) <~ eps", NZ, sN2,
                  one(pair(N - 2, {dXZ, dX}, {dXZ, dX}, {Quantity::U, {0}}), 0.0)});
  {
    auto t = pair(N - 2, {dXZ, gradL}, {dXZ, gradL}, {Quantity::U, {1}});
    t.push_back(term(1, N - 2, NZ, {}, {Quantity::U, {1}}, TimeAgg::L2));
    rows.push_back({"thm_u2",
                    "|e (dX,dZ)grad_L U2_ne|_LinfH^(N-2) + |U2_ne|_L2H^(N-2) + nu^1/6 |(dX,dZ)grad_L U2_ne|_L2H^(N-2) <~ eps",
                    NZ, sN2, one(std::move(t), 0.0)});
  }
  rows.push_back({"thm_u3", "|e (dX,dZ)^2 U3_ne|_LinfH^(N-2) + nu^1/6 |(dX,dZ)^2 U3_ne|_L2H^(N-2) <~ eps", NZ, sN2,
                  one(pair(N - 2, {dXZ2}, {dXZ2}, {Quantity::U, {2}}), 0.0)});
  rows.push_back({"thm_b1", "|e dX B1_ne|_LinfH^N + nu^1/6 |(dX,dZ)dX B1_ne|_L2H^N <~ nu^-1/3 eps", NZ, sN,
                  one(pair(N, {dX}, {dXZ, dX}, {Quantity::B, {0}}), -1.0 / 3)});
  rows.push_back({"thm_b23", "|e (dX,dZ)(B2,B3)_ne|_LinfH^N + nu^1/6 |(dX,dZ)(B2,B3)_ne|_L2H^N <~ eps", NZ, sN,
                  one(pair(N, {dXZ}, {dXZ}, {Quantity::B, {1, 2}}), 0.0)});
  rows.push_back({"thm_zero", "|(1,dZ)^2 (U_0,B_0)|_LinfH^N <~ eps", ModeSel::zero, sN,
                  one({term(1, N, ModeSel::zero, {oneZ2}, {Quantity::UB, {0, 1, 2}}, TimeAgg::Linf)}, 0.0)});
  // the zero-mode row has no decay weight
  rows.back().groups[0].terms[0].spec.weight = Weight::none;
  return rows;
}

// ---------------------------------------------------------------------------
// Recorder
// ---------------------------------------------------------------------------

/// Evaluates every term of a set of rows at each sample of a run and keeps
/// only the instantaneous values, so time norms never need stored states.
class PanelRecorder {
 public:
  PanelRecorder(const GridSpec& grid, const PhysParams& params, std::vector<Row> rows, int upsilon_kmax = 256)
      : grid_(grid), params_(params), rows_(std::move(rows)), kmax_(upsilon_kmax) {
    for (const auto& r : rows_)
      for (const auto& g : r.groups)
        for (const auto& t : g.terms) series_.push_back(DiagnosticSeries{t.spec, t.field, {}, {}});
  }

  const std::vector<Row>& rows() const { return rows_; }
  const std::vector<DiagnosticSeries>& series() const { return series_; }
  const std::vector<double>& times() const { return times_; }

  void record(const MhdState& s) {
    if (!(s.grid() == grid_)) throw Error("recorder grid mismatch");
    if (!times_.empty() && s.t <= times_.back()) throw Error("recorder samples must be increasing in time");
    advance_m3(s.t);
    build_mode_table(s);
    for (auto& ser : series_) {
      ser.times.push_back(s.t);
      ser.values.push_back(instantaneous(ser.spec, ser.field, s));
    }
    times_.push_back(s.t);
  }

  std::vector<RowResult> evaluate(double epsilon, double t_end = std::numeric_limits<double>::infinity()) const {
    std::vector<RowResult> out;
    std::size_t idx = 0;
    for (const auto& r : rows_) {
      RowResult res{r.id, r.inequality, 0.0, 0.0, -1.0, to_string(r.mode_class), r.n_used};
      for (const auto& g : r.groups) {
        double lhs = 0.0;
        for (const auto& t : g.terms) lhs += t.coefficient * series_[idx++].aggregate(t_end);
        const double rhs = std::pow(params_.nu, g.rhs_nu_power) * epsilon;
        const double c = rhs > 0.0 ? lhs / rhs : std::numeric_limits<double>::quiet_NaN();
        if (!(c <= res.measured_constant)) {
          res.lhs = lhs;
          res.rhs_scale = rhs;
          res.measured_constant = c;
        }
      }
      out.push_back(res);
    }
    return out;
  }

  /// Instantaneous H^N value of one norm on one state.
  double instantaneous(const NormSpec& spec, const FieldSel& field, const MhdState& s) const {
    const double tb = std::pow(1.0 + s.t * s.t, 0.5 * spec.time_power);
    const double ed = std::exp(params_.delta0 * std::cbrt(params_.nu) * s.t);
    double acc = 0.0;
    for (const auto& md : modes_) {
      if (!selected(md, spec.mode_class)) continue;
      double f2 = 0.0;
      for (int c : field.comps) {
        const cplx u = s.U[c].coeffs()[md.idx], b = s.B[c].coeffs()[md.idx];
        switch (field.q) {
          case Quantity::U: f2 += std::norm(u); break;
          case Quantity::B: f2 += std::norm(b); break;
          case Quantity::UB: f2 += std::norm(u) + std::norm(b); break;
          case Quantity::W: f2 += std::norm(u + b) + std::norm(u - b); break;
          case Quantity::F: f2 += (std::norm(u + b) + std::norm(u - b)) * md.p * md.p; break;
          case Quantity::Q: f2 += std::norm(u) * md.p * md.p; break;
          case Quantity::G: f2 += std::norm(b) * md.p * md.p; break;
        }
      }
      if (f2 == 0.0) continue;
      double w = std::pow(md.bracket2, spec.N) * f2;
      for (const auto& factor : spec.derivative_prefix) {
        double sym = 0.0;
        for (Deriv d : factor) sym += symbol2(md, d);
        w *= sym;
      }
      switch (spec.extra) {
        case Extra::none: break;
        case Extra::grad_L: w *= md.p; break;
        case Extra::dX_over_grad: w *= md.p > 0.0 ? md.k * md.k / md.p : 0.0; break;
        case Extra::sqrt_upsilon: w *= md.upsilon; break;
      }
      switch (spec.weight) {
        case Weight::none: break;
        case Weight::M: w *= md.M * md.M; break;
        case Weight::exp_ed: w *= ed * ed; break;
      }
      acc += w;
    }
    return tb * std::sqrt(acc / grid_.m);
  }

  /// Current log M3 per frame eta (zero X-modes), for tests.
  double log_m3(double eta) const {
    const auto it = log_m3_.find(key(eta));
    return it == log_m3_.end() ? 0.0 : it->second;
  }

 private:
  struct ModeData {
    std::size_t idx;
    double k, eta, l, p, bracket2, M, upsilon;
    ModeClass cls;
  };

  static long long key(double eta) { return std::llround(eta * 1e9); }

  static bool selected(const ModeData& md, ModeSel sel) {
    switch (sel) {
      case ModeSel::zero: return md.cls == ModeClass::zero;
      case ModeSel::homogeneous: return md.cls == ModeClass::homogeneous;
      case ModeSel::nonhomogeneous: return md.cls == ModeClass::nonhomogeneous;
      case ModeSel::nonzero: return md.cls != ModeClass::zero;
    }
    return false;
  }

  static double symbol2(const ModeData& md, Deriv d) {
    switch (d) {
      case Deriv::one: return 1.0;
      case Deriv::dX: return md.k * md.k;
      case Deriv::dY_L: {
        const double e = md.p - md.k * md.k - md.l * md.l;
        return e;
      }
      case Deriv::dZ: return md.l * md.l;
      case Deriv::dXX: return md.k * md.k * md.k * md.k;
      case Deriv::dXZ: return md.k * md.k * md.l * md.l;
      case Deriv::dZZ: return md.l * md.l * md.l * md.l;
      case Deriv::grad_mag: return md.p;
    }
    return 0.0;
  }

  /// Carries log M3 for every zero-X frame eta present in the band from the
  /// previous sample time to t.
  void advance_m3(double t) {
    const double t0 = times_.empty() ? 0.0 : times_.back();
    const int jm = grid_.jmax();
    for (int j = -jm; j <= jm; ++j) {
      // zero X-modes never move under remap, so their frame eta is j/m
      const double eta = static_cast<double>(j) / grid_.m;
      double& lm = log_m3_[key(eta)];
      if (t > t0) lm += mult::m3_increment(t0, t, 0, eta, kmax_).log_value;
    }
  }

  void build_mode_table(const MhdState& s) {
    modes_.clear();
    const double ed = params_.delta0 * std::cbrt(params_.nu) * s.t;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      const ModeIndex q = grid_.mode(i);
      if (!grid_.retained(q)) continue;
      ModeData md;
      md.idx = i;
      md.k = q.k;
      md.l = q.l;
      md.eta = s.U[0].frame_eta(q);
      const double e = md.eta - md.k * s.t;
      md.p = md.k * md.k + e * e + md.l * md.l;
      md.bracket2 = 1.0 + md.k * md.k + md.eta * md.eta + md.l * md.l;
      md.cls = classify(q, params_.sigma);
      if (q.k == 0) {
        md.M = std::exp(log_m3(md.eta));
        md.upsilon = mult::upsilon(s.t, 0, md.eta, kmax_).value;
      } else {
        const mult::Wavevector w{q.k, md.eta, q.l};
        md.M = std::exp(ed) * mult::m1_value(s.t, w) * (params_.nu > 0.0 ? mult::m2_value(s.t, w, params_.nu) : 1.0);
        md.upsilon = 0.0;
      }
      modes_.push_back(md);
    }
  }

  GridSpec grid_;
  PhysParams params_;
  std::vector<Row> rows_;
  int kmax_;
  std::vector<DiagnosticSeries> series_;
  std::vector<double> times_;
  std::map<long long, double> log_m3_;
  std::vector<ModeData> modes_;
};

// ---------------------------------------------------------------------------
// Convenience entry points
// ---------------------------------------------------------------------------

namespace detail {
inline double composite(const std::vector<MhdState>& samples, const std::vector<Term>& terms) {
  if (samples.empty()) throw Error("no samples");
  Row r{"norm", "", terms.front().spec.mode_class, "", {Group{terms, 0.0}}};
  PanelRecorder rec(samples.front().grid(), samples.front().params, {r});
  for (const auto& s : samples) rec.record(s);
  return rec.evaluate(1.0).front().lhs;
}
}  // namespace detail

/// A^N norm over the time span of the samples.
inline double an_norm(const std::vector<MhdState>& samples, const NormSpec& base, const FieldSel& f) {
  if (samples.empty()) throw Error("no samples");
  return detail::composite(samples, a_norm_terms(1.0, base, f, samples.front().params.nu));
}

/// B norm (zero modes) over the time span of the samples.
inline double b_norm(const std::vector<MhdState>& samples, const NormSpec& base, const FieldSel& f) {
  if (samples.empty()) throw Error("no samples");
  if (base.mode_class != ModeSel::zero) throw Error("the B norm is defined on zero modes only");
  return detail::composite(samples, b_norm_terms(1.0, base, f, samples.front().params.nu));
}

struct Panels {
  PanelRecorder bootstrap;
  PanelRecorder theorem;
};

inline Panels make_panels(const SimConfig& cfg) {
  return {PanelRecorder(cfg.grid, cfg.params, bootstrap_rows(cfg.sobolev_N, cfg.params.nu)),
          PanelRecorder(cfg.grid, cfg.params, theorem_rows(cfg.sobolev_N, cfg.params.nu))};
}

struct SimulationResult {
  Trajectory trajectory;
  Panels panels;
};

/// Runs the solver with both panels recorded at every diagnostic sample.
inline SimulationResult simulate(const SimConfig& cfg) {
  Panels p = make_panels(cfg);
  auto tr = run(cfg, [&](const MhdState& s) {
    p.bootstrap.record(s);
    p.theorem.record(s);
  });
  return {std::move(tr), std::move(p)};
}

/// One bootstrap evaluation per row, constants normalized with C0 = 1.
inline std::vector<RowResult> bootstrap_panel(const Panels& p, double epsilon,
                                              double t_end = std::numeric_limits<double>::infinity()) {
  return p.bootstrap.evaluate(epsilon, t_end);
}

inline std::vector<RowResult> theorem_bound_check(const Panels& p, double epsilon,
                                                  double t_end = std::numeric_limits<double>::infinity()) {
  return p.theorem.evaluate(epsilon, t_end);
}

struct DriftReport {
  std::string id;
  double before = 0.0;
  double after = 0.0;
  double ratio = 0.0;  // max(after/before, before/after)
  bool flagged = false;
};

/// Compares measured constants between two evaluations (a longer horizon or
/// a finer resolution). Growth beyond the factor flags a possible blow-up.
inline std::vector<DriftReport> compare_constants(const std::vector<RowResult>& a, const std::vector<RowResult>& b,
                                                  double factor = 2.0) {
  if (a.size() != b.size()) throw Error("panels differ in size");
  std::vector<DriftReport> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    DriftReport d{a[i].id, a[i].measured_constant, b[i].measured_constant, 0.0, false};
    if (d.before > 0.0 && d.after > 0.0)
      d.ratio = std::max(d.after / d.before, d.before / d.after);
    else
      d.ratio = (d.before == d.after) ? 1.0 : std::numeric_limits<double>::infinity();
    d.flagged = !(d.ratio < factor) || !a[i].finite() || !b[i].finite();
    out.push_back(d);
  }
  return out;
}

inline void write_csv(std::ostream& os, const std::vector<RowResult>& rows) {
  os << "bound_id,paper_eq,lhs,rhs_scale,measured_constant,class,N_used\n";
  os << std::setprecision(10);
  for (const auto& r : rows)
    os << r.id << ",\"" << r.inequality << "\"," << r.lhs << ',' << r.rhs_scale << ',' << r.measured_constant << ','
       << r.mode_class << ',' << r.n_used << '\n';
}

}  // namespace mhdc::diag
