// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mhdcouette/diagnostics.hpp"

using namespace mhdc;

namespace {

// Tolerances
constexpr double kQuadTol = 1e-10;          // closed form vs quadrature, absolute
constexpr double kUpsilonTol = 1e-6;        // Upsilon(0,0,0)
constexpr double kHomogeneousTol = 1e-10;   // closed form vs RK, relative
constexpr double kG2SlopeLo = -0.75, kG2SlopeHi = -0.60;
constexpr double kQ2SlopeTol = 0.05;
constexpr double kDampingTol = 0.05;        // t^{-2} law
constexpr double kLiftUpFactor = 50.0;
constexpr double kUniformDrift = 2.0;       // envelope maxima across nu
constexpr double kFieldFactor = 5.0;
constexpr double kOrderCenter = 16.0, kOrderTol = 3.0;
constexpr double kDivTol = 1e-11;
constexpr double kLinearTol = 1e-8;
constexpr double kEnergyTol = 1e-6;
constexpr double kDriftFactor = 2.0;
constexpr double kB1Factor = 2.0;
constexpr double kIdentityTol = 1e-9;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1 ----------------------------------------------------------------------
Outcome multiplier_bounds() {
  const double m1_lo = std::exp(-std::sqrt(2.0) * M_PI), m2_lo = std::exp(-M_PI);
  double m1_min = 1.0, m2_min = 1.0, m1_max = 0.0, m2_max = 0.0, slack = 1e300;
  long long samples = 0;
  for (int k = -16; k <= 16; ++k) {
    if (k == 0) continue;
    // start at one end of the range so eta - k t sweeps all of [-1000, 1000]
    const double eta = k > 0 ? 1000.0 : -1000.0;
    for (int i = -10000; i <= 10000; ++i) {
      const double s = 0.1 * i, t = (eta - s) / k;
      for (int l = -16; l <= 16; ++l) {
        const double v = mult::m1_value(t, {k, eta, l});
        m1_min = std::min(m1_min, v);
        m1_max = std::max(m1_max, v);
      }
      for (double nu : {1.0, 1e-2, 1e-4}) {
        const double v = mult::m2_value(t, {k, eta, 0}, nu);
        m2_min = std::min(m2_min, v);
        m2_max = std::max(m2_max, v);
        const auto c = mult::check_enhanced_dissipation_inequality({k, s, 0}, 0.0, nu);
        slack = std::min(slack, c.rhs - c.lhs);
        ++samples;
      }
    }
  }
  const bool ok = m1_min >= m1_lo && m1_max <= 1.0 && m2_min >= m2_lo && m2_max <= 1.0 && slack >= 0.0;
  return {ok, fmt("min M1 %.7f (bound %.7f), min M2 %.7f (bound %.7f), min slack %.3g over %lld samples", m1_min,
                  m1_lo, m2_min, m2_lo, slack, samples)};
}

// 2 ----------------------------------------------------------------------
Outcome closed_forms_vs_quadrature() {
  std::mt19937_64 rng(20);
  std::uniform_int_distribution<int> kk(-16, 16);
  std::uniform_real_distribution<double> e(-50.0, 50.0), tt(0.0, 100.0), lnu(-6.0, 0.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const mult::Wavevector w{kk(rng), e(rng), kk(rng)};
    const double t = tt(rng), nu = std::pow(10.0, lnu(rng));
    worst = std::max(worst, std::abs(mult::m1_value_quadrature(t, w).value - mult::m1_value(t, w)));
    worst = std::max(worst, std::abs(mult::m2_value_quadrature(t, w, nu).value - mult::m2_value(t, w, nu)));
  }
  const double exact = 2.0 * (2.0 - 2.0 * std::log(2.0));
  const auto u = mult::upsilon(0.0, 0, 0.0);
  const double uerr = std::abs(u.value - exact);
  return {worst <= kQuadTol && uerr <= kUpsilonTol,
          fmt("max |closed - quadrature| %.3g; Upsilon(0,0,0) = %.9f, error %.3g, tail bound %.3g", worst, u.value,
              uerr, u.error_bound)};
}

// 3 ----------------------------------------------------------------------
Outcome homogeneous_oracles() {
  std::mt19937_64 rng(30);
  std::uniform_int_distribution<int> kk(1, 8);
  std::uniform_real_distribution<double> e(-10.0, 10.0), lnu(-6.0, -1.0), u(0.0, 1.0);
  linear::IntegratorOptions o;
  o.abs_tol = 1e-300;
  o.rel_tol = 1e-14;
  o.samples = 3;
  o.max_refinements = 0;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int k = kk(rng) * (u(rng) < 0.5 ? -1 : 1);
    const linear::Wavevector w{k, e(rng), -k};
    const PhysParams p{std::pow(10.0, lnu(rng)), 10.0, {1, 1}, 0.0};
    double t = 40.0 * u(rng) + 0.1;
    while (p.nu * linear::lap_integral(w, 0.0, t) > 40.0) t *= 0.5;
    const auto sol = linear::integrate_system({linear::SystemKind::homogeneous_QG, w, p, {1.0, 1.0}}, t, o);
    const auto& y = sol.amplitudes.back();
    worst = std::max(worst, std::abs(y[0].real() / linear::homogeneous_q2_exact(w, p, t) - 1.0));
    worst = std::max(worst, std::abs(y[1].real() / linear::homogeneous_g2_exact(w, p, t) - 1.0));
  }
  return {worst <= kHomogeneousTol, fmt("max relative deviation %.3g over 1000 samples", worst)};
}

// 4 ----------------------------------------------------------------------
Outcome g2_scaling() {
  const std::vector<double> nus{1e-2, 1e-3, 1e-4, 1e-5};
  const auto g = linear::fit_g2_scaling(1, -1, {1, 1}, nus);
  const auto q = linear::fit_homogeneous_scaling(1, -1, {1, 1}, nus, linear::HomogeneousQuantity::Q2);
  const bool ok = g.slope >= kG2SlopeLo && g.slope <= kG2SlopeHi && std::abs(q.slope) <= kQ2SlopeTol;
  return {ok, fmt("G2 slope %.4f (R^2 %.4f), Q2 slope %.4f", g.slope, g.r_squared, q.slope)};
}

// 5 ----------------------------------------------------------------------
Outcome inviscid_damping() {
  double worst = 0.0;
  for (const linear::Wavevector w : {linear::Wavevector{1, 0.0, -1}, linear::Wavevector{2, 1.5, -2},
                                     linear::Wavevector{-3, 2.0, 3}}) {
    const PhysParams p{0.0, 10.0, {1, 1}, 0.0};
    for (double t = 20.0; t <= 2000.0; t *= 1.25) {
      const auto c = linear::inviscid_damping_curve(w, p, {t, 2.0 * t});
      worst = std::max(worst, std::abs(c[1] / c[0] / 0.25 - 1.0));
    }
  }
  return {worst <= kDampingTol, fmt("max relative deviation from t^-2 for t >= 20: %.4f", worst)};
}

// 6 ----------------------------------------------------------------------
Outcome lift_up() {
  const linear::ModeState u0{0.0, 1.0, 0.0, 0.0, 0.0, 0.0};
  const auto free = linear::zero_mode_liftup({0, 0.0, 1}, {1e-3, 0.0, {1, 1}, 0.0}, u0, 3000.0);
  const auto held = linear::zero_mode_liftup({0, 0.0, 1}, {1e-3, 10.0, {1, 1}, 0.0}, u0, 3000.0);
  const double r = free.peak / held.peak;
  return {r >= kLiftUpFactor,
          fmt("alpha=0 peak %.2f at t=%.0f, alpha=10 peak %.4f, factor %.1f", free.peak, free.t_peak, held.peak, r)};
}

// 7 ----------------------------------------------------------------------
Outcome oscillatory_stabilization() {
  double overall = 0.0;
  std::vector<double> per_nu;
  for (double nu : {1e-2, 1e-3, 1e-4}) {
    const PhysParams p{nu, 10.0, {1, 1}, 0.0};
    const double T = 10.0 / std::cbrt(nu);
    double m = 0.0;
    for (int k = 1; k <= 5; ++k)
      for (int l = 0; l <= 3; ++l)
        for (double eta : {-4.0, -1.0, 0.0, 1.0, 4.0}) {
          const auto env = linear::worst_case_envelope(linear::SystemKind::nonhomogeneous_sym_v2, {k, eta, l}, p, T);
          m = std::max(m, env.peak);
        }
    per_nu.push_back(m);
    overall = std::max(overall, m);
  }
  const double spread = *std::max_element(per_nu.begin(), per_nu.end()) /
                        *std::min_element(per_nu.begin(), per_nu.end());
  const double nu = 1e-3, T = 10.0 / std::cbrt(nu);
  const linear::Wavevector w{1, 0.0, 1};
  const auto field = linear::worst_case_envelope(linear::SystemKind::nonhomogeneous_sym_v2, w, {nu, 10.0, {1, 1}, 0.0}, T);
  const auto none = linear::worst_case_envelope(linear::SystemKind::nonhomogeneous_sym_v2, w, {nu, 0.0, {1, 1}, 0.0}, T);
  const double factor = none.peak / field.peak;
  const bool ok = std::isfinite(overall) && spread < kUniformDrift && factor >= kFieldFactor;
  return {ok, fmt("alpha=10 envelope constant %.4f over 100 modes (per-nu maxima %.4f %.4f %.4f); comparison "
                  "alpha=0 %.4f vs alpha=10 %.4f, factor %.3f (need %.1f)",
                  overall, per_nu[0], per_nu[1], per_nu[2], none.peak, field.peak, factor, kFieldFactor)};
}

// 8 ----------------------------------------------------------------------
SimConfig production(double nu, double eps, std::uint64_t seed) {
  SimConfig c;
  c.params = PhysParams::make(nu, 10.0, {1, 1});
  c.epsilon = eps;
  c.seed = seed;
  c.sobolev_N = -2.0;  // normalize in L^2
  c.T_final = 1.0;
  c.diagnostics_every = 1.0;
  return c;
}

MhdState final_state(SimConfig c, double& div) {
  c.store_every = 1;
  c.diagnostics_every = c.T_final;
  auto tr = run(c);
  div = std::max(div, tr.max_div_defect);
  return tr.states.back();
}

double max_diff(const MhdState& a, const MhdState& b) {
  double d = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < a.U[c].size(); ++i) {
      d = std::max(d, std::abs(a.U[c].coeffs()[i] - b.U[c].coeffs()[i]));
      d = std::max(d, std::abs(a.B[c].coeffs()[i] - b.B[c].coeffs()[i]));
    }
  return d;
}

Outcome solver_verification() {
  double div = 0.0;
  // time order
  auto c = production(1e-2, 0.2, 5);
  c.ic_profile = IcProfile::gaussian;
  c.ic_width = 1.0;
  c.dt = 1.0 / 640.0;
  const auto ref = final_state(c, div);
  std::vector<double> err;
  for (double dt : {0.025, 0.0125, 0.00625}) {
    c.dt = dt;
    err.push_back(max_diff(final_state(c, div), ref));
  }
  const double r1 = err[0] / err[1], r2 = err[1] / err[2];
  const bool order_ok = std::abs(r1 - kOrderCenter) <= kOrderTol && std::abs(r2 - kOrderCenter) <= kOrderTol;

  // linear regime against the per-mode solutions
  double lin = 0.0;
  {
    auto h = production(1e-2, 1e-3, 1);
    h.ic_kind = IcKind::single_mode;
    h.nonlinear = false;
    h.dt = 1.0 / 64.0;
    h.T_final = 20.0;
    h.ic_mode = {1, 2, -1};
    const MhdState s0 = initial_state(h);
    const MhdState sT = final_state(h, div);
    const ModeIndex q = h.ic_mode;
    const linear::Wavevector w{q.k, s0.U[0].frame_eta(q), q.l};
    const double p0 = s0.U[0].lap_symbol(q), pT = linear::lap_symbol(w, h.T_final);
    const double Q = pT * std::abs(sT.U[1].at(q)) / (p0 * std::abs(s0.U[1].at(q)));
    const double G = pT * std::abs(sT.B[1].at(q)) / (p0 * std::abs(s0.B[1].at(q)));
    lin = std::max(lin, std::abs(Q / linear::homogeneous_q2_exact(w, h.params, h.T_final) - 1.0));
    lin = std::max(lin, std::abs(G / linear::homogeneous_g2_exact(w, h.params, h.T_final) - 1.0));

    h.ic_mode = {0, 0, 1};
    h.dt = 1.0 / 256.0;  // resolves the field oscillation
    h.T_final = 5.0;
    const MhdState z0 = initial_state(h);
    const MhdState zT = final_state(h, div);
    const ModeIndex z = h.ic_mode;
    linear::ModeState y0(6);
    for (int i = 0; i < 3; ++i) {
      y0[i] = z0.U[i].at(z);
      y0[3 + i] = z0.B[i].at(z);
    }
    linear::IntegratorOptions o;
    o.abs_tol = 1e-300;
    o.rel_tol = 1e-13;
    o.samples = 3;
    o.max_refinements = 0;
    const auto sol = linear::zero_mode_liftup({0, 0.0, 1}, h.params, y0, h.T_final, o);
    double scale = 0.0, d = 0.0;
    for (int i = 0; i < 3; ++i) {
      scale = std::max({scale, std::abs(sol.amplitudes.back()[i]), std::abs(sol.amplitudes.back()[3 + i])});
      d = std::max({d, std::abs(zT.U[i].at(z) - sol.amplitudes.back()[i]),
                    std::abs(zT.B[i].at(z) - sol.amplitudes.back()[3 + i])});
    }
    lin = std::max(lin, d / scale);
  }

  // inviscid energy balance over unit time
  auto e = production(0.0, 0.5, 9);
  e.dt = 0.0025;
  const auto tr = run(e);
  div = std::max(div, tr.max_div_defect);
  const double e0 = tr.energy.front().energy;
  double total = 0.0;
  for (double r : energy_balance_residual(tr)) total += r;
  const double rel = std::abs(total) / e0;

  const bool ok = order_ok && div <= kDivTol && lin <= kLinearTol && rel < kEnergyTol;
  return {ok, fmt("error ratios %.2f %.2f; max div_L %.2g; linear-mode deviation %.2g; energy residual %.2g E(0)", r1,
                  r2, div, lin, rel)};
}

// 9 ----------------------------------------------------------------------
struct StabilityRun {
  std::vector<diag::RowResult> boot_T, boot_2T, thm_T, thm_2T;
};

StabilityRun stability_run(double nu, double horizon) {
  SimConfig c;
  c.params = PhysParams::make(nu, 10.0, {1, 1});
  c.epsilon = 0.05 * nu;
  const double T = 4.0 / std::cbrt(nu), end = horizon * T;
  const int n = static_cast<int>(std::ceil(end / 0.025));
  c.dt = end / n;
  c.T_final = end;
  c.diagnostics_every = 4.0 * c.dt;
  const auto r = diag::simulate(c);
  StabilityRun s;
  const double tT = T + 1e-9;
  s.boot_T = diag::bootstrap_panel(r.panels, c.epsilon, tT);
  s.thm_T = diag::theorem_bound_check(r.panels, c.epsilon, tT);
  s.boot_2T = diag::bootstrap_panel(r.panels, c.epsilon);
  s.thm_2T = diag::theorem_bound_check(r.panels, c.epsilon);
  return s;
}

Outcome nonlinear_stability() {
  const auto a = stability_run(2e-2, 2.0);
  const auto b = stability_run(2e-3, 1.0);
  bool finite = true;
  for (const auto* rows : {&a.boot_T, &a.boot_2T, &a.thm_T, &a.thm_2T, &b.boot_T, &b.thm_T})
    for (const auto& r : *rows) finite = finite && r.finite();
  double drift = 0.0;
  std::string worst;
  for (const auto& d : diag::compare_constants(a.boot_T, a.boot_2T, kDriftFactor))
    if (d.ratio > drift) {
      drift = d.ratio;
      worst = d.id;
    }
  auto b1 = [](const std::vector<diag::RowResult>& rows) {
    for (const auto& r : rows)
      if (r.id == "thm_b1") return r.measured_constant;
    return std::nan("");
  };
  const double b1a = b1(a.thm_T), b1b = b1(b.thm_T);
  const double ratio = std::max(b1a / b1b, b1b / b1a);
  const bool ok = finite && drift < kDriftFactor && ratio < kB1Factor;
  return {ok, fmt("%zu bootstrap rows finite=%d, worst T->2T drift %.3f (%s); B1 constant nu=2e-2 %.4g, nu=2e-3 "
                  "%.4g, ratio %.3f",
                  a.boot_T.size(), int(finite), drift, worst.c_str(), b1a, b1b, ratio)};
}

// 10 ---------------------------------------------------------------------
Outcome integral_identity() {
  const double formula = mult::quadrature_identity_check(1.0, 2.0, 0.0);
  const auto num = mult::quadrature_identity_numeric(1.0, 2.0, 0.0);
  const double d = std::abs(formula - num.value);
  return {d <= kIdentityTol && std::abs(formula - M_PI / 6.0) <= 1e-15,
          fmt("formula %.15f, quadrature %.15f, difference %.3g", formula, num.value, d)};
}

}  // namespace

int main(int argc, char** argv) {
  // optional arguments pick criteria by number
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"multiplier bounds and enhanced dissipation scan", multiplier_bounds},
      {"closed forms vs quadrature, Upsilon at the origin", closed_forms_vs_quadrature},
      {"homogeneous Q2/G2 closed forms vs RK", homogeneous_oracles},
      {"nu^-2/3 magnetic amplification slope", g2_scaling},
      {"inviscid damping t^-2", inviscid_damping},
      {"lift-up suppression", lift_up},
      {"oscillatory stabilization of non-homogeneous modes", oscillatory_stabilization},
      {"solver verification at 32x64x32", solver_verification},
      {"desk-scale nonlinear stability", nonlinear_stability},
      {"integral identity", integral_identity},
  };
  int failed = 0, index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    if (!only.empty() && !only.count(index)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("%s %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed;
}
