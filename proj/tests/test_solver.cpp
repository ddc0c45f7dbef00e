#include <gtest/gtest.h>

#include <sstream>

#include "mhdcouette/solver.hpp"

using namespace mhdc;

namespace {
GridSpec small_grid() { return GridSpec{8, 16, 8, 2, 2.0 / 3.0}; }

SimConfig small_config(double nu, double alpha, double eps, std::uint64_t seed = 7) {
  SimConfig c;
  c.grid = small_grid();
  c.params = PhysParams::make(nu, alpha, RationalShearAngle(1, 1));
  c.epsilon = eps;
  c.seed = seed;
  c.sobolev_N = -2.0;  // normalize in L^2
  c.ic_band = 2;
  c.dt = 0.05;
  c.T_final = 1.0;
  c.diagnostics_every = 0.5;
  return c;
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

MhdState final_state(const SimConfig& c) {
  SimConfig s = c;
  s.store_every = 1;
  s.diagnostics_every = s.T_final;
  return run(s).states.back();
}
}  // namespace

TEST(Rhs, ZeroStateIsFixed) {
  auto cfg = small_config(1e-2, 10.0, 0.0);
  const MhdState s = initial_state(cfg);
  const MhdState r = nonlinear_rhs(s);
  EXPECT_EQ(r.U.max_abs(), 0.0);
  EXPECT_EQ(r.B.max_abs(), 0.0);
  cfg.store_every = 1;
  const auto tr = run(cfg);
  EXPECT_EQ(tr.states.back().U.max_abs(), 0.0);
  EXPECT_EQ(tr.energy.back().energy, 0.0);
}

TEST(Rhs, SingleModeHandComputed) {
  // A lone Fourier pair has no self-interaction, so the right-hand side is
  // the linear Couette-MHD operator.
  const auto g = small_grid();
  const auto p = PhysParams::make(0.03, 7.0, RationalShearAngle(1, 2));
  MhdState s(g, p, 0.4);
  const ModeIndex q{1, 3, 2};
  const double k = 1.0, e = 3.0 / g.m - 0.4, l = 2.0;
  const double P = k * k + e * e + l * l;
  // U, B orthogonal to (k, e, l)
  const cplx u[3] = {cplx(e, 0.3 * l), cplx(-k, 0.0), cplx(0.0, -0.3 * k)};
  const cplx b[3] = {cplx(0.0, l), cplx(0.5 * l, 0.0), cplx(-0.5 * e, -k)};
  for (int c = 0; c < 3; ++c) {
    s.U[c].at(q) = u[c];
    s.B[c].at(q) = b[c];
    s.U[c].at({-1, -3, -2}) = std::conj(u[c]);
    s.B[c].at({-1, -3, -2}) = std::conj(b[c]);
  }
  const MhdState r = nonlinear_rhs(s);
  const double sym = 0.5 * 1.0 + 2.0;
  const double d[3] = {k, e, l};
  for (int c = 0; c < 3; ++c) {
    cplx du = cplx(0.0, p.alpha * sym) * b[c] - p.nu * P * u[c] + 2.0 * k * d[c] * u[1] / P;
    cplx db = cplx(0.0, p.alpha * sym) * u[c] - p.nu * P * b[c];
    if (c == 0) {
      du -= u[1];
      db += b[1];
    }
    EXPECT_NEAR(std::abs(r.U[c].at(q) - du), 0.0, 1e-13) << c;
    EXPECT_NEAR(std::abs(r.B[c].at(q) - db), 0.0, 1e-13) << c;
  }
  // nothing leaks to other modes
  double other = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < g.size(); ++i) {
      const ModeIndex m = g.mode(i);
      if (m == q || m == ModeIndex{-1, -3, -2}) continue;
      other = std::max({other, std::abs(r.U[c].coeffs()[i]), std::abs(r.B[c].coeffs()[i])});
    }
  EXPECT_LT(other, 1e-14);
}

TEST(Rhs, NonlinearTransferIsConservative) {
  for (std::uint64_t seed : {1, 2, 3}) {
    auto cfg = small_config(0.0, 0.0, 1.0, seed);
    const MhdState s = initial_state(cfg);
    ShearSolver solver(cfg.grid, cfg.params);
    MhdState lin, full;
    solver.nonlinear = false;
    solver.transport_terms(s, s.t, lin);
    solver.nonlinear = true;
    solver.transport_terms(s, s.t, full);
    const double transfer = inner(s.U, full.U) + inner(s.B, full.B) - inner(s.U, lin.U) - inner(s.B, lin.B);
    const double scale = std::abs(inner(s.U, full.U)) + std::abs(inner(s.B, full.B));
    EXPECT_LT(std::abs(transfer), 1e-13 * scale);
    // the linear part moves energy only through the Reynolds/Maxwell stress
    const double lin_rate = inner(s.U, lin.U) + inner(s.B, lin.B);
    EXPECT_NEAR(lin_rate, -(inner(s.U[0], s.U[1]) - inner(s.B[0], s.B[1])), 1e-13);
  }
}

TEST(Rhs, RejectsBadInput) {
  const auto g = small_grid();
  MhdState s(g, PhysParams::make(1e-2, 10.0, {}), 0.0);
  s.U[0].at({1, 0, 0}) = 1.0;
  s.U[0].at({-1, 0, 0}) = 1.0;
  EXPECT_THROW(nonlinear_rhs(s), Error);
  MhdState n(g, PhysParams::make(1e-2, 10.0, {}), 0.0);
  n.U[1].at({1, 0, 0}) = std::numeric_limits<double>::quiet_NaN();
  try {
    ShearSolver::check_finite(n, "test");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("k=1 j=0 l=0"), std::string::npos);
  }
}

TEST(InitialData, NormalizedProjectedReal) {
  auto cfg = small_config(1e-2, 10.0, 1e-3);
  cfg.sobolev_N = 5.0;
  const MhdState s = initial_state(cfg);
  EXPECT_NEAR(state_sobolev_norm(s, 7.0), 1e-3, 1e-15);
  EXPECT_LT(div_L_defect(s.U), 1e-14);
  EXPECT_LT(div_L_defect(s.B), 1e-14);
  for (int c = 0; c < 3; ++c) {
    EXPECT_EQ(s.U[c].hermitian_defect(), 0.0);
    EXPECT_EQ(s.U[c].at({0, 0, 0}), cplx{});
  }
  cfg.ic_kind = IcKind::single_mode;
  cfg.ic_mode = {1, 0, -1};
  const MhdState m = initial_state(cfg);
  EXPECT_NE(m.U[1].at({1, 0, -1}), cplx{});
  EXPECT_NE(m.B[2].at({1, 0, -1}), cplx{});
  cfg.ic_mode = {5, 0, 0};
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Determinism, SameSeedSameBits) {
  auto cfg = small_config(1e-2, 10.0, 0.5, 11);
  const auto a = final_state(cfg);
  const auto b = final_state(cfg);
  EXPECT_EQ(max_diff(a, b), 0.0);
  cfg.seed = 12;
  EXPECT_GT(max_diff(a, final_state(cfg)), 1e-6);
}

TEST(Step, FourthOrderConvergence) {
  auto cfg = small_config(1e-2, 3.0, 0.2, 5);
  cfg.T_final = 1.0;
  cfg.dt = 1.0 / 640.0;
  const auto ref = final_state(cfg);
  std::vector<double> err;
  for (double dt : {0.05, 0.025, 0.0125}) {
    cfg.dt = dt;
    err.push_back(max_diff(final_state(cfg), ref));
  }
  const double r1 = err[0] / err[1], r2 = err[1] / err[2];
  EXPECT_NEAR(r1, 16.0, 3.0) << err[0] << " " << err[1];
  EXPECT_NEAR(r2, 16.0, 3.0) << err[1] << " " << err[2];
}

TEST(Step, StaysDivergenceFreeAndReal) {
  auto cfg = small_config(1e-3, 10.0, 0.2, 3);
  cfg.T_final = 2.0;
  const auto tr = run(cfg);
  EXPECT_LE(tr.max_div_defect, 1e-11);
  EXPECT_EQ(tr.max_hermitian_defect, 0.0);
}

TEST(Step, CflViolationIsReported) {
  auto cfg = small_config(1e-3, 10.0, 1e3, 3);
  cfg.dt = 0.5;
  EXPECT_THROW(run(cfg), Error);
}

TEST(Step, HomogeneousModeMatchesClosedForm) {
  auto cfg = small_config(1e-2, 10.0, 1.0);
  cfg.ic_kind = IcKind::single_mode;
  cfg.ic_mode = {1, 1, -1};
  cfg.nonlinear = false;
  cfg.dt = 1.0 / 64.0;
  cfg.T_final = 20.0;
  const MhdState s0 = initial_state(cfg);
  const auto sT = final_state(cfg);
  const ModeIndex q = cfg.ic_mode;
  const linear::Wavevector w{q.k, s0.U[0].frame_eta(q), q.l};
  const double p0 = s0.U[0].lap_symbol(q), pT = linear::lap_symbol(w, cfg.T_final);
  const double Q = pT * std::abs(sT.U[1].at(q)) / (p0 * std::abs(s0.U[1].at(q)));
  const double G = pT * std::abs(sT.B[1].at(q)) / (p0 * std::abs(s0.B[1].at(q)));
  EXPECT_NEAR(Q / linear::homogeneous_q2_exact(w, cfg.params, cfg.T_final), 1.0, 1e-8);
  EXPECT_NEAR(G / linear::homogeneous_g2_exact(w, cfg.params, cfg.T_final), 1.0, 1e-8);
}

TEST(Energy, BalanceResidualInviscid) {
  auto cfg = small_config(0.0, 10.0, 0.5, 9);
  cfg.dt = 0.01;
  cfg.T_final = 1.0;
  const auto tr = run(cfg);
  const double e0 = tr.energy.front().energy;
  double worst = 0.0, total = 0.0;
  for (double r : energy_balance_residual(tr)) {
    worst = std::max(worst, std::abs(r));
    total += r;
  }
  EXPECT_LT(worst, 1e-6 * e0);
  EXPECT_LT(std::abs(total), 1e-6 * e0);
}

TEST(Energy, BalanceResidualViscous) {
  auto cfg = small_config(5e-2, 10.0, 1.0, 9);
  cfg.dt = 0.01;
  cfg.T_final = 2.0;
  const auto tr = run(cfg);
  double total = 0.0;
  for (double r : energy_balance_residual(tr)) total += r;
  EXPECT_LT(std::abs(total), 1e-6 * tr.energy.front().energy);
  EXPECT_LT(tr.energy.back().energy, tr.energy.front().energy);
}

TEST(Remap, ShiftRoundTripAndZeroModes) {
  auto cfg = small_config(1e-2, 10.0, 1.0, 4);
  cfg.ic_band = 1;
  MhdState s = initial_state(cfg);
  const MhdState orig = s;
  const auto r = shift_shear_frame(s, 2);
  EXPECT_EQ(r.dropped_energy, 0.0);
  EXPECT_EQ(s.U[0].shear_shift(), 2);
  for (std::size_t i = 0; i < s.grid().size(); ++i) {
    const ModeIndex q = s.grid().mode(i);
    if (q.k == 0) {
      for (int c = 0; c < 3; ++c) EXPECT_EQ(s.U[c].coeffs()[i], orig.U[c].coeffs()[i]);
    }
  }
  // same frame wavenumber, new slot
  EXPECT_EQ(s.U[1].at({1, -1, 1}), orig.U[1].at({1, 1, 1}));
  EXPECT_DOUBLE_EQ(energy_record(s).energy, energy_record(orig).energy);
  shift_shear_frame(s, 0);
  EXPECT_EQ(max_diff(s, orig), 0.0);
}

TEST(Remap, DropsEnergyLeavingTheBand) {
  auto cfg = small_config(1e-2, 10.0, 1.0, 4);
  MhdState s = initial_state(cfg);
  const auto r = shift_shear_frame(s, 6);
  EXPECT_GT(r.dropped_energy, 0.0);
  EXPECT_NEAR(energy_record(s).energy + r.dropped_energy, r.energy_before, 1e-14 * r.energy_before);
}

TEST(Remap, LatticeTimeOnly) {
  auto cfg = small_config(1e-2, 10.0, 1.0, 4);
  MhdState s = initial_state(cfg);
  s.t = 0.3;
  EXPECT_THROW(remap_shear_frame(s), Error);
  s.t = 1.5;
  EXPECT_NO_THROW(remap_shear_frame(s));
  EXPECT_EQ(s.U[0].shear_shift(), 3);
}

TEST(Remap, LinearRunUnchangedByPeriodicRemap) {
  auto cfg = small_config(1e-2, 10.0, 1.0, 4);
  cfg.ic_band = 1;
  cfg.nonlinear = false;
  cfg.dt = 0.05;
  cfg.T_final = 1.0;
  const auto a = final_state(cfg);
  cfg.remap_policy = RemapPolicy::periodic_at_integer_multiples;
  auto b = final_state(cfg);
  EXPECT_EQ(b.U[0].shear_shift(), 2);
  shift_shear_frame(b, 0);
  EXPECT_LT(max_diff(a, b), 1e-14);
}

TEST(Snapshot, RoundTrip) {
  auto cfg = small_config(1e-2, 10.0, 1.0, 4);
  MhdState s = initial_state(cfg);
  s.t = 2.5;
  shift_shear_frame(s, 1);
  std::stringstream buf;
  write_snapshot(buf, s);
  const MhdState r = read_snapshot(buf, cfg.params);
  EXPECT_EQ(r.t, 2.5);
  EXPECT_EQ(r.U[2].shear_shift(), 1);
  EXPECT_TRUE(r.grid() == s.grid());
  EXPECT_EQ(max_diff(r, s), 0.0);
  std::stringstream bad("XXXX");
  EXPECT_THROW(read_snapshot(bad, cfg.params), Error);
  std::stringstream cut(buf.str().substr(0, 40));
  EXPECT_THROW(read_snapshot(cut, cfg.params), Error);
}

TEST(Step, ZeroModePlaneOfU2VanishesExactly) {
  auto cfg = small_config(1e-2, 10.0, 0.3, 8);
  cfg.store_every = 1;
  const auto tr = run(cfg);
  for (const auto& s : tr.states)
    for (int j = -8; j < 8; ++j) EXPECT_EQ(s.U[1].at({0, j, 0}), cplx{});
}

TEST(Energy, ZeroTrajectoryAndStepHalving) {
  auto zero = small_config(0.0, 10.0, 0.0);
  for (double r : energy_balance_residual(run(zero))) EXPECT_EQ(r, 0.0);
  Trajectory tiny;
  tiny.energy.resize(2);
  EXPECT_THROW(energy_balance_residual(tiny), Error);

  // per-interval residuals are local truncation errors, so they shrink at
  // least as fast as a fourth-order global error
  auto cfg = small_config(0.0, 10.0, 0.5, 9);
  cfg.T_final = 1.0;
  std::vector<double> total;
  for (double dt : {0.025, 0.0125}) {
    cfg.dt = dt;
    double acc = 0.0;
    for (double r : energy_balance_residual(run(cfg))) acc += std::abs(r);
    total.push_back(acc);
  }
  EXPECT_GE(total[0] / total[1], 13.0) << total[0] << " " << total[1];
}

TEST(Energy, ResidualContinuousAcrossRemap) {
  auto cfg = small_config(0.0, 10.0, 1e-3, 2);
  cfg.ic_band = 1;
  cfg.dt = 0.025;
  cfg.T_final = 1.0;
  cfg.remap_policy = RemapPolicy::periodic_at_integer_multiples;
  const auto tr = run(cfg);
  ASSERT_EQ(tr.remaps.size(), 2u);
  const auto res = energy_balance_residual(tr);
  // the remap at t = 0.5 falls between pairs 9 and 10
  EXPECT_LT(std::abs(res[10] - res[9]), 1e-9);
}

TEST(Remap, ProductionGridDropsNegligibleEnergy) {
  SimConfig cfg;
  cfg.params = PhysParams::make(2e-2, 10.0, {1, 1});
  cfg.epsilon = 0.05 * cfg.params.nu;
  cfg.dt = 0.025;
  cfg.T_final = 0.5;
  cfg.remap_policy = RemapPolicy::periodic_at_integer_multiples;
  cfg.ic_profile = IcProfile::gaussian;
  cfg.ic_width = 1.0;
  const auto tr = run(cfg);
  ASSERT_EQ(tr.remaps.size(), 2u);
  for (const auto& r : tr.remaps) EXPECT_LT(r.dropped_fraction(), 1e-10);
}
