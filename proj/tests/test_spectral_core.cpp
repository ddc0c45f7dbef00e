#include <gtest/gtest.h>

#include <random>

#include "mhdcouette/fft.hpp"
#include "mhdcouette/spectral_ops.hpp"

using namespace mhdc;

namespace {

GridSpec small_grid(int m = 2) { return GridSpec{8, 16, 8, m, 2.0 / 3.0}; }

SpectralScalarField random_field(const GridSpec& g, std::uint32_t seed, double t = 0.0, bool mean_free = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  SpectralScalarField f(g, t);
  for (auto& c : f.coeffs()) c = cplx(n(rng), n(rng));
  f.symmetrize();
  f.dealias();
  if (mean_free) f.at({0, 0, 0}) = 0.0;
  return f;
}

SpectralVectorField random_vector(const GridSpec& g, std::uint32_t seed, double t = 0.0) {
  return SpectralVectorField(random_field(g, seed, t), random_field(g, seed + 1, t), random_field(g, seed + 2, t));
}

double max_diff(const SpectralScalarField& a, const SpectralScalarField& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.coeffs()[i] - b.coeffs()[i]));
  return d;
}

double max_diff(const SpectralVectorField& a, const SpectralVectorField& b) {
  return std::max({max_diff(a[0], b[0]), max_diff(a[1], b[1]), max_diff(a[2], b[2])});
}

}  // namespace

TEST(RationalShearAngle, ReducesToLowestTerms) {
  RationalShearAngle s(4, -6);
  EXPECT_EQ(s.q(), -2);
  EXPECT_EQ(s.p(), 3);
  EXPECT_THROW(RationalShearAngle(1, 0), Error);
}

TEST(RationalShearAngle, SymbolIsZeroOrAtLeastOneOverP) {
  for (auto [q, p] : {std::pair{1, 1}, {1, 2}, {-3, 5}, {7, 4}}) {
    RationalShearAngle s(q, p);
    for (int k = -20; k <= 20; ++k)
      for (int l = -20; l <= 20; ++l) {
        const double v = std::abs(s.symbol(k, l));
        if (!s.resonant(k, l)) {
          EXPECT_GE(v, 1.0 / s.p() - 1e-15);
        } else {
          EXPECT_EQ(v, 0.0);
        }
      }
  }
}

TEST(GridSpec, DealiasBand) {
  GridSpec g;
  EXPECT_EQ(g.kmax(), 10);
  EXPECT_EQ(g.jmax(), 21);
  EXPECT_THROW((GridSpec{7, 8, 8, 1, 0.5}.validate()), Error);
  EXPECT_THROW((GridSpec{8, 8, 8, 0, 0.5}.validate()), Error);
}

TEST(ProjectModes, ClassificationExamples) {
  RationalShearAngle one(1, 1);
  EXPECT_EQ(classify({2, 0, -2}, one), ModeClass::homogeneous);
  EXPECT_EQ(classify({1, 0, 0}, one), ModeClass::nonhomogeneous);
  EXPECT_EQ(classify({0, 0, 3}, one), ModeClass::zero);
  RationalShearAngle half(1, 2);
  EXPECT_EQ(classify({3, 0, -1}, half), ModeClass::nonhomogeneous);
  EXPECT_EQ(classify({2, 0, -1}, half), ModeClass::homogeneous);
}

TEST(ProjectModes, MatchesRationalArithmeticOverLattice) {
  RationalShearAngle half(1, 2);
  for (int k = -12; k <= 12; ++k)
    for (int l = -12; l <= 12; ++l) {
      // sigma k + l = (k + 2l)/2
      ModeClass expect = k == 0 ? ModeClass::zero : ((k + 2 * l) == 0 ? ModeClass::homogeneous : ModeClass::nonhomogeneous);
      EXPECT_EQ(classify({k, 0, l}, half), expect);
    }
}

TEST(ProjectModes, CompleteIdempotentAndDisjoint) {
  const auto g = small_grid();
  RationalShearAngle s(1, 1);
  const auto f = random_field(g, 3);
  const ModeClass all[] = {ModeClass::zero, ModeClass::homogeneous, ModeClass::nonhomogeneous};
  auto sum = project_modes(f, ModeClass::zero, s);
  sum = add(sum, project_modes(f, ModeClass::homogeneous, s));
  sum = add(sum, project_modes(f, ModeClass::nonhomogeneous, s));
  EXPECT_EQ(max_diff(sum, f), 0.0);
  for (auto a : all)
    for (auto b : all) {
      const auto ab = project_modes(project_modes(f, a, s), b, s);
      if (a == b) {
        EXPECT_EQ(max_diff(ab, project_modes(f, a, s)), 0.0);
      } else {
        EXPECT_EQ(ab.max_abs(), 0.0);
      }
    }
  SpectralScalarField zero(g);
  for (auto a : all) EXPECT_EQ(project_modes(zero, a, s).max_abs(), 0.0);
}

TEST(Oscillation, IdentityCasesAndPhase) {
  const auto g = small_grid();
  RationalShearAngle s(1, 1);
  const auto f = random_field(g, 5);
  EXPECT_EQ(max_diff(apply_oscillation(f, 0.0, 3.0, s), f), 0.0);
  EXPECT_EQ(max_diff(apply_oscillation(f, 2.0, 0.0, s), f), 0.0);

  const auto h = apply_oscillation(f, 2.3, 1.7, s);
  for (std::size_t i = 0; i < f.size(); ++i) {
    EXPECT_NEAR(std::abs(h.coeffs()[i]), std::abs(f.coeffs()[i]), 1e-14);
    if (classify(g.mode(i), s) == ModeClass::homogeneous) {
      EXPECT_EQ(h.coeffs()[i], f.coeffs()[i]);
    }
  }

  SpectralScalarField e(g);
  e.at({1, 0, 0}) = 1.0;
  const auto r = apply_oscillation(e, 20.0, 0.1, s);
  EXPECT_NEAR(std::abs(r.at({1, 0, 0}) - std::polar(1.0, 2.0)), 0.0, 1e-15);
}

TEST(Oscillation, GroupProperty) {
  const auto g = small_grid();
  RationalShearAngle s(-1, 2);
  const auto f = random_field(g, 6);
  const auto two = apply_oscillation(apply_oscillation(f, 1.3, 0.4, s), 1.3, 0.9, s);
  const auto one = apply_oscillation(f, 1.3, 1.3, s);
  EXPECT_LT(max_diff(two, one), 1e-13 * f.max_abs());
}

TEST(Oscillation, PreservesHermitianSymmetry) {
  const auto g = small_grid();
  const auto f = apply_oscillation(random_field(g, 7), 3.0, 2.5, RationalShearAngle(2, 3));
  EXPECT_LT(f.hermitian_defect(), 1e-15);
}

TEST(GoodUnknowns, ForwardInverseRoundTrip) {
  const auto g = small_grid();
  auto params = PhysParams::make(1e-3, 10.0, RationalShearAngle(1, 1));
  MhdState st(g, params, 2.7);
  st.U = random_vector(g, 10, 2.7);
  st.B = random_vector(g, 20, 2.7);
  const auto w = good_unknowns_forward(st);
  const auto back = good_unknowns_inverse(w, st.t, params);
  EXPECT_LT(max_diff(back.U, st.U), 1e-14 * st.U.max_abs());
  EXPECT_LT(max_diff(back.B, st.B), 1e-14 * st.B.max_abs());
}

TEST(GoodUnknowns, TimeZeroAndZeroField) {
  const auto g = small_grid();
  auto params = PhysParams::make(1e-3, 10.0, RationalShearAngle(1, 1));
  MhdState st(g, params, 0.0);
  st.U = random_vector(g, 11);
  st.B = random_vector(g, 21);
  auto w = good_unknowns_forward(st);
  EXPECT_EQ(max_diff(w.plus, add(st.U, st.B)), 0.0);
  EXPECT_EQ(max_diff(w.minus, subtract(st.U, st.B)), 0.0);

  st.t = 1.5;
  st.B = SpectralVectorField(g, 1.5);
  w = good_unknowns_forward(st);
  const auto back = apply_oscillation(w.minus, -2.0 * params.alpha, st.t, params.sigma);
  EXPECT_LT(max_diff(back, w.plus), 1e-14 * st.U.max_abs());
}

TEST(MovingFrameOperators, DivGradIsLaplacian) {
  const auto g = small_grid();
  const auto f = random_field(g, 30, 3.3);
  const auto lhs = div_L(grad_L(f));
  const auto rhs = laplace_L(f);
  EXPECT_LT(max_diff(lhs, rhs), 1e-13 * rhs.max_abs());
}

TEST(MovingFrameOperators, SymbolExamples) {
  GridSpec g{8, 16, 8, 1, 1.0};
  SpectralScalarField f(g, 10.0);
  f.at({1, 0, -1}) = 1.0;
  EXPECT_DOUBLE_EQ(laplace_L(f).at({1, 0, -1}).real(), -102.0);
  SpectralScalarField h(g, 0.0);
  h.at({2, 3, 1}) = 1.0;
  EXPECT_DOUBLE_EQ(laplace_L(h).at({2, 3, 1}).real(), -(4.0 + 9.0 + 1.0));
}

TEST(MovingFrameOperators, InverseLaplacian) {
  const auto g = small_grid();
  const auto f = random_field(g, 31, 1.25);
  EXPECT_LT(max_diff(laplace_L(inv_laplace_L(f)), f), 1e-13 * f.max_abs());
  auto with_mean = f;
  with_mean.at({0, 0, 0}) = 1.0;
  EXPECT_THROW(inv_laplace_L(with_mean), Error);
  EXPECT_NO_THROW(inv_laplace_L(with_mean, MeanPolicy::drop));
}

TEST(Leray, ProjectsOntoDivergenceFree) {
  const auto g = small_grid();
  const auto v = random_vector(g, 40, 2.2);
  const auto w = leray_project_moving(v, 2.2);
  EXPECT_TRUE(w.div_free_moving_frame);
  EXPECT_LT(div_L_defect(w), 1e-12);
  EXPECT_LT(max_diff(leray_project_moving(w, 2.2), w), 1e-13 * w.max_abs());
  for (int i = 0; i < 3; ++i) EXPECT_LT(w[i].hermitian_defect(), 1e-15);
}

TEST(Leray, AnnihilatesGradients) {
  const auto g = small_grid();
  const auto phi = random_field(g, 41, 0.7);
  const auto v = grad_L(phi);
  EXPECT_LT(leray_project_moving(v, 0.7).max_abs(), 1e-13 * v.max_abs());
}

TEST(Leray, DivergenceFreeComponentIdentity) {
  // For div_L-free fields with k != 0 the first component is determined by the other two.
  const auto g = small_grid();
  const auto w = leray_project_moving(random_vector(g, 42, 4.0), 4.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const ModeIndex q = g.mode(i);
    if (q.k == 0) continue;
    const cplx rebuilt = -(w[0].sheared_eta(q) * w[1].coeffs()[i] + double(q.l) * w[2].coeffs()[i]) / double(q.k);
    EXPECT_NEAR(std::abs(rebuilt - w[0].coeffs()[i]), 0.0, 1e-12 * w.max_abs());
  }
}

TEST(Fft, ConstantAndSingleHarmonic) {
  const auto g = small_grid();
  Fft3d fft(g);
  RealArray c(g.size(), 2.5);
  const auto fc = fft.to_spectral(c);
  EXPECT_NEAR(std::abs(fc.at({0, 0, 0}) - 2.5), 0.0, 1e-15);
  EXPECT_NEAR(fc.max_abs(), 2.5, 1e-15);

  // cos X = (e^{iX} + e^{-iX})/2
  RealArray h(g.size());
  for (int ix = 0; ix < g.nx; ++ix)
    for (int iy = 0; iy < g.ny; ++iy)
      for (int iz = 0; iz < g.nz; ++iz)
        h[(std::size_t(ix) * g.ny + iy) * g.nz + iz] = std::cos(2.0 * M_PI * ix / g.nx);
  const auto fh = fft.to_spectral(h);
  EXPECT_NEAR(std::abs(fh.at({1, 0, 0}) - 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(fh.at({-1, 0, 0}) - 0.5), 0.0, 1e-15);

  SpectralScalarField one(g);
  one.at({1, 0, 0}) = 0.5;
  one.at({-1, 0, 0}) = 0.5;
  const auto back = fft.to_physical(one);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(back[i], h[i], 1e-15);
}

TEST(Fft, RandomRoundTrip) {
  const auto g = small_grid();
  Fft3d fft(g);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RealArray x(g.size());
  for (auto& v : x) v = u(rng);
  const auto f = fft.to_spectral(x);
  EXPECT_EQ(f.hermitian_defect(), 0.0);
  const auto y = fft.to_physical(f);
  double err = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(x[i] - y[i]));
  EXPECT_LT(err, 1e-13);
}

TEST(Fft, GridMismatch) {
  Fft3d fft(small_grid());
  RealArray wrong(10);
  EXPECT_THROW(fft.to_spectral(wrong), Error);
}

TEST(Sobolev, Examples) {
  GridSpec g{8, 16, 8, 1, 1.0};
  SpectralScalarField f(g);
  EXPECT_EQ(sobolev_norm(f, 3.0), 0.0);
  f.at({1, 0, 0}) = 1.0;
  EXPECT_NEAR(sobolev_norm(f, 2.0), 2.0, 1e-15);
  const auto r = random_field(small_grid(), 50);
  double plain = 0.0;
  for (const auto& c : r.coeffs()) plain += std::norm(c);
  EXPECT_NEAR(sobolev_norm(r, 0.0), std::sqrt(plain / r.grid().m), 1e-12);
  EXPECT_THROW(sobolev_norm(r, -1.0), Error);
}
