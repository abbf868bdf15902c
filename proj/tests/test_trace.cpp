#include <cmath>
#include <optional>

#include <gtest/gtest.h>

#include "starscat/trace.hpp"

using namespace starscat;

namespace {

using BC = BoundaryCondition;

Complex hankel(int l, double x) { return {std::sph_bessel(l, x), std::sph_neumann(l, x)}; }
Complex dhankel(int l, double x) { return l == 0 ? -hankel(1, x) : hankel(l - 1, x) - (l + 1.0) / x * hankel(l, x); }

// Continuous-branch phase shift by tracking pi/2 - arg h along a fine x grid
// from near zero, where delta_l vanishes.
double tracked_phase_shift(int l, double x, BC bc) {
  auto raw = [&](double s) { return 0.5 * pi - std::arg(bc == BC::dirichlet ? hankel(l, s) : dhankel(l, s)); };
  const int steps = 20000;
  const double x0 = std::min(1e-2, 0.5 * x);
  double d = raw(x0);
  d -= pi * std::round(d / pi);  // delta(0+) = 0
  double prev = raw(x0);
  for (int k = 1; k <= steps; ++k) {
    const double s = x0 + (x - x0) * k / steps;
    const double v = raw(s);
    double step = v - prev;
    step -= pi * std::round(step / pi);
    d += step;
    prev = v;
  }
  return d;
}

template <class F>
std::optional<ErrorCategory> category_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.category();
  }
  return std::nullopt;
}

SMatrixDisc diagonal_s(double lambda, const SphereGrid& g, double phase0, double modulus = 1.0) {
  SMatrixDisc S;
  S.lambda = lambda;
  S.grid = g;
  S.matrix = Eigen::MatrixXcd::Identity(g.size(), g.size());
  S.matrix(0, 0) = std::polar(modulus, phase0);
  return S;
}

}  // namespace

TEST(PhaseShift, SWaveClosedForm) {
  for (double x : {0.3, 1.0, 2.0, 7.5}) EXPECT_NEAR(sphere_phase_shift(0, x, BC::dirichlet), -x, 1e-12);
  for (double x : {0.3, 1.0, 2.0, 7.5}) EXPECT_NEAR(sphere_phase_shift(0, x, BC::neumann), -(x - std::atan(x)), 1e-12);
}

TEST(PhaseShift, MatchesBranchTrackedOracle) {
  for (BC bc : {BC::dirichlet, BC::neumann})
    for (double x : {0.5, 3.0, 9.7, 15.0}) {
      const std::vector<double> d = sphere_phase_shifts(8, x, bc);
      for (int l = 0; l <= 8; ++l) EXPECT_NEAR(d[l], tracked_phase_shift(l, x, bc), 1e-9) << bc_name(bc) << " l=" << l << " x=" << x;
    }
}

TEST(ScatteringPhase, DerivativeMatchesDifferenceOfPhase) {
  for (BC bc : {BC::dirichlet, BC::neumann})
    for (double lam : {0.7, 2.0, 5.5}) {
      const double h = 1e-4;
      const double fd = (sphere_scattering_phase(1.0, lam + h, bc) - sphere_scattering_phase(1.0, lam - h, bc)) / (2.0 * h);
      const double d = sphere_scattering_phase_derivative(1.0, lam, bc);
      EXPECT_NEAR(d, fd, 1e-6 * std::abs(d)) << bc_name(bc) << " " << lam;
    }
}

TEST(ScatteringPhase, RadiusScaling) {
  EXPECT_NEAR(sphere_scattering_phase(2.0, 1.5, BC::dirichlet), sphere_scattering_phase(1.0, 3.0, BC::dirichlet), 1e-10);
}

TEST(ScatteringPhase, LargeWavenumberFollowsTwoTermWeyl) {
  // unit sphere: -V lambda^3 / (6 pi^2) - A lambda^2 / (16 pi), divided by lambda^3
  const double lam = 6.0, V = 4.0 * pi / 3.0, A = 4.0 * pi;
  const double weyl = -V / (6.0 * pi * pi) - A / (16.0 * pi * lam);
  const double s = sphere_scattering_phase(1.0, lam, BC::dirichlet) / (lam * lam * lam);
  EXPECT_NEAR(s, weyl, 0.1 * std::abs(weyl));
  EXPECT_LT(s, 0.0);
}

TEST(DetS, SyntheticQuadraticPhase) {
  // total phase -2 pi sigma with sigma = 0.3 lambda^2
  const SphereGrid g = build_sphere_grid(1);
  auto phi = [](double l) { return -2.0 * pi * 0.3 * l * l; };
  const double lam = 1.0, h = 0.01;
  const double d = phase_derivative_det(diagonal_s(lam - h, g, phi(lam - h)), diagonal_s(lam, g, phi(lam)),
                                        diagonal_s(lam + h, g, phi(lam + h)));
  EXPECT_NEAR(d, 0.6, 1e-10);
}

TEST(DetS, IdentityHasZeroDerivative) {
  const SphereGrid g = build_sphere_grid(2);
  EXPECT_EQ(phase_derivative_det(diagonal_s(0.9, g, 0.0), diagonal_s(1.0, g, 0.0), diagonal_s(1.1, g, 0.0)), 0.0);
}

TEST(DetS, RejectsNonUnitaryMatrices) {
  const SphereGrid g = build_sphere_grid(1);
  EXPECT_EQ(category_of([&] { phase_derivative_det(diagonal_s(0.9, g, 0.0), diagonal_s(1.0, g, 0.0, 1.2), diagonal_s(1.1, g, 0.0)); }),
            ErrorCategory::unreliable_s);
}

TEST(DetS, RejectsPhaseJumpsAcrossTheStencil) {
  const SphereGrid g = build_sphere_grid(1);
  EXPECT_EQ(category_of([&] { phase_derivative_det(diagonal_s(0.9, g, 0.0), diagonal_s(1.0, g, 2.0), diagonal_s(1.1, g, 4.0)); }),
            ErrorCategory::step_too_large);
}

TEST(DetS, SphereMatchesPartialWaveDerivative) {
  const double lam = 2.0;
  const double ref = sphere_scattering_phase_derivative(1.0, lam, BC::dirichlet);
  const double d =
      phase_derivative_det(RadialShape::sphere(1.0), lam, BC::dirichlet, build_sphere_grid(16), build_sphere_grid(16));
  EXPECT_NEAR(d, ref, 1e-4 * std::abs(ref));
}

TEST(HeatTrace, PureCubicPhaseGivesExactVolume) {
  // sigma' = -V lambda^2 / (2 pi^2)  =>  H(t) (4 pi t)^{3/2} = -V
  const double V = 1.234;
  PhaseSamples p;
  p.lambdas = uniform_wavenumbers(40.0, 4000);
  for (double l : p.lambdas) p.derivative.push_back(-V * l * l / (2.0 * pi * pi));
  const HeatTraceFit f = heat_trace_and_a0(p, heat_window(0.02, 0.08));
  EXPECT_NEAR(f.a0, -V, 1e-6);
  EXPECT_NEAR(f.b, 0.0, 1e-5);
  EXPECT_NEAR(f.volume_estimate(), V, 1e-6);
}

TEST(HeatTrace, ZeroPhaseGivesZero) {
  PhaseSamples p;
  p.lambdas = uniform_wavenumbers(40.0, 400);
  p.derivative.assign(p.lambdas.size(), 0.0);
  const HeatTraceFit f = heat_trace_and_a0(p, heat_window(0.02, 0.08));
  EXPECT_EQ(f.a0, 0.0);
  for (double h : f.heat) EXPECT_EQ(h, 0.0);
}

TEST(HeatTrace, UnitSphereVolume) {
  const PhaseSamples p = sphere_phase_samples(1.0, uniform_wavenumbers(40.0, 4000), BC::dirichlet);
  const HeatTraceFit f = heat_trace_and_a0(p, heat_window(0.02, 0.08));
  EXPECT_NEAR(f.volume_estimate(), 4.0 * pi / 3.0, 0.05 * 4.0 * pi / 3.0);
  EXPECT_LT(f.a0, 0.0);
}

TEST(HeatTrace, NeumannSphereVolume) {
  const PhaseSamples p = sphere_phase_samples(1.0, uniform_wavenumbers(40.0, 4000), BC::neumann);
  EXPECT_NEAR(heat_trace_and_a0(p, heat_window(0.02, 0.08)).volume_estimate(), 4.0 * pi / 3.0, 0.05 * 4.0 * pi / 3.0);
}

TEST(HeatTrace, RadiusTwoGivesEightfoldVolume) {
  const auto lams = uniform_wavenumbers(40.0, 4000);
  const auto w = heat_window(0.02, 0.08);
  const double v1 = heat_trace_and_a0(sphere_phase_samples(1.0, lams, BC::dirichlet), w).volume_estimate();
  const double v2 = heat_trace_and_a0(sphere_phase_samples(2.0, lams, BC::dirichlet), w).volume_estimate();
  EXPECT_NEAR(v2 / v1, 8.0, 0.4);
}

TEST(HeatTrace, InsufficientBandwidth) {
  const PhaseSamples p = sphere_phase_samples(1.0, uniform_wavenumbers(20.0, 200), BC::dirichlet);
  EXPECT_EQ(category_of([&] { heat_trace_and_a0(p, heat_window(0.02, 0.08)); }), ErrorCategory::insufficient_bandwidth);
}

TEST(PhaseSamples, RejectsUnsortedWavenumbers) {
  PhaseSamples p;
  p.lambdas = {1.0, 0.5};
  p.derivative = {0.0, 0.0};
  EXPECT_EQ(category_of([&] { p.validate(); }), ErrorCategory::invalid_argument);
}
