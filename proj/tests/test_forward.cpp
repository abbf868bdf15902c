#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "starscat/forward.hpp"

using namespace starscat;

namespace {

using BC = BoundaryCondition;

// Partial-wave oracle on std::sph_bessel / std::sph_neumann / std::legendre.
// Incident wave exp(i k d.x) with d = -omega; f(theta) = A(theta, omega).
Complex ratio(int l, double x, BC bc) {
  if (bc == BC::dirichlet) return -std::sph_bessel(l, x) / Complex(std::sph_bessel(l, x), std::sph_neumann(l, x));
  auto dj = [&](int n) { return n == 0 ? -std::sph_bessel(1, x) : std::sph_bessel(n - 1, x) - (n + 1.0) / x * std::sph_bessel(n, x); };
  auto dy = [&](int n) { return n == 0 ? -std::sph_neumann(1, x) : std::sph_neumann(n - 1, x) - (n + 1.0) / x * std::sph_neumann(n, x); };
  return -dj(l) / Complex(dj(l), dy(l));
}

int cutoff(double x) { return static_cast<int>(x + 25); }

Complex oracle_amplitude(double a, double k, double cos_gamma, BC bc) {
  Complex s = 0.0;
  for (int l = 0; l <= cutoff(k * a); ++l) s += (2.0 * l + 1.0) * ratio(l, k * a, bc) * std::legendre(l, cos_gamma);
  return s / Complex(0.0, k);
}

Complex oracle_scattered(double a, double k, const Vec3& omega, const Vec3& x, BC bc) {
  const double r = x.norm();
  const double t = -omega.dot(x) / r;
  Complex s = 0.0, il = 1.0;
  for (int l = 0; l <= cutoff(k * a); ++l) {
    s += (2.0 * l + 1.0) * il * ratio(l, k * a, bc) * Complex(std::sph_bessel(l, k * r), std::sph_neumann(l, k * r)) *
         std::legendre(l, t);
    il *= Complex(0.0, 1.0);
  }
  return s;
}

Vec3 random_unit(std::mt19937& rng) {
  std::normal_distribution<double> g;
  return Vec3(g(rng), g(rng), g(rng)).normalized();
}

RadialShape bumpy_shape() {
  std::vector<double> c(sh_count(2), 0.0);
  c[sh_index(0, 0)] = std::sqrt(4.0 * pi);
  c[sh_index(1, -1)] = 0.08;
  c[sh_index(2, 0)] = 0.2;
  c[sh_index(2, 1)] = -0.12;
  return RadialShape(2, c);
}

double rel(Complex a, Complex b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(SphereSeries, MatchesIndependentPartialWaveSum) {
  for (BC bc : {BC::dirichlet, BC::neumann})
    for (double ka : {0.5, 2.0, 7.3})
      for (double t : {-1.0, -0.4, 0.0, 0.77, 1.0}) {
        const Complex a = sphere_series_amplitude(1.0, ka, t, bc);
        EXPECT_LT(rel(a, oracle_amplitude(1.0, ka, t, bc)), 1e-12) << bc_name(bc) << " ka=" << ka << " t=" << t;
      }
}

TEST(SphereSeries, LowFrequencyLimitOfSoundSoftSphere) {
  // |A| -> a as lambda -> 0
  for (double t : {-1.0, 0.0, 1.0}) EXPECT_NEAR(std::abs(sphere_series_amplitude(1.0, 1e-4, t, BC::dirichlet)), 1.0, 1e-3);
}

TEST(SphereSeries, AmplitudeConventionUsesReversedIncidentDirection) {
  const Vec3 th(0, 0, 1), om(0, 0, -1);  // theta = -omega: forward scattering
  EXPECT_EQ(sphere_amplitude(1.0, 2.0, th, om, BC::dirichlet), sphere_series_amplitude(1.0, 2.0, 1.0, BC::dirichlet));
}

TEST(DirichletSphere, BoundaryResidualAtOffNodePoints) {
  const SphereGrid grid = build_sphere_grid(24);
  const BoundarySolver solver(RadialShape::sphere(1.0), grid, 2.0, BC::dirichlet);
  std::mt19937 rng(1);
  const Vec3 omega = random_unit(rng);
  const BoundaryDensity d = solver.solve(omega);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) worst = std::max(worst, std::abs(solver.boundary_residual(d.values, omega, random_unit(rng))));
  EXPECT_LE(worst, 1e-3);
}

TEST(DirichletSphere, ScatteredFieldMatchesSeries) {
  const SphereGrid grid = build_sphere_grid(24);
  const BoundarySolver solver(RadialShape::sphere(1.0), grid, 2.0, BC::dirichlet);
  for (const Vec3& omega : {Vec3(0, 0, 1), Vec3(0.6, 0.0, -0.8), Vec3(-1, 0, 0)}) {
    const BoundaryDensity d = solver.solve(omega);
    const Vec3 x(3, 0, 0);
    EXPECT_LT(rel(solver.scattered_field(d.values, x), oracle_scattered(1.0, 2.0, omega, x, BC::dirichlet)), 1e-3);
  }
}

TEST(DirichletSphere, FarFieldMatchesSeries) {
  const SphereGrid grid = build_sphere_grid(24);
  const RadialShape s = RadialShape::sphere(1.0);
  std::mt19937 rng(2);
  for (int trial = 0; trial < 3; ++trial) {
    const Vec3 omega = random_unit(rng);
    const BoundaryDensity d = solve_exterior({s, 2.0, BC::dirichlet, omega}, grid);
    for (const Vec3& th : {Vec3(-omega), Vec3(omega), random_unit(rng), random_unit(rng)})
      EXPECT_LT(rel(far_field_amplitude(d, s, th), oracle_amplitude(1.0, 2.0, -th.dot(omega), BC::dirichlet)), 1e-3);
  }
}

TEST(DirichletSphere, AmplitudeDependsOnlyOnScatteringAngle) {
  const SphereGrid grid = build_sphere_grid(16);
  const RadialShape s = RadialShape::sphere(1.0);
  std::mt19937 rng(4);
  const double angle = 1.1;
  std::vector<Complex> vals;
  for (int k = 0; k < 10; ++k) {
    const Vec3 omega = random_unit(rng);
    const Vec3 perp = omega.unitOrthogonal();
    const Vec3 th = std::cos(angle) * omega + std::sin(angle) * perp;
    vals.push_back(far_field_amplitude(solve_exterior({s, 2.0, BC::dirichlet, omega}, grid), s, th));
  }
  for (const Complex& v : vals) EXPECT_LT(rel(v, vals[0]), 1e-6);
}

TEST(DirichletSphere, LowFrequencyAmplitudeNearRadius) {
  const SphereGrid grid = build_sphere_grid(8);
  const RadialShape s = RadialShape::sphere(1.0);
  const BoundaryDensity d = solve_exterior({s, 0.1, BC::dirichlet, Vec3(0, 0, 1)}, grid);
  for (const Vec3& th : {Vec3(1, 0, 0), Vec3(0, 0, 1), Vec3(0, 0, -1)}) EXPECT_NEAR(std::abs(far_field_amplitude(d, s, th)), 1.0, 0.02);
}

TEST(NeumannSphere, FarFieldMatchesSeries) {
  const SphereGrid grid = build_sphere_grid(16);
  const RadialShape s = RadialShape::sphere(1.0);
  const Vec3 omega(0.0, 0.6, 0.8);
  const BoundaryDensity d = solve_exterior({s, 2.0, BC::neumann, omega}, grid);
  std::mt19937 rng(6);
  for (int k = 0; k < 6; ++k) {
    const Vec3 th = random_unit(rng);
    EXPECT_LT(rel(far_field_amplitude(d, s, th), oracle_amplitude(1.0, 2.0, -th.dot(omega), BC::neumann)), 1e-6);
  }
}

TEST(InteriorResonances, CombinedFieldSolvesStayAccurate) {
  // interior Dirichlet eigenvalues of the unit ball: zeros of j_0 and j_1;
  // interior Neumann: zeros of j_1'
  struct Case {
    BC bc;
    double k;
  };
  const Case cases[] = {{BC::dirichlet, pi}, {BC::dirichlet, 4.493409457909064}, {BC::neumann, 2.081575977818101},
                        {BC::neumann, 4.493409457909064}};
  const SphereGrid grid = build_sphere_grid(16);
  const RadialShape s = RadialShape::sphere(1.0);
  for (const Case& c : cases) {
    const BoundarySolver solver(s, grid, c.k, c.bc);
    EXPECT_GT(solver.rcond(), 1e-4) << c.k;
    const Vec3 omega(0, 0, 1);
    const BoundaryDensity d = solver.solve(omega);
    for (const Vec3& th : {Vec3(0, 0, -1), Vec3(1, 0, 0), Vec3(0, 0, 1)})
      EXPECT_LT(rel(far_field_amplitude(d, s, th), oracle_amplitude(1.0, c.k, -th.dot(omega), c.bc)), 1e-6)
          << bc_name(c.bc) << " k=" << c.k;
  }
}

TEST(GeneralShape, HelmholtzScalingSymmetry) {
  // obstacle s*O at wavenumber k/s has amplitude s * A_O(k)
  const RadialShape s = bumpy_shape();
  const SphereGrid grid = build_sphere_grid(14);
  const SphereGrid dirs = build_sphere_grid(3);
  for (BC bc : {BC::dirichlet, BC::neumann}) {
    const FarFieldTable a = compute_far_field_table(s, {2.0}, bc, grid, dirs, dirs);
    const FarFieldTable b = compute_far_field_table(s.scaled(1.5), {2.0 / 1.5}, bc, grid, dirs, dirs);
    for (std::size_t k = 0; k < a.values.size(); ++k) EXPECT_LT(rel(b.values[k], 1.5 * a.values[k]), 1e-9);
  }
}

TEST(GeneralShape, ReciprocityAndConvergence) {
  const RadialShape s = bumpy_shape();
  const SphereGrid dirs = build_sphere_grid(3);
  std::vector<FarFieldTable> tabs;
  for (int order : {10, 14, 18}) tabs.push_back(compute_far_field_table(s, {2.0}, BC::dirichlet, build_sphere_grid(order), dirs, dirs));
  double d1 = 0.0, d2 = 0.0, recip = 0.0;
  for (std::size_t i = 0; i < dirs.size(); ++i)
    for (std::size_t j = 0; j < dirs.size(); ++j) {
      d1 = std::max(d1, std::abs(tabs[1].at(0, i, j) - tabs[0].at(0, i, j)));
      d2 = std::max(d2, std::abs(tabs[2].at(0, i, j) - tabs[1].at(0, i, j)));
      recip = std::max(recip, std::abs(tabs[2].at(0, i, j) - tabs[2].at(0, j, i)));
    }
  EXPECT_LT(d2, d1);
  EXPECT_LT(d2, 1e-5);
  EXPECT_LT(recip, 1e-6);
}

TEST(Errors, NonPositiveWavenumber) {
  try {
    BoundarySolver(RadialShape::sphere(1.0), build_sphere_grid(4), 0.0, BC::dirichlet);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::invalid_argument);
  }
}

TEST(Errors, IllConditionedSystemReportsConditionEstimate) {
  SolverOptions opt;
  opt.min_rcond = 1.0;  // no real system passes this
  try {
    BoundarySolver(RadialShape::sphere(1.0), build_sphere_grid(4), 1.0, BC::dirichlet, opt);
    FAIL();
  } catch (const SolverFailure& e) {
    EXPECT_EQ(e.category(), ErrorCategory::solver_failure);
    EXPECT_GT(e.rcond(), 0.0);
    EXPECT_LT(e.rcond(), 1.0);
  }
}
