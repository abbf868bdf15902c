#pragma once
//
// Scattering phase and heat-smoothed trace.
//
// Sign convention: sound-soft phase shifts decrease (delta_0 = -lambda a),
// sigma = (1/pi) sum (2l+1) delta_l. With the scattering matrix of
// smatrix.hpp, det S(lambda) = exp(-2 pi i sigma(lambda)), so
//   sigma'(lambda) = -(1/(2 pi i)) d/dlambda log det S(lambda).
// The heat trace H(t) = int_0^inf exp(-t lambda^2) sigma'(lambda) dlambda
// behaves as -Vol (4 pi t)^{-3/2} for small t.
//

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "starscat/smatrix.hpp"

namespace starscat {

enum class PhaseMethod { det_s, partial_wave };

inline std::string_view phase_method_name(PhaseMethod m) {
  return m == PhaseMethod::det_s ? "det-S" : "partial-wave";
}

struct PhaseSamples {
  std::vector<double> lambdas;     // strictly increasing, positive
  std::vector<double> derivative;  // sigma'(lambda)
  PhaseMethod method = PhaseMethod::partial_wave;
  BoundaryCondition bc = BoundaryCondition::dirichlet;

  void validate() const {
    if (lambdas.size() != derivative.size()) fail(ErrorCategory::invalid_argument, "phase samples size mismatch");
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
      if (!(lambdas[k] > 0.0) || !std::isfinite(derivative[k]))
        fail(ErrorCategory::invalid_argument, "phase samples must be finite on positive wavenumbers");
      if (k > 0 && !(lambdas[k] > lambdas[k - 1]))
        fail(ErrorCategory::invalid_argument, "phase wavenumbers must be strictly increasing");
    }
  }
};

struct HeatTraceFit {
  std::vector<double> t;     // decreasing toward 0
  std::vector<double> heat;  // H(t)
  double a0 = 0.0;           // coefficient of (4 pi t)^{-3/2}
  double b = 0.0;            // of (4 pi t)^{-3/2} sqrt(t)
  double c = 0.0;            // of (4 pi t)^{-3/2} t, diagnostic
  double residual = 0.0;     // rms misfit of H (4 pi t)^{3/2}

  double volume_estimate() const { return std::abs(a0); }
};

namespace detail {

inline int phase_degree_cutoff(double x) { return static_cast<int>(std::ceil(x + 8.0 * std::cbrt(x))) + 12; }

/// d delta_l / dx for l = 0..lmax at x from one Bessel table.
inline void phase_shift_derivatives(int lmax, double x, BoundaryCondition bc, std::vector<double>& out) {
  const SphBesselTable tab = sph_bessel_table(lmax, x);
  out.assign(lmax + 1, 0.0);
  for (int l = 0; l <= lmax; ++l) {
    double v;
    if (bc == BoundaryCondition::dirichlet) {
      v = -1.0 / (x * x * std::norm(tab.h(l)));
    } else {
      v = -(1.0 - l * (l + 1.0) / (x * x)) / (x * x * std::norm(tab.dh(l)));
    }
    out[l] = std::isfinite(v) ? v : 0.0;
  }
}

/// pi/2 - arg(h_l) (Dirichlet) or pi/2 - arg(h_l') (Neumann), unwrapped
/// later; equal to delta_l modulo pi.
inline double phase_shift_mod_pi(const SphBesselTable& tab, int l, BoundaryCondition bc) {
  const Complex h = bc == BoundaryCondition::dirichlet ? tab.h(l) : tab.dh(l);
  if (!std::isfinite(h.imag())) return 0.0;
  return 0.5 * pi - std::arg(h);
}

}  // namespace detail

/// Phase shifts delta_l(x), l = 0..lmax, on the branch continuous in x with
/// delta_l(0+) = 0. The branch index comes from integrating d delta/dx; the
/// value itself from the Hankel-function argument.
inline std::vector<double> sphere_phase_shifts(int lmax, double x, BoundaryCondition bc) {
  if (!(x > 0.0)) fail(ErrorCategory::invalid_argument, "phase-shift argument must be positive");
  std::vector<double> integral(lmax + 1, 0.0), d;
  const int panels = std::max(1, static_cast<int>(std::ceil(2.0 * x)));
  const GaussLegendre gl = gauss_legendre(16);
  const double hp = x / panels;
  for (int p = 0; p < panels; ++p) {
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double xi = hp * (p + 0.5 * (gl.nodes[q] + 1.0));
      detail::phase_shift_derivatives(lmax, xi, bc, d);
      for (int l = 0; l <= lmax; ++l) integral[l] += 0.5 * hp * gl.weights[q] * d[l];
    }
  }
  const SphBesselTable tab = sph_bessel_table(lmax, x);
  std::vector<double> delta(lmax + 1);
  for (int l = 0; l <= lmax; ++l) {
    const double v = detail::phase_shift_mod_pi(tab, l, bc);
    delta[l] = v + pi * std::round((integral[l] - v) / pi);
  }
  return delta;
}

inline double sphere_phase_shift(int l, double x, BoundaryCondition bc) {
  if (l < 0) fail(ErrorCategory::invalid_argument, "phase-shift degree must be >= 0");
  return sphere_phase_shifts(l, x, bc)[l];
}

/// sigma(lambda) = (1/pi) sum_l (2l+1) delta_l(lambda a).
inline double sphere_scattering_phase(double a, double lambda, BoundaryCondition bc) {
  if (!(a > 0.0) || !(lambda > 0.0)) fail(ErrorCategory::invalid_argument, "radius and wavenumber must be positive");
  const double x = lambda * a;
  const int lmax = detail::phase_degree_cutoff(x);
  const std::vector<double> delta = sphere_phase_shifts(lmax, x, bc);
  double s = 0.0;
  for (int l = lmax; l >= 0; --l) s += (2.0 * l + 1.0) * delta[l];
  return s / pi;
}

/// d sigma / d lambda for a sphere of radius a.
inline double sphere_scattering_phase_derivative(double a, double lambda, BoundaryCondition bc) {
  if (!(a > 0.0) || !(lambda > 0.0)) fail(ErrorCategory::invalid_argument, "radius and wavenumber must be positive");
  const double x = lambda * a;
  const int lmax = detail::phase_degree_cutoff(x);
  std::vector<double> d;
  detail::phase_shift_derivatives(lmax, x, bc, d);
  double s = 0.0;
  for (int l = lmax; l >= 0; --l) s += (2.0 * l + 1.0) * d[l];
  return a * s / pi;
}

inline PhaseSamples sphere_phase_samples(double a, const std::vector<double>& lambdas, BoundaryCondition bc) {
  PhaseSamples p;
  p.lambdas = lambdas;
  p.method = PhaseMethod::partial_wave;
  p.bc = bc;
  p.derivative.reserve(lambdas.size());
  for (double l : lambdas) p.derivative.push_back(sphere_scattering_phase_derivative(a, l, bc));
  p.validate();
  return p;
}

/// Uniform wavenumber grid lambda_max * k / n, k = 1..n.
inline std::vector<double> uniform_wavenumbers(double lambda_max, int n) {
  if (!(lambda_max > 0.0) || n < 2) fail(ErrorCategory::invalid_argument, "need lambda_max > 0 and n >= 2");
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) v[k] = lambda_max * (k + 1) / n;
  return v;
}

/// Argument of det S with its modulus.
struct LogDet {
  double modulus;
  double phase;  // in (-pi, pi]
};

inline LogDet log_det(const Eigen::MatrixXcd& M) {
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
  const auto& U = lu.matrixLU();
  double log_mod = 0.0;
  Complex unit = lu.permutationP().determinant();
  for (Eigen::Index k = 0; k < U.rows(); ++k) {
    const Complex u = U(k, k);
    log_mod += std::log(std::abs(u));
    unit *= u / std::abs(u);
  }
  return {std::exp(log_mod), std::arg(unit)};
}

inline double wrap_phase(double p) { return std::remainder(p, 2.0 * pi); }

/// sigma'(lambda) from S at lambda - h, lambda, lambda + h.
inline double phase_derivative_det(const SMatrixDisc& minus, const SMatrixDisc& center, const SMatrixDisc& plus) {
  if (!detail::same_nodes(minus.grid, center.grid) || !detail::same_nodes(plus.grid, center.grid))
    fail(ErrorCategory::invalid_grid, "S-matrix stencil on different grids");
  const double h = 0.5 * (plus.lambda - minus.lambda);
  if (!(h > 0.0) || std::abs(center.lambda - 0.5 * (plus.lambda + minus.lambda)) > 1e-12 * std::abs(center.lambda) + 1e-15)
    fail(ErrorCategory::invalid_argument, "S-matrix stencil must be symmetric and increasing");
  LogDet d[3] = {log_det(minus.matrix), log_det(center.matrix), log_det(plus.matrix)};
  for (const LogDet& v : d)
    if (!(std::abs(v.modulus - 1.0) <= 0.1))
      fail(ErrorCategory::unreliable_s, "|det S| = " + std::to_string(v.modulus) + " deviates from 1");
  const double lo = wrap_phase(d[1].phase - d[0].phase);
  const double hi = wrap_phase(d[2].phase - d[1].phase);
  if (std::abs(lo + hi) > pi || std::abs(lo) > 0.5 * pi || std::abs(hi) > 0.5 * pi)
    fail(ErrorCategory::step_too_large, "det S phase moves too far across the stencil");
  return -(lo + hi) / (2.0 * h) / (2.0 * pi);
}

/// Det-S phase derivative of an obstacle: three far-field tables at
/// lambda +- h on a common direction grid.
inline double phase_derivative_det(const RadialShape& shape, double lambda, BoundaryCondition bc,
                                   const SphereGrid& solver_grid, const SphereGrid& directions, double h = 0.0,
                                   SolverOptions options = {}) {
  if (!(lambda > 0.0)) fail(ErrorCategory::invalid_argument, "wavenumber must be positive");
  if (h <= 0.0) h = 1e-3 * lambda;
  if (!(h < lambda)) fail(ErrorCategory::invalid_argument, "stencil step must be below the wavenumber");
  const FarFieldTable tab =
      compute_far_field_table(shape, {lambda - h, lambda, lambda + h}, bc, solver_grid, directions, directions, options);
  return phase_derivative_det(build_smatrix(tab, 0), build_smatrix(tab, 1), build_smatrix(tab, 2));
}

/// Equally spaced heat parameters in [t_lo, t_hi], returned in decreasing order.
inline std::vector<double> heat_window(double t_lo, double t_hi, int n = 13) {
  if (!(t_lo > 0.0) || !(t_hi > t_lo) || n < 3)
    fail(ErrorCategory::invalid_argument, "heat window needs 0 < t_lo < t_hi and at least 3 points");
  std::vector<double> t(n);
  for (int k = 0; k < n; ++k) t[k] = t_hi - (t_hi - t_lo) * k / (n - 1);
  return t;
}

namespace detail {

/// int_L^inf exp(-t x^2) x^n dx for n = 0, 1, 2.
inline std::array<double, 3> gaussian_tail_moments(double t, double L) {
  const double st = std::sqrt(t);
  const double e = std::exp(-t * L * L);
  const double m0 = 0.5 * std::sqrt(pi) / st * std::erfc(L * st);
  const double m1 = e / (2.0 * t);
  const double m2 = L * e / (2.0 * t) + m0 / (2.0 * t);
  return {m0, m1, m2};
}

}  // namespace detail

/// H(t) for one t: trapezoid over the samples, linear extrapolation to
/// lambda = 0 and an analytic tail from a quadratic fit of sigma' over the
/// top quarter of the band.
inline double heat_trace(const PhaseSamples& phase, double t) {
  const auto& x = phase.lambdas;
  const auto& y = phase.derivative;
  const std::size_t n = x.size();
  if (n == 0) return 0.0;
  double acc = 0.0;
  if (n >= 2) {
    const double y0 = y[0] - x[0] * (y[1] - y[0]) / (x[1] - x[0]);
    acc += 0.5 * x[0] * (y0 + y[0] * std::exp(-t * x[0] * x[0]));
  } else {
    acc += x[0] * y[0];
  }
  for (std::size_t k = 1; k < n; ++k) {
    acc += 0.5 * (x[k] - x[k - 1]) * (y[k - 1] * std::exp(-t * x[k - 1] * x[k - 1]) + y[k] * std::exp(-t * x[k] * x[k]));
  }
  // tail
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < n; ++k)
    if (x[k] >= 0.75 * x.back()) idx.push_back(k);
  if (idx.size() >= 3) {
    Eigen::MatrixXd V(idx.size(), 3);
    Eigen::VectorXd r(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double s = x[idx[k]] / x.back();
      V.row(k) << 1.0, s, s * s;
      r[k] = y[idx[k]];
    }
    const Eigen::Vector3d c = V.colPivHouseholderQr().solve(r);
    const auto m = detail::gaussian_tail_moments(t, x.back());
    const double L = x.back();
    acc += c[0] * m[0] + c[1] * m[1] / L + c[2] * m[2] / (L * L);
  }
  return acc;
}

/// Fits H(t) (4 pi t)^{3/2} = a0 + b sqrt(t) + c t over the window.
inline HeatTraceFit heat_trace_and_a0(const PhaseSamples& phase, std::vector<double> t_window) {
  phase.validate();
  if (t_window.size() < 3) fail(ErrorCategory::invalid_argument, "heat window needs at least 3 values");
  std::sort(t_window.begin(), t_window.end(), std::greater<>());
  if (!(t_window.back() > 0.0)) fail(ErrorCategory::invalid_argument, "heat parameters must be positive");
  if (phase.lambdas.empty()) fail(ErrorCategory::insufficient_bandwidth, "no phase samples");
  const double lmax = phase.lambdas.back();
  if (lmax * lmax * t_window.back() < 30.0)
    fail(ErrorCategory::insufficient_bandwidth,
         "lambda_max^2 t_min = " + std::to_string(lmax * lmax * t_window.back()) + " < 30");

  HeatTraceFit fit;
  fit.t = t_window;
  const std::size_t n = t_window.size();
  Eigen::MatrixXd V(n, 3);
  Eigen::VectorXd r(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = t_window[k];
    const double h = heat_trace(phase, t);
    fit.heat.push_back(h);
    V.row(k) << 1.0, std::sqrt(t), t;
    r[k] = h * std::pow(4.0 * pi * t, 1.5);
  }
  const Eigen::Vector3d c = V.colPivHouseholderQr().solve(r);
  fit.a0 = c[0];
  fit.b = c[1];
  fit.c = c[2];
  fit.residual = std::sqrt((V * c - r).squaredNorm() / static_cast<double>(n));
  return fit;
}

}  // namespace starscat
