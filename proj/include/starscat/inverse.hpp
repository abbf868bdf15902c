#pragma once
//
// Shape recovery from cross-section data near a fixed frequency.
//
// Output least squares over the radial-function coefficients:
//   F(c) = 1/2 sum_{lambda, theta} w_theta (C_model - C_data)^2 + alpha/2 sum l(l+1) c_{l,m}^2
// minimised by Levenberg-Marquardt with a finite-difference Jacobian.
//

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "starscat/smatrix.hpp"

namespace starscat {

/// Discretisation of the cross-section forward map.
struct ForwardConfig {
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  int solver_order = 12;
  int direction_order = 6;   // observation directions theta
  int incident_order = 12;   // quadrature over incident directions
  SolverOptions options{};
};

struct NoiseModel {
  double sigma = 0.0;  // absolute, area units
  std::uint64_t seed = 0;
};

/// C(lambda, theta) of a shape on the configured grids.
inline CrossSectionData compute_cross_sections(const RadialShape& shape, const std::vector<double>& lambdas,
                                               const ForwardConfig& cfg, std::string provenance = "model") {
  const SphereGrid solver = build_sphere_grid(cfg.solver_order);
  const SphereGrid dirs = build_sphere_grid(cfg.direction_order);
  const SphereGrid inc = build_sphere_grid(cfg.incident_order);
  CrossSectionData data;
  data.lambdas = lambdas;
  data.directions = dirs;
  data.incident_order = cfg.incident_order;
  data.solver_order = cfg.solver_order;
  data.bc = cfg.bc;
  data.provenance = std::move(provenance);
  data.values.resize(lambdas.size() * dirs.size());
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    if (!(lambdas[l] > 0.0)) fail(ErrorCategory::invalid_argument, "wavenumbers must be positive");
    FarFieldTable tab;
    try {
      tab = compute_far_field_table(shape, {lambdas[l]}, cfg.bc, solver, dirs, inc, cfg.options);
    } catch (const SolverFailure& e) {
      throw SolverFailure("at lambda[" + std::to_string(l) + "] = " + std::to_string(lambdas[l]) + ": " + e.what(),
                          e.rcond());
    }
    for (std::size_t i = 0; i < dirs.size(); ++i) data.at(l, i) = cross_section(tab, 0, i);
  }
  return data;
}

inline CrossSectionData synthesize_cross_section_data(const RadialShape& shape, const std::vector<double>& lambdas,
                                                      const ForwardConfig& cfg, const NoiseModel& noise = {},
                                                      const std::string& shape_id = "synthetic") {
  shape.validate();
  if (noise.sigma < 0.0) fail(ErrorCategory::invalid_argument, "noise level must be >= 0");
  CrossSectionData data = compute_cross_sections(shape, lambdas, cfg, shape_id);
  if (noise.sigma > 0.0) {
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> gauss(0.0, noise.sigma);
    for (double& v : data.values) v += gauss(rng);
    data.provenance += " noise-sigma=" + std::to_string(noise.sigma) + " seed=" + std::to_string(noise.seed);
  }
  return data;
}

struct ReconstructionConfig {
  int max_degree = 2;          // L_inv
  double alpha = 0.0;          // weight of sum l(l+1) c_{l,m}^2
  int max_iterations = 30;
  int max_backtracks = 12;
  double initial_damping = 1e-3;
  double null_tolerance = 1e-9;  // relative eigenvalue cutoff of the normal matrix
  double gradient_tolerance = 1e-6;  // relative to the initial gradient norm
  double step_tolerance = 1e-10;  // relative coefficient change
  double fd_step = 1e-4;
  double min_radius = 0.05;       // positivity floor for the projection
  ForwardConfig forward{};
};

struct MisfitReport {
  double misfit = 0.0;
  double data_term = 0.0;
  double regularization = 0.0;
  Eigen::VectorXd gradient;
  std::vector<double> residuals;  // C_model - C_data, lambda-major
  std::vector<double> weights;    // direction weight of each residual
  Eigen::MatrixXd jacobian;       // d residual / d coefficient
};

namespace detail {

inline void require_compatible(const CrossSectionData& data, const ForwardConfig& cfg) {
  if (data.values.size() != data.lambdas.size() * data.n_dir() || data.lambdas.empty())
    fail(ErrorCategory::incomplete_data, "cross-section data size does not match its grid");
  if (data.directions.order != cfg.direction_order)
    fail(ErrorCategory::invalid_grid, "data direction grid does not match the forward configuration");
}

inline Eigen::VectorXd regularization_profile(int L) {
  Eigen::VectorXd p(sh_count(L));
  for (int l = 0; l <= L; ++l)
    for (int m = -l; m <= l; ++m) p[sh_index(l, m)] = l * (l + 1.0);
  return p;
}

inline std::vector<double> model_values(const Eigen::VectorXd& c, int L, const CrossSectionData& data,
                                        const ForwardConfig& cfg) {
  const RadialShape shape(L, std::vector<double>(c.data(), c.data() + c.size()));
  if (!shape.is_valid()) fail(ErrorCategory::invalid_iterate, "iterate is not starlike");
  return compute_cross_sections(shape, data.lambdas, cfg).values;
}

}  // namespace detail

/// Raises c_{0,0} until the radius is at least min_radius on the validation grid.
inline Eigen::VectorXd project_positive(const Eigen::VectorXd& c, int L, double min_radius) {
  for (Eigen::Index k = 0; k < c.size(); ++k)
    if (!std::isfinite(c[k])) fail(ErrorCategory::invalid_iterate, "non-finite coefficient");
  const RadialShape shape(L, std::vector<double>(c.data(), c.data() + c.size()));
  const double rmin = shape.min_radius_on_grid(shape.validation_order());
  Eigen::VectorXd out = c;
  if (rmin < min_radius) out[0] += (min_radius - rmin) * std::sqrt(4.0 * pi);
  return out;
}

/// Objective value only.
inline double misfit_value(const Eigen::VectorXd& coeffs, const CrossSectionData& data,
                           const ReconstructionConfig& cfg) {
  const int L = cfg.max_degree;
  const std::vector<double> model = detail::model_values(coeffs, L, data, cfg.forward);
  const std::size_t nd = data.n_dir();
  double acc = 0.0;
  for (std::size_t k = 0; k < model.size(); ++k) {
    const double r = model[k] - data.values[k];
    acc += data.directions.weights[k % nd] * r * r;
  }
  const Eigen::VectorXd p = detail::regularization_profile(L);
  return 0.5 * acc + 0.5 * cfg.alpha * (p.array() * coeffs.array().square()).sum();
}

inline MisfitReport misfit_and_gradient(const Eigen::VectorXd& coeffs_in, const CrossSectionData& data,
                                        const ReconstructionConfig& cfg) {
  const int L = cfg.max_degree;
  if (coeffs_in.size() != sh_count(L)) fail(ErrorCategory::invalid_argument, "coefficient count does not match L_inv");
  if (!(cfg.fd_step > 0.0)) fail(ErrorCategory::invalid_argument, "finite-difference step must be positive");
  detail::require_compatible(data, cfg.forward);
  const Eigen::VectorXd c = project_positive(coeffs_in, L, cfg.min_radius);

  MisfitReport rep;
  const std::vector<double> model = detail::model_values(c, L, data, cfg.forward);
  const std::size_t nr = model.size(), nd = data.n_dir();
  rep.residuals.resize(nr);
  rep.weights.resize(nr);
  for (std::size_t k = 0; k < nr; ++k) {
    rep.residuals[k] = model[k] - data.values[k];
    rep.weights[k] = data.directions.weights[k % nd];
    rep.data_term += 0.5 * rep.weights[k] * rep.residuals[k] * rep.residuals[k];
  }
  const Eigen::VectorXd p = detail::regularization_profile(L);
  rep.regularization = 0.5 * cfg.alpha * (p.array() * c.array().square()).sum();
  rep.misfit = rep.data_term + rep.regularization;

  rep.jacobian.resize(nr, c.size());
  for (Eigen::Index j = 0; j < c.size(); ++j) {
    Eigen::VectorXd cp = c, cm = c;
    cp[j] += cfg.fd_step;
    cm[j] -= cfg.fd_step;
    const std::vector<double> fp = detail::model_values(cp, L, data, cfg.forward);
    const std::vector<double> fm = detail::model_values(cm, L, data, cfg.forward);
    for (std::size_t k = 0; k < nr; ++k) rep.jacobian(k, j) = (fp[k] - fm[k]) / (2.0 * cfg.fd_step);
  }
  const Eigen::Map<const Eigen::VectorXd> r(rep.residuals.data(), nr);
  const Eigen::Map<const Eigen::VectorXd> w(rep.weights.data(), nr);
  rep.gradient = rep.jacobian.transpose() * (w.array() * r.array()).matrix() + cfg.alpha * (p.array() * c.array()).matrix();
  return rep;
}

struct IterationRecord {
  int iteration = 0;
  double misfit = 0.0;
  double gradient_norm = 0.0;
  double damping = 0.0;
};

struct ReconstructionResult {
  RadialShape shape;
  bool converged = false;
  std::string status;
  std::vector<IterationRecord> log;
};

/// Levenberg-Marquardt on the coefficient vector. Trial steps that raise
/// the misfit or leave the starlike set are rejected and the damping is
/// increased; the returned shape is the best accepted iterate.
inline ReconstructionResult reconstruct_shape(const CrossSectionData& data, const RadialShape& init,
                                              const ReconstructionConfig& cfg) {
  if (cfg.max_degree < 0) fail(ErrorCategory::invalid_argument, "L_inv must be >= 0");
  if (cfg.alpha < 0.0) fail(ErrorCategory::invalid_argument, "alpha must be >= 0");
  init.validate();
  detail::require_compatible(data, cfg.forward);
  const int L = cfg.max_degree;
  const RadialShape start = init.with_degree(L);
  Eigen::VectorXd c = project_positive(Eigen::Map<const Eigen::VectorXd>(start.coeffs().data(), sh_count(L)), L,
                                       cfg.min_radius);
  const Eigen::VectorXd p = detail::regularization_profile(L);

  ReconstructionResult res;
  double mu = cfg.initial_damping;
  MisfitReport rep = misfit_and_gradient(c, data, cfg);
  const double g0 = rep.gradient.norm();
  const double gtol = cfg.gradient_tolerance * std::max(g0, 1e-300);
  for (int it = 0;; ++it) {
    const double gnorm = rep.gradient.norm();
    res.log.push_back({it, rep.misfit, gnorm, mu});
    if (gnorm <= gtol || rep.data_term == 0.0) {
      res.converged = true;
      res.status = "gradient tolerance reached";
      break;
    }
    if (it >= cfg.max_iterations) {
      res.status = "iteration limit reached";
      break;
    }
    const Eigen::Map<const Eigen::VectorXd> w(rep.weights.data(), rep.weights.size());
    Eigen::MatrixXd H = rep.jacobian.transpose() * w.asDiagonal() * rep.jacobian;
    H.diagonal() += cfg.alpha * p;
    // Directions the data cannot see (translations, to first order) are
    // dropped rather than damped.
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double emax = std::max(ev.maxCoeff(), 1e-300);
    const Eigen::VectorXd gp = eig.eigenvectors().transpose() * rep.gradient;

    bool accepted = false;
    Eigen::VectorXd step;
    for (int bt = 0; bt < cfg.max_backtracks; ++bt) {
      Eigen::VectorXd q = Eigen::VectorXd::Zero(gp.size());
      for (Eigen::Index k = 0; k < gp.size(); ++k)
        if (ev(k) > cfg.null_tolerance * emax) q(k) = -gp(k) / (ev(k) + mu * emax);
      step = eig.eigenvectors() * q;
      if (!step.allFinite()) {
        mu *= 10.0;
        continue;
      }
      Eigen::VectorXd trial;
      double f = std::numeric_limits<double>::infinity();
      try {
        trial = project_positive(c + step, L, cfg.min_radius);
        f = misfit_value(trial, data, cfg);
      } catch (const Error& e) {
        if (e.category() != ErrorCategory::invalid_iterate && e.category() != ErrorCategory::solver_failure) throw;
      }
      if (f < rep.misfit) {
        c = trial;
        mu = std::max(mu / 3.0, 1e-12);
        accepted = true;
        break;
      }
      mu *= 4.0;
    }
    if (!accepted) {
      res.status = "no progress: damping cap reached";
      res.converged = gnorm <= 1e3 * gtol;
      break;
    }
    rep = misfit_and_gradient(c, data, cfg);
    if (step.norm() <= cfg.step_tolerance * std::max(1.0, c.norm())) {
      res.log.push_back({it + 1, rep.misfit, rep.gradient.norm(), mu});
      res.converged = true;
      res.status = "step tolerance reached";
      break;
    }
  }
  res.shape = RadialShape(L, std::vector<double>(c.data(), c.data() + c.size()));
  return res;
}

/// Sphere radius whose series cross section matches the data mean at the
/// central wavenumber; used as the default initial guess.
inline double radius_from_cross_section(const CrossSectionData& data) {
  if (data.lambdas.empty() || data.values.empty()) fail(ErrorCategory::incomplete_data, "empty data");
  const std::size_t lc = data.lambdas.size() / 2;
  const double lam = data.lambdas[lc];
  double target = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < data.n_dir(); ++i) {
    target += data.directions.weights[i] * data.at(lc, i);
    wsum += data.directions.weights[i];
  }
  target /= wsum;
  auto model = [&](double a) {
    const double x = lam * a;
    const int lmax = static_cast<int>(std::ceil(x + 8.0 * std::cbrt(x))) + 12;
    const SphBesselTable tab = sph_bessel_table(lmax, x);
    double s = 0.0;
    for (int l = 0; l <= lmax; ++l) {
      const Complex r = data.bc == BoundaryCondition::dirichlet ? tab.j[l] / tab.h(l) : tab.dj[l] / tab.dh(l);
      if (std::isfinite(r.real()) && std::isfinite(r.imag())) s += (2.0 * l + 1.0) * std::norm(r);
    }
    return 4.0 * pi / (lam * lam) * s;
  };
  // coarse scan, then bisection on the first bracket
  double prev_a = 0.01, prev_v = model(prev_a) - target;
  for (double a = 0.02; a <= 20.0; a *= 1.05) {
    const double v = model(a) - target;
    if ((prev_v <= 0.0) != (v <= 0.0)) {
      double lo = prev_a, hi = a;
      for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        if ((model(mid) - target <= 0.0) == (prev_v <= 0.0)) lo = mid; else hi = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev_a = a;
    prev_v = v;
  }
  fail(ErrorCategory::invalid_argument, "cross-section level outside the sphere model range");
}

/// Window of three wavenumbers lambda0 (1 -+ 5%).
inline std::vector<double> frequency_window(double lambda0, double rel = 0.05) {
  if (!(lambda0 > 0.0) || !(rel > 0.0 && rel < 1.0)) fail(ErrorCategory::invalid_argument, "bad frequency window");
  return {lambda0 * (1.0 - rel), lambda0, lambda0 * (1.0 + rel)};
}

/// max over the window and the direction grid of |C1 - C2|.
inline double distinguishability(const RadialShape& s1, const RadialShape& s2, double lambda0,
                                 const ForwardConfig& cfg) {
  s1.validate();
  s2.validate();
  const auto lambdas = frequency_window(lambda0);
  const CrossSectionData a = compute_cross_sections(s1, lambdas, cfg);
  const CrossSectionData b = compute_cross_sections(s2, lambdas, cfg);
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) m = std::max(m, std::abs(a.values[k] - b.values[k]));
  return m;
}

/// Discretisation noise floor: max |C| change when the solver and incident
/// orders are raised by `refine`.
inline double solver_noise_floor(const RadialShape& shape, double lambda0, const ForwardConfig& cfg, int refine = 4) {
  ForwardConfig fine = cfg;
  fine.solver_order += refine;
  fine.incident_order += refine;
  const auto lambdas = frequency_window(lambda0);
  const CrossSectionData a = compute_cross_sections(shape, lambdas, cfg);
  const CrossSectionData b = compute_cross_sections(shape, lambdas, fine);
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) m = std::max(m, std::abs(a.values[k] - b.values[k]));
  return m;
}

/// Uniform rescaling of a shape to a prescribed volume.
inline RadialShape rescale_to_volume(const RadialShape& shape, double target_volume) {
  if (!(target_volume > 0.0)) fail(ErrorCategory::invalid_argument, "target volume must be positive");
  return shape.scaled(std::cbrt(target_volume / volume(shape)));
}

}  // namespace starscat
