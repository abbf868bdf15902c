#pragma once
//
// Discrete scattering matrix, cross sections and the amplitude identities.
//
// For n = 3 the scattering matrix kernel is
//   S(lambda, omega, theta) = delta + c lambda conj(A(lambda, -theta, omega)),  c = -i/(2 pi),
// discretised on an antipodally closed grid with symmetric square-root
// weights, so that matrix products approximate operator composition on
// L^2 of the sphere. Negative wavenumbers enter only through
// A(-lambda) = conj A(lambda).
//

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "starscat/forward.hpp"

namespace starscat {

/// c_3 = (2 pi)^{-1} exp(-i pi / 2).
inline const Complex smatrix_constant{0.0, -1.0 / (2.0 * pi)};

struct SMatrixDisc {
  double lambda = 0.0;
  SphereGrid grid;
  Eigen::MatrixXcd matrix;  // row i <-> theta_i, column j <-> omega_j
};

/// Values C[l][i] = C(lambda_l, theta_i).
struct CrossSectionData {
  std::vector<double> lambdas;
  SphereGrid directions;
  int incident_order = 0;
  int solver_order = 0;
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  std::string provenance = "measured";
  std::vector<double> values;

  std::size_t n_dir() const { return directions.size(); }
  double& at(std::size_t l, std::size_t i) { return values[l * n_dir() + i]; }
  double at(std::size_t l, std::size_t i) const { return values[l * n_dir() + i]; }
};

namespace detail {

inline bool same_nodes(const SphereGrid& a, const SphereGrid& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if ((a.nodes[k] - b.nodes[k]).norm() > 1e-14 || a.weights[k] != b.weights[k]) return false;
  }
  return true;
}

inline void require_antipodal(const SphereGrid& g) {
  if (g.size() == 0 || g.n_azimuth % 2 != 0) fail(ErrorCategory::invalid_grid, "grid is not antipodally closed");
  for (std::size_t k = 0; k < g.size(); ++k) {
    const int a = g.antipode(static_cast<int>(k));
    if ((g.nodes[a] + g.nodes[k]).norm() > 1e-13 || g.weights[a] != g.weights[k])
      fail(ErrorCategory::invalid_grid, "grid node " + std::to_string(k) + " has no antipodal partner");
  }
}

inline void require_square_table(const FarFieldTable& table) {
  if (!same_nodes(table.observation, table.incident))
    fail(ErrorCategory::invalid_grid, "observation and incident grids differ");
  require_antipodal(table.observation);
}

inline void require_lambda(const FarFieldTable& table, std::size_t l) {
  if (l >= table.lambdas.size()) fail(ErrorCategory::incomplete_data, "wavenumber index out of range");
  if (table.values.size() != table.lambdas.size() * table.n_obs() * table.n_inc())
    fail(ErrorCategory::incomplete_data, "amplitude table size does not match its grids");
}

/// Amplitude block B(i, j) = A(lambda_l, -theta_i, omega_j).
inline Eigen::MatrixXcd reflected_block(const FarFieldTable& table, std::size_t l) {
  const std::size_t n = table.n_obs();
  Eigen::MatrixXcd B(n, table.n_inc());
  for (std::size_t i = 0; i < n; ++i) {
    const int a = table.observation.antipode(static_cast<int>(i));
    for (std::size_t j = 0; j < table.n_inc(); ++j) B(i, j) = table.at(l, a, j);
  }
  return B;
}

inline Eigen::VectorXd sqrt_weights(const SphereGrid& g) {
  Eigen::VectorXd s(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) s[k] = std::sqrt(g.weights[k]);
  return s;
}

inline SMatrixDisc assemble_smatrix(double lambda, const SphereGrid& grid, const Eigen::MatrixXcd& conj_kernel) {
  const Eigen::VectorXd s = sqrt_weights(grid);
  SMatrixDisc S;
  S.lambda = lambda;
  S.grid = grid;
  S.matrix = (smatrix_constant * lambda) * (s.asDiagonal() * conj_kernel * s.asDiagonal());
  S.matrix.diagonal().array() += 1.0;
  if (!S.matrix.allFinite()) fail(ErrorCategory::incomplete_data, "non-finite amplitude in table");
  return S;
}

}  // namespace detail

/// C(lambda_l, theta_i): quadrature of |A(lambda_l, theta_i, .)|^2 over the
/// incident grid.
inline double cross_section(const FarFieldTable& table, std::size_t l, std::size_t i) {
  detail::require_lambda(table, l);
  if (i >= table.n_obs()) fail(ErrorCategory::incomplete_data, "direction index out of range");
  double acc = 0.0;
  for (std::size_t j = 0; j < table.n_inc(); ++j) {
    const Complex a = table.at(l, i, j);
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
      fail(ErrorCategory::incomplete_data, "missing amplitude sample");
    acc += table.incident.weights[j] * std::norm(a);
  }
  return acc;
}

inline CrossSectionData cross_section_data(const FarFieldTable& table, std::string provenance = "measured") {
  CrossSectionData d;
  d.lambdas = table.lambdas;
  d.directions = table.observation;
  d.incident_order = table.incident.order;
  d.solver_order = table.solver_order;
  d.bc = table.bc;
  d.provenance = std::move(provenance);
  d.values.resize(table.lambdas.size() * table.n_obs());
  for (std::size_t l = 0; l < table.lambdas.size(); ++l)
    for (std::size_t i = 0; i < table.n_obs(); ++i) d.at(l, i) = cross_section(table, l, i);
  return d;
}

/// S(lambda_l) from a table whose observation and incident grids coincide.
inline SMatrixDisc build_smatrix(const FarFieldTable& table, std::size_t l) {
  detail::require_square_table(table);
  detail::require_lambda(table, l);
  return detail::assemble_smatrix(table.lambdas[l], table.observation, detail::reflected_block(table, l).conjugate());
}

/// S(-lambda_l), with A(-lambda) = conj A(lambda).
inline SMatrixDisc build_smatrix_negative(const FarFieldTable& table, std::size_t l) {
  detail::require_square_table(table);
  detail::require_lambda(table, l);
  return detail::assemble_smatrix(-table.lambdas[l], table.observation, detail::reflected_block(table, l));
}

inline double unitarity_defect(const SMatrixDisc& S) {
  const Eigen::Index n = S.matrix.rows();
  return (S.matrix * S.matrix.adjoint() - Eigen::MatrixXcd::Identity(n, n)).norm();
}

struct Residual {
  std::string name;
  double value = 0.0;
  std::string note;
};

struct ResidualReport {
  double lambda = 0.0;
  std::vector<Residual> entries;

  double get(const std::string& name) const {
    for (const auto& e : entries)
      if (e.name == name) return e.value;
    fail(ErrorCategory::invalid_argument, "no residual named " + name);
  }
};

/// Residuals of the amplitude and scattering-matrix identities at one
/// wavenumber. Primary entries: reciprocity, conjugate_symmetry,
/// lax_phillips, unitarity, inverse_relation. The remaining entries are
/// diagnostics.
inline ResidualReport identity_residuals(const FarFieldTable& table, std::size_t l) {
  detail::require_square_table(table);
  detail::require_lambda(table, l);
  const double lambda = table.lambdas[l];
  const std::size_t n = table.n_obs();
  const SphereGrid& g = table.observation;

  Eigen::MatrixXcd A(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) A(i, j) = table.at(l, i, j);
  const Eigen::MatrixXcd B = detail::reflected_block(table, l);
  Eigen::VectorXd w(n);
  for (std::size_t k = 0; k < n; ++k) w[k] = g.weights[k];

  ResidualReport rep;
  rep.lambda = lambda;

  rep.entries.push_back({"reciprocity", (A - A.transpose()).cwiseAbs().maxCoeff(), "max |A(w,t) - A(t,w)|"});

  // A(-lambda) is defined as conj A(lambda), so this one is zero by construction.
  const Eigen::MatrixXcd A_neg = A.conjugate();
  rep.entries.push_back({"conjugate_symmetry", (A_neg - A.conjugate()).cwiseAbs().maxCoeff(),
                         "tautology: negative wavenumbers defined by conjugation"});

  // R(i, j) for the pair (theta_i, omega_j):
  //   A(-w, t) - conj A(-t, w) + lambda/(2 pi i) int A(-w, t') conj A(-t, t') dt'
  const Eigen::MatrixXcd M = B * w.asDiagonal() * B.adjoint();  // M(j, i) = int B(j,.) conj B(i,.)
  const Complex q = lambda / (2.0 * pi * I);
  const Eigen::MatrixXcd quad = q * M.transpose();
  rep.entries.push_back(
      {"lax_phillips", (B.transpose() - B.conjugate() + quad).cwiseAbs().maxCoeff(), "max over grid pairs"});
  rep.entries.push_back({"lax_phillips_alt_sign", (B.transpose() + B.conjugate() + quad).cwiseAbs().maxCoeff(),
                         "diagnostic: conjugated term with the opposite sign"});

  // forward direction: Im A(t, -t) = lambda/(4 pi) C(t)
  double optical = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Complex fwd = A(i, g.antipode(static_cast<int>(i)));
    optical = std::max(optical, std::abs(fwd.imag() - lambda / (4.0 * pi) * cross_section(table, l, i)));
  }
  rep.entries.push_back({"optical_theorem", optical, "diagnostic: max |Im A(t,-t) - lambda C(t) / 4pi|"});

  const SMatrixDisc S = build_smatrix(table, l);
  const SMatrixDisc Sm = build_smatrix_negative(table, l);
  const Eigen::MatrixXcd Id = Eigen::MatrixXcd::Identity(n, n);
  rep.entries.push_back({"unitarity", unitarity_defect(S), "Frobenius ||S S* - I||"});
  rep.entries.push_back({"inverse_relation", (S.matrix * Sm.matrix - Id).norm(), "Frobenius ||S(l) S(-l) - I||"});

  // same relation with S(-lambda) conjugated by the antipodal map
  Eigen::MatrixXcd JSmJ(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      JSmJ(i, j) = Sm.matrix(g.antipode(static_cast<int>(i)), g.antipode(static_cast<int>(j)));
  rep.entries.push_back(
      {"inverse_relation_antipodal", (S.matrix * JSmJ - Id).norm(), "diagnostic: ||S(l) J S(-l) J - I||"});
  return rep;
}

/// Primary residual names in report order.
inline const std::vector<std::string>& primary_residual_names() {
  static const std::vector<std::string> names{"reciprocity", "conjugate_symmetry", "lax_phillips", "unitarity",
                                              "inverse_relation"};
  return names;
}

}  // namespace starscat
