#pragma once
//
// Exterior Dirichlet/Neumann Helmholtz solver for starlike obstacles.
//
// Discretisation: Nystrom on the parameter sphere. The density is
// interpolated by real spherical harmonics of degree <= grid.order; for each
// target the boundary integrals are evaluated on a local product rule in
// polar coordinates centred at the target (Gauss-Legendre in the polar
// angle, trapezoid in azimuth), where the surface element cancels the
// 1/|x-y| singularity. The hypersingular operator is rewritten through
// Maue's identity; its remaining principal-value part is odd in the local
// azimuth and vanishes on the symmetric azimuth rule.
//
// Sound-soft:  u^s = (D - i eta S) phi,   (1/2 + K - i eta S) phi = -u^i, eta = k
// Sound-hard:  u^s = D u (u total field), (1/2 - K - a T) u = u^i + a du^i/dn, a = i/k
//
// Amplitudes are reported for the incident wave exp(-i k omega.x), i.e. the
// standard plane wave with propagation direction d = -omega.
//

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "starscat/geometry.hpp"
#include "starscat/mathcore.hpp"

namespace starscat {

enum class BoundaryCondition { dirichlet, neumann };

inline std::string_view bc_name(BoundaryCondition bc) {
  return bc == BoundaryCondition::dirichlet ? "dirichlet" : "neumann";
}

struct ScatterProblem {
  RadialShape shape;
  double wavenumber = 1.0;
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  Vec3 incident_direction = Vec3::UnitZ();

  void validate() const {
    if (!(wavenumber > 0.0) || !std::isfinite(wavenumber))
      fail(ErrorCategory::invalid_argument, "wavenumber must be positive");
    if (std::abs(incident_direction.norm() - 1.0) > 1e-12)
      fail(ErrorCategory::invalid_argument, "incident direction must be a unit vector");
    shape.validate();
  }
};

/// Layer density at the solver grid nodes. For Dirichlet problems this is
/// the combined-layer density; for Neumann problems the total field.
struct BoundaryDensity {
  Eigen::VectorXcd values;
  SphereGrid grid;
  double wavenumber = 0.0;
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  Vec3 incident_direction = Vec3::UnitZ();
};

/// Amplitudes A[l][i][j] = A(lambda_l, obs_i, inc_j) in the exp(-i k omega.x)
/// convention.
struct FarFieldTable {
  std::vector<double> lambdas;
  SphereGrid observation;
  SphereGrid incident;
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  int solver_order = 0;
  std::vector<Complex> values;

  std::size_t n_obs() const { return observation.size(); }
  std::size_t n_inc() const { return incident.size(); }
  Complex& at(std::size_t l, std::size_t i, std::size_t j) {
    return values[(l * n_obs() + i) * n_inc() + j];
  }
  const Complex& at(std::size_t l, std::size_t i, std::size_t j) const {
    return values[(l * n_obs() + i) * n_inc() + j];
  }
};

struct SolverOptions {
  /// Polar node count of the local rule is local_order + 1; <= 0 means grid order.
  int local_order = 0;
  /// Reciprocal condition estimate below which the system is rejected.
  double min_rcond = 1e-12;
};

namespace detail {

/// Coefficients of c I + s S + k K + t T.
struct OperatorMix {
  Complex identity{0.0};
  Complex single{0.0};
  Complex double_layer{0.0};
  Complex hypersingular{0.0};
};

inline OperatorMix system_mix(BoundaryCondition bc, double k) {
  if (bc == BoundaryCondition::dirichlet) return {0.5, -I * k, 1.0, 0.0};
  return {0.5, 0.0, -1.0, -I / k};
}

struct LocalRule {
  std::vector<Vec3> points;  // around the north pole
  std::vector<double> weights;
};

inline LocalRule local_polar_rule(int order) {
  const int np = order + 1;
  const int na = 2 * np;
  const GaussLegendre gl = gauss_legendre(np);
  LocalRule rule;
  for (int a = 0; a < np; ++a) {
    const double th = 0.5 * pi * (gl.nodes[a] + 1.0);
    const double w = 0.5 * pi * gl.weights[a] * std::sin(th) * 2.0 * pi / na;
    for (int b = 0; b < na; ++b) {
      const double ph = 2.0 * pi * b / na;
      rule.points.emplace_back(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
      rule.weights.push_back(w);
    }
  }
  // exact azimuthal antisymmetry (phi -> phi + pi) of the tangential part
  for (int a = 0; a < np; ++a) {
    for (int b = 0; b < na / 2; ++b) {
      Vec3& p = rule.points[a * na + b + na / 2];
      const Vec3& q = rule.points[a * na + b];
      p.x() = -q.x();
      p.y() = -q.y();
    }
  }
  return rule;
}

inline Eigen::Matrix3d rotation_y(double angle) {
  Eigen::Matrix3d r;
  const double c = std::cos(angle), s = std::sin(angle);
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

inline Eigen::Matrix3d rotation_z(double c, double s) {
  Eigen::Matrix3d r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

/// Rotation taking the north pole to dir.
inline Eigen::Matrix3d rotation_to(const Vec3& dir) {
  const double s = std::hypot(dir.x(), dir.y());
  const double c_phi = s > 0.0 ? dir.x() / s : 1.0;
  const double s_phi = s > 0.0 ? dir.y() / s : 0.0;
  return rotation_z(c_phi, s_phi) * rotation_y(std::atan2(s, dir.z()));
}

/// Geometry of the boundary point at a parameter direction.
struct BoundaryPoint {
  Vec3 dir;
  Vec3 point;
  Vec3 normal_area;  // outward normal times area element per solid angle
  Vec3 grad;         // surface gradient of r on the unit sphere
  double radius;
  double area;
};

inline BoundaryPoint boundary_point(const RadialShape& shape, const Vec3& dir) {
  const RadialSample s = sample_radial(shape, dir);
  return {dir, s.point, s.normal_area, s.grad, s.radius, s.normal_area.norm()};
}

/// Weighted kernel of the operator mix at one source point: scalar part
/// multiplying the density, and a tangential vector multiplying the surface
/// gradient (on the unit sphere) of the density.
struct KernelValue {
  Complex scalar;
  Eigen::Vector3cd tangential;
};

inline KernelValue kernel(const OperatorMix& mix, double k, const Vec3& x, const Vec3& n_x,
                          const BoundaryPoint& y, double weight) {
  const Vec3 d = y.point - x;
  const double R = d.norm();
  const Complex e = std::exp(I * (k * R));
  const Complex G = e / (4.0 * pi * R);
  const Complex g1 = G * (I * k - 1.0 / R) / R;  // grad_y G = g1 d
  Complex scalar = 0.0;
  if (mix.single != 0.0) scalar += mix.single * G * y.area;
  if (mix.double_layer != 0.0) scalar += mix.double_layer * g1 * d.dot(y.normal_area);
  KernelValue kv{0.0, Eigen::Vector3cd::Zero()};
  if (mix.hypersingular != 0.0) {
    scalar += mix.hypersingular * k * k * G * n_x.dot(y.normal_area);
    // n_x . curl of the single layer of n_y x grad_Gamma(u); with
    // dd = n_x x grad_x G the integrand is (n_y x grad u) J . dd
    const Vec3 nxd = n_x.cross(d);
    const Vec3 a = y.radius * (nxd.cross(y.dir));  // times -g1
    const double sd = y.dir.dot(nxd);
    const Vec3 b = y.grad.cross(y.dir);
    const Complex f = -g1 * mix.hypersingular * weight;
    kv.tangential = f * (a + sd * b).cast<Complex>();
  }
  kv.scalar = scalar * weight;
  return kv;
}

}  // namespace detail

/// Assembled and factorised boundary system for one (shape, grid, k, bc).
class BoundarySolver {
 public:
  BoundarySolver(const RadialShape& shape, const SphereGrid& grid, double wavenumber,
                 BoundaryCondition bc, SolverOptions options = {})
      : shape_(shape), grid_(grid), k_(wavenumber), bc_(bc), options_(options) {
    if (!(wavenumber > 0.0) || !std::isfinite(wavenumber))
      fail(ErrorCategory::invalid_argument, "wavenumber must be positive");
    shape_.validate();
    if (options_.local_order <= 0) options_.local_order = grid_.order;
    setup_nodes();
    assemble();
  }

  const SphereGrid& grid() const { return grid_; }
  const RadialShape& shape() const { return shape_; }
  double wavenumber() const { return k_; }
  BoundaryCondition bc() const { return bc_; }
  double rcond() const { return rcond_; }
  int interpolation_degree() const { return grid_.order; }
  Eigen::MatrixXcd system_matrix() const { return lu_.reconstructedMatrix(); }

  /// Right-hand side for incidence exp(-i k omega.x).
  Eigen::VectorXcd rhs(const Vec3& omega) const {
    const std::size_t n = grid_.size();
    Eigen::VectorXcd b(n);
    const Complex a = I / k_;
    for (std::size_t j = 0; j < n; ++j) {
      const Complex ui = std::exp(-I * (k_ * omega.dot(nodes_[j].point)));
      if (bc_ == BoundaryCondition::dirichlet) {
        b[j] = -ui;
      } else {
        const Complex dn = -I * k_ * omega.dot(nodes_[j].normal_area) / nodes_[j].area * ui;
        b[j] = ui + a * dn;
      }
    }
    return b;
  }

  BoundaryDensity solve(const Vec3& omega) const {
    BoundaryDensity d;
    d.values = lu_.solve(rhs(omega));
    d.grid = grid_;
    d.wavenumber = k_;
    d.bc = bc_;
    d.incident_direction = omega;
    check_finite(d.values);
    return d;
  }

  /// Densities for several incident directions, one per column.
  Eigen::MatrixXcd solve_many(const std::vector<Vec3>& omegas) const {
    Eigen::MatrixXcd B(grid_.size(), omegas.size());
    for (std::size_t c = 0; c < omegas.size(); ++c) B.col(c) = rhs(omegas[c]);
    Eigen::MatrixXcd X = lu_.solve(B);
    check_finite(X);
    return X;
  }

  /// Row i maps nodal densities to the amplitude in direction dirs[i].
  Eigen::MatrixXcd far_field_matrix(const std::vector<Vec3>& dirs) const {
    const std::size_t n = grid_.size();
    Eigen::MatrixXcd F(dirs.size(), n);
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      const Vec3& th = dirs[i];
      for (std::size_t j = 0; j < n; ++j) {
        const auto& y = nodes_[j];
        Complex kern = -I * k_ * th.dot(y.normal_area);
        if (bc_ == BoundaryCondition::dirichlet) kern += -I * k_ * y.area;
        F(i, j) = grid_.weights[j] / (4.0 * pi) * kern * std::exp(-I * (k_ * th.dot(y.point)));
      }
    }
    return F;
  }

  /// Scattered field at a point away from the boundary (plain node quadrature).
  Complex scattered_field(const Eigen::VectorXcd& density, const Vec3& x) const {
    const auto mix = field_mix();
    Complex acc = 0.0;
    for (std::size_t j = 0; j < grid_.size(); ++j) {
      acc += detail::kernel(mix, k_, x, Vec3::Zero(), nodes_[j], grid_.weights[j]).scalar * density[j];
    }
    return acc;
  }

  /// Applies c I + s S + k K + t T to a nodal density at the boundary point
  /// over an arbitrary direction, using the singular local rule and harmonic
  /// interpolation of the density.
  Complex apply_operator(const detail::OperatorMix& mix, const Eigen::VectorXcd& density, const Vec3& dir) const {
    const Eigen::VectorXd cr = transform_ * density.real();
    const Eigen::VectorXd ci = transform_ * density.imag();
    const detail::BoundaryPoint x = detail::boundary_point(shape_, dir);
    const Vec3 n_x = x.normal_area / x.area;
    const int nc = sh_count(grid_.order);
    std::vector<double> v(nc), dt(nc), dp(nc);
    auto interp = [&](const std::vector<double>& basis) {
      const Eigen::Map<const Eigen::VectorXd> b(basis.data(), nc);
      return Complex(b.dot(cr), b.dot(ci));
    };
    eval_sph_harm_all(grid_.order, dir, v);
    Complex acc = mix.identity * interp(v);
    const Eigen::Matrix3d Q = detail::rotation_to(dir);
    for (std::size_t q = 0; q < local_.points.size(); ++q) {
      const Vec3 z = (Q * local_.points[q]).normalized();
      const detail::BoundaryPoint y = detail::boundary_point(shape_, z);
      const auto kv = detail::kernel(mix, k_, x.point, n_x, y, local_.weights[q]);
      eval_sph_harm_all(grid_.order, z, v, dt, dp);
      acc += kv.scalar * interp(v);
      if (mix.hypersingular != 0.0) {
        const TangentFrame f = tangent_frame(z);
        const Complex at = f.e_theta.cast<Complex>().dot(kv.tangential);
        const Complex ap = f.e_phi.cast<Complex>().dot(kv.tangential);
        acc += at * interp(dt) + ap * interp(dp);
      }
    }
    return acc;
  }

  /// Boundary-condition residual of the total field at the boundary point
  /// over dir: u for Dirichlet, du/dn for Neumann.
  Complex boundary_residual(const Eigen::VectorXcd& density, const Vec3& omega, const Vec3& dir) const {
    const detail::BoundaryPoint x = detail::boundary_point(shape_, dir);
    const Complex ui = std::exp(-I * (k_ * omega.dot(x.point)));
    if (bc_ == BoundaryCondition::dirichlet) return apply_operator({0.5, -I * k_, 1.0, 0.0}, density, dir) + ui;
    const Vec3 n_x = x.normal_area / x.area;
    return apply_operator({0.0, 0.0, 0.0, 1.0}, density, dir) - I * k_ * omega.dot(n_x) * ui;
  }

 private:
  detail::OperatorMix field_mix() const {
    if (bc_ == BoundaryCondition::dirichlet) return {0.0, -I * k_, 1.0, 0.0};
    return {0.0, 0.0, 1.0, 0.0};
  }

  template <class M>
  static void check_finite(const M& m) {
    if (!m.allFinite()) throw SolverFailure("non-finite solution", 0.0);
  }

  void setup_nodes() {
    const std::size_t n = grid_.size();
    const int nc = sh_count(grid_.order);
    nodes_.reserve(n);
    for (const Vec3& d : grid_.nodes) nodes_.push_back(detail::boundary_point(shape_, d));
    transform_.resize(nc, n);
    std::vector<double> v(nc);
    for (std::size_t j = 0; j < n; ++j) {
      eval_sph_harm_all(grid_.order, grid_.nodes[j], v);
      for (int c = 0; c < nc; ++c) transform_(c, j) = grid_.weights[j] * v[c];
    }
    local_ = detail::local_polar_rule(options_.local_order);
  }

  void assemble() {
    const std::size_t n = grid_.size();
    const int N = grid_.order;
    const int nc = sh_count(N);
    const std::size_t m = local_.points.size();
    const int na = grid_.n_azimuth;
    const detail::OperatorMix mix = detail::system_mix(bc_, k_);
    const bool tangential = mix.hypersingular != 0.0;

    Eigen::MatrixXd Vr(n, nc), Vi(n, nc);
    Eigen::MatrixXd Y0(m, nc), Yt0, Yp0;
    if (tangential) {
      Yt0.resize(m, nc);
      Yp0.resize(m, nc);
    }
    std::vector<Vec3> z0(m);
    std::vector<TangentFrame> f0(m);
    Eigen::MatrixXd Kr(na, m), Ki(na, m), Tr, Ti, Pr, Pi;
    if (tangential) {
      Tr.resize(na, m);
      Ti.resize(na, m);
      Pr.resize(na, m);
      Pi.resize(na, m);
    }
    std::vector<double> v(nc), dt(nc), dp(nc);
    std::vector<double> ca(na), sa(na);
    for (int j = 0; j < na; ++j) {
      ca[j] = grid_.nodes[j].x() / std::hypot(grid_.nodes[j].x(), grid_.nodes[j].y());
      sa[j] = grid_.nodes[j].y() / std::hypot(grid_.nodes[j].x(), grid_.nodes[j].y());
    }

    for (int ring = 0; ring < grid_.n_polar; ++ring) {
      const Vec3& ref = grid_.nodes[grid_.index(ring, 0)];
      const Eigen::Matrix3d Q = detail::rotation_y(std::atan2(std::hypot(ref.x(), ref.y()), ref.z()));
      for (std::size_t q = 0; q < m; ++q) {
        z0[q] = (Q * local_.points[q]).normalized();
        f0[q] = tangent_frame(z0[q]);
        if (tangential) {
          eval_sph_harm_all(N, z0[q], v, dt, dp);
          for (int c = 0; c < nc; ++c) {
            Y0(q, c) = v[c];
            Yt0(q, c) = dt[c];
            Yp0(q, c) = dp[c];
          }
        } else {
          eval_sph_harm_all(N, z0[q], v);
          for (int c = 0; c < nc; ++c) Y0(q, c) = v[c];
        }
      }

      for (int j = 0; j < na; ++j) {
        const Eigen::Matrix3d Rz = detail::rotation_z(ca[j], sa[j]);
        const auto& x = nodes_[grid_.index(ring, j)];
        const Vec3 n_x = x.normal_area / x.area;
        for (std::size_t q = 0; q < m; ++q) {
          const Vec3 z = Rz * z0[q];
          const detail::BoundaryPoint y = detail::boundary_point(shape_, z);
          const auto kv = detail::kernel(mix, k_, x.point, n_x, y, local_.weights[q]);
          Kr(j, q) = kv.scalar.real();
          Ki(j, q) = kv.scalar.imag();
          if (tangential) {
            const Vec3 et = Rz * f0[q].e_theta;
            const Vec3 ep = Rz * f0[q].e_phi;
            const Complex at = et.cast<Complex>().dot(kv.tangential);
            const Complex ap = ep.cast<Complex>().dot(kv.tangential);
            Tr(j, q) = at.real();
            Ti(j, q) = at.imag();
            Pr(j, q) = ap.real();
            Pi(j, q) = ap.imag();
          }
        }
      }

      Eigen::MatrixXd Ur = Kr * Y0;
      Eigen::MatrixXd Ui = Ki * Y0;
      if (tangential) {
        Ur.noalias() += Tr * Yt0 + Pr * Yp0;
        Ui.noalias() += Ti * Yt0 + Pi * Yp0;
      }

      // rotate the ring-frame harmonic coefficients to each azimuth:
      // Y_{l,m}(Rz z) = cos(m a) Y_{l,m}(z) - sin(m a) Y_{l,-m}(z),
      // Y_{l,-m}(Rz z) = cos(m a) Y_{l,-m}(z) + sin(m a) Y_{l,m}(z)
      for (int j = 0; j < na; ++j) {
        const int row = grid_.index(ring, j);
        double cm = 1.0, sm = 0.0;
        for (int mm = 0; mm <= N; ++mm) {
          if (mm > 0) {
            const double c2 = cm * ca[j] - sm * sa[j];
            sm = sm * ca[j] + cm * sa[j];
            cm = c2;
          }
          for (int l = mm; l <= N; ++l) {
            if (mm == 0) {
              const int c0 = sh_index(l, 0);
              Vr(row, c0) = Ur(j, c0);
              Vi(row, c0) = Ui(j, c0);
              continue;
            }
            const int cp = sh_index(l, mm), cn = sh_index(l, -mm);
            Vr(row, cp) = cm * Ur(j, cp) - sm * Ur(j, cn);
            Vi(row, cp) = cm * Ui(j, cp) - sm * Ui(j, cn);
            Vr(row, cn) = cm * Ur(j, cn) + sm * Ur(j, cp);
            Vi(row, cn) = cm * Ui(j, cn) + sm * Ui(j, cp);
          }
        }
      }
    }

    Eigen::MatrixXcd A(n, n);
    {
      Eigen::MatrixXd Ar = Vr * transform_;
      A.real() = Ar;
      Ar.noalias() = Vi * transform_;
      A.imag() = Ar;
    }
    A.diagonal().array() += mix.identity;
    if (!A.allFinite()) throw SolverFailure("non-finite system matrix", 0.0);
    lu_.compute(A);
    rcond_ = lu_.rcond();
    if (!(rcond_ >= options_.min_rcond))
      throw SolverFailure("boundary system is singular or ill-conditioned (rcond " + std::to_string(rcond_) + ")",
                          rcond_);
  }

  RadialShape shape_;
  SphereGrid grid_;
  double k_;
  BoundaryCondition bc_;
  SolverOptions options_;
  std::vector<detail::BoundaryPoint> nodes_;
  Eigen::MatrixXd transform_;  // nodal values -> harmonic coefficients
  detail::LocalRule local_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
  double rcond_ = 0.0;
};

inline BoundaryDensity solve_exterior(const ScatterProblem& problem, const SphereGrid& grid,
                                      SolverOptions options = {}) {
  problem.validate();
  BoundarySolver solver(problem.shape, grid, problem.wavenumber, problem.bc, options);
  return solver.solve(problem.incident_direction);
}

/// Coefficient of exp(i k r)/r of the scattered field in direction theta.
inline Complex far_field_amplitude(const BoundaryDensity& density, const RadialShape& shape, const Vec3& theta) {
  const double k = density.wavenumber;
  Complex acc = 0.0;
  for (std::size_t j = 0; j < density.grid.size(); ++j) {
    const auto y = detail::boundary_point(shape, density.grid.nodes[j]);
    Complex kern = -I * k * theta.dot(y.normal_area);
    if (density.bc == BoundaryCondition::dirichlet) kern += -I * k * y.area;
    acc += density.grid.weights[j] / (4.0 * pi) * kern * std::exp(-I * (k * theta.dot(y.point))) *
           density.values[j];
  }
  return acc;
}

/// Partial-wave amplitude of a sphere of radius a as a function of the
/// scattering-angle cosine cos_gamma = theta . d, where d = -omega is the
/// propagation direction of the incident wave.
inline Complex sphere_series_amplitude(double a, double k, double cos_gamma, BoundaryCondition bc) {
  if (!(a > 0.0) || !(k > 0.0)) fail(ErrorCategory::invalid_argument, "radius and wavenumber must be positive");
  const double ka = k * a;
  const int lmax = static_cast<int>(std::ceil(ka + 8.0 * std::cbrt(ka))) + 12;
  const SphBesselTable tab = sph_bessel_table(lmax, ka);
  const double t = std::clamp(cos_gamma, -1.0, 1.0);
  Complex sum = 0.0;
  double p0 = 1.0, p1 = t;
  for (int l = 0; l <= lmax; ++l) {
    double p;
    if (l == 0) {
      p = p0;
    } else if (l == 1) {
      p = p1;
    } else {
      p = ((2.0 * l - 1.0) * t * p1 - (l - 1.0) * p0) / l;
      p0 = p1;
      p1 = p;
    }
    const Complex ratio = bc == BoundaryCondition::dirichlet ? -tab.j[l] / tab.h(l) : -tab.dj[l] / tab.dh(l);
    if (!std::isfinite(ratio.real()) || !std::isfinite(ratio.imag())) break;
    sum += (2.0 * l + 1.0) * ratio * p;
  }
  return sum / (I * k);
}

/// Sphere amplitude A(k, theta, omega) in the exp(-i k omega.x) convention.
inline Complex sphere_amplitude(double a, double k, const Vec3& theta, const Vec3& omega, BoundaryCondition bc) {
  return sphere_series_amplitude(a, k, -theta.dot(omega), bc);
}

/// Far-field table for a list of wavenumbers: one factorisation per
/// wavenumber, all incident directions solved together.
inline FarFieldTable compute_far_field_table(const RadialShape& shape, const std::vector<double>& lambdas,
                                             BoundaryCondition bc, const SphereGrid& solver_grid,
                                             const SphereGrid& observation, const SphereGrid& incident,
                                             SolverOptions options = {}) {
  FarFieldTable table;
  table.lambdas = lambdas;
  table.observation = observation;
  table.incident = incident;
  table.bc = bc;
  table.solver_order = solver_grid.order;
  table.values.resize(lambdas.size() * observation.size() * incident.size());
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    BoundarySolver solver(shape, solver_grid, lambdas[l], bc, options);
    const Eigen::MatrixXcd X = solver.solve_many(incident.nodes);
    const Eigen::MatrixXcd A = solver.far_field_matrix(observation.nodes) * X;
    for (std::size_t i = 0; i < observation.size(); ++i)
      for (std::size_t j = 0; j < incident.size(); ++j) table.at(l, i, j) = A(i, j);
  }
  return table;
}

}  // namespace starscat
