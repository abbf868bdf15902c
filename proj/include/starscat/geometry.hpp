#pragma once
//
// Starlike obstacles described by a radial function r(dir) given as a finite
// real spherical-harmonic expansion.
//

#include <cmath>
#include <string>
#include <vector>

#include "starscat/mathcore.hpp"

namespace starscat {

/// Starlike obstacle r(dir) = sum_{l<=L, |m|<=l} c_{l,m} Y_{l,m}(dir).
/// Coefficients are stored in sh_index order.
class RadialShape {
 public:
  RadialShape() : RadialShape(0, {std::sqrt(4.0 * pi)}) {}

  RadialShape(int max_degree, std::vector<double> coeffs)
      : max_degree_(max_degree), coeffs_(std::move(coeffs)) {
    if (max_degree_ < 0) fail(ErrorCategory::invalid_argument, "shape degree must be >= 0");
    if (static_cast<int>(coeffs_.size()) != sh_count(max_degree_))
      fail(ErrorCategory::invalid_argument, "shape coefficient count does not match degree");
    for (double c : coeffs_)
      if (!std::isfinite(c)) fail(ErrorCategory::invalid_argument, "non-finite shape coefficient");
  }

  static RadialShape sphere(double radius) { return RadialShape(0, {radius * std::sqrt(4.0 * pi)}); }

  int max_degree() const { return max_degree_; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  double coeff(int l, int m) const {
    return l <= max_degree_ && std::abs(m) <= l ? coeffs_[sh_index(l, m)] : 0.0;
  }

  RadialShape scaled(double s) const {
    std::vector<double> c = coeffs_;
    for (double& v : c) v *= s;
    return RadialShape(max_degree_, std::move(c));
  }

  /// Same radial function padded (or truncated) to another degree.
  RadialShape with_degree(int degree) const {
    std::vector<double> c(sh_count(degree), 0.0);
    for (int k = 0; k < std::min(sh_count(degree), sh_count(max_degree_)); ++k) c[k] = coeffs_[k];
    return RadialShape(degree, std::move(c));
  }

  /// Raw expansion value; no positivity check.
  double radius_unchecked(const Vec3& dir) const {
    thread_local std::vector<double> y;
    y.resize(coeffs_.size());
    eval_sph_harm_all(max_degree_, dir, y);
    double r = 0.0;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) r += coeffs_[k] * y[k];
    return r;
  }

  /// Order of the grid on which starlike positivity is checked.
  int validation_order() const { return 2 * max_degree_ + 8; }

  /// Smallest radius over the validation grid.
  double min_radius_on_grid(int order) const {
    const SphereGrid g = build_sphere_grid(order);
    double rmin = std::numeric_limits<double>::infinity();
    for (const Vec3& d : g.nodes) rmin = std::min(rmin, radius_unchecked(d));
    return rmin;
  }

  bool is_valid() const { return min_radius_on_grid(validation_order()) > 0.0; }

  void validate() const {
    const double rmin = min_radius_on_grid(validation_order());
    if (!(rmin > 0.0))
      fail(ErrorCategory::invalid_shape,
           "radial function is not positive on the validation grid (min " + std::to_string(rmin) + ")");
  }

  double max_radius_on_grid() const {
    const SphereGrid g = build_sphere_grid(validation_order());
    double rmax = 0.0;
    for (const Vec3& d : g.nodes) rmax = std::max(rmax, radius_unchecked(d));
    return rmax;
  }

  friend bool operator==(const RadialShape&, const RadialShape&) = default;

 private:
  int max_degree_;
  std::vector<double> coeffs_;
};

inline double eval_radius(const RadialShape& shape, const Vec3& dir) {
  const double r = shape.radius_unchecked(dir);
  if (!(r > 0.0)) fail(ErrorCategory::invalid_shape, "starlike violation: nonpositive radius");
  return r;
}

/// Boundary point over a direction, with the outward unit normal and the
/// area element per unit solid angle.
struct SurfaceFrame {
  Vec3 point;
  Vec3 outward_normal;
  double area_element = 0.0;
};

/// Radius, its surface gradient on the unit sphere, and the derived
/// boundary quantities. normal_area = r^2 dir - r grad r is the outward
/// normal scaled by the area element.
struct RadialSample {
  double radius;
  Vec3 grad;
  Vec3 point;
  Vec3 normal_area;
};

inline RadialSample sample_radial(const RadialShape& shape, const Vec3& dir) {
  const int n = sh_count(shape.max_degree());
  thread_local std::vector<double> v, dt, dp;
  v.resize(n);
  dt.resize(n);
  dp.resize(n);
  eval_sph_harm_all(shape.max_degree(), dir, v, dt, dp);
  double r = 0.0, gt = 0.0, gp = 0.0;
  const auto& c = shape.coeffs();
  for (int k = 0; k < n; ++k) {
    r += c[k] * v[k];
    gt += c[k] * dt[k];
    gp += c[k] * dp[k];
  }
  const TangentFrame f = tangent_frame(dir);
  RadialSample s;
  s.radius = r;
  s.grad = gt * f.e_theta + gp * f.e_phi;
  s.point = r * dir;
  s.normal_area = r * r * dir - r * s.grad;
  return s;
}

inline SurfaceFrame surface_frame(const RadialShape& shape, const Vec3& dir) {
  const RadialSample s = sample_radial(shape, dir);
  if (!(s.radius > 0.0)) fail(ErrorCategory::invalid_shape, "starlike violation: nonpositive radius");
  SurfaceFrame frame;
  frame.point = s.point;
  frame.area_element = s.normal_area.norm();
  frame.outward_normal = s.normal_area / frame.area_element;
  return frame;
}

/// Volume of the starlike body, (1/3) * integral of r^3 over the sphere.
inline double volume(const RadialShape& shape, const SphereGrid& grid) {
  if (grid.order < 3 * shape.max_degree() + 2)
    fail(ErrorCategory::invalid_argument, "volume grid order must be >= 3L + 2");
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = eval_radius(shape, grid.nodes[i]);
    acc += grid.weights[i] * r * r * r;
  }
  return acc / 3.0;
}

inline double volume(const RadialShape& shape) {
  return volume(shape, build_sphere_grid(3 * shape.max_degree() + 2));
}

}  // namespace starscat
