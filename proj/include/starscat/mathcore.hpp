#pragma once
//
// Special functions and spherical quadrature shared by every other module:
// Gauss-Legendre x uniform-azimuth sphere grids, spherical Bessel/Hankel
// functions, Legendre polynomials and real orthonormal spherical harmonics
// with their surface gradients.
//

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "starscat/error.hpp"

namespace starscat {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;

inline constexpr double pi = std::numbers::pi;
inline constexpr Complex I{0.0, 1.0};

/// Flat index of (l, m), |m| <= l, in a degree-ordered harmonic array.
constexpr int sh_index(int l, int m) { return l * l + l + m; }
constexpr int sh_count(int max_degree) { return (max_degree + 1) * (max_degree + 1); }

struct GaussLegendre {
  std::vector<double> nodes;    // ascending in (-1, 1)
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1]; nodes are exactly antisymmetric.
inline GaussLegendre gauss_legendre(int n) {
  if (n < 1) fail(ErrorCategory::invalid_argument, "gauss_legendre needs n >= 1");
  GaussLegendre rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) {
        // one more polish step for the derivative at the converged node
        p0 = 1.0;
        p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        break;
      }
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // node i is the i-th largest; mirror it
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = w;
    rule.nodes[i] = -x;
    rule.weights[i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

/// Product quadrature on the unit sphere.
///
/// Nodes are stored polar-major: node(i, j) has polar index i (theta
/// increasing, cos(theta) a Gauss-Legendre node) and azimuth 2*pi*j/n_azimuth.
/// With n_polar = order + 1 and n_azimuth = 2 * n_polar the rule is exact for
/// spherical polynomials of degree 2*order + 1 and closed under x -> -x.
struct SphereGrid {
  int order = 0;
  int n_polar = 0;
  int n_azimuth = 0;
  std::vector<double> cos_polar;
  std::vector<double> azimuth;
  std::vector<Vec3> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
  int index(int i_polar, int j_azimuth) const { return i_polar * n_azimuth + j_azimuth; }

  /// Index of the node at -nodes[k].
  int antipode(int k) const {
    const int i = k / n_azimuth;
    const int j = k % n_azimuth;
    return index(n_polar - 1 - i, (j + n_azimuth / 2) % n_azimuth);
  }
};

inline SphereGrid build_sphere_grid(int order) {
  if (order < 1) fail(ErrorCategory::invalid_argument, "sphere grid order must be >= 1");
  SphereGrid g;
  g.order = order;
  g.n_polar = order + 1;
  g.n_azimuth = 2 * g.n_polar;
  const GaussLegendre gl = gauss_legendre(g.n_polar);
  g.cos_polar.resize(g.n_polar);
  std::vector<double> wpolar(g.n_polar);
  for (int i = 0; i < g.n_polar; ++i) {
    g.cos_polar[i] = gl.nodes[g.n_polar - 1 - i];
    wpolar[i] = gl.weights[g.n_polar - 1 - i];
  }
  g.azimuth.resize(g.n_azimuth);
  std::vector<double> ca(g.n_azimuth), sa(g.n_azimuth);
  for (int j = 0; j < g.n_azimuth; ++j) {
    g.azimuth[j] = 2.0 * pi * j / g.n_azimuth;
    ca[j] = std::cos(g.azimuth[j]);
    sa[j] = std::sin(g.azimuth[j]);
  }
  // exact antipodal closure of the azimuth table
  for (int j = 0; j < g.n_azimuth / 2; ++j) {
    ca[j + g.n_azimuth / 2] = -ca[j];
    sa[j + g.n_azimuth / 2] = -sa[j];
  }
  const double dphi = 2.0 * pi / g.n_azimuth;
  g.nodes.reserve(g.n_polar * g.n_azimuth);
  g.weights.reserve(g.n_polar * g.n_azimuth);
  for (int i = 0; i < g.n_polar; ++i) {
    const double t = g.cos_polar[i];
    const double s = std::sqrt((1.0 - t) * (1.0 + t));
    for (int j = 0; j < g.n_azimuth; ++j) {
      g.nodes.emplace_back(s * ca[j], s * sa[j], t);
      g.weights.push_back(wpolar[i] * dphi);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Spherical Bessel functions

enum class BesselKind { regular, irregular, outgoing };

/// j_l, y_l and their derivatives for l = 0..lmax at one argument.
struct SphBesselTable {
  std::vector<double> j, y, dj, dy;

  Complex h(int l) const { return {j[l], y[l]}; }
  Complex dh(int l) const { return {dj[l], dy[l]}; }
};

/// j_l by downward (Miller) recurrence normalised at l = 0 or 1, y_l by
/// upward recurrence. Values that fall outside double range come out as 0
/// (for j) or -inf (for y).
inline SphBesselTable sph_bessel_table(int lmax, double x) {
  if (lmax < 0) fail(ErrorCategory::invalid_argument, "Bessel order must be >= 0");
  if (!(x > 0.0)) fail(ErrorCategory::domain_error, "Bessel argument must be positive");
  SphBesselTable tab;
  const int n = lmax + 2;  // one extra order for the derivatives
  tab.j.assign(n, 0.0);
  tab.y.assign(n, 0.0);

  const double sx = std::sin(x), cx = std::cos(x);
  tab.y[0] = -cx / x;
  if (n > 1) tab.y[1] = -cx / (x * x) - sx / x;
  for (int l = 1; l + 1 < n; ++l) {
    tab.y[l + 1] = (2.0 * l + 1.0) / x * tab.y[l] - tab.y[l - 1];
    if (!std::isfinite(tab.y[l + 1])) {
      for (int k = l + 1; k < n; ++k) tab.y[k] = -std::numeric_limits<double>::infinity();
      break;
    }
  }

  const double big = std::max<double>(n, x);
  const int start = static_cast<int>(big + std::ceil(std::sqrt(40.0 * big))) + 20;
  // Unnormalised minimal solution; value k is work[k] * 1e250^rescales[k].
  constexpr double rescale = 1e-250;
  constexpr double log_rescale = -250.0 * 2.302585092994045684;
  std::vector<double> work(start + 2, 0.0);
  std::vector<int> rescales(start + 2, 0);
  work[start] = 1e-300;
  int count = 0;
  for (int l = start; l >= 1; --l) {
    work[l - 1] = (2.0 * l + 1.0) / x * work[l] - work[l + 1];
    rescales[l - 1] = count;
    if (std::abs(work[l - 1]) > 1e250) {
      work[l - 1] *= rescale;
      work[l] *= rescale;
      ++count;
      rescales[l - 1] = count;
      rescales[l] = count;
    }
  }
  // least-squares fit of the pair (work[0], work[1]) to the closed forms of j_0, j_1
  const double j0 = sx / x;
  const double j1 = sx / (x * x) - cx / x;
  const double wmax = std::max(std::abs(work[0]), std::abs(work[1]));
  const double w0 = work[0] / wmax, w1 = work[1] / wmax;
  const double scale = (j0 * w0 + j1 * w1) / (w0 * w0 + w1 * w1) / wmax;
  for (int l = 0; l < n; ++l) {
    const int shift = count - rescales[l];
    if (shift == 0) {
      tab.j[l] = work[l] * scale;
    } else {
      const double v = work[l] * scale;
      tab.j[l] = v == 0.0 ? 0.0 : std::copysign(std::exp(std::log(std::abs(v)) + shift * log_rescale), v);
    }
  }

  tab.dj.assign(n - 1, 0.0);
  tab.dy.assign(n - 1, 0.0);
  for (int l = 0; l + 1 < n; ++l) {
    tab.dj[l] = (l == 0) ? -tab.j[1] : tab.j[l - 1] - (l + 1.0) / x * tab.j[l];
    tab.dy[l] = (l == 0) ? -tab.y[1] : tab.y[l - 1] - (l + 1.0) / x * tab.y[l];
  }
  tab.j.resize(n - 1);
  tab.y.resize(n - 1);
  return tab;
}

inline Complex sph_bessel(BesselKind kind, int l, double x) {
  if (l < 0) fail(ErrorCategory::invalid_argument, "Bessel order must be >= 0");
  if (!(x > 0.0)) fail(ErrorCategory::domain_error, "Bessel argument must be positive");
  const SphBesselTable tab = sph_bessel_table(l, x);
  switch (kind) {
    case BesselKind::regular: return tab.j[l];
    case BesselKind::irregular: return tab.y[l];
    case BesselKind::outgoing: return tab.h(l);
  }
  return {};
}

// ---------------------------------------------------------------------------
// Legendre polynomials and real spherical harmonics

inline double legendre_p(int l, double t) {
  if (l < 0) fail(ErrorCategory::invalid_argument, "Legendre degree must be >= 0");
  if (!(t >= -1.0 && t <= 1.0)) fail(ErrorCategory::domain_error, "Legendre argument outside [-1, 1]");
  double p0 = 1.0, p1 = t;
  if (l == 0) return p0;
  for (int k = 2; k <= l; ++k) {
    const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

/// Orthonormal tangent frame (e_theta, e_phi) at a unit direction, with
/// e_theta x e_phi = dir. At the poles the azimuth is taken as 0.
struct TangentFrame {
  Vec3 e_theta;
  Vec3 e_phi;
};

inline TangentFrame tangent_frame(const Vec3& dir) {
  const double s = std::hypot(dir.x(), dir.y());
  const double c_phi = s > 0.0 ? dir.x() / s : 1.0;
  const double s_phi = s > 0.0 ? dir.y() / s : 0.0;
  return {Vec3(dir.z() * c_phi, dir.z() * s_phi, -s), Vec3(-s_phi, c_phi, 0.0)};
}

/// Evaluates all real orthonormal harmonics of degree <= max_degree at a unit
/// direction. Y_{l,m} = sqrt(2) N P_l^m cos(m phi) for m > 0,
/// sqrt(2) N P_l^|m| sin(|m| phi) for m < 0, N P_l^0 for m = 0, where P_l^m
/// carries no Condon-Shortley phase.
///
/// When d_theta and d_phi_over_sin are non-empty they receive dY/dtheta and
/// (1/sin theta) dY/dphi; both are regular at the poles.
inline void eval_sph_harm_all(int max_degree, const Vec3& dir, std::span<double> values,
                              std::span<double> d_theta = {},
                              std::span<double> d_phi_over_sin = {}) {
  const int L = max_degree;
  const bool grad = !d_theta.empty();
  const double t = std::clamp(dir.z(), -1.0, 1.0);
  const double s = std::hypot(dir.x(), dir.y());
  const double c1 = s > 0.0 ? dir.x() / s : 1.0;
  const double s1 = s > 0.0 ? dir.y() / s : 0.0;

  // Q_l^m = N_l^m P_l^m(t) and R_l^m = Q_l^m / sin(theta) for m >= 1
  thread_local std::vector<double> Q, R, cm, sm;
  const int tri = (L + 1) * (L + 2) / 2;
  Q.assign(tri, 0.0);
  R.assign(tri, 0.0);
  cm.assign(L + 1, 0.0);
  sm.assign(L + 1, 0.0);
  auto tix = [](int l, int m) { return l * (l + 1) / 2 + m; };

  double qmm = 1.0 / std::sqrt(4.0 * pi);
  double rmm = 0.0;
  for (int m = 0; m <= L; ++m) {
    if (m > 0) {
      const double f = std::sqrt((2.0 * m + 1.0) / (2.0 * m));
      rmm = f * qmm;  // Q_{m-1}^{m-1} * f = Q_m^m / s
      qmm = f * s * qmm;
    }
    Q[tix(m, m)] = qmm;
    R[tix(m, m)] = rmm;
    if (m + 1 <= L) {
      const double f = std::sqrt(2.0 * m + 3.0);
      Q[tix(m + 1, m)] = f * t * qmm;
      R[tix(m + 1, m)] = f * t * rmm;
    }
    for (int l = m + 2; l <= L; ++l) {
      const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(m) * m));
      const double b = std::sqrt((static_cast<double>(l - 1) * (l - 1) - static_cast<double>(m) * m) /
                                 (4.0 * (l - 1) * (l - 1) - 1.0));
      Q[tix(l, m)] = a * (t * Q[tix(l - 1, m)] - b * Q[tix(l - 2, m)]);
      R[tix(l, m)] = a * (t * R[tix(l - 1, m)] - b * R[tix(l - 2, m)]);
    }
  }
  cm[0] = 1.0;
  sm[0] = 0.0;
  for (int m = 1; m <= L; ++m) {
    cm[m] = cm[m - 1] * c1 - sm[m - 1] * s1;
    sm[m] = sm[m - 1] * c1 + cm[m - 1] * s1;
  }

  const double rt2 = std::numbers::sqrt2;
  for (int l = 0; l <= L; ++l) {
    values[sh_index(l, 0)] = Q[tix(l, 0)];
    for (int m = 1; m <= l; ++m) {
      values[sh_index(l, m)] = rt2 * Q[tix(l, m)] * cm[m];
      values[sh_index(l, -m)] = rt2 * Q[tix(l, m)] * sm[m];
    }
    if (!grad) continue;
    d_theta[sh_index(l, 0)] = l > 0 ? -std::sqrt(static_cast<double>(l) * (l + 1)) * Q[tix(l, 1)] : 0.0;
    d_phi_over_sin[sh_index(l, 0)] = 0.0;
    for (int m = 1; m <= l; ++m) {
      const double prev = l > m ? R[tix(l - 1, m)] : 0.0;
      const double dq = l * t * R[tix(l, m)] -
                        std::sqrt((2.0 * l + 1.0) / (2.0 * l - 1.0) * (l - m) * (l + m)) * prev;
      d_theta[sh_index(l, m)] = rt2 * dq * cm[m];
      d_theta[sh_index(l, -m)] = rt2 * dq * sm[m];
      d_phi_over_sin[sh_index(l, m)] = -rt2 * m * R[tix(l, m)] * sm[m];
      d_phi_over_sin[sh_index(l, -m)] = rt2 * m * R[tix(l, m)] * cm[m];
    }
  }
}

inline double real_sph_harm(int l, int m, const Vec3& dir) {
  if (l < 0 || std::abs(m) > l) fail(ErrorCategory::invalid_argument, "spherical harmonic needs |m| <= l");
  std::vector<double> v(sh_count(l));
  eval_sph_harm_all(l, dir.normalized(), v);
  return v[sh_index(l, m)];
}

/// Surface gradient of sum_k coeffs[k] Y_k at dir, as a 3-vector tangent to
/// the sphere.
inline Vec3 sph_harm_gradient(int max_degree, std::span<const double> coeffs, const Vec3& dir) {
  const int n = sh_count(max_degree);
  thread_local std::vector<double> v, dt, dp;
  v.resize(n);
  dt.resize(n);
  dp.resize(n);
  eval_sph_harm_all(max_degree, dir, v, dt, dp);
  double gt = 0.0, gp = 0.0;
  for (int k = 0; k < n; ++k) {
    gt += coeffs[k] * dt[k];
    gp += coeffs[k] * dp[k];
  }
  const TangentFrame f = tangent_frame(dir);
  return gt * f.e_theta + gp * f.e_phi;
}

}  // namespace starscat
