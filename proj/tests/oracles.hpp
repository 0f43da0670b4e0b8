#pragma once

// Independent reference calculations. Nothing here calls into the library's
// solvers; only plain formulas, brute-force scans and Eigen decompositions.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

constexpr double kDeg = std::numbers::pi / 180.0;

// n^2 = A + B/(l^2 - C) - D l^2, l in um.
inline double abcd_index(const std::array<double, 4>& c, double lambda_nm) {
  const double l2 = lambda_nm * lambda_nm * 1e-6;
  return std::sqrt(c[0] + c[1] / (l2 - c[2]) - c[3] * l2);
}

inline Vec3 from_angles(double psi_deg, double rho_deg) {
  const double p = psi_deg * kDeg, r = rho_deg * kDeg;
  return {std::cos(r) * std::cos(p), std::cos(r) * std::sin(p), std::sin(r)};
}

// Rotation by phi about e2 that takes the principal frame into {e_i}.
inline Mat3 rotation_e2(double phi_deg) { return Eigen::AngleAxisd(phi_deg * kDeg, Vec3::UnitY()).toRotationMatrix(); }

// Fresnel surface f(K) = sum_i n_i^2 K_i^2 prod_{j != i} (n_j^2 - |K|^2), K = n k in the principal frame.
inline double fresnel_f(const Vec3& K, const std::array<double, 3>& n) {
  const double k2 = K.squaredNorm();
  double f = 0.0;
  for (int i = 0; i < 3; ++i) {
    double p = n[i] * n[i] * K[i] * K[i];
    for (int j = 0; j < 3; ++j)
      if (j != i) p *= n[j] * n[j] - k2;
    f += p;
  }
  return f;
}

// Analytic gradient of fresnel_f.
inline Vec3 fresnel_gradient(const Vec3& K, const std::array<double, 3>& n) {
  const double k2 = K.squaredNorm();
  std::array<double, 3> g{};
  for (int i = 0; i < 3; ++i) g[i] = n[i] * n[i] - k2;
  Vec3 grad = Vec3::Zero();
  for (int m = 0; m < 3; ++m) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double a = n[i] * n[i] * K[i] * K[i];
      // d/dK_m of prod_{j != i} g_j = -2 K_m sum_{l != i} prod_{j != i, l} g_j
      double dprod = 0.0;
      for (int l = 0; l < 3; ++l) {
        if (l == i) continue;
        double p = 1.0;
        for (int j = 0; j < 3; ++j)
          if (j != i && j != l) p *= g[j];
        dprod += p;
      }
      s += a * (-2.0 * K[m] * dprod);
      if (i == m) {
        double p = 1.0;
        for (int j = 0; j < 3; ++j)
          if (j != i) p *= g[j];
        s += 2.0 * n[i] * n[i] * K[i] * p;
      }
    }
    grad[m] = s;
  }
  return grad;
}

// Eigen-decomposition of the impermeability restricted to the plane normal to k
// (principal frame): returns {(n_fast, D_fast), (n_slow, D_slow)}.
inline std::array<std::pair<double, Vec3>, 2> transverse_modes(const Vec3& k, const std::array<double, 3>& n) {
  const Vec3 kk = k.normalized();
  Vec3 a = std::abs(kk.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 u = (a - a.dot(kk) * kk).normalized();
  const Vec3 w = kk.cross(u);
  Mat3 eta = Mat3::Zero();
  for (int i = 0; i < 3; ++i) eta(i, i) = 1.0 / (n[i] * n[i]);
  Eigen::Matrix2d m;
  m << u.dot(eta * u), u.dot(eta * w), w.dot(eta * u), w.dot(eta * w);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
  // Larger 1/n^2 -> fast.
  const Eigen::Vector2d ev = es.eigenvalues();
  const Eigen::Matrix2d V = es.eigenvectors();
  const Vec3 d_slow = (V(0, 0) * u + V(1, 0) * w).normalized();
  const Vec3 d_fast = (V(0, 1) * u + V(1, 1) * w).normalized();
  return {{{1.0 / std::sqrt(ev(1)), d_fast}, {1.0 / std::sqrt(ev(0)), d_slow}}};
}

// Uniaxial crystal, theta measured from the optic axis.
inline double uniaxial_ne_theta(double no, double ne, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return 1.0 / std::sqrt(c * c / (no * no) + s * s / (ne * ne));
}

// |walk-off| of the extraordinary wave: tan a = (n(theta)^2 / 2) (1/ne^2 - 1/no^2) sin 2 theta.
inline double uniaxial_walkoff(double no, double ne, double theta) {
  const double n = uniaxial_ne_theta(no, ne, theta);
  return std::abs(std::atan(0.5 * n * n * (1.0 / (ne * ne) - 1.0 / (no * no)) * std::sin(2.0 * theta)));
}

// Bisection for a sign change of f in [a, b].
inline double bisect(const std::function<double(double)>& f, double a, double b, int iterations = 200) {
  double fa = f(a);
  for (int i = 0; i < iterations; ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

// Degenerate type II in a negative uniaxial crystal, e(pump) -> o + e:
// 2 n_e(theta, pump) = n_o(dc) + n_e(theta, dc). Returns theta in radians.
inline double uniaxial_type2_theta(double no_p, double ne_p, double no_dc, double ne_dc) {
  auto f = [&](double t) { return 2.0 * uniaxial_ne_theta(no_p, ne_p, t) - no_dc - uniaxial_ne_theta(no_dc, ne_dc, t); };
  return bisect(f, 1e-3, std::numbers::pi / 2 - 1e-3);
}

// Point group 3m, type II (e -> o + e): d_eff = d22 cos^2(theta) cos(3 phi).
inline double bbo_type2_deff(double d22, double theta, double phi) {
  return std::abs(d22 * std::cos(theta) * std::cos(theta) * std::cos(3.0 * phi));
}

inline double snell_deg(double n, double theta_in_deg) { return std::asin(n * std::sin(theta_in_deg * kDeg)) / kDeg; }

// Algebraic (Kasa) circle fit; returns the RMS radial residual.
inline double circle_fit_residual(const std::vector<std::pair<double, double>>& pts) {
  Eigen::MatrixXd A(pts.size(), 3);
  Eigen::VectorXd b(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto [x, y] = pts[i];
    A(i, 0) = x;
    A(i, 1) = y;
    A(i, 2) = 1.0;
    b(i) = x * x + y * y;
  }
  const Eigen::Vector3d s = A.colPivHouseholderQr().solve(b);
  const double cx = 0.5 * s(0), cy = 0.5 * s(1);
  const double r = std::sqrt(s(2) + cx * cx + cy * cy);
  double ss = 0.0;
  for (const auto& [x, y] : pts) {
    const double e = std::hypot(x - cx, y - cy) - r;
    ss += e * e;
  }
  return std::sqrt(ss / pts.size());
}

// Brute-force minimum of a 1-D function on a grid.
inline std::pair<double, double> grid_min(const std::function<double(double)>& f, double a, double b, int n) {
  double best_x = a, best = f(a);
  for (int i = 1; i <= n; ++i) {
    const double x = a + (b - a) * i / n;
    const double v = f(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  return {best_x, best};
}

}  // namespace oracle
