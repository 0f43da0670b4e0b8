#pragma once

#include <Eigen/Dense>
#include <numbers>
#include <string_view>

namespace pdc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kDeg = std::numbers::pi / 180.0;

constexpr double deg2rad(double deg) { return deg * kDeg; }
constexpr double rad2deg(double rad) { return rad / kDeg; }

// Angle between two vectors in radians, robust for nearly (anti)parallel inputs.
double angle_between(const Vec3& a, const Vec3& b);

// Angle between two undirected lines, folded into [0, pi/2].
double line_angle(const Vec3& a, const Vec3& b);

// Rotate v about unit axis by angle (radians), right-hand rule.
Vec3 rotate_about(const Vec3& v, const Vec3& axis, double angle);

// A propagation direction in the crystal-physical frame {e_i}.
//
// Spherical angles: psi is the azimuth in the (e_1, e_2) plane measured from
// e_1 toward e_2, rho is the elevation above that plane toward e_3:
//   k = (cos rho cos psi, cos rho sin psi, sin rho).
// With this convention the published T, P and R directions form an
// orthogonal triad.
class Direction {
 public:
  Direction() : v_(0.0, 0.0, 1.0) {}

  static Direction from_vector(const Vec3& v);
  static Direction from_angles(double psi_deg, double rho_deg);

  const Vec3& vec() const { return v_; }
  double psi_deg() const;
  double rho_deg() const;

 private:
  explicit Direction(const Vec3& unit) : v_(unit) {}
  Vec3 v_;
};

enum class Mode { Fast, Slow };

std::string_view to_string(Mode m);
Mode mode_from_string(std::string_view s);

}  // namespace pdc
