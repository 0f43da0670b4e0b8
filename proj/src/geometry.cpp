#include "pdc/geometry.hpp"

#include <cmath>
#include <string>

#include "pdc/errors.hpp"

namespace pdc {

double angle_between(const Vec3& a, const Vec3& b) {
  // atan2 form keeps precision near 0 and pi, where acos of a dot product does not.
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

double line_angle(const Vec3& a, const Vec3& b) {
  const double t = angle_between(a, b);
  return t > std::numbers::pi / 2 ? std::numbers::pi - t : t;
}

Vec3 rotate_about(const Vec3& v, const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()) * v;
}

Direction Direction::from_vector(const Vec3& v) {
  const double n = v.norm();
  if (!std::isfinite(n) || n < 1e-300) throw ValidationError("direction vector must be finite and non-zero");
  return Direction(v / n);
}

Direction Direction::from_angles(double psi_deg, double rho_deg) {
  if (!std::isfinite(psi_deg) || !std::isfinite(rho_deg)) throw ValidationError("direction angles must be finite");
  const double p = deg2rad(psi_deg), r = deg2rad(rho_deg);
  return Direction(Vec3(std::cos(r) * std::cos(p), std::cos(r) * std::sin(p), std::sin(r)));
}

double Direction::psi_deg() const {
  if (std::hypot(v_.x(), v_.y()) < 1e-15) return 0.0;  // pole: azimuth undefined, report 0
  return rad2deg(std::atan2(v_.y(), v_.x()));
}

double Direction::rho_deg() const { return rad2deg(std::atan2(v_.z(), std::hypot(v_.x(), v_.y()))); }

std::string_view to_string(Mode m) { return m == Mode::Fast ? "fast" : "slow"; }

Mode mode_from_string(std::string_view s) {
  if (s == "fast" || s == "f") return Mode::Fast;
  if (s == "slow" || s == "s") return Mode::Slow;
  throw ValidationError("unknown mode '" + std::string(s) + "' (expected fast or slow)");
}

}  // namespace pdc
