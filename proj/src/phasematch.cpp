#include "pdc/phasematch.hpp"

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "pdc/errors.hpp"

namespace pdc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string fmt(double x, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << x;
  return os.str();
}

// Root of f on [a, b] given a sign change; toms748 to full double precision.
template <class F>
double bracketed_root(F f, double a, double b, double fa, double fb) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (r.first + r.second);
}

// Orthonormal pair spanning the plane normal to t.
std::pair<Vec3, Vec3> transverse_frame(const Vec3& t) {
  Vec3 u = t.cross(Vec3::UnitZ());
  if (u.norm() < 1e-8) u = t.cross(Vec3::UnitX());
  u.normalize();
  return {u, t.cross(u)};
}

// Solves the momentum balance for one photon swept in azimuth about the pump.
class ConeSolver {
 public:
  ConeSolver(const CrystalDefinition& crystal, const PdcProcess& process, const Vec3& pump, Mode which)
      : which_(which),
        lambda1_(which == Mode::Slow ? process.lambda_s_nm : process.lambda_i_nm),
        lambda2_(which == Mode::Slow ? process.lambda_i_nm : process.lambda_s_nm),
        mode1_(which == Mode::Slow ? process.signal : process.idler),
        mode2_(which == Mode::Slow ? process.idler : process.signal),
        pump_(pump.normalized()),
        ip_(crystal, process.lambda_f_nm),
        i1_(crystal, lambda1_),
        i2_(crystal, lambda2_) {
    kp_ = kTwoPi / process.lambda_f_nm * ip_.index(pump_, process.pump) * pump_;
    std::tie(u_, w_) = transverse_frame(pump_);
  }

  Vec3 direction(double phi, double theta) const {
    return std::cos(theta) * pump_ + std::sin(theta) * (std::cos(phi) * u_ + std::sin(phi) * w_);
  }

  // Signed relative mismatch with the partner fixed by transverse momentum.
  double g(double phi, double theta, Vec3* d1 = nullptr, Vec3* d2 = nullptr) const {
    const Vec3 d = direction(phi, theta);
    const Vec3 k1 = kTwoPi / lambda1_ * i1_.index(d, mode1_) * d;
    const Vec3 k2 = kp_ - k1;
    const double k2n = k2.norm();
    const Vec3 dd = k2 / k2n;
    if (d1) *d1 = d;
    if (d2) *d2 = dd;
    return (kTwoPi / lambda2_ * i2_.index(dd, mode2_) - k2n) / kp_.norm();
  }

  std::vector<double> roots(double phi, const ConeOptions& opt) const {
    return roots(phi, 0.0, opt.max_offset_deg, opt.coarse_step_deg);
  }

  // Sign changes of g over polar offsets [lo, hi] (degrees) scanned at step, refined.
  std::vector<double> roots(double phi, double lo_deg, double hi_deg, double step_deg) const {
    std::vector<double> out;
    const double lo = deg2rad(std::max(0.0, lo_deg)), hi = deg2rad(hi_deg);
    const double step = deg2rad(step_deg);
    const int n = static_cast<int>(std::ceil((hi - lo) / step - 1e-9));
    double t0 = lo, g0 = g(phi, lo);
    for (int i = 1; i <= n; ++i) {
      const double t1 = std::min(lo + i * step, hi);
      const double g1 = g(phi, t1);
      if ((g0 < 0.0) != (g1 < 0.0)) out.push_back(bracketed_root([&](double t) { return g(phi, t); }, t0, t1, g0, g1));
      t0 = t1;
      g0 = g1;
    }
    return out;
  }

  ConePoint point(double phi, double theta) const {
    Vec3 d1, d2;
    const double gv = g(phi, theta, &d1, &d2);
    ConePoint p;
    p.azimuth_deg = rad2deg(phi);
    p.offset_deg = rad2deg(theta);
    p.internal = Direction::from_vector(d1);
    p.partner_internal = Direction::from_vector(d2);
    p.rel_mismatch = std::abs(gv);
    p.external = refract_external(p.internal, i1_.index(d1, mode1_), pump_);
    return p;
  }

  Mode which() const { return which_; }
  double lambda1() const { return lambda1_; }

 private:
  Mode which_;
  double lambda1_, lambda2_;
  Mode mode1_, mode2_;
  Vec3 pump_;
  Indicatrix ip_, i1_, i2_;
  Vec3 kp_;
  Vec3 u_, w_;
};

// Best-fit plane normal of points on a circle of the unit sphere, oriented to their mean.
Vec3 fit_axis(const std::vector<Vec3>& pts) {
  Vec3 mean = Vec3::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  Eigen::MatrixXd a(pts.size(), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) a.row(i) = (pts[i] - mean).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  Vec3 n = svd.matrixV().col(2);
  if (n.dot(mean) < 0.0) n = -n;
  return n.normalized();
}

double mean_angle_deg(const std::vector<Vec3>& pts, const Vec3& axis) {
  double s = 0.0;
  for (const auto& p : pts) s += angle_between(p, axis);
  return rad2deg(s / static_cast<double>(pts.size()));
}

void finish_cone(EmissionCone& cone) {
  if (cone.points.size() < 3) return;
  std::vector<Vec3> ext, in;
  for (const auto& p : cone.points) {
    ext.push_back(p.external.vec());
    in.push_back(p.internal.vec());
  }
  cone.axis_external = fit_axis(ext);
  cone.axis_internal = fit_axis(in);
  cone.radius_deg = mean_angle_deg(ext, cone.axis_external);
  cone.internal_radius_deg = mean_angle_deg(in, cone.axis_internal);
  const auto [u, w] = transverse_frame(cone.axis_external);
  auto key = [&](const ConePoint& p) { return std::atan2(p.external.vec().dot(w), p.external.vec().dot(u)); };
  std::stable_sort(cone.points.begin(), cone.points.end(),
                   [&](const ConePoint& a, const ConePoint& b) { return key(a) < key(b); });
}

// Gnomonic chart about a centre direction.
struct Chart {
  Vec3 c, e1, e2;
  explicit Chart(const Vec3& centre) : c(centre.normalized()) { std::tie(e1, e2) = transverse_frame(c); }
  Eigen::Vector2d to(const Vec3& v) const {
    const double z = v.dot(c);
    return {v.dot(e1) / z, v.dot(e2) / z};
  }
  Vec3 from(const Eigen::Vector2d& x) const { return (c + x.x() * e1 + x.y() * e2).normalized(); }
};

struct Crossing {
  Vec3 point;
  std::size_t a = 0, b = 0;  // segment start indices
  double s = 0.0, t = 0.0;   // segment parameters
  Eigen::Vector2d ta, tb;    // segment tangents in the chart
};

// Segments of a sorted polyline: consecutive points, closing only when the gap is ordinary.
std::vector<std::pair<std::size_t, std::size_t>> segments(const std::vector<Eigen::Vector2d>& x, bool closed_hint) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const std::size_t n = x.size();
  if (n < 2) return out;
  std::vector<double> len;
  for (std::size_t i = 0; i + 1 < n; ++i) len.push_back((x[i + 1] - x[i]).norm());
  auto sorted = len;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double limit = 8.0 * sorted[sorted.size() / 2];
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (len[i] <= limit) out.emplace_back(i, i + 1);
  if (closed_hint && n > 2 && (x[0] - x[n - 1]).norm() <= limit) out.emplace_back(n - 1, 0);
  return out;
}

std::vector<Crossing> polyline_crossings(const std::vector<Vec3>& a, const std::vector<Vec3>& b, const Chart& chart,
                                         bool closed) {
  std::vector<Eigen::Vector2d> xa, xb;
  for (const auto& v : a) xa.push_back(chart.to(v));
  for (const auto& v : b) xb.push_back(chart.to(v));
  const auto sa = segments(xa, closed), sb = segments(xb, closed);
  std::vector<Crossing> out;
  for (const auto& [i0, i1] : sa) {
    const Eigen::Vector2d p = xa[i0], r = xa[i1] - xa[i0];
    const Eigen::Vector2d lo = p.cwiseMin(xa[i1]), hi = p.cwiseMax(xa[i1]);
    for (const auto& [j0, j1] : sb) {
      const Eigen::Vector2d q = xb[j0], s = xb[j1] - xb[j0];
      const Eigen::Vector2d lo2 = q.cwiseMin(xb[j1]), hi2 = q.cwiseMax(xb[j1]);
      if ((lo.array() > hi2.array()).any() || (lo2.array() > hi.array()).any()) continue;
      const double den = r.x() * s.y() - r.y() * s.x();
      if (std::abs(den) < 1e-300) continue;
      const Eigen::Vector2d qp = q - p;
      const double t = (qp.x() * s.y() - qp.y() * s.x()) / den;
      const double u = (qp.x() * r.y() - qp.y() * r.x()) / den;
      // Half-open segments so a crossing through a shared vertex is counted once.
      if (t < 0.0 || t >= 1.0 || u < 0.0 || u >= 1.0) continue;
      Crossing c;
      c.point = chart.from(p + t * r);
      c.a = i0;
      c.b = j0;
      c.s = t;
      c.t = u;
      c.ta = r;
      c.tb = s;
      out.push_back(c);
    }
  }
  return out;
}

double min_separation_deg(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& x : a)
    for (const auto& y : b) best = std::min(best, angle_between(x, y));
  return rad2deg(best);
}

double unwrap_near(double deg, double ref) {
  while (deg - ref > 180.0) deg -= 360.0;
  while (deg - ref < -180.0) deg += 360.0;
  return deg;
}

// Re-samples a cone finely across segment [idx, idx+1] and its neighbours.
std::vector<ConePoint> resample(const ConeSolver& solver, const EmissionCone& cone, std::size_t idx, int subdivisions) {
  const std::size_t n = cone.points.size();
  const auto& p0 = cone.points[(idx + n - 1) % n];
  const auto& p3 = cone.points[(idx + 2) % n];
  const double a0 = p0.azimuth_deg;
  const double a3 = unwrap_near(p3.azimuth_deg, a0);
  const double o_mid = cone.points[idx].offset_deg;
  const double o_lo = std::min({p0.offset_deg, o_mid, p3.offset_deg}) - 0.25;
  const double o_hi = std::max({p0.offset_deg, o_mid, p3.offset_deg}) + 0.25;
  std::vector<ConePoint> out;
  const int m = 3 * subdivisions;
  for (int k = 0; k <= m; ++k) {
    const double az = a0 + (a3 - a0) * k / m;
    const auto roots = solver.roots(deg2rad(az), o_lo, o_hi, 0.01);
    if (roots.empty()) continue;
    double best = roots.front();
    for (double r : roots)
      if (std::abs(rad2deg(r) - o_mid) < std::abs(rad2deg(best) - o_mid)) best = r;
    out.push_back(solver.point(deg2rad(az), best));
  }
  return out;
}

std::vector<Vec3> externals(const std::vector<ConePoint>& pts) {
  std::vector<Vec3> v;
  for (const auto& p : pts) v.push_back(p.external.vec());
  return v;
}

std::vector<Vec3> internals(const std::vector<ConePoint>& pts) {
  std::vector<Vec3> v;
  for (const auto& p : pts) v.push_back(p.internal.vec());
  return v;
}

// Angle between the two circles' tangents at a crossing, both traversed
// counter-clockwise about their own axis; 0 or 180 at tangency.
double tangent_angle_deg(const Crossing& c) {
  return rad2deg(std::atan2(std::abs(c.ta.x() * c.tb.y() - c.ta.y() * c.tb.x()), c.ta.dot(c.tb)));
}

}  // namespace

double partner_wavelength(double lambda_f_nm, double lambda_nm) {
  if (!(lambda_f_nm > 0.0) || !(lambda_nm > lambda_f_nm))
    throw ValidationError("down-converted wavelength must exceed the pump wavelength");
  return 1.0 / (1.0 / lambda_f_nm - 1.0 / lambda_nm);
}

void PdcProcess::validate() const {
  if (!(lambda_f_nm > 0.0) || !(lambda_s_nm > 0.0) || !(lambda_i_nm > 0.0))
    throw ValidationError("process wavelengths must be positive");
  const double lhs = 1.0 / lambda_f_nm;
  const double rhs = 1.0 / lambda_s_nm + 1.0 / lambda_i_nm;
  if (std::abs(lhs - rhs) > 1e-9 * lhs)
    throw ValidationError("energy conservation violated: 1/" + fmt(lambda_f_nm, 9) + " != 1/" + fmt(lambda_s_nm, 9) +
                          " + 1/" + fmt(lambda_i_nm, 9));
}

PdcProcess PdcProcess::degenerate(double lambda_f_nm) { return from_wavelengths(lambda_f_nm, 2 * lambda_f_nm, 2 * lambda_f_nm); }

PdcProcess PdcProcess::with_signal(double lambda_f_nm, double lambda_s_nm) {
  return from_wavelengths(lambda_f_nm, lambda_s_nm, partner_wavelength(lambda_f_nm, lambda_s_nm));
}

PdcProcess PdcProcess::with_idler(double lambda_f_nm, double lambda_i_nm) {
  return from_wavelengths(lambda_f_nm, partner_wavelength(lambda_f_nm, lambda_i_nm), lambda_i_nm);
}

PdcProcess PdcProcess::from_wavelengths(double lambda_f_nm, double lambda_s_nm, double lambda_i_nm) {
  PdcProcess p;
  p.lambda_f_nm = lambda_f_nm;
  p.lambda_s_nm = lambda_s_nm;
  p.lambda_i_nm = lambda_i_nm;
  p.validate();
  return p;
}

MismatchResult mismatch(const CrystalDefinition& crystal, const PdcProcess& process, const Direction& pump_dir,
                        const Direction& signal_dir, const Direction& idler_dir) {
  process.validate();
  auto k = [&](double lambda_nm, const Direction& d, Mode m) {
    // rad/um
    return Vec3(kTwoPi / (lambda_nm * 1e-3) * Indicatrix(crystal, lambda_nm).index(d.vec(), m) * d.vec());
  };
  const Vec3 kf = k(process.lambda_f_nm, pump_dir, process.pump);
  MismatchResult r;
  r.delta_k = k(process.lambda_s_nm, signal_dir, process.signal) + k(process.lambda_i_nm, idler_dir, process.idler) - kf;
  r.relative_mismatch = r.delta_k.norm() / kf.norm();
  return r;
}

double collinear_mismatch(const CrystalDefinition& crystal, const PdcProcess& process, const Direction& dir) {
  const Vec3& k = dir.vec();
  const double nf = Indicatrix(crystal, process.lambda_f_nm).index(k, process.pump);
  const double ns = Indicatrix(crystal, process.lambda_s_nm).index(k, process.signal);
  const double ni = Indicatrix(crystal, process.lambda_i_nm).index(k, process.idler);
  const double kf = nf / process.lambda_f_nm;
  return (ns / process.lambda_s_nm + ni / process.lambda_i_nm - kf) / kf;
}

std::vector<Direction> collinear_curve(const CrystalDefinition& crystal, const PdcProcess& process,
                                       const CollinearOptions& o) {
  process.validate();
  if (!(o.psi_step_deg > 0.0) || !(o.rho_scan_step_deg > 0.0)) throw ValidationError("scan steps must be positive");
  if (!(o.psi_max_deg >= o.psi_min_deg) || !(o.rho_max_deg > o.rho_min_deg)) throw ValidationError("empty scan range");
  const Indicatrix f(crystal, process.lambda_f_nm), s(crystal, process.lambda_s_nm), i(crystal, process.lambda_i_nm);
  auto g = [&](double psi, double rho) {
    const Vec3 k = Direction::from_angles(psi, rho).vec();
    const double kf = f.index(k, process.pump) / process.lambda_f_nm;
    return (s.index(k, process.signal) / process.lambda_s_nm + i.index(k, process.idler) / process.lambda_i_nm - kf) / kf;
  };
  std::vector<Direction> out;
  const int npsi = static_cast<int>(std::floor((o.psi_max_deg - o.psi_min_deg) / o.psi_step_deg + 1e-9));
  const int nrho = static_cast<int>(std::ceil((o.rho_max_deg - o.rho_min_deg) / o.rho_scan_step_deg - 1e-9));
  for (int a = 0; a <= npsi; ++a) {
    const double psi = o.psi_min_deg + a * o.psi_step_deg;
    double r0 = o.rho_min_deg, g0 = g(psi, r0);
    for (int b = 1; b <= nrho; ++b) {
      const double r1 = std::min(o.rho_min_deg + b * o.rho_scan_step_deg, o.rho_max_deg);
      const double g1 = g(psi, r1);
      if ((g0 < 0.0) != (g1 < 0.0)) {
        const double rho = bracketed_root([&](double r) { return g(psi, r); }, r0, r1, g0, g1);
        out.push_back(Direction::from_angles(psi, rho));
      }
      r0 = r1;
      g0 = g1;
    }
  }
  return out;
}

std::optional<Direction> collinear_at_psi(const CrystalDefinition& crystal, const PdcProcess& process, double psi_deg,
                                          double rho_guess_deg, double span_deg) {
  CollinearOptions o;
  o.psi_min_deg = o.psi_max_deg = psi_deg;
  o.rho_min_deg = std::max(-90.0, rho_guess_deg - span_deg);
  o.rho_max_deg = std::min(90.0, rho_guess_deg + span_deg);
  o.rho_scan_step_deg = 0.05;
  const auto pts = collinear_curve(crystal, process, o);
  if (pts.empty()) return std::nullopt;
  return *std::min_element(pts.begin(), pts.end(), [&](const Direction& a, const Direction& b) {
    return std::abs(a.rho_deg() - rho_guess_deg) < std::abs(b.rho_deg() - rho_guess_deg);
  });
}

EmissionCone trace_cone(const CrystalDefinition& crystal, const PdcProcess& process, const Direction& pump_dir, Mode which,
                        const ConeOptions& opt) {
  process.validate();
  if (opt.azimuth_count < 3) throw ValidationError("azimuth count must be at least 3");
  if (!(opt.coarse_step_deg > 0.0) || !(opt.max_offset_deg > 0.0) || !(opt.max_offset_deg < 90.0))
    throw ValidationError("cone search needs 0 < coarse step and 0 < max offset < 90 degrees");
  if (!(opt.threshold >= 0.0)) throw ValidationError("mismatch threshold must be >= 0");
  const ConeSolver solver(crystal, process, pump_dir.vec(), which);
  EmissionCone cone;
  cone.polarization = which;
  cone.lambda_nm = solver.lambda1();
  for (int j = 0; j < opt.azimuth_count; ++j) {
    const double phi = kTwoPi * j / opt.azimuth_count;
    for (double theta : solver.roots(phi, opt)) {
      ConePoint p = solver.point(phi, theta);
      if (p.rel_mismatch < opt.threshold) cone.points.push_back(p);
    }
  }
  finish_cone(cone);
  return cone;
}

ConePair emission_cones(const CrystalDefinition& crystal, const PdcProcess& process, const Direction& pump_dir,
                        const ConeOptions& options) {
  return {trace_cone(crystal, process, pump_dir, Mode::Slow, options),
          trace_cone(crystal, process, pump_dir, Mode::Fast, options)};
}

Direction refract_external(const Direction& internal_dir, double n, const Vec3& facet_normal) {
  if (!(n > 0.0)) throw ValidationError("refractive index must be positive");
  const Vec3 N = facet_normal.normalized();
  const Vec3& d = internal_dir.vec();
  const double c = d.dot(N);
  if (c <= 0.0) throw ValidationError("direction does not propagate toward the exit facet");
  const Vec3 t = d - c * N;
  const double s = t.norm();
  if (s < 1e-15) return internal_dir;
  const double so = n * s;
  if (so >= 1.0)
    throw TotalInternalReflectionError("total internal reflection at the exit facet (n sin(theta) = " + fmt(so) + ")");
  return Direction::from_vector(std::sqrt(1.0 - so * so) * N + so * t / s);
}

Direction refract_internal(const Direction& external_dir, double n, const Vec3& facet_normal) {
  if (!(n > 0.0)) throw ValidationError("refractive index must be positive");
  const Vec3 N = facet_normal.normalized();
  const Vec3& d = external_dir.vec();
  const double c = d.dot(N);
  if (c <= 0.0) throw ValidationError("direction does not propagate toward the facet");
  const Vec3 t = d - c * N;
  const double s = t.norm();
  if (s < 1e-15) return external_dir;
  const double si = s / n;
  return Direction::from_vector(std::sqrt(1.0 - si * si) * N + si * t / s);
}

PdcGeometry cone_geometry(const CrystalDefinition& crystal, const PdcProcess& process, const ConePair& cones,
                          const Direction& pump_dir, const GeometryOptions& options) {
  if (cones.slow.points.size() < 3 || cones.fast.points.size() < 3)
    throw NoPhaseMatchingError("emission cones are empty: no non-collinear phase matching for this pump direction");
  const Vec3& T = pump_dir.vec();
  const Chart chart(T);

  const auto se = externals(cones.slow.points), fe = externals(cones.fast.points);
  if ((cones.slow.axis_external - cones.fast.axis_external).norm() < 1e-9 &&
      std::abs(cones.slow.radius_deg - cones.fast.radius_deg) < 1e-9)
    throw ComputationError("the two cones coincide: intersection points are undefined");

  auto crossings = polyline_crossings(se, fe, chart, true);
  if (crossings.size() != 2) {
    std::ostringstream os;
    os << "the cones do not intersect in exactly two points (found " << crossings.size()
       << "); minimum separation " << min_separation_deg(se, fe) << " deg";
    throw ComputationError(os.str());
  }

  const ConeSolver slow_solver(crystal, process, T, Mode::Slow);
  const ConeSolver fast_solver(crystal, process, T, Mode::Fast);

  PdcGeometry g;
  g.T = pump_dir;
  g.slow_radius_deg = cones.slow.radius_deg;
  g.fast_radius_deg = cones.fast.radius_deg;

  for (const auto& c : crossings) {
    Intersection x;
    Vec3 point = c.point;
    x.crossing_angle_deg = tangent_angle_deg(c);
    const auto& sa = cones.slow.points[c.a];
    const auto& fb = cones.fast.points[c.b];
    x.slow_azimuth_deg = sa.azimuth_deg;
    x.fast_azimuth_deg = fb.azimuth_deg;
    if (options.refine_subdivisions > 0) {
      const auto ls = resample(slow_solver, cones.slow, c.a, options.refine_subdivisions);
      const auto lf = resample(fast_solver, cones.fast, c.b, options.refine_subdivisions);
      const auto fine = polyline_crossings(externals(ls), externals(lf), Chart(point), false);
      if (fine.size() == 1) {
        point = fine[0].point;
        x.slow_azimuth_deg = ls[fine[0].a].azimuth_deg;
        x.fast_azimuth_deg = lf[fine[0].b].azimuth_deg;
        x.crossing_angle_deg = tangent_angle_deg(fine[0]);
      }
    }
    x.direction = Direction::from_vector(point);
    g.external_intersections.push_back(x);
  }
  auto by_rho = [](const Intersection& a, const Intersection& b) { return a.direction.rho_deg() > b.direction.rho_deg(); };
  std::sort(g.external_intersections.begin(), g.external_intersections.end(), by_rho);

  // Internal crossings of the two mode cones (directions of the photons inside the crystal).
  const auto si = internals(cones.slow.points), fi = internals(cones.fast.points);
  for (const auto& c : polyline_crossings(si, fi, chart, true)) {
    Intersection x;
    Vec3 point = c.point;
    x.crossing_angle_deg = tangent_angle_deg(c);
    if (options.refine_subdivisions > 0) {
      const auto ls = resample(slow_solver, cones.slow, c.a, options.refine_subdivisions);
      const auto lf = resample(fast_solver, cones.fast, c.b, options.refine_subdivisions);
      const auto fine = polyline_crossings(internals(ls), internals(lf), Chart(point), false);
      if (fine.size() == 1) {
        point = fine[0].point;
        x.crossing_angle_deg = tangent_angle_deg(fine[0]);
      }
    }
    x.direction = Direction::from_vector(point);
    x.slow_azimuth_deg = cones.slow.points[c.a].azimuth_deg;
    x.fast_azimuth_deg = cones.fast.points[c.b].azimuth_deg;
    g.internal_intersections.push_back(x);
  }
  std::sort(g.internal_intersections.begin(), g.internal_intersections.end(), by_rho);

  const Vec3 top = g.external_intersections[0].direction.vec();
  const Vec3 bottom = g.external_intersections[1].direction.vec();
  g.separation_deg = rad2deg(angle_between(top, bottom));
  g.crossing_angle_deg =
      0.5 * (g.external_intersections[0].crossing_angle_deg + g.external_intersections[1].crossing_angle_deg);

  Vec3 p = top - bottom;
  if (p.z() < 0.0) p = -p;
  g.P = Direction::from_vector(p);

  // Most distant pair, one point on each circle.
  double far = -1.0;
  Vec3 raw = Vec3::UnitX();
  for (const auto& a : se)
    for (const auto& b : fe) {
      const double d = (a - b).squaredNorm();
      if (d > far) {
        far = d;
        raw = a - b;
      }
    }
  g.R_raw = Direction::from_vector(raw);
  Vec3 r = T.cross(g.P.vec());
  if (r.dot(raw) < 0.0) r = -r;
  g.R = Direction::from_vector(r);

  g.tp_deg = rad2deg(angle_between(T, g.P.vec()));
  g.tr_deg = rad2deg(angle_between(T, g.R.vec()));
  g.pr_deg = rad2deg(angle_between(g.P.vec(), g.R.vec()));
  return g;
}

StereoPoint stereographic_project(const Direction& d) {
  const Vec3& v = d.vec();
  const double den = 1.0 + v.y();
  if (den < 1e-12) throw ValidationError("direction at the projection pole -e2 cannot be projected");
  return {v.x() / den, v.z() / den};
}

namespace {

std::string process_label(const PdcProcess& p) {
  std::ostringstream os;
  os.precision(6);
  os << "fast(" << p.lambda_f_nm << " nm) -> slow(" << p.lambda_s_nm << " nm) + fast(" << p.lambda_i_nm << " nm)";
  return os.str();
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (std::abs(den) < 1e-300) throw ValidationError("sweep needs at least two distinct wavelengths");
  return (n * sxy - sx * sy) / den;
}

double cone_radius(const CrystalDefinition& crystal, const PdcProcess& p, const Direction& pump, Mode m,
                   const ConeOptions& opt) {
  const auto cone = trace_cone(crystal, p, pump, m, opt);
  if (cone.points.size() < 3) throw NoPhaseMatchingError("no emission cone for " + process_label(p));
  return cone.radius_deg;
}

}  // namespace

PumpSweep pump_bandwidth_sweep(const CrystalDefinition& crystal, const Direction& pump_dir,
                               const std::vector<double>& lambda_f_nm, double lambda_dc_nm, double reference_f_nm,
                               const ConeOptions& options) {
  if (lambda_f_nm.size() < 2) throw ValidationError("pump sweep needs at least two pump wavelengths");
  PumpSweep out;
  out.lambda_dc_nm = lambda_dc_nm;
  out.reference_f_nm = reference_f_nm;
  const double ref_slow =
      cone_radius(crystal, PdcProcess::with_signal(reference_f_nm, lambda_dc_nm), pump_dir, Mode::Slow, options);
  const double ref_fast =
      cone_radius(crystal, PdcProcess::with_idler(reference_f_nm, lambda_dc_nm), pump_dir, Mode::Fast, options);
  std::vector<double> xs, ns, nf, rs, rf;
  for (double lf : lambda_f_nm) {
    const auto ps = PdcProcess::with_signal(lf, lambda_dc_nm);
    const auto pf = PdcProcess::with_idler(lf, lambda_dc_nm);
    SweepRow a{process_label(ps), lf, ps.lambda_s_nm, ps.lambda_i_nm, Mode::Slow, 0.0, 0.0};
    a.radius_deg = cone_radius(crystal, ps, pump_dir, Mode::Slow, options);
    a.normalized_radius = a.radius_deg / ref_slow;
    SweepRow b{process_label(pf), lf, pf.lambda_s_nm, pf.lambda_i_nm, Mode::Fast, 0.0, 0.0};
    b.radius_deg = cone_radius(crystal, pf, pump_dir, Mode::Fast, options);
    b.normalized_radius = b.radius_deg / ref_fast;
    xs.push_back(lf);
    ns.push_back(a.normalized_radius);
    nf.push_back(b.normalized_radius);
    rs.push_back(a.radius_deg);
    rf.push_back(b.radius_deg);
    out.rows.push_back(a);
    out.rows.push_back(b);
  }
  out.slope_slow_per_nm = ls_slope(xs, ns);
  out.slope_fast_per_nm = ls_slope(xs, nf);
  out.slope_ratio = out.slope_slow_per_nm / out.slope_fast_per_nm;
  out.width_slow_deg = *std::max_element(rs.begin(), rs.end()) - *std::min_element(rs.begin(), rs.end());
  out.width_fast_deg = *std::max_element(rf.begin(), rf.end()) - *std::min_element(rf.begin(), rf.end());
  out.width_ratio = out.width_slow_deg / out.width_fast_deg;
  return out;
}

FilterSweep filter_bandwidth_sweep(const CrystalDefinition& crystal, const Direction& pump_dir, double lambda_f_nm,
                                   const std::vector<double>& lambda_dc_edges_nm, const ConeOptions& options) {
  if (lambda_dc_edges_nm.empty()) throw ValidationError("filter sweep needs at least one down-converted wavelength");
  FilterSweep out;
  out.lambda_f_nm = lambda_f_nm;
  const auto deg = PdcProcess::degenerate(lambda_f_nm);
  const double ref_slow = cone_radius(crystal, deg, pump_dir, Mode::Slow, options);
  const double ref_fast = cone_radius(crystal, deg, pump_dir, Mode::Fast, options);
  std::vector<double> rs, rf;
  for (double ldc : lambda_dc_edges_nm) {
    const auto p = PdcProcess::with_signal(lambda_f_nm, ldc);
    const auto pair = emission_cones(crystal, p, pump_dir, options);
    if (pair.slow.points.size() < 3 || pair.fast.points.size() < 3)
      throw NoPhaseMatchingError("no emission cones for " + process_label(p));
    out.rows.push_back({process_label(p), lambda_f_nm, p.lambda_s_nm, p.lambda_i_nm, Mode::Slow, pair.slow.radius_deg,
                        pair.slow.radius_deg / ref_slow});
    out.rows.push_back({process_label(p), lambda_f_nm, p.lambda_s_nm, p.lambda_i_nm, Mode::Fast, pair.fast.radius_deg,
                        pair.fast.radius_deg / ref_fast});
    rs.push_back(pair.slow.radius_deg);
    rf.push_back(pair.fast.radius_deg);
  }
  out.spread_slow_deg = *std::max_element(rs.begin(), rs.end()) - *std::min_element(rs.begin(), rs.end());
  out.spread_fast_deg = *std::max_element(rf.begin(), rf.end()) - *std::min_element(rf.begin(), rf.end());
  out.asymmetry_ratio = out.spread_fast_deg > 0.0 ? out.spread_slow_deg / out.spread_fast_deg : 0.0;
  return out;
}

}  // namespace pdc
