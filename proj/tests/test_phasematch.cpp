#include <doctest.h>

#include <cmath>

#include "common.hpp"
#include "oracles.hpp"
#include "pdc/phasematch.hpp"

using namespace pdc;
using testing::bbo;
using testing::bibo;
using testing::T;

namespace {

const PdcProcess kDegenerate = PdcProcess::degenerate(390.0);

const ConePair& cones_at_T() {
  static const ConePair c = emission_cones(bibo(), kDegenerate, T);
  return c;
}

const PdcGeometry& geometry_at_T() {
  static const PdcGeometry g = cone_geometry(bibo(), kDegenerate, cones_at_T(), T);
  return g;
}

double min_distance_deg(const EmissionCone& a, const EmissionCone& b) {
  double best = 1e9;
  for (const auto& p : a.points)
    for (const auto& q : b.points) best = std::min(best, rad2deg(angle_between(p.external.vec(), q.external.vec())));
  return best;
}

}  // namespace

TEST_SUITE("phasematch") {

TEST_CASE("process construction conserves energy exactly") {
  const auto p = PdcProcess::with_signal(389.0, 780.0);
  CHECK(1.0 / p.lambda_f_nm == doctest::Approx(1.0 / p.lambda_s_nm + 1.0 / p.lambda_i_nm).epsilon(1e-14));
  CHECK(p.lambda_i_nm == doctest::Approx(776.01).epsilon(0.01 / 776.0));
  const auto q = PdcProcess::with_idler(391.0, 780.0);
  CHECK(q.lambda_s_nm == doctest::Approx(784.01).epsilon(0.01 / 784.0));
  CHECK_NOTHROW(p.validate());
  CHECK_THROWS_AS(PdcProcess::from_wavelengths(389.0, 780.0, 776.01), ValidationError);
  CHECK_THROWS_AS(PdcProcess::from_wavelengths(390.0, 780.0, 781.0), ValidationError);
  CHECK_THROWS_AS(partner_wavelength(390.0, 300.0), ValidationError);
}

TEST_CASE("vector mismatch") {
  const auto pm = collinear_at_psi(bbo(), kDegenerate, 0.0, 46.0);
  REQUIRE(pm);
  CHECK(mismatch(bbo(), kDegenerate, *pm, *pm, *pm).relative_mismatch < kMismatchThreshold);
  CHECK(mismatch(bbo(), kDegenerate, *pm, *pm, *pm).relative_mismatch < 1e-12);
  const Direction off = Direction::from_angles(20.0, 20.0);
  CHECK(mismatch(bbo(), kDegenerate, off, off, off).relative_mismatch > 0.0);
  // Moving away from the solution increases the mismatch monotonically.
  double prev = 0.0;
  for (double d = 0.05; d <= 1.0; d += 0.05) {
    const Direction p = Direction::from_angles(0.0, pm->rho_deg() + d);
    const double m = mismatch(bbo(), kDegenerate, p, p, p).relative_mismatch;
    CHECK(m > prev);
    prev = m;
  }
}

TEST_CASE("collinear curve points are phase matched") {
  const auto curve = collinear_curve(bibo(), kDegenerate);
  REQUIRE(curve.size() > 100);
  for (const auto& d : curve) CHECK(std::abs(collinear_mismatch(bibo(), kDegenerate, d)) < 1e-10);
  CHECK_THROWS_AS(collinear_curve(bibo(), PdcProcess{390.0, 780.0, 781.0}), ValidationError);
}

TEST_CASE("collinear search agrees with a brute-force scan") {
  for (const auto& [psi, guess] : {std::pair{60.0, 60.0}, {63.5, 55.0}, {70.0, 45.0}}) {
    const auto d = collinear_at_psi(bibo(), kDegenerate, psi, guess);
    REQUIRE(d);
    const auto [rho, val] = oracle::grid_min(
        [&](double r) { return std::abs(collinear_mismatch(bibo(), kDegenerate, Direction::from_angles(psi, r))); },
        guess - 5.0, guess + 5.0, 10000);
    CHECK(std::abs(d->rho_deg() - rho) < 2e-3);
    (void)val;
  }
}

TEST_CASE("BBO collinear angle matches the closed-form uniaxial solution at every azimuth") {
  const auto pf = principal_indices(bbo(), 390.0), pd = principal_indices(bbo(), 780.0);
  const double theta = oracle::uniaxial_type2_theta(pf.n1, pf.n3, pd.n1, pd.n3) / oracle::kDeg;
  for (double psi = 0.0; psi < 90.0; psi += 9.0) {
    const auto d = collinear_at_psi(bbo(), kDegenerate, psi, 45.0);
    REQUIRE(d);
    CHECK(std::abs(d->rho_deg() - (90.0 - theta)) < 0.05);
  }
  CollinearOptions o;
  o.psi_step_deg = 10.0;
  o.rho_min_deg = 0.0;
  const auto curve = collinear_curve(bbo(), kDegenerate, o);
  CHECK(curve.size() == 10);
  for (const auto& d : curve) CHECK(std::abs(d.rho_deg() - (90.0 - theta)) < 1e-6);
}

TEST_CASE("every cone point re-verifies momentum conservation") {
  const auto& c = cones_at_T();
  CHECK(c.slow.points.size() == 720);
  CHECK(c.fast.points.size() == 720);
  for (const auto* cone : {&c.slow, &c.fast})
    for (const auto& p : cone->points) {
      const bool slow = cone->polarization == Mode::Slow;
      const auto& sig = slow ? p.internal : p.partner_internal;
      const auto& idl = slow ? p.partner_internal : p.internal;
      CHECK(mismatch(bibo(), kDegenerate, T, sig, idl).relative_mismatch < kMismatchThreshold);
    }
}

TEST_CASE("cone search edge cases") {
  ConeOptions o;
  o.threshold = 0.0;
  o.azimuth_count = 36;
  const auto c = emission_cones(bibo(), kDegenerate, T, o);
  CHECK(c.slow.points.empty());
  CHECK(c.fast.points.empty());
  CHECK_THROWS_AS(cone_geometry(bibo(), kDegenerate, c, T), NoPhaseMatchingError);
  o.azimuth_count = 2;
  CHECK_THROWS_AS(emission_cones(bibo(), kDegenerate, T, o), ValidationError);
}

TEST_CASE("pump on the collinear curve gives tangent cones") {
  const auto d = collinear_at_psi(bibo(), kDegenerate, 63.5, 55.0);
  REQUIRE(d);
  ConeOptions o;
  o.azimuth_count = 360;
  const auto c = emission_cones(bibo(), kDegenerate, *d, o);
  CHECK(min_distance_deg(c.slow, c.fast) < 0.05);
  // At T, away from the curve, the cones cross properly.
  CHECK(geometry_at_T().separation_deg > 5.0);
}

TEST_CASE("geometry at T") {
  const auto& g = geometry_at_T();
  CHECK(std::abs(g.separation_deg - 6.9) <= 0.2);
  CHECK(std::abs(g.P.psi_deg() - (-80.6)) <= 0.3);
  CHECK(std::abs(g.P.rho_deg() - 30.9) <= 0.3);
  CHECK(std::abs(g.R.psi_deg() - (-1.4)) <= 0.3);
  CHECK(std::abs(g.R.rho_deg() - (-17.4)) <= 0.3);
  CHECK(std::abs(g.tp_deg - 90.0) < 0.2);
  CHECK(std::abs(g.tr_deg - 90.0) < 0.2);
  CHECK(std::abs(g.pr_deg - 90.0) < 0.2);
  REQUIRE(g.external_intersections.size() == 2);
  CHECK(g.external_intersections[0].direction.rho_deg() > g.external_intersections[1].direction.rho_deg());
  // Intersection points lie on both cones.
  for (const auto& x : g.internal_intersections) {
    const auto& c = cones_at_T();
    double ds = 1e9, df = 1e9;
    for (const auto& p : c.slow.points) ds = std::min(ds, rad2deg(angle_between(p.internal.vec(), x.direction.vec())));
    for (const auto& p : c.fast.points) df = std::min(df, rad2deg(angle_between(p.internal.vec(), x.direction.vec())));
    CHECK(ds < 0.05);
    CHECK(df < 0.05);
  }
  CHECK(g.crossing_angle_deg > 0.0);
  CHECK(g.crossing_angle_deg < 180.0);
}

TEST_CASE("intersection points are converged in the azimuth sampling") {
  ConeOptions o;
  o.azimuth_count = 1440;
  const auto g2 = cone_geometry(bibo(), kDegenerate, emission_cones(bibo(), kDegenerate, T, o), T);
  const auto& g = geometry_at_T();
  for (int i = 0; i < 2; ++i)
    CHECK(rad2deg(angle_between(g.external_intersections[i].direction.vec(),
                                g2.external_intersections[i].direction.vec())) < 0.05);
}

TEST_CASE("crossing angle falls monotonically away from the curve") {
  const auto on = collinear_at_psi(bibo(), kDegenerate, 63.5, 55.0);
  REQUIRE(on);
  ConeOptions o;
  o.azimuth_count = 360;
  double prev = 1e9;
  for (double rho : {55.3, 54.8, 54.3, 53.8, 53.5}) {
    const Direction d = Direction::from_angles(63.5, rho);
    const double a = cone_geometry(bibo(), kDegenerate, emission_cones(bibo(), kDegenerate, d, o), d).crossing_angle_deg;
    CHECK(a < prev);
    prev = a;
  }
}

TEST_CASE("identical cones are rejected") {
  ConePair same{cones_at_T().slow, cones_at_T().slow};
  CHECK_THROWS_AS(cone_geometry(bibo(), kDegenerate, same, T), ComputationError);
}

TEST_CASE("refraction") {
  const Vec3 N = Vec3::UnitZ();
  const Direction normal = Direction::from_vector(N);
  CHECK((refract_external(normal, 1.8, N).vec() - N).norm() < 1e-15);
  const Direction in = Direction::from_vector(oracle::from_angles(30.0, 87.0));
  CHECK((refract_external(in, 1.0, N).vec() - in.vec()).norm() < 1e-15);
  const Direction out = refract_external(in, 1.8, N);
  CHECK(rad2deg(angle_between(out.vec(), N)) == doctest::Approx(oracle::snell_deg(1.8, 3.0)).epsilon(1e-12));
  CHECK(rad2deg(angle_between(out.vec(), N)) == doctest::Approx(5.41).epsilon(0.005 / 5.41));
  CHECK((refract_internal(out, 1.8, N).vec() - in.vec()).norm() < 1e-10);
  CHECK_THROWS_AS(refract_external(Direction::from_vector(oracle::from_angles(0.0, 50.0)), 1.8, N),
                  TotalInternalReflectionError);
}

TEST_CASE("stereographic projection") {
  const auto c = stereographic_project(Direction::from_vector(Vec3::UnitY()));
  CHECK(c.u == 0.0);
  CHECK(c.v == 0.0);
  CHECK_THROWS_AS(stereographic_project(Direction::from_vector(-Vec3::UnitY())), ValidationError);
  // Circles on the sphere map to circles in the plane.
  for (const auto& [axis, radius] : {std::pair{oracle::from_angles(63.5, 53.5), 5.0}, {oracle::from_angles(-10.0, 20.0), 30.0}}) {
    const Vec3 u = axis.cross(Vec3::UnitZ()).normalized(), w = axis.cross(u);
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 100; ++i) {
      const double a = 2.0 * std::numbers::pi * i / 100;
      const Vec3 v = std::cos(radius * oracle::kDeg) * axis +
                     std::sin(radius * oracle::kDeg) * (std::cos(a) * u + std::sin(a) * w);
      const auto s = stereographic_project(Direction::from_vector(v));
      pts.emplace_back(s.u, s.v);
    }
    CHECK(oracle::circle_fit_residual(pts) < 1e-6);
  }
}

TEST_CASE("pump-wavelength sweep") {
  ConeOptions o;
  o.azimuth_count = 360;
  const auto s = pump_bandwidth_sweep(bibo(), T, {389.0, 390.0, 391.0}, 780.0, 390.0, o);
  REQUIRE(s.rows.size() == 6);
  for (const auto& r : s.rows) {
    if (r.lambda_f_nm == 390.0) CHECK(r.normalized_radius == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(1.0 / r.lambda_f_nm == doctest::Approx(1.0 / r.lambda_s_nm + 1.0 / r.lambda_i_nm).epsilon(1e-13));
  }
  // The slow cone reacts more strongly to the pump wavelength.
  CHECK(s.slope_ratio > 1.5);
  CHECK(s.width_ratio > 1.5);
  // The degenerate rows reproduce the cone search directly.
  const auto c = emission_cones(bibo(), kDegenerate, T, o);
  CHECK(s.rows[2].radius_deg == c.slow.radius_deg);
  CHECK(s.rows[3].radius_deg == c.fast.radius_deg);
}

TEST_CASE("filter-edge sweep and slow/fast assignment") {
  ConeOptions o;
  o.azimuth_count = 360;
  const auto f = filter_bandwidth_sweep(bibo(), T, 390.0, {778.5, 781.51}, o);
  const auto p = pump_bandwidth_sweep(bibo(), T, {389.0, 390.0, 391.0}, 780.0, 390.0, o);
  // Filter edges produce a far smaller slow/fast asymmetry than the pump sweep.
  CHECK(f.asymmetry_ratio < 0.5 * p.slope_ratio);
  // Exchanging which photon sits at the shorter wavelength swaps which cone grows.
  const auto deg = emission_cones(bibo(), kDegenerate, T, o);
  const auto a = emission_cones(bibo(), PdcProcess::with_signal(390.0, 778.5), T, o);
  const auto b = emission_cones(bibo(), PdcProcess::with_idler(390.0, 778.5), T, o);
  const double da = a.slow.radius_deg - deg.slow.radius_deg, db = b.slow.radius_deg - deg.slow.radius_deg;
  CHECK(da * db < 0.0);
  const double fa = a.fast.radius_deg - deg.fast.radius_deg, fb = b.fast.radius_deg - deg.fast.radius_deg;
  CHECK(fa * fb < 0.0);
}

TEST_CASE("collinear curve cones are tangent along the curve") {
  ConeOptions o;
  o.azimuth_count = 180;
  for (const auto& [psi, guess] : {std::pair{50.0, 67.0}, {70.0, 45.0}}) {
    const auto d = collinear_at_psi(bibo(), kDegenerate, psi, guess);
    REQUIRE(d);
    const auto c = emission_cones(bibo(), kDegenerate, *d, o);
    CHECK(min_distance_deg(c.slow, c.fast) < 0.1);
  }
}

}  // TEST_SUITE
