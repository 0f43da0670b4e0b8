#include <doctest.h>

#include <cmath>
#include <random>

#include "common.hpp"
#include "oracles.hpp"
#include "pdc/nonlinearity.hpp"

using namespace pdc;
using testing::bbo;
using testing::bibo;
using testing::T;

namespace {

const PdcProcess kDegenerate = PdcProcess::degenerate(390.0);

CrystalDefinition scaled(const CrystalDefinition& c, double s) {
  CrystalDefinition out = c;
  if (out.nonlinear.kleinman) *out.nonlinear.kleinman *= s;
  if (out.nonlinear.general) *out.nonlinear.general *= s;
  return out;
}

}  // namespace

TEST_SUITE("nonlinearity") {

TEST_CASE("BBO contraction matches the closed-form type-II expression") {
  const double d22 = 2.2;
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> psi(-180.0, 180.0), rho(5.0, 85.0);
  for (int i = 0; i < 20; ++i) {
    const double p = psi(rng), r = rho(rng);
    const double theta = (90.0 - r) * oracle::kDeg, phi = p * oracle::kDeg;
    const double v = deff_collinear(bbo(), Direction::from_angles(p, r), kDegenerate, true);
    CHECK(v == doctest::Approx(oracle::bbo_type2_deff(d22, theta, phi)).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("effective nonlinearity at the working directions") {
  const auto pm = collinear_at_psi(bbo(), kDegenerate, 0.0, 46.0);
  REQUIRE(pm);
  const double d_bbo = deff_collinear(bbo(), *pm, kDegenerate, true);
  const double d_k = deff_collinear(bibo(), T, kDegenerate, true);
  const double d_g = deff_collinear(bibo(), T, kDegenerate, false);
  CHECK(std::abs(d_bbo - 1.15) <= 0.05);
  CHECK(std::abs(d_k - 2.00) <= 0.05);
  CHECK(std::abs(d_g - 2.02) <= 0.05);
  CHECK(std::abs(d_k - d_g) <= 0.02 * d_g);
  const double ratio = (d_g / d_bbo) * (d_g / d_bbo);
  CHECK(std::abs(ratio - 3.09) <= 0.2);
}

TEST_CASE("d_eff is invariant under a common rotation of tensor and fields") {
  const DMatrix d = nonlinear_tensor(bibo(), false).d;
  std::mt19937 rng(12);
  std::normal_distribution<double> g;
  for (int i = 0; i < 20; ++i) {
    const Mat3 R = Eigen::AngleAxisd(g(rng), Vec3(g(rng), g(rng), g(rng)).normalized()).toRotationMatrix();
    const Vec3 p = Vec3(g(rng), g(rng), g(rng)).normalized(), s = Vec3(g(rng), g(rng), g(rng)).normalized(),
               f = Vec3(g(rng), g(rng), g(rng)).normalized();
    const double a = contract(d, p, s, f);
    const double b = contract(rotate_dmatrix(d, R), R * p, R * s, R * f);
    CHECK(std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("contraction is symmetric in the two down-converted fields") {
  const DMatrix d = nonlinear_tensor(bibo(), false).d;
  const Vec3 p(0.3, -0.5, 0.8), s(0.1, 0.9, -0.4), f(-0.7, 0.2, 0.6);
  CHECK(contract(d, p, s, f) == doctest::Approx(contract(d, p, f, s)).epsilon(1e-14));
}

TEST_CASE("handedness and global scaling") {
  auto j = testing::bundled_json("bibo.json");
  j["handedness"] = -1;
  const auto mirrored = parse_crystal(j.dump());
  CHECK(nonlinear_tensor(mirrored, true).d == -nonlinear_tensor(bibo(), true).d);
  CHECK(deff_collinear(mirrored, T, kDegenerate, true) == doctest::Approx(deff_collinear(bibo(), T, kDegenerate, true)));
  for (double s : {-3.0, 0.5}) {
    const auto c = scaled(bibo(), s);
    CHECK(deff_collinear(c, T, kDegenerate, false) ==
          doctest::Approx(std::abs(s) * deff_collinear(bibo(), T, kDegenerate, false)).epsilon(1e-12));
  }
}

TEST_CASE("missing tensor variant is an explicit error") {
  CrystalDefinition c = bibo();
  c.nonlinear.general.reset();
  CHECK_THROWS_AS(deff_collinear(c, T, kDegenerate, false), ValidationError);
  CHECK_NOTHROW(deff_collinear(c, T, kDegenerate, true));
}

TEST_CASE("tensor given in the indicatrix frame is rotated into the physical frame") {
  CrystalDefinition c = bibo();
  const Mat3 R = indicatrix_rotation(bibo(), 780.0).matrix;
  c.nonlinear.frame = TensorFrame::Indicatrix;
  c.nonlinear.reference_nm = 780.0;
  c.nonlinear.general = rotate_dmatrix(*bibo().nonlinear.general, R.transpose());
  CHECK((nonlinear_tensor(c, false).d - *bibo().nonlinear.general).norm() < 1e-12);
}

TEST_CASE("d_eff map") {
  DeffGrid grid;
  grid.step_deg = 1.0;
  const auto m = deff_map(bibo(), grid, kDegenerate);
  CHECK(m.values.size() == 91u * 91u);
  CHECK(m.at(63, 53).has_value());
  // Node values equal direct evaluation.
  CHECK(*m.at(20, 70) == doctest::Approx(deff_collinear(bibo(), Direction::from_angles(20.0, 70.0), kDegenerate, false)));
  // The maximum is about 14 contour steps of 0.14 pm/V.
  CHECK(std::abs(m.max_value - 14 * 0.14) <= 0.14);
  // The overlay curve passes through the high-d_eff region near T.
  double near_T = 0.0;
  for (const auto& d : m.collinear_curve)
    if (rad2deg(angle_between(d.vec(), T.vec())) < 3.0)
      near_T = std::max(near_T, deff_collinear(bibo(), d, kDegenerate, false));
  CHECK(near_T > 0.9 * m.max_value);
  CHECK_THROWS_AS(deff_map(bibo(), DeffGrid{0, 90, 0, 90, 0.0}, kDegenerate), ValidationError);
}

TEST_CASE("zero tensor gives an identically zero map; degenerate nodes are absent") {
  DeffGrid grid;
  grid.step_deg = 5.0;
  const auto z = deff_map(scaled(bibo(), 0.0), grid, kDegenerate);
  for (const auto& v : z.values)
    if (v) CHECK(*v == 0.0);
  // rho = 90 is the BBO optic axis.
  const auto b = deff_map(bbo(), grid, kDegenerate, true);
  CHECK_FALSE(b.at(0, grid.rho_count() - 1).has_value());
  CHECK(b.at(0, 9).has_value());
}

TEST_CASE("design scan") {
  DesignScanOptions o;
  o.psi_step_deg = 3.0;
  const auto a = design_scan(bibo(), kDegenerate, o);
  REQUIRE_FALSE(a.empty());
  for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i - 1].deff >= a[i].deff);
  for (const auto& c : a) CHECK(std::abs(c.crossing_angle_deg - o.target_angle_deg) <= o.window_deg);

  // Ranking is unchanged by a global scaling of the tensor.
  const auto b = design_scan(scaled(bibo(), 2.5), kDegenerate, o);
  REQUIRE(b.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a[i].pump.vec() - b[i].pump.vec()).norm() < 1e-12);
    CHECK(b[i].deff == doctest::Approx(2.5 * a[i].deff).epsilon(1e-12));
  }

  // A vanishing window is handled gracefully.
  o.window_deg = 0.001;
  std::vector<DesignCandidate> narrow;
  CHECK_NOTHROW(narrow = design_scan(bibo(), kDegenerate, o));
  for (const auto& c : narrow) CHECK(std::abs(c.crossing_angle_deg - 90.0) <= 0.001);
}

}  // TEST_SUITE
