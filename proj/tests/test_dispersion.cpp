#include <doctest.h>

#include <cmath>
#include <random>

#include "common.hpp"
#include "oracles.hpp"
#include "pdc/waveoptics.hpp"

using namespace pdc;
using testing::bbo;
using testing::bibo;
using testing::bundled_json;

namespace {

CrystalDefinition parse(const nlohmann::json& j) { return parse_crystal(j.dump()); }

std::string parse_error(const nlohmann::json& j) {
  try {
    parse(j);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("dispersion") {

TEST_CASE("bundled crystals load") {
  CHECK(bibo().name == "BiBO");
  CHECK(bibo().symmetry == Symmetry::BiaxialMonoclinic);
  CHECK(bbo().name == "BBO");
  CHECK(bbo().symmetry == Symmetry::Uniaxial);
  CHECK(bbo().phi.kind == PhiModel::Kind::None);
}

TEST_CASE("principal indices match an independent Sellmeier evaluation") {
  // Coefficients re-typed from the literature sets (not read from the data files).
  const std::array<double, 4> bibo_e1{3.6545, 0.0511, 0.0371, 0.02260};
  const std::array<double, 4> bibo_e2{3.0740, 0.0323, 0.0316, 0.01337};
  const std::array<double, 4> bibo_e3{3.1685, 0.0373, 0.0346, 0.01750};
  for (double l : {390.0, 780.0, 1064.0}) {
    const auto p = principal_indices(bibo(), l);
    CHECK(p.n1 == doctest::Approx(oracle::abcd_index(bibo_e1, l)).epsilon(1e-13));
    CHECK(p.n2 == doctest::Approx(oracle::abcd_index(bibo_e2, l)).epsilon(1e-13));
    CHECK(p.n3 == doctest::Approx(oracle::abcd_index(bibo_e3, l)).epsilon(1e-13));
  }
  // Values from a separate calculator (Python) at 780 nm.
  const auto p = principal_indices(bibo(), 780.0);
  CHECK(p.n1 == doctest::Approx(1.931371348331).epsilon(1e-11));
  CHECK(p.n2 == doctest::Approx(1.766879821900).epsilon(1e-11));
  CHECK(p.n3 == doctest::Approx(1.795232082017).epsilon(1e-11));
}

TEST_CASE("BiBO indices are distinct with n_x < n_y < n_z") {
  const auto p = principal_indices(bibo(), 780.0);
  const double nx = p.n2, ny = p.n3, nz = p.n1;
  CHECK(nx < ny);
  CHECK(ny < nz);
}

TEST_CASE("BBO ordinary pair is degenerate") {
  const auto p = principal_indices(bbo(), 780.0);
  CHECK(p.n1 == p.n2);
  CHECK(p.n3 != p.n1);
  CHECK(p.n1 == doctest::Approx(1.661169185975).epsilon(1e-11));
  CHECK(p.n3 == doctest::Approx(1.544914808578).epsilon(1e-11));
}

TEST_CASE("indices stay physical and continuous over the transparency window") {
  for (const auto* c : {&bibo(), &bbo()}) {
    for (double l = c->transparency_min_nm; l <= c->transparency_max_nm; l += 7.0) {
      const auto a = principal_indices(*c, l).as_array();
      const auto b = principal_indices(*c, std::min(l + 1e-6, c->transparency_max_nm)).as_array();
      for (int i = 0; i < 3; ++i) {
        CHECK(a[i] > 1.0);
        CHECK(a[i] < 4.0);
        CHECK(std::abs(a[i] - b[i]) < 1e-6);
      }
    }
  }
}

TEST_CASE("wavelength outside transparency is rejected") {
  CHECK_THROWS_AS(principal_indices(bibo(), 5000.0), ValidationError);
  CHECK_THROWS_AS(indicatrix_rotation(bibo(), 100.0), ValidationError);
  CHECK_THROWS_WITH_AS(principal_indices(bibo(), 5000.0), doctest::Contains("transparency"), ValidationError);
}

TEST_CASE("indicatrix angle anchors") {
  CHECK(std::abs(indicatrix_rotation(bibo(), 390.0).phi_deg - 43.8) <= 0.1);
  CHECK(std::abs(indicatrix_rotation(bibo(), 780.0).phi_deg - 46.9) <= 0.1);
  for (double l : {200.0, 532.0, 1550.0}) CHECK(indicatrix_rotation(bbo(), l).phi_deg == 0.0);
}

TEST_CASE("frame rotation is proper and round-trips") {
  std::mt19937 rng(7);
  std::normal_distribution<double> g;
  for (double l : {390.0, 780.0, 2000.0}) {
    const auto r = indicatrix_rotation(bibo(), l);
    CHECK((r.matrix.transpose() * r.matrix - Mat3::Identity()).norm() < 1e-14);
    CHECK(r.matrix.determinant() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.to_physical(Vec3::UnitY()) == Vec3::UnitY());
    CHECK((r.matrix - oracle::rotation_e2(r.phi_deg)).norm() < 1e-14);
    for (int i = 0; i < 20; ++i) {
      const Vec3 v(g(rng), g(rng), g(rng));
      CHECK((r.to_physical(r.to_indicatrix(v)) - v).norm() <= 1e-12 * v.norm());
    }
  }
}

TEST_CASE("crystal file validation") {
  SUBCASE("missing d_matrix") {
    auto j = bundled_json("bibo.json");
    j.erase("d_matrix");
    CHECK(parse_error(j).find("missing field 'd_matrix'") != std::string::npos);
  }
  SUBCASE("parse failure") { CHECK_THROWS_WITH_AS(parse_crystal("{ not json"), doctest::Contains("parse"), ValidationError); }
  SUBCASE("unknown formula family") {
    auto j = bundled_json("bibo.json");
    j["sellmeier"][1]["formula"] = "laurent";
    CHECK(parse_error(j).find("unknown formula") != std::string::npos);
  }
  SUBCASE("index below one inside transparency") {
    auto j = bundled_json("bbo.json");
    j["sellmeier"][2]["coefficients"] = {0.5, 0.0, 0.0, 0.0};
    CHECK(parse_error(j).find("n <= 1") != std::string::npos);
  }
  SUBCASE("uniaxial needs one equal pair") {
    auto j = bundled_json("bbo.json");
    j["sellmeier"][1]["coefficients"] = {2.7, 0.01878, 0.01822, 0.01354};
    CHECK(parse_error(j).find("uniaxial") != std::string::npos);
  }
  SUBCASE("uniaxial with orientation dispersion") {
    auto j = bundled_json("bbo.json");
    j["phi_formula"] = {{"kind", "cauchy"}, {"a_deg", 1.0}, {"b_deg_um2", 0.0}};
    CHECK(parse_error(j).find("Phi must be identically zero") != std::string::npos);
  }
  SUBCASE("forbidden point-group-2 entry") {
    auto j = bundled_json("bibo.json");
    j["d_matrix"]["kleinman"][0][0] = 1.0;
    CHECK(parse_error(j).find("point group 2") != std::string::npos);
  }
  SUBCASE("non-finite d entry") {
    auto j = bundled_json("bibo.json");
    j["d_matrix"]["kleinman"][1][1] = "x";
    CHECK_FALSE(parse_error(j).empty());
  }
  SUBCASE("bad handedness") {
    auto j = bundled_json("bibo.json");
    j["handedness"] = 2;
    CHECK(parse_error(j).find("handedness") != std::string::npos);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_crystal("/nonexistent/crystal.json"), ValidationError); }
}

TEST_CASE("tabulated orientation dispersion is interpolated monotonically") {
  auto j = bundled_json("bibo.json");
  j.erase("phi_formula");
  j["phi_table"] = {{"lambda_nm", {300.0, 390.0, 500.0, 780.0, 1500.0}}, {"phi_deg", {42.0, 43.8, 45.2, 46.9, 47.6}}};
  const auto c = parse(j);
  CHECK(indicatrix_rotation(c, 390.0).phi_deg == doctest::Approx(43.8).epsilon(1e-14));
  CHECK(indicatrix_rotation(c, 780.0).phi_deg == doctest::Approx(46.9).epsilon(1e-14));
  double prev = -1e9;
  for (double l = 300.0; l <= 1500.0; l += 5.0) {
    const double p = indicatrix_rotation(c, l).phi_deg;
    CHECK(p >= prev);
    CHECK(p >= 42.0);
    CHECK(p <= 47.6);
    prev = p;
  }
  CHECK_THROWS_AS(indicatrix_rotation(c, 2000.0), ValidationError);
}

TEST_CASE("handedness flips only d signs") {
  auto j = bundled_json("bibo.json");
  j["handedness"] = -1;
  const auto c = parse(j);
  CHECK(c.handedness == -1);
  CHECK(principal_indices(c, 780.0).n1 == principal_indices(bibo(), 780.0).n1);
  CHECK(*c.nonlinear.kleinman == *bibo().nonlinear.kleinman);  // sign applied when the tensor is built
}

TEST_CASE("dn/dlambda magnitudes at 780 nm") {
  const Direction bbo_pm = Direction::from_angles(0.0, 46.4761);
  const double bbo_s = dn_dlambda(bbo(), 780.0, bbo_pm, Mode::Slow);
  const double bbo_f = dn_dlambda(bbo(), 780.0, bbo_pm, Mode::Fast);
  const double bibo_s = dn_dlambda(bibo(), 780.0, testing::T, Mode::Slow);
  const double bibo_f = dn_dlambda(bibo(), 780.0, testing::T, Mode::Fast);
  // Normal dispersion: indices fall with wavelength; the table quotes magnitudes.
  CHECK(bbo_s < 0.0);
  CHECK(bibo_f < 0.0);
  CHECK(std::abs(std::abs(bbo_s) - 3.15e-5) <= 0.315e-5);
  CHECK(std::abs(std::abs(bbo_f) - 2.85e-5) <= 0.285e-5);
  CHECK(std::abs(std::abs(bibo_s) - 7.0e-5) <= 0.7e-5);
  CHECK(std::abs(std::abs(bibo_f) - 5.0e-5) <= 0.5e-5);
  CHECK(std::abs(bibo_s / bibo_f - 1.4) <= 0.15);
  CHECK(std::abs(bbo_s / bbo_f - 1.10) <= 0.05);
}

TEST_CASE("dn/dlambda converges at second order") {
  for (Mode m : {Mode::Fast, Mode::Slow}) {
    const double h = dn_dlambda(bibo(), 780.0, testing::T, m, 0.2);
    const double h2 = dn_dlambda(bibo(), 780.0, testing::T, m, 0.1);
    const double h4 = dn_dlambda(bibo(), 780.0, testing::T, m, 0.05);
    // Richardson: the error ratio between successive halvings is about 4.
    const double ratio = (h - h2) / (h2 - h4);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));
    CHECK(std::abs(h2 - h4) < 1e-7 * std::abs(h2));
  }
  CHECK_THROWS_AS(dn_dlambda(bibo(), 286.05, testing::T, Mode::Fast), ValidationError);
}

TEST_CASE("ordinary dispersion is direction independent in BBO") {
  // The ordinary mode is the slow one in negative uniaxial BBO.
  const double a = dn_dlambda(bbo(), 780.0, Direction::from_angles(10.0, 20.0), Mode::Slow);
  const double b = dn_dlambda(bbo(), 780.0, Direction::from_angles(77.0, -61.0), Mode::Slow);
  CHECK(std::abs(a - b) <= 1e-10 * std::abs(a));
}

}  // TEST_SUITE
