#include "pdc/dispersion.hpp"

#include <cmath>

// Boost 1.74's pchip calls isnan unqualified without including a declaration.
namespace boost::math::interpolators::detail {
using std::isnan;
}
namespace boost::math::interpolators {
using std::isnan;
}
#include <boost/math/interpolators/pchip.hpp>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "pdc/errors.hpp"
#include "pdc/waveoptics.hpp"

namespace pdc {

using nlohmann::json;

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(9);
  os << x;
  return os.str();
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ValidationError("missing field '" + std::string(key) + "' in " + where);
  return obj.at(key);
}

double number(const json& v, const std::string& what) {
  if (!v.is_number()) throw ValidationError(what + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ValidationError(what + " must be finite");
  return x;
}

std::vector<double> numbers(const json& v, const std::string& what) {
  if (!v.is_array()) throw ValidationError(what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(number(x, what));
  return out;
}

IndexFormula formula_from(const std::string& s) {
  if (s == "abcd") return IndexFormula::Abcd;
  if (s == "sellmeier") return IndexFormula::Sellmeier;
  if (s == "constant") return IndexFormula::Constant;
  throw ValidationError("unknown formula family '" + s + "'");
}

DMatrix parse_dmatrix(const json& v, const std::string& what) {
  if (!v.is_array() || v.size() != 3) throw ValidationError(what + " must be a 3x6 array");
  DMatrix d;
  for (int i = 0; i < 3; ++i) {
    const auto row = numbers(v.at(i), what);
    if (row.size() != 6) throw ValidationError(what + " must be a 3x6 array");
    for (int j = 0; j < 6; ++j) d(i, j) = row[j];
  }
  return d;
}

bool same_set(const SellmeierSet& a, const SellmeierSet& b) {
  return a.formula == b.formula && a.coefficients == b.coefficients;
}

// Voigt entries that vanish in point group 2 with the twofold axis along e_2.
bool forbidden_in_group2(int row, int col) {
  if (row == 1) return col == 3 || col == 5;
  return !(col == 3 || col == 5);
}

void validate_sellmeier(const SellmeierSet& s, const std::string& where) {
  const std::size_t n = s.coefficients.size();
  switch (s.formula) {
    case IndexFormula::Abcd:
      if (n != 4) throw ValidationError(where + ": formula 'abcd' needs 4 coefficients");
      break;
    case IndexFormula::Sellmeier:
      if (n == 0 || n % 2 != 0) throw ValidationError(where + ": formula 'sellmeier' needs pairs B_i, C_i");
      break;
    case IndexFormula::Constant:
      if (n != 1) throw ValidationError(where + ": formula 'constant' needs 1 coefficient");
      break;
  }
}

}  // namespace

std::string_view to_string(Symmetry s) {
  switch (s) {
    case Symmetry::BiaxialMonoclinic: return "biaxial-monoclinic";
    case Symmetry::Uniaxial: return "uniaxial";
    case Symmetry::Isotropic: return "isotropic";
  }
  return "?";
}

double SellmeierSet::index(double lambda_nm) const {
  const double l = lambda_nm * 1e-3;
  const double l2 = l * l;
  double n2 = 0.0;
  switch (formula) {
    case IndexFormula::Abcd: {
      const auto& c = coefficients;
      n2 = c[0] + c[1] / (l2 - c[2]) - c[3] * l2;
      break;
    }
    case IndexFormula::Sellmeier:
      n2 = 1.0;
      for (std::size_t i = 0; i + 1 < coefficients.size(); i += 2) n2 += coefficients[i] * l2 / (l2 - coefficients[i + 1]);
      break;
    case IndexFormula::Constant:
      return coefficients[0];
  }
  return n2 > 0.0 ? std::sqrt(n2) : std::nan("");
}

double PhiModel::phi_deg(double lambda_nm) const {
  switch (kind) {
    case Kind::None:
      return 0.0;
    case Kind::Cauchy: {
      const double l = lambda_nm * 1e-3;
      return a_deg + b_deg_um2 / (l * l);
    }
    case Kind::Table: {
      if (table_nm.size() == 1) return table_deg.front();
      if (lambda_nm < table_nm.front() || lambda_nm > table_nm.back())
        throw ValidationError("wavelength " + fmt(lambda_nm) + " nm outside the Phi table [" + fmt(table_nm.front()) +
                              ", " + fmt(table_nm.back()) + "] nm");
      if (table_nm.size() < 4) {
        // pchip needs four knots; fall back to linear between the given points.
        std::size_t i = 1;
        while (i + 1 < table_nm.size() && lambda_nm > table_nm[i]) ++i;
        const double t = (lambda_nm - table_nm[i - 1]) / (table_nm[i] - table_nm[i - 1]);
        return table_deg[i - 1] + t * (table_deg[i] - table_deg[i - 1]);
      }
      auto x = table_nm;
      auto y = table_deg;
      boost::math::interpolators::pchip<std::vector<double>> spline(std::move(x), std::move(y));
      return spline(lambda_nm);
    }
  }
  return 0.0;
}

void CrystalDefinition::require_transparent(double lambda_nm) const {
  if (!std::isfinite(lambda_nm) || !transparent_at(lambda_nm))
    throw ValidationError("wavelength " + fmt(lambda_nm) + " nm outside the transparency range [" +
                          fmt(transparency_min_nm) + ", " + fmt(transparency_max_nm) + "] nm of " + name);
}

CrystalDefinition parse_crystal(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("crystal file parse failure: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("crystal file must be a JSON object");
  const std::string top = "crystal file";

  CrystalDefinition c;
  const auto& name = require(doc, "name", top);
  if (!name.is_string() || name.get<std::string>().empty()) throw ValidationError("name must be a non-empty string");
  c.name = name.get<std::string>();

  const auto& sym = require(doc, "symmetry", top);
  const std::string s = sym.is_string() ? sym.get<std::string>() : "";
  if (s == "biaxial-monoclinic")
    c.symmetry = Symmetry::BiaxialMonoclinic;
  else if (s == "uniaxial")
    c.symmetry = Symmetry::Uniaxial;
  else if (s == "isotropic")
    c.symmetry = Symmetry::Isotropic;
  else
    throw ValidationError("unknown symmetry '" + s + "'");

  const auto tr = numbers(require(doc, "transparency_nm", top), "transparency_nm");
  if (tr.size() != 2 || !(tr[0] > 0.0) || !(tr[1] > tr[0])) throw ValidationError("transparency_nm must be [min, max] with 0 < min < max");
  c.transparency_min_nm = tr[0];
  c.transparency_max_nm = tr[1];

  const auto& hand = require(doc, "handedness", top);
  if (!hand.is_number_integer() || std::abs(hand.get<int>()) != 1) throw ValidationError("handedness must be +1 or -1");
  c.handedness = hand.get<int>();

  const auto& sm = require(doc, "sellmeier", top);
  if (!sm.is_array() || sm.size() != 3) throw ValidationError("sellmeier must hold exactly three coefficient sets");
  for (int i = 0; i < 3; ++i) {
    const std::string where = "sellmeier[" + std::to_string(i) + "]";
    const auto& entry = sm.at(i);
    const auto& f = require(entry, "formula", where);
    if (!f.is_string()) throw ValidationError(where + ".formula must be a string");
    c.sellmeier[i].formula = formula_from(f.get<std::string>());
    c.sellmeier[i].coefficients = numbers(require(entry, "coefficients", where), where + ".coefficients");
    if (entry.contains("provenance")) c.sellmeier[i].provenance = entry.at("provenance").get<std::string>();
    validate_sellmeier(c.sellmeier[i], where);
  }

  if (doc.contains("phi_formula") && doc.contains("phi_table"))
    throw ValidationError("give either phi_formula or phi_table, not both");
  if (doc.contains("phi_formula")) {
    const auto& pf = doc.at("phi_formula");
    const auto& kind = require(pf, "kind", "phi_formula");
    if (!kind.is_string() || kind.get<std::string>() != "cauchy") throw ValidationError("unknown phi_formula kind");
    c.phi.kind = PhiModel::Kind::Cauchy;
    c.phi.a_deg = number(require(pf, "a_deg", "phi_formula"), "phi_formula.a_deg");
    c.phi.b_deg_um2 = number(require(pf, "b_deg_um2", "phi_formula"), "phi_formula.b_deg_um2");
    if (pf.contains("provenance")) c.phi.provenance = pf.at("provenance").get<std::string>();
  } else if (doc.contains("phi_table")) {
    const auto& pt = doc.at("phi_table");
    c.phi.kind = PhiModel::Kind::Table;
    c.phi.table_nm = numbers(require(pt, "lambda_nm", "phi_table"), "phi_table.lambda_nm");
    c.phi.table_deg = numbers(require(pt, "phi_deg", "phi_table"), "phi_table.phi_deg");
    if (c.phi.table_nm.empty() || c.phi.table_nm.size() != c.phi.table_deg.size())
      throw ValidationError("phi_table needs equally long, non-empty lambda_nm and phi_deg arrays");
    for (std::size_t i = 1; i < c.phi.table_nm.size(); ++i)
      if (!(c.phi.table_nm[i] > c.phi.table_nm[i - 1])) throw ValidationError("phi_table.lambda_nm must increase strictly");
    if (pt.contains("provenance")) c.phi.provenance = pt.at("provenance").get<std::string>();
  }

  const auto& dm = require(doc, "d_matrix", top);
  const std::string fr = require(dm, "frame", "d_matrix").get<std::string>();
  if (fr == "physical") {
    c.nonlinear.frame = TensorFrame::Physical;
  } else if (fr == "indicatrix") {
    c.nonlinear.frame = TensorFrame::Indicatrix;
    c.nonlinear.reference_nm = number(require(dm, "reference_nm", "d_matrix"), "d_matrix.reference_nm");
  } else {
    throw ValidationError("unknown d_matrix frame '" + fr + "'");
  }
  if (dm.contains("kleinman")) c.nonlinear.kleinman = parse_dmatrix(dm.at("kleinman"), "d_matrix.kleinman");
  if (dm.contains("general")) c.nonlinear.general = parse_dmatrix(dm.at("general"), "d_matrix.general");
  if (!c.nonlinear.kleinman && !c.nonlinear.general) throw ValidationError("d_matrix needs a 'kleinman' or 'general' entry");
  if (dm.contains("provenance")) c.nonlinear.provenance = dm.at("provenance").get<std::string>();

  if (doc.contains("provenance"))
    for (const auto& p : doc.at("provenance")) c.provenance.push_back(p.get<std::string>());

  // Invariants.
  if (c.symmetry != Symmetry::BiaxialMonoclinic && c.phi.kind != PhiModel::Kind::None)
    throw ValidationError("Phi must be identically zero unless the crystal is biaxial-monoclinic");
  const bool s01 = same_set(c.sellmeier[0], c.sellmeier[1]);
  const bool s02 = same_set(c.sellmeier[0], c.sellmeier[2]);
  const bool s12 = same_set(c.sellmeier[1], c.sellmeier[2]);
  const int equal_pairs = int(s01) + int(s02) + int(s12);
  if (c.symmetry == Symmetry::Uniaxial && equal_pairs != 1)
    throw ValidationError("uniaxial crystal needs exactly two identical Sellmeier sets");
  if (c.symmetry == Symmetry::Isotropic && equal_pairs != 3)
    throw ValidationError("isotropic crystal needs three identical Sellmeier sets");

  constexpr int kSamples = 400;
  for (int k = 0; k <= kSamples; ++k) {
    const double l = c.transparency_min_nm + (c.transparency_max_nm - c.transparency_min_nm) * k / kSamples;
    for (int i = 0; i < 3; ++i) {
      const double n = c.sellmeier[i].index(l);
      if (!std::isfinite(n) || n <= 1.0)
        throw ValidationError("sellmeier[" + std::to_string(i) + "] gives n <= 1 (or no real index) at " + fmt(l) +
                              " nm inside the transparency range");
    }
  }

  for (const auto* d : {&c.nonlinear.kleinman, &c.nonlinear.general}) {
    if (!*d) continue;
    if (!(*d)->allFinite()) throw ValidationError("d_matrix entries must be finite");
    if (c.symmetry == Symmetry::BiaxialMonoclinic && c.nonlinear.frame == TensorFrame::Physical) {
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 6; ++j)
          if (forbidden_in_group2(i, j) && (**d)(i, j) != 0.0)
            throw ValidationError("d_matrix entry d" + std::to_string(i + 1) + std::to_string(j + 1) +
                                  " must be zero for point group 2");
    }
  }
  return c;
}

CrystalDefinition load_crystal(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open crystal file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_crystal(ss.str());
}

std::filesystem::path bundled_data_dir() { return PDC_DATA_DIR; }

PrincipalIndices principal_indices(const CrystalDefinition& crystal, double lambda_nm) {
  crystal.require_transparent(lambda_nm);
  PrincipalIndices p;
  p.lambda_nm = lambda_nm;
  p.n1 = crystal.sellmeier[0].index(lambda_nm);
  p.n2 = crystal.sellmeier[1].index(lambda_nm);
  p.n3 = crystal.sellmeier[2].index(lambda_nm);
  return p;
}

FrameRotation indicatrix_rotation(const CrystalDefinition& crystal, double lambda_nm) {
  crystal.require_transparent(lambda_nm);
  FrameRotation r;
  r.lambda_nm = lambda_nm;
  r.phi_deg = crystal.phi.phi_deg(lambda_nm);
  const double p = deg2rad(r.phi_deg);
  const double c = std::cos(p), s = std::sin(p);
  r.matrix << c, 0.0, s,
              0.0, 1.0, 0.0,
              -s, 0.0, c;
  return r;
}

double dn_dlambda(const CrystalDefinition& crystal, double lambda_nm, const Direction& dir, Mode mode, double step_nm) {
  if (!(step_nm > 0.0)) throw ValidationError("derivative step must be positive");
  crystal.require_transparent(lambda_nm - step_nm);
  crystal.require_transparent(lambda_nm + step_nm);
  const double up = mode_index(crystal, lambda_nm + step_nm, dir, mode);
  const double down = mode_index(crystal, lambda_nm - step_nm, dir, mode);
  return (up - down) / (2.0 * step_nm);
}

}  // namespace pdc
