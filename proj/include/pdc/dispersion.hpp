#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pdc/geometry.hpp"

namespace pdc {

enum class Symmetry { BiaxialMonoclinic, Uniaxial, Isotropic };

std::string_view to_string(Symmetry s);

// Formula families for principal indices, lambda in micrometres:
//   Abcd        n^2 = A + B/(l^2 - C) - D l^2
//   Sellmeier   n^2 = 1 + sum_i B_i l^2/(l^2 - C_i)   (coefficients B1, C1, B2, C2, ...)
//   Constant    n   = A
enum class IndexFormula { Abcd, Sellmeier, Constant };

struct SellmeierSet {
  IndexFormula formula = IndexFormula::Constant;
  std::vector<double> coefficients;
  std::string provenance;

  double index(double lambda_nm) const;
};

// Orientation of {e_i^0} relative to {e_i}: rotation angle Phi(lambda) about e_2.
struct PhiModel {
  enum class Kind { None, Table, Cauchy };
  Kind kind = Kind::None;
  std::vector<double> table_nm;   // Table: strictly increasing wavelengths
  std::vector<double> table_deg;  // Table: Phi values, monotone cubic interpolation
  double a_deg = 0.0;             // Cauchy: Phi = a + b / lambda_um^2
  double b_deg_um2 = 0.0;
  std::string provenance;

  double phi_deg(double lambda_nm) const;
};

using DMatrix = Eigen::Matrix<double, 3, 6>;

enum class TensorFrame { Physical, Indicatrix };

struct NonlinearData {
  TensorFrame frame = TensorFrame::Physical;
  double reference_nm = 0.0;           // wavelength fixing {e_i^0} when frame == Indicatrix
  std::optional<DMatrix> kleinman;     // Kleinman-symmetric contracted matrix
  std::optional<DMatrix> general;      // all independent entries, no permutation symmetry
  std::string provenance;
};

struct CrystalDefinition {
  std::string name;
  Symmetry symmetry = Symmetry::Isotropic;
  std::array<SellmeierSet, 3> sellmeier;  // along e_1^0, e_2^0, e_3^0
  PhiModel phi;
  NonlinearData nonlinear;
  double transparency_min_nm = 0.0;
  double transparency_max_nm = 0.0;
  int handedness = 1;  // +1 / -1; flips the sign of every d entry
  std::vector<std::string> provenance;

  bool transparent_at(double lambda_nm) const {
    return lambda_nm >= transparency_min_nm && lambda_nm <= transparency_max_nm;
  }
  void require_transparent(double lambda_nm) const;
};

struct PrincipalIndices {
  double n1 = 1.0, n2 = 1.0, n3 = 1.0;
  double lambda_nm = 0.0;

  std::array<double, 3> as_array() const { return {n1, n2, n3}; }
};

struct FrameRotation {
  Mat3 matrix = Mat3::Identity();  // columns: e_1^0, e_2^0, e_3^0 expressed in {e_i}
  double phi_deg = 0.0;
  double lambda_nm = 0.0;

  Vec3 to_indicatrix(const Vec3& physical) const { return matrix.transpose() * physical; }
  Vec3 to_physical(const Vec3& indicatrix) const { return matrix * indicatrix; }
};

// Parses and validates a crystal-definition document (JSON text).
CrystalDefinition parse_crystal(const std::string& json_text);
CrystalDefinition load_crystal(const std::filesystem::path& path);

// Directory with the bundled crystal files.
std::filesystem::path bundled_data_dir();

PrincipalIndices principal_indices(const CrystalDefinition& crystal, double lambda_nm);
FrameRotation indicatrix_rotation(const CrystalDefinition& crystal, double lambda_nm);

// Per-nm derivative of a mode index along a fixed direction, central difference.
inline constexpr double kDispersionStepNm = 0.1;
double dn_dlambda(const CrystalDefinition& crystal, double lambda_nm, const Direction& dir, Mode mode,
                  double step_nm = kDispersionStepNm);

}  // namespace pdc
