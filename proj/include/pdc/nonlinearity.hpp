#pragma once

#include <optional>
#include <vector>

#include "pdc/dispersion.hpp"
#include "pdc/phasematch.hpp"

namespace pdc {

struct NonlinearTensor {
  DMatrix d = DMatrix::Zero();  // pm/V, in {e_i}
  bool kleinman = true;
};

// Contracted d matrix in {e_i} with the handedness sign applied. Throws
// ValidationError when the requested variant is not in the crystal file.
NonlinearTensor nonlinear_tensor(const CrystalDefinition& crystal, bool kleinman);

// d'_ijk = R_il R_jm R_kn d_lmn for a rotation R acting on vectors.
DMatrix rotate_dmatrix(const DMatrix& d, const Mat3& rotation);

// p . (d : s f) with the symmetric contraction of the last two indices.
double contract(const DMatrix& d, const Vec3& p, const Vec3& s, const Vec3& f);

// |d_eff| for collinear propagation along dir: pump D at lambda_f, signal and
// idler D at their own wavelengths, modes from the process.
double deff_collinear(const CrystalDefinition& crystal, const Direction& dir, const PdcProcess& process, bool kleinman);
double deff_collinear(const NonlinearTensor& tensor, const CrystalDefinition& crystal, const Direction& dir,
                      const PdcProcess& process);

struct DeffGrid {
  double psi_min_deg = 0.0, psi_max_deg = 90.0;
  double rho_min_deg = 0.0, rho_max_deg = 90.0;
  double step_deg = 0.25;

  int psi_count() const;
  int rho_count() const;
  double psi(int i) const { return psi_min_deg + i * step_deg; }
  double rho(int j) const { return rho_min_deg + j * step_deg; }
};

struct DeffMap {
  DeffGrid grid;
  PdcProcess process;
  bool kleinman = false;
  std::vector<std::optional<double>> values;  // psi-major: index i * rho_count + j; absent at degenerate nodes
  std::vector<Direction> collinear_curve;     // overlay, restricted to the grid
  double max_value = 0.0;
  double max_psi_deg = 0.0, max_rho_deg = 0.0;

  const std::optional<double>& at(int i, int j) const { return values[static_cast<std::size_t>(i) * grid.rho_count() + j]; }
};

DeffMap deff_map(const CrystalDefinition& crystal, const DeffGrid& grid, const PdcProcess& process, bool kleinman = false);

struct DesignScanOptions {
  double target_angle_deg = 90.0;
  double window_deg = 2.0;
  double psi_step_deg = 1.0;
  double deff_fraction = 0.8;   // only curve points with d_eff >= fraction * max are examined
  double offset_step_deg = 0.1;  // pump offset from the curve along its normal
  double max_offset_deg = 3.0;
  bool kleinman = false;
  ConeOptions cones{180, kMismatchThreshold, 0.05, 6.0};
};

struct DesignCandidate {
  Direction curve_point;   // collinear point the search started from
  Direction pump;          // pump direction giving the target crossing angle
  double offset_deg = 0.0;
  double crossing_angle_deg = 0.0;
  double separation_deg = 0.0;
  double deff = 0.0;
};

// Candidates inside the crossing-angle window, sorted by descending d_eff.
std::vector<DesignCandidate> design_scan(const CrystalDefinition& crystal, const PdcProcess& process,
                                         const DesignScanOptions& options = {});

}  // namespace pdc
