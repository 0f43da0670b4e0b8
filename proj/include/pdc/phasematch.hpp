#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pdc/dispersion.hpp"
#include "pdc/geometry.hpp"
#include "pdc/waveoptics.hpp"

namespace pdc {

// One down-conversion process: pump -> signal + idler. Signal is the slow
// photon and idler the fast one throughout ("fsf" type II).
struct PdcProcess {
  double lambda_f_nm = 390.0;
  double lambda_s_nm = 780.0;
  double lambda_i_nm = 780.0;
  Mode pump = Mode::Fast;
  Mode signal = Mode::Slow;
  Mode idler = Mode::Fast;

  // Energy conservation 1/lf = 1/ls + 1/li to 1e-9 relative; throws ValidationError.
  void validate() const;

  static PdcProcess degenerate(double lambda_f_nm);
  // Fixes the signal (slow) wavelength; idler computed exactly.
  static PdcProcess with_signal(double lambda_f_nm, double lambda_s_nm);
  // Fixes the idler (fast) wavelength; signal computed exactly.
  static PdcProcess with_idler(double lambda_f_nm, double lambda_i_nm);
  static PdcProcess from_wavelengths(double lambda_f_nm, double lambda_s_nm, double lambda_i_nm);
};

double partner_wavelength(double lambda_f_nm, double lambda_nm);

struct MismatchResult {
  Vec3 delta_k = Vec3::Zero();     // rad/um in {e_i}
  double relative_mismatch = 0.0;  // |dk| / |k_f|
};

inline constexpr double kMismatchThreshold = 5e-5;

MismatchResult mismatch(const CrystalDefinition& crystal, const PdcProcess& process, const Direction& pump_dir,
                        const Direction& signal_dir, const Direction& idler_dir);

// Signed scalar mismatch (k_s + k_i - k_f) / k_f for all three waves along dir.
double collinear_mismatch(const CrystalDefinition& crystal, const PdcProcess& process, const Direction& dir);

struct CollinearOptions {
  double psi_min_deg = 0.0;
  double psi_max_deg = 90.0;
  double psi_step_deg = 0.5;
  double rho_min_deg = -90.0;
  double rho_max_deg = 90.0;
  double rho_scan_step_deg = 0.25;
};

// Points (psi, rho) of collinear phase matching, ordered by psi then rho.
std::vector<Direction> collinear_curve(const CrystalDefinition& crystal, const PdcProcess& process,
                                       const CollinearOptions& options = {});

// Nearest collinear point to dir along rho at fixed psi, if one exists within the search span.
std::optional<Direction> collinear_at_psi(const CrystalDefinition& crystal, const PdcProcess& process, double psi_deg,
                                          double rho_guess_deg, double span_deg = 5.0);

struct ConeOptions {
  int azimuth_count = 720;
  double threshold = kMismatchThreshold;
  double coarse_step_deg = 0.01;
  double max_offset_deg = 10.0;
};

struct ConePoint {
  double azimuth_deg = 0.0;   // azimuth about the pump, from T x e_3 toward T x (T x e_3)
  double offset_deg = 0.0;    // internal polar offset from the pump
  Direction internal;
  Direction external;
  Direction partner_internal;  // momentum-conserving partner photon
  double rel_mismatch = 0.0;
};

struct EmissionCone {
  Mode polarization = Mode::Slow;
  double lambda_nm = 780.0;
  std::vector<ConePoint> points;  // ordered by angle about the fitted cone axis
  Vec3 axis_external = Vec3::UnitZ();
  Vec3 axis_internal = Vec3::UnitZ();
  double radius_deg = 0.0;           // external angular radius about the fitted axis
  double internal_radius_deg = 0.0;
  std::optional<double> width_deg;   // set by bandwidth sweeps
};

// Photons of the given polarization (slow = signal, fast = idler) for a pump along pump_dir.
EmissionCone trace_cone(const CrystalDefinition& crystal, const PdcProcess& process, const Direction& pump_dir, Mode which,
                        const ConeOptions& options = {});

struct ConePair {
  EmissionCone slow;
  EmissionCone fast;
};

ConePair emission_cones(const CrystalDefinition& crystal, const PdcProcess& process, const Direction& pump_dir,
                        const ConeOptions& options = {});

// Refraction at a facet with normal facet_normal; n sin(in) = sin(out).
Direction refract_external(const Direction& internal_dir, double mode_index, const Vec3& facet_normal);
Direction refract_internal(const Direction& external_dir, double mode_index, const Vec3& facet_normal);

struct Intersection {
  Direction direction;
  double slow_azimuth_deg = 0.0;
  double fast_azimuth_deg = 0.0;
  double crossing_angle_deg = 0.0;  // angle between the circles' co-rotating tangents, [0, 180]
};

struct PdcGeometry {
  Direction T;
  Direction P;
  Direction R;
  Direction R_raw;  // literal connector of the two most distant points
  std::vector<Intersection> external_intersections;  // two, ordered by descending rho
  std::vector<Intersection> internal_intersections;
  double separation_deg = 0.0;        // between the external intersection points
  double crossing_angle_deg = 0.0;    // mean over both intersection points
  double tp_deg = 0.0, tr_deg = 0.0, pr_deg = 0.0;
  double slow_radius_deg = 0.0, fast_radius_deg = 0.0;
};

struct GeometryOptions {
  int refine_subdivisions = 16;
};

PdcGeometry cone_geometry(const CrystalDefinition& crystal, const PdcProcess& process, const ConePair& cones,
                          const Direction& pump_dir, const GeometryOptions& options = {});

struct StereoPoint {
  double u = 0.0;
  double v = 0.0;
};

// Projection onto the (e_1, e_3) plane from the pole -e_2.
StereoPoint stereographic_project(const Direction& d);

struct SweepRow {
  std::string label;
  double lambda_f_nm = 0.0;
  double lambda_s_nm = 0.0;
  double lambda_i_nm = 0.0;
  Mode polarization = Mode::Slow;
  double radius_deg = 0.0;
  double normalized_radius = 1.0;
};

struct PumpSweep {
  double lambda_dc_nm = 780.0;
  double reference_f_nm = 390.0;
  std::vector<SweepRow> rows;
  double slope_slow_per_nm = 0.0;  // normalized radius per nm of pump wavelength
  double slope_fast_per_nm = 0.0;
  double slope_ratio = 0.0;
  double width_slow_deg = 0.0;     // radius span over the swept pump wavelengths
  double width_fast_deg = 0.0;
  double width_ratio = 0.0;
};

PumpSweep pump_bandwidth_sweep(const CrystalDefinition& crystal, const Direction& pump_dir,
                               const std::vector<double>& lambda_f_nm, double lambda_dc_nm = 780.0,
                               double reference_f_nm = 390.0, const ConeOptions& options = {});

struct FilterSweep {
  double lambda_f_nm = 390.0;
  std::vector<SweepRow> rows;
  double spread_slow_deg = 0.0;
  double spread_fast_deg = 0.0;
  double asymmetry_ratio = 0.0;  // spread_slow / spread_fast
};

FilterSweep filter_bandwidth_sweep(const CrystalDefinition& crystal, const Direction& pump_dir, double lambda_f_nm,
                                   const std::vector<double>& lambda_dc_edges_nm, const ConeOptions& options = {});

}  // namespace pdc
