#pragma once

#include <array>
#include <utility>

#include "pdc/dispersion.hpp"
#include "pdc/geometry.hpp"

namespace pdc {

inline constexpr double kDegeneracyTolerance = 1e-9;  // |n_fast - n_slow| below this: optic axis
inline constexpr double kPoyntingStepRad = 1e-4;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

struct ModeIndices {
  double fast = 1.0;
  double slow = 1.0;

  double operator[](Mode m) const { return m == Mode::Fast ? fast : slow; }
};

// Principal indices and indicatrix orientation frozen at one wavelength.
// Cheap to copy; every per-direction quantity below is evaluated through it.
class Indicatrix {
 public:
  Indicatrix(const CrystalDefinition& crystal, double lambda_nm);

  double lambda_nm() const { return lambda_nm_; }
  const PrincipalIndices& principal() const { return principal_; }
  const FrameRotation& frame() const { return frame_; }

  ModeIndices indices(const Vec3& k) const;
  double index(const Vec3& k, Mode m) const { return indices(k)[m]; }

  // Unit D vectors in {e_i}, each with its largest-magnitude component positive.
  std::pair<Vec3, Vec3> polarizations(const Vec3& k) const;
  Vec3 polarization(const Vec3& k, Mode m) const;

  // Normal to the wave-vector surface n(k) k of the given mode, oriented along +k.
  Vec3 poynting(const Vec3& k, Mode m, double step_rad = kPoyntingStepRad) const;

  // Fresnel wave-normal equation (quadratic in 1/n^2) evaluated at n, scaled to be dimensionless.
  double fresnel_residual(const Vec3& k, double n) const;

 private:
  void require_distinct(const ModeIndices& n) const;

  double lambda_nm_;
  PrincipalIndices principal_;
  FrameRotation frame_;
  std::array<double, 3> a_;  // 1/n_i^2
};

struct WaveSolution {
  double lambda_nm = 0.0;
  Direction k_dir;
  double n_fast = 1.0, n_slow = 1.0;
  Vec3 D_fast, D_slow;
  Vec3 S_fast, S_slow;
  double alpha_fast_deg = 0.0, alpha_slow_deg = 0.0;
  double n_r_fast = 1.0, n_r_slow = 1.0;
};

struct WalkoffResult {
  double theta_swo_deg = 0.0;
  double thickness_mm = 0.0;
  double transverse_displacement_um = 0.0;
};

struct TemporalWalkoff {
  double delta_T_fs = 0.0;
  double delta_n_r = 0.0;  // n_r(slow) - n_r(fast)
  double thickness_mm = 0.0;
};

ModeIndices mode_indices(const CrystalDefinition& crystal, double lambda_nm, const Direction& k);
double mode_index(const CrystalDefinition& crystal, double lambda_nm, const Direction& k, Mode m);
std::pair<Vec3, Vec3> mode_polarizations(const CrystalDefinition& crystal, double lambda_nm, const Direction& k);
Vec3 poynting_vector(const CrystalDefinition& crystal, double lambda_nm, const Direction& k, Mode m,
                     double step_rad = kPoyntingStepRad);
WalkoffResult spatial_walkoff(const CrystalDefinition& crystal, double lambda_nm, const Direction& k, double thickness_mm);
ModeIndices ray_indices(const CrystalDefinition& crystal, double lambda_nm, const Direction& k);
TemporalWalkoff temporal_walkoff(const CrystalDefinition& crystal, double lambda_nm, const Direction& k, double thickness_mm);
WaveSolution solve_wave(const CrystalDefinition& crystal, double lambda_nm, const Direction& k);

}  // namespace pdc
