#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pdc/dispersion.hpp"
#include "pdc/geometry.hpp"

namespace pdc {

enum class SpectralShape { Gaussian, Rectangular };

std::string_view to_string(SpectralShape s);
SpectralShape shape_from_string(std::string_view s);

// Pump spectrum: amplitude profile in frequency, FWHM (of the intensity) given in wavelength at the centre.
struct PumpSpec {
  double center_nm = 390.0;
  double fwhm_nm = 2.0;
  SpectralShape shape = SpectralShape::Gaussian;

  void validate() const;
  // Spectral amplitude at pump wavelength lambda_nm (1 at the centre).
  double amplitude(double lambda_nm) const;
};

// Band-pass filter: intensity transmission with the given FWHM in wavelength.
struct FilterSpec {
  double center_nm = 780.0;
  double fwhm_nm = 3.0;
  SpectralShape shape = SpectralShape::Gaussian;

  void validate() const;
  double transmission(double lambda_nm) const;
};

enum class FilterApplication { Amplitude, Intensity };
enum class PhaseReference { Centre, Absolute };

struct SpectrumOptions {
  int points = 512;             // per axis
  double half_width_nm = 0.0;   // 0: 3 x max(pump-implied width, filter FWHM)
  FilterApplication filter_application = FilterApplication::Amplitude;
  PhaseReference phase_reference = PhaseReference::Centre;
  Mode pump_mode = Mode::Fast;
  Mode signal_mode = Mode::Slow;
  Mode idler_mode = Mode::Fast;
};

inline constexpr int kMinSpectrumPoints = 64;

struct JointSpectrum {
  std::vector<double> lambda_s_nm;  // signal axis (rows)
  std::vector<double> lambda_i_nm;  // idler axis (columns)
  Eigen::MatrixXd amplitude;        // real joint spectral amplitude, unnormalized
  Eigen::MatrixXd intensity;        // |f|^2 normalized to unit integral over the grid (nm^-2)
  std::vector<double> marginal_s;   // unit integral (nm^-1)
  std::vector<double> marginal_i;
  double step_nm = 0.0;
  double overlap = 0.0;             // <s_s, s_i> / (|s_s| |s_i|)
  double min_overlap = 0.0;         // integral of min(s_s, s_i)
  double exchange_overlap = 0.0;    // |sum f(s,i) f(i,s)| / sum |f|^2
  double aspect_ratio = 0.0;        // minor/major principal-axis ratio of the intensity
};

JointSpectrum joint_spectrum(const CrystalDefinition& crystal, const PumpSpec& pump, const Direction& pump_dir,
                             double thickness_mm, const FilterSpec& filter, const SpectrumOptions& options = {});

struct OverlapRow {
  double parameter = 0.0;  // thickness (mm) or filter FWHM (nm)
  double overlap = 0.0;
  double min_overlap = 0.0;
  double exchange_overlap = 0.0;
};

std::vector<OverlapRow> overlap_vs_thickness(const CrystalDefinition& crystal, const PumpSpec& pump,
                                             const Direction& pump_dir, const std::vector<double>& thickness_mm,
                                             const FilterSpec& filter, const SpectrumOptions& options = {});

std::vector<OverlapRow> overlap_vs_filter(const CrystalDefinition& crystal, const PumpSpec& pump,
                                          const Direction& pump_dir, double thickness_mm,
                                          const std::vector<double>& filter_fwhm_nm, const FilterSpec& filter_template,
                                          const SpectrumOptions& options = {});

// Transform-limited coherence time sqrt(ln 2) / (pi dnu) of the filter band, in fs.
double coherence_time_fs(const FilterSpec& filter);

inline bool compensation_required(double delta_T_fs, double coherence_time_fs) { return delta_T_fs > coherence_time_fs; }

}  // namespace pdc
