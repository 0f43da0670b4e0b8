#include "pdc/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pdc/errors.hpp"
#include "pdc/waveoptics.hpp"

namespace pdc {

namespace {

constexpr double kLn2 = std::numbers::ln2;

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

}  // namespace

std::string_view to_string(SpectralShape s) { return s == SpectralShape::Gaussian ? "gaussian" : "rectangular"; }

SpectralShape shape_from_string(std::string_view s) {
  if (s == "gaussian") return SpectralShape::Gaussian;
  if (s == "rectangular") return SpectralShape::Rectangular;
  throw ValidationError("unknown spectral shape '" + std::string(s) + "' (expected gaussian or rectangular)");
}

void PumpSpec::validate() const {
  if (!(center_nm > 0.0) || !std::isfinite(center_nm)) throw ValidationError("pump centre must be a positive wavelength");
  if (!(fwhm_nm > 0.0) || !std::isfinite(fwhm_nm)) throw ValidationError("pump FWHM must be > 0 nm");
}

double PumpSpec::amplitude(double lambda_nm) const {
  const double dnu = fwhm_nm / (center_nm * center_nm);  // nm^-1
  const double x = (1.0 / lambda_nm - 1.0 / center_nm) / dnu;
  if (shape == SpectralShape::Rectangular) return std::abs(x) <= 0.5 ? 1.0 : 0.0;
  return std::exp(-2.0 * kLn2 * x * x);  // |amplitude|^2 has FWHM dnu
}

void FilterSpec::validate() const {
  if (!(center_nm > 0.0) || !std::isfinite(center_nm)) throw ValidationError("filter centre must be a positive wavelength");
  if (!(fwhm_nm > 0.0) || !std::isfinite(fwhm_nm)) throw ValidationError("filter FWHM must be > 0 nm");
}

double FilterSpec::transmission(double lambda_nm) const {
  const double x = (lambda_nm - center_nm) / fwhm_nm;
  if (shape == SpectralShape::Rectangular) return std::abs(x) <= 0.5 ? 1.0 : 0.0;
  return std::exp(-4.0 * kLn2 * x * x);
}

JointSpectrum joint_spectrum(const CrystalDefinition& crystal, const PumpSpec& pump, const Direction& pump_dir,
                             double thickness_mm, const FilterSpec& filter, const SpectrumOptions& o) {
  pump.validate();
  filter.validate();
  if (!(thickness_mm > 0.0)) throw ValidationError("crystal thickness must be > 0 mm");
  if (o.points < kMinSpectrumPoints)
    throw ValidationError("spectral grid too coarse: need at least " + std::to_string(kMinSpectrumPoints) + " points per axis");
  if (o.half_width_nm < 0.0) throw ValidationError("grid half width must be >= 0 nm");

  const double centre = 2.0 * pump.center_nm;
  // Width of the energy-matched line in one photon's wavelength at fixed partner.
  const double pump_implied = pump.fwhm_nm * (centre * centre) / (pump.center_nm * pump.center_nm);
  const double half = o.half_width_nm > 0.0 ? o.half_width_nm : 3.0 * std::max(pump_implied, filter.fwhm_nm);
  if (!(half < centre)) throw ValidationError("spectral grid half width exceeds the centre wavelength");

  JointSpectrum js;
  const int n = o.points;
  js.step_nm = 2.0 * half / (n - 1);
  for (int k = 0; k < n; ++k) js.lambda_s_nm.push_back(centre - half + k * js.step_nm);
  js.lambda_i_nm = js.lambda_s_nm;
  crystal.require_transparent(js.lambda_s_nm.front());
  crystal.require_transparent(js.lambda_s_nm.back());

  const Vec3& k = pump_dir.vec();
  const double L_um = thickness_mm * 1e3;
  auto k_um = [](double n_idx, double lambda_nm) { return 2.0 * std::numbers::pi * n_idx / (lambda_nm * 1e-3); };

  std::vector<double> ks(n), ki(n), fs(n), fi(n);
  for (int a = 0; a < n; ++a) {
    ks[a] = k_um(Indicatrix(crystal, js.lambda_s_nm[a]).index(k, o.signal_mode), js.lambda_s_nm[a]);
    ki[a] = k_um(Indicatrix(crystal, js.lambda_i_nm[a]).index(k, o.idler_mode), js.lambda_i_nm[a]);
    const double ts = filter.transmission(js.lambda_s_nm[a]), ti = filter.transmission(js.lambda_i_nm[a]);
    fs[a] = o.filter_application == FilterApplication::Amplitude ? std::sqrt(ts) : ts;
    fi[a] = o.filter_application == FilterApplication::Amplitude ? std::sqrt(ti) : ti;
  }

  double dk0 = 0.0;
  if (o.phase_reference == PhaseReference::Centre) {
    dk0 = k_um(Indicatrix(crystal, centre).index(k, o.signal_mode), centre) +
          k_um(Indicatrix(crystal, centre).index(k, o.idler_mode), centre) -
          k_um(Indicatrix(crystal, pump.center_nm).index(k, o.pump_mode), pump.center_nm);
  }

  js.amplitude.resize(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double lp = 1.0 / (1.0 / js.lambda_s_nm[a] + 1.0 / js.lambda_i_nm[b]);
      const double alpha = pump.amplitude(lp);
      if (alpha == 0.0 || fs[a] * fi[b] == 0.0) {
        js.amplitude(a, b) = 0.0;
        continue;
      }
      const double kp = k_um(Indicatrix(crystal, lp).index(k, o.pump_mode), lp);
      const double dk = ks[a] + ki[b] - kp - dk0;
      js.amplitude(a, b) = alpha * sinc(0.5 * dk * L_um) * fs[a] * fi[b];
    }

  js.intensity = js.amplitude.cwiseAbs2();
  const double dl = js.step_nm;
  const double total = js.intensity.sum() * dl * dl;
  if (!(total > 0.0)) throw ComputationError("joint spectrum vanishes on the grid");
  js.intensity /= total;

  js.marginal_s.assign(n, 0.0);
  js.marginal_i.assign(n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      js.marginal_s[a] += js.intensity(a, b) * dl;
      js.marginal_i[b] += js.intensity(a, b) * dl;
    }

  double dot = 0.0, ss = 0.0, ii = 0.0, mn = 0.0;
  for (int a = 0; a < n; ++a) {
    dot += js.marginal_s[a] * js.marginal_i[a];
    ss += js.marginal_s[a] * js.marginal_s[a];
    ii += js.marginal_i[a] * js.marginal_i[a];
    mn += std::min(js.marginal_s[a], js.marginal_i[a]) * dl;
  }
  js.overlap = dot / std::sqrt(ss * ii);
  js.min_overlap = mn;
  js.exchange_overlap = std::abs(js.amplitude.cwiseProduct(js.amplitude.transpose()).sum()) / js.amplitude.cwiseAbs2().sum();

  // Principal axes of the intensity distribution.
  double ms = 0.0, mi = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      ms += js.intensity(a, b) * js.lambda_s_nm[a];
      mi += js.intensity(a, b) * js.lambda_i_nm[b];
    }
  ms *= dl * dl;
  mi *= dl * dl;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const Eigen::Vector2d x(js.lambda_s_nm[a] - ms, js.lambda_i_nm[b] - mi);
      cov += js.intensity(a, b) * x * x.transpose();
    }
  const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(cov).eigenvalues();
  js.aspect_ratio = std::sqrt(std::max(ev(0), 0.0) / ev(1));
  return js;
}

std::vector<OverlapRow> overlap_vs_thickness(const CrystalDefinition& crystal, const PumpSpec& pump,
                                             const Direction& pump_dir, const std::vector<double>& thickness_mm,
                                             const FilterSpec& filter, const SpectrumOptions& options) {
  std::vector<OverlapRow> out;
  for (double L : thickness_mm) {
    const auto js = joint_spectrum(crystal, pump, pump_dir, L, filter, options);
    out.push_back({L, js.overlap, js.min_overlap, js.exchange_overlap});
  }
  return out;
}

std::vector<OverlapRow> overlap_vs_filter(const CrystalDefinition& crystal, const PumpSpec& pump,
                                          const Direction& pump_dir, double thickness_mm,
                                          const std::vector<double>& filter_fwhm_nm, const FilterSpec& filter_template,
                                          const SpectrumOptions& options) {
  std::vector<OverlapRow> out;
  for (double w : filter_fwhm_nm) {
    FilterSpec f = filter_template;
    f.fwhm_nm = w;
    const auto js = joint_spectrum(crystal, pump, pump_dir, thickness_mm, f, options);
    out.push_back({w, js.overlap, js.min_overlap, js.exchange_overlap});
  }
  return out;
}

double coherence_time_fs(const FilterSpec& filter) {
  filter.validate();
  const double lambda_m = filter.center_nm * 1e-9;
  const double dnu_hz = kSpeedOfLight * filter.fwhm_nm * 1e-9 / (lambda_m * lambda_m);
  return std::sqrt(kLn2) / (std::numbers::pi * dnu_hz) * 1e15;
}

}  // namespace pdc
