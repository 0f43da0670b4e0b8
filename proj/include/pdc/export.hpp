#pragma once

#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

#include "pdc/nonlinearity.hpp"
#include "pdc/phasematch.hpp"
#include "pdc/spectra.hpp"
#include "pdc/waveoptics.hpp"

namespace pdc {

inline constexpr int kSchemaVersion = 1;
inline constexpr int kSignificantDigits = 9;

// Fixed 9-significant-digit text form used in every CSV cell.
std::string format_number(double x);
// Value rounded to 9 significant digits, for JSON output.
double round_sig(double x);

// RFC-4180 CSV with a header row; fields containing ',', '"' or newlines are quoted.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);
  CsvWriter& operator<<(double x);
  CsvWriter& operator<<(const std::string& s);
  void end_row();

 private:
  void field(const std::string& s);
  std::ostream& out_;
  std::size_t columns_;
  std::size_t current_ = 0;
};

nlohmann::json direction_json(const Direction& d);
nlohmann::json to_json(const WaveSolution& w);
nlohmann::json to_json(const PdcGeometry& g);
nlohmann::json to_json(const JointSpectrum& js);
nlohmann::json to_json(const PumpSweep& s);
nlohmann::json to_json(const FilterSweep& s);

// Columns: azimuth_deg, psi_deg, rho_deg, u, v, rel_mismatch, polarization (external directions).
void write_cones_csv(std::ostream& out, const ConePair& cones);
// Columns: psi_deg, rho_deg, deff_pm_per_V (empty where the node is degenerate).
void write_deff_map_csv(std::ostream& out, const DeffMap& map);
// Columns: psi_deg, rho_deg.
void write_curve_csv(std::ostream& out, const std::vector<Direction>& curve);
// Columns: lambda_nm, marginal_signal, marginal_idler.
void write_marginals_csv(std::ostream& out, const JointSpectrum& js);
// Columns: lambda_s_nm, lambda_i_nm, intensity.
void write_spectrum_grid_csv(std::ostream& out, const JointSpectrum& js);

// Writes JSON with two-space indentation and a trailing newline.
void write_json(std::ostream& out, nlohmann::json j);

}  // namespace pdc
