#include "pdc/export.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "pdc/errors.hpp"

namespace pdc {

using nlohmann::json;

std::string format_number(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  if (x == 0.0) x = 0.0;  // no "-0"
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", kSignificantDigits, x);
  return buf;
}

double round_sig(double x) {
  if (!std::isfinite(x)) return x;
  return std::stod(format_number(x));
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out), columns_(header.size()) {
  for (const auto& h : header) field(h);
  end_row();
}

void CsvWriter::field(const std::string& s) {
  if (current_ > 0) out_ << ',';
  if (s.find_first_of(",\"\r\n") != std::string::npos) {
    out_ << '"';
    for (char c : s) {
      if (c == '"') out_ << '"';
      out_ << c;
    }
    out_ << '"';
  } else {
    out_ << s;
  }
  ++current_;
}

CsvWriter& CsvWriter::operator<<(double x) {
  field(format_number(x));
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& s) {
  field(s);
  return *this;
}

void CsvWriter::end_row() {
  if (current_ != columns_) throw std::logic_error("CSV row has the wrong number of fields");
  out_ << "\r\n";
  current_ = 0;
}

json direction_json(const Direction& d) {
  const Vec3& v = d.vec();
  return {{"psi_deg", round_sig(d.psi_deg())},
          {"rho_deg", round_sig(d.rho_deg())},
          {"vector", {round_sig(v.x()), round_sig(v.y()), round_sig(v.z())}}};
}

namespace {

json vec_json(const Vec3& v) { return {round_sig(v.x()), round_sig(v.y()), round_sig(v.z())}; }

json intersection_json(const Intersection& x) {
  return {{"direction", direction_json(x.direction)},
          {"crossing_angle_deg", round_sig(x.crossing_angle_deg)},
          {"slow_azimuth_deg", round_sig(x.slow_azimuth_deg)},
          {"fast_azimuth_deg", round_sig(x.fast_azimuth_deg)}};
}

json row_json(const SweepRow& r) {
  return {{"process", r.label},
          {"lambda_f_nm", round_sig(r.lambda_f_nm)},
          {"lambda_s_nm", round_sig(r.lambda_s_nm)},
          {"lambda_i_nm", round_sig(r.lambda_i_nm)},
          {"polarization", std::string(to_string(r.polarization))},
          {"radius_deg", round_sig(r.radius_deg)},
          {"normalized_radius", round_sig(r.normalized_radius)}};
}

}  // namespace

json to_json(const WaveSolution& w) {
  return {{"schema_version", kSchemaVersion},
          {"lambda_nm", round_sig(w.lambda_nm)},
          {"direction", direction_json(w.k_dir)},
          {"n_fast", round_sig(w.n_fast)},
          {"n_slow", round_sig(w.n_slow)},
          {"D_fast", vec_json(w.D_fast)},
          {"D_slow", vec_json(w.D_slow)},
          {"S_fast", vec_json(w.S_fast)},
          {"S_slow", vec_json(w.S_slow)},
          {"alpha_fast_deg", round_sig(w.alpha_fast_deg)},
          {"alpha_slow_deg", round_sig(w.alpha_slow_deg)},
          {"n_r_fast", round_sig(w.n_r_fast)},
          {"n_r_slow", round_sig(w.n_r_slow)}};
}

json to_json(const PdcGeometry& g) {
  json ext = json::array(), in = json::array();
  for (const auto& x : g.external_intersections) ext.push_back(intersection_json(x));
  for (const auto& x : g.internal_intersections) in.push_back(intersection_json(x));
  return {{"schema_version", kSchemaVersion},
          {"T", direction_json(g.T)},
          {"P", direction_json(g.P)},
          {"R", direction_json(g.R)},
          {"R_farthest_points", direction_json(g.R_raw)},
          {"external_intersections", ext},
          {"internal_intersections", in},
          {"separation_deg", round_sig(g.separation_deg)},
          {"crossing_angle_deg", round_sig(g.crossing_angle_deg)},
          {"angle_TP_deg", round_sig(g.tp_deg)},
          {"angle_TR_deg", round_sig(g.tr_deg)},
          {"angle_PR_deg", round_sig(g.pr_deg)},
          {"slow_radius_deg", round_sig(g.slow_radius_deg)},
          {"fast_radius_deg", round_sig(g.fast_radius_deg)}};
}

json to_json(const JointSpectrum& js) {
  return {{"schema_version", kSchemaVersion},
          {"points", js.lambda_s_nm.size()},
          {"lambda_min_nm", round_sig(js.lambda_s_nm.front())},
          {"lambda_max_nm", round_sig(js.lambda_s_nm.back())},
          {"overlap", round_sig(js.overlap)},
          {"min_overlap", round_sig(js.min_overlap)},
          {"exchange_overlap", round_sig(js.exchange_overlap)},
          {"aspect_ratio", round_sig(js.aspect_ratio)}};
}

json to_json(const PumpSweep& s) {
  json rows = json::array();
  for (const auto& r : s.rows) rows.push_back(row_json(r));
  return {{"schema_version", kSchemaVersion},
          {"lambda_dc_nm", round_sig(s.lambda_dc_nm)},
          {"reference_f_nm", round_sig(s.reference_f_nm)},
          {"rows", rows},
          {"slope_slow_per_nm", round_sig(s.slope_slow_per_nm)},
          {"slope_fast_per_nm", round_sig(s.slope_fast_per_nm)},
          {"slope_ratio", round_sig(s.slope_ratio)},
          {"width_slow_deg", round_sig(s.width_slow_deg)},
          {"width_fast_deg", round_sig(s.width_fast_deg)},
          {"width_ratio", round_sig(s.width_ratio)}};
}

json to_json(const FilterSweep& s) {
  json rows = json::array();
  for (const auto& r : s.rows) rows.push_back(row_json(r));
  return {{"schema_version", kSchemaVersion},
          {"lambda_f_nm", round_sig(s.lambda_f_nm)},
          {"rows", rows},
          {"spread_slow_deg", round_sig(s.spread_slow_deg)},
          {"spread_fast_deg", round_sig(s.spread_fast_deg)},
          {"asymmetry_ratio", round_sig(s.asymmetry_ratio)}};
}

void write_cones_csv(std::ostream& out, const ConePair& cones) {
  CsvWriter w(out, {"azimuth_deg", "psi_deg", "rho_deg", "u", "v", "rel_mismatch", "polarization"});
  for (const auto* cone : {&cones.slow, &cones.fast})
    for (const auto& p : cone->points) {
      const StereoPoint s = stereographic_project(p.external);
      w << p.azimuth_deg << p.external.psi_deg() << p.external.rho_deg() << s.u << s.v << p.rel_mismatch
        << std::string(to_string(cone->polarization));
      w.end_row();
    }
}

void write_deff_map_csv(std::ostream& out, const DeffMap& map) {
  CsvWriter w(out, {"psi_deg", "rho_deg", "deff_pm_per_V"});
  for (int i = 0; i < map.grid.psi_count(); ++i)
    for (int j = 0; j < map.grid.rho_count(); ++j) {
      w << map.grid.psi(i) << map.grid.rho(j);
      const auto& v = map.at(i, j);
      if (v)
        w << *v;
      else
        w << std::string();
      w.end_row();
    }
}

void write_curve_csv(std::ostream& out, const std::vector<Direction>& curve) {
  CsvWriter w(out, {"psi_deg", "rho_deg"});
  for (const auto& d : curve) {
    w << d.psi_deg() << d.rho_deg();
    w.end_row();
  }
}

void write_marginals_csv(std::ostream& out, const JointSpectrum& js) {
  CsvWriter w(out, {"lambda_nm", "marginal_signal", "marginal_idler"});
  for (std::size_t a = 0; a < js.lambda_s_nm.size(); ++a) {
    w << js.lambda_s_nm[a] << js.marginal_s[a] << js.marginal_i[a];
    w.end_row();
  }
}

void write_spectrum_grid_csv(std::ostream& out, const JointSpectrum& js) {
  CsvWriter w(out, {"lambda_s_nm", "lambda_i_nm", "intensity"});
  for (std::size_t a = 0; a < js.lambda_s_nm.size(); ++a)
    for (std::size_t b = 0; b < js.lambda_i_nm.size(); ++b) {
      w << js.lambda_s_nm[a] << js.lambda_i_nm[b] << js.intensity(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      w.end_row();
    }
}

void write_json(std::ostream& out, json j) { out << j.dump(2) << '\n'; }

}  // namespace pdc
