#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "pdc/anchors.hpp"
#include "pdc/errors.hpp"
#include "pdc/export.hpp"
#include "pdc/nonlinearity.hpp"
#include "pdc/phasematch.hpp"
#include "pdc/spectra.hpp"
#include "pdc/waveoptics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pdc;

namespace {

// Accepts a path, or the name of a bundled file ("bibo", "bbo.json").
CrystalDefinition open_crystal(const std::string& arg) {
  if (fs::exists(arg)) return load_crystal(arg);
  for (const fs::path& p : {bundled_data_dir() / arg, bundled_data_dir() / (arg + ".json")})
    if (fs::exists(p)) return load_crystal(p);
  throw ValidationError("cannot open crystal file " + arg);
}

double parse_double(std::string_view s, const std::string& what) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v))
    throw ValidationError(what + ": '" + std::string(s) + "' is not a number");
  return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, what));
  if (out.empty()) throw ValidationError(what + " is empty");
  return out;
}

Direction parse_dir(const std::string& text) {
  const auto v = parse_list(text, "--dir");
  if (v.size() != 2) throw ValidationError("--dir expects psi,rho in degrees");
  if (v[1] < -90.0 || v[1] > 90.0) throw ValidationError("--dir: rho must lie in [-90, 90] degrees");
  return Direction::from_angles(v[0], v[1]);
}

void positive(double x, const std::string& what) {
  if (!(x > 0.0)) throw ValidationError(what + " must be > 0");
}

// Destination of the main output: a file, or standard output.
class Sink {
 public:
  explicit Sink(const std::string& path) : path_(path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw ValidationError("cannot write " + path);
    }
  }
  std::ostream& os() { return path_.empty() ? std::cout : file_; }
  bool to_file() const { return !path_.empty(); }

 private:
  std::string path_;
  std::ofstream file_;
};

void write_json_file(const std::string& path, const json& j) {
  Sink s(path);
  write_json(s.os(), j);
}

// One-line summary: on stdout when the data went to a file, else on stderr.
void summary(bool data_to_file, const std::string& line) { (data_to_file ? std::cout : std::cerr) << line << '\n'; }

std::string num(double x) { return format_number(x); }

struct Common {
  std::string crystal;
  std::string out;
  std::string format;
};

void add_crystal(CLI::App* sub, Common& c) {
  sub->add_option("--crystal", c.crystal, "Crystal definition JSON (path, or bundled name: bibo, bbo)")->required();
}

// Subcommand -> its default output format.
std::map<const CLI::App*, std::string> g_default_format;

void add_output(CLI::App* sub, Common& c, const std::string& default_format) {
  g_default_format[sub] = default_format;
  sub->add_option("-o,--out", c.out, "Output file (default: standard output)");
  sub->add_option("--format", c.format, "Output format, csv or json (default: " + default_format + ")")
      ->check(CLI::IsMember({"csv", "json"}));
}

PdcProcess make_process(double pump_nm, double dc_nm, const std::optional<double>& signal_nm) {
  positive(pump_nm, "--pump-nm");
  if (signal_nm) return PdcProcess::with_signal(pump_nm, *signal_nm);
  positive(dc_nm, "--dc-nm");
  return PdcProcess::from_wavelengths(pump_nm, dc_nm, partner_wavelength(pump_nm, dc_nm));
}

void check_energy_default(double pump_nm, double& dc_nm, bool dc_given) {
  if (!dc_given) dc_nm = 2.0 * pump_nm;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design tool for non-collinear type-II down-conversion in biaxial and uniaxial crystals.\n"
               "Units: wavelengths nm, directions degrees (psi azimuth, rho elevation), thickness mm,\n"
               "d_eff pm/V, times fs."};
  app.require_subcommand(1);
  app.allow_extras(false);

  Common c;
  std::function<void()> action;

  double nm = 780.0, pump_nm = 390.0, dc_nm = 780.0, thickness_mm = 2.0;
  std::optional<double> signal_nm;
  std::string dir = "63.5,53.5";
  int azimuths = 720;
  bool kleinman = false;
  std::string mode = "slow";

  // Process options shared by the phase-matching subcommands.
  auto add_process = [&](CLI::App* sub) {
    sub->add_option("--pump-nm", pump_nm, "Pump wavelength in nm (fast mode)")->capture_default_str();
    sub->add_option("--dc-nm", dc_nm, "Down-converted wavelength in nm, degenerate by default (2 x pump)");
    sub->add_option("--signal-nm", signal_nm, "Non-degenerate: slow-photon wavelength in nm; the fast one follows from energy");
  };
  auto dc_given = [&](CLI::App* sub) { return sub->count("--dc-nm") > 0; };
  auto process = [&](CLI::App* sub) {
    check_energy_default(pump_nm, dc_nm, dc_given(sub));
    return make_process(pump_nm, dc_nm, signal_nm);
  };
  auto add_dir = [&](CLI::App* sub) {
    sub->add_option("--dir", dir, "Propagation direction psi,rho in degrees (use --dir=psi,rho for negative psi)")
        ->capture_default_str();
  };

  // indices
  {
    auto* sub = app.add_subcommand("indices", "Principal refractive indices and indicatrix angle Phi (deg) at one wavelength");
    add_crystal(sub, c);
    add_output(sub, c, "json");
    sub->add_option("--nm", nm, "Wavelength in nm")->required();
    sub->callback([&] {
      action = [&] {
        const auto cr = open_crystal(c.crystal);
        const auto p = principal_indices(cr, nm);
        const auto f = indicatrix_rotation(cr, nm);
        Sink s(c.out);
        if (c.format == "json") {
          write_json(s.os(), {{"schema_version", kSchemaVersion},
                              {"crystal", cr.name},
                              {"lambda_nm", round_sig(nm)},
                              {"n1", round_sig(p.n1)},
                              {"n2", round_sig(p.n2)},
                              {"n3", round_sig(p.n3)},
                              {"phi_deg", round_sig(f.phi_deg)}});
        } else {
          CsvWriter w(s.os(), {"lambda_nm", "n1", "n2", "n3", "phi_deg"});
          w << nm << p.n1 << p.n2 << p.n3 << f.phi_deg;
          w.end_row();
        }
        summary(s.to_file(), cr.name + " at " + num(nm) + " nm: n = " + num(p.n1) + ", " + num(p.n2) + ", " + num(p.n3) +
                                 "; Phi = " + num(f.phi_deg) + " deg");
      };
    });
  }

  // modes
  {
    auto* sub = app.add_subcommand("modes", "Mode indices, D (polarization) and Poynting vectors along a direction");
    add_crystal(sub, c);
    add_output(sub, c, "json");
    sub->add_option("--nm", nm, "Wavelength in nm")->required();
    add_dir(sub);
    sub->callback([&] {
      action = [&] {
        const auto cr = open_crystal(c.crystal);
        const auto w = solve_wave(cr, nm, parse_dir(dir));
        Sink s(c.out);
        if (c.format == "json") {
          write_json(s.os(), to_json(w));
        } else {
          CsvWriter csv(s.os(), {"mode", "n", "n_ray", "walkoff_deg", "D_x", "D_y", "D_z", "S_x", "S_y", "S_z"});
          csv << std::string("fast") << w.n_fast << w.n_r_fast << w.alpha_fast_deg << w.D_fast.x() << w.D_fast.y()
              << w.D_fast.z() << w.S_fast.x() << w.S_fast.y() << w.S_fast.z();
          csv.end_row();
          csv << std::string("slow") << w.n_slow << w.n_r_slow << w.alpha_slow_deg << w.D_slow.x() << w.D_slow.y()
              << w.D_slow.z() << w.S_slow.x() << w.S_slow.y() << w.S_slow.z();
          csv.end_row();
        }
        summary(s.to_file(), "n_fast = " + num(w.n_fast) + ", n_slow = " + num(w.n_slow));
      };
    });
  }

  // walkoff
  {
    auto* sub = app.add_subcommand("walkoff", "Spatial walk-off angle (deg) between the two modes and displacement (um)");
    add_crystal(sub, c);
    add_output(sub, c, "json");
    sub->add_option("--nm", nm, "Wavelength in nm")->required();
    add_dir(sub);
    sub->add_option("--thickness-mm", thickness_mm, "Crystal thickness in mm")->capture_default_str();
    sub->callback([&] {
      action = [&] {
        const auto cr = open_crystal(c.crystal);
        const auto r = spatial_walkoff(cr, nm, parse_dir(dir), thickness_mm);
        Sink s(c.out);
        if (c.format == "json") {
          write_json(s.os(), {{"schema_version", kSchemaVersion},
                              {"lambda_nm", round_sig(nm)},
                              {"thickness_mm", round_sig(r.thickness_mm)},
                              {"walkoff_deg", round_sig(r.theta_swo_deg)},
                              {"displacement_um", round_sig(r.transverse_displacement_um)}});
        } else {
          CsvWriter w(s.os(), {"lambda_nm", "thickness_mm", "walkoff_deg", "displacement_um"});
          w << nm << r.thickness_mm << r.theta_swo_deg << r.transverse_displacement_um;
          w.end_row();
        }
        summary(s.to_file(), "walk-off " + num(r.theta_swo_deg) + " deg, " + num(r.transverse_displacement_um) + " um");
      };
    });
  }

  // temporal
  double filter_nm = 780.0, filter_fwhm_nm = 3.0;
  {
    auto* sub = app.add_subcommand("temporal", "Temporal walk-off (fs) against the filter-limited coherence time (fs)");
    add_crystal(sub, c);
    add_output(sub, c, "json");
    sub->add_option("--nm", nm, "Wavelength in nm")->required();
    add_dir(sub);
    sub->add_option("--thickness-mm", thickness_mm, "Crystal thickness in mm")->capture_default_str();
    sub->add_option("--filter-fwhm-nm", filter_fwhm_nm, "Filter FWHM in nm (centred on --nm)")->capture_default_str();
    sub->callback([&] {
      action = [&] {
        const auto cr = open_crystal(c.crystal);
        const auto t = temporal_walkoff(cr, nm, parse_dir(dir), thickness_mm);
        const double tc = coherence_time_fs(FilterSpec{nm, filter_fwhm_nm, SpectralShape::Gaussian});
        const bool comp = compensation_required(t.delta_T_fs, tc);
        Sink s(c.out);
        if (c.format == "json") {
          write_json(s.os(), {{"schema_version", kSchemaVersion},
                              {"lambda_nm", round_sig(nm)},
                              {"thickness_mm", round_sig(t.thickness_mm)},
                              {"delta_n_r", round_sig(t.delta_n_r)},
                              {"delta_T_fs", round_sig(t.delta_T_fs)},
                              {"coherence_time_fs", round_sig(tc)},
                              {"compensation_required", comp}});
        } else {
          CsvWriter w(s.os(), {"lambda_nm", "thickness_mm", "delta_n_r", "delta_T_fs", "coherence_time_fs", "compensation_required"});
          w << nm << t.thickness_mm << t.delta_n_r << t.delta_T_fs << tc << std::string(comp ? "true" : "false");
          w.end_row();
        }
        summary(s.to_file(), "delta_T = " + num(t.delta_T_fs) + " fs, tau_c = " + num(tc) + " fs" +
                                 (comp ? ", compensation required" : ""));
      };
    });
  }

  // match-collinear
  CollinearOptions co;
  {
    auto* sub = app.add_subcommand("match-collinear", "Directions (psi, rho in deg) of collinear type-II phase matching");
    add_crystal(sub, c);
    add_output(sub, c, "csv");
    add_process(sub);
    sub->add_option("--psi-min", co.psi_min_deg, "Smallest psi in degrees")->capture_default_str();
    sub->add_option("--psi-max", co.psi_max_deg, "Largest psi in degrees")->capture_default_str();
    sub->add_option("--psi-step", co.psi_step_deg, "psi step in degrees")->capture_default_str();
    sub->add_option("--rho-min", co.rho_min_deg, "Smallest rho in degrees")->capture_default_str();
    sub->add_option("--rho-max", co.rho_max_deg, "Largest rho in degrees")->capture_default_str();
    sub->callback([&, sub] {
      action = [&, sub] {
        const auto cr = open_crystal(c.crystal);
        const auto curve = collinear_curve(cr, process(sub), co);
        if (curve.empty()) throw NoPhaseMatchingError("no collinear phase matching in the requested range");
        Sink s(c.out);
        if (c.format == "json") {
          json pts = json::array();
          for (const auto& d : curve) pts.push_back(direction_json(d));
          write_json(s.os(), {{"schema_version", kSchemaVersion}, {"points", pts}});
        } else {
          write_curve_csv(s.os(), curve);
        }
        summary(s.to_file(), std::to_string(curve.size()) + " collinear phase-matching directions");
      };
    });
  }

  // cones / geometry / project
  std::string geometry_out;
  auto cone_opts = [&] {
    if (azimuths < 8) throw ValidationError("--azimuths must be at least 8");
    ConeOptions o;
    o.azimuth_count = azimuths;
    return o;
  };
  {
    auto* sub = app.add_subcommand("cones", "Emission cones (CSV, external directions in deg) and their intersection geometry (JSON)");
    add_crystal(sub, c);
    sub->add_option("-o,--out", c.out, "Cone CSV file (default: standard output)");
    sub->add_option("--geometry", geometry_out, "Geometry JSON file (omitted: not written)");
    add_process(sub);
    add_dir(sub);
    sub->add_option("--azimuths", azimuths, "Azimuth samples per cone")->capture_default_str();
    sub->callback([&, sub] {
      action = [&, sub] {
        const auto cr = open_crystal(c.crystal);
        const auto proc = process(sub);
        const Direction d = parse_dir(dir);
        const auto cones = emission_cones(cr, proc, d, cone_opts());
        Sink s(c.out);
        write_cones_csv(s.os(), cones);
        std::string line = std::to_string(cones.slow.points.size()) + "+" + std::to_string(cones.fast.points.size()) +
                           " cone points";
        try {
          const auto g = cone_geometry(cr, proc, cones, d);
          if (!geometry_out.empty()) write_json_file(geometry_out, to_json(g));
          line += "; separation " + num(g.separation_deg) + " deg, crossing angle " + num(g.crossing_angle_deg) + " deg";
        } catch (const ComputationError& e) {
          if (!geometry_out.empty()) throw;
          line += "; no geometry: " + std::string(e.what());
        }
        summary(s.to_file(), line);
      };
    });
  }
  {
    auto* sub = app.add_subcommand("geometry", "Intersection points, T/P/R frame and crossing angle (deg) of the two cones");
    add_crystal(sub, c);
    add_output(sub, c, "json");
    add_process(sub);
    add_dir(sub);
    sub->add_option("--azimuths", azimuths, "Azimuth samples per cone")->capture_default_str();
    sub->callback([&, sub] {
      action = [&, sub] {
        const auto cr = open_crystal(c.crystal);
        const auto proc = process(sub);
        const Direction d = parse_dir(dir);
        const auto g = cone_geometry(cr, proc, emission_cones(cr, proc, d, cone_opts()), d);
        Sink s(c.out);
        if (c.format == "json") {
          write_json(s.os(), to_json(g));
        } else {
          CsvWriter w(s.os(), {"label", "psi_deg", "rho_deg", "crossing_angle_deg"});
          for (const auto& [label, dd] : {std::pair{"T", g.T}, {"P", g.P}, {"R", g.R}}) {
            w << std::string(label) << dd.psi_deg() << dd.rho_deg() << std::string();
            w.end_row();
          }
          for (std::size_t k = 0; k < g.external_intersections.size(); ++k) {
            const auto& x = g.external_intersections[k];
            w << "intersection_" + std::to_string(k + 1) << x.direction.psi_deg() << x.direction.rho_deg()
              << x.crossing_angle_deg;
            w.end_row();
          }
        }
        summary(s.to_file(), "separation " + num(g.separation_deg) + " deg, crossing angle " + num(g.crossing_angle_deg) +
                                 " deg, P (" + num(g.P.psi_deg()) + ", " + num(g.P.rho_deg()) + ")");
      };
    });
  }
  {
    auto* sub = app.add_subcommand("project", "Stereographic projection (pole -e2) of cones, intersections and T/P/R");
    add_crystal(sub, c);
    add_output(sub, c, "csv");
    add_process(sub);
    add_dir(sub);
    sub->add_option("--azimuths", azimuths, "Azimuth samples per cone")->capture_default_str();
    sub->callback([&, sub] {
      action = [&, sub] {
        const auto cr = open_crystal(c.crystal);
        const auto proc = process(sub);
        const Direction d = parse_dir(dir);
        const auto cones = emission_cones(cr, proc, d, cone_opts());
        const auto g = cone_geometry(cr, proc, cones, d);
        std::vector<std::pair<std::string, Direction>> pts;
        for (const auto* cone : {&cones.slow, &cones.fast})
          for (const auto& p : cone->points) pts.emplace_back(std::string(to_string(cone->polarization)), p.external);
        for (const auto& x : g.external_intersections) pts.emplace_back("intersection", x.direction);
        pts.emplace_back("T", g.T);
        pts.emplace_back("P", g.P);
        pts.emplace_back("R", g.R);
        Sink s(c.out);
        if (c.format == "json") {
          json arr = json::array();
          for (const auto& [label, dd] : pts) {
            const auto sp = stereographic_project(dd);
            arr.push_back({{"label", label}, {"psi_deg", round_sig(dd.psi_deg())}, {"rho_deg", round_sig(dd.rho_deg())},
                           {"u", round_sig(sp.u)}, {"v", round_sig(sp.v)}});
          }
          write_json(s.os(), {{"schema_version", kSchemaVersion}, {"points", arr}});
        } else {
          CsvWriter w(s.os(), {"label", "psi_deg", "rho_deg", "u", "v"});
          for (const auto& [label, dd] : pts) {
            const auto sp = stereographic_project(dd);
            w << label << dd.psi_deg() << dd.rho_deg() << sp.u << sp.v;
            w.end_row();
          }
        }
        summary(s.to_file(), std::to_string(pts.size()) + " projected points");
      };
    });
  }

  // deff
  {
    auto* sub = app.add_subcommand("deff", "Effective nonlinearity d_eff (pm/V) for collinear propagation");
    add_crystal(sub, c);
    add_output(sub, c, "json");
    add_process(sub);
    add_dir(sub);
    sub->add_flag("--kleinman", kleinman, "Use the Kleinman-symmetric d matrix");
    sub->callback([&, sub] {
      action = [&, sub] {
        const auto cr = open_crystal(c.crystal);
        const double v = deff_collinear(cr, parse_dir(dir), process(sub), kleinman);
        Sink s(c.out);
        if (c.format == "json") {
          write_json(s.os(), {{"schema_version", kSchemaVersion}, {"kleinman", kleinman}, {"deff_pm_per_V", round_sig(v)}});
        } else {
          CsvWriter w(s.os(), {"kleinman", "deff_pm_per_V"});
          w << std::string(kleinman ? "true" : "false") << v;
          w.end_row();
        }
        summary(s.to_file(), "d_eff = " + num(v) + " pm/V");
      };
    });
  }

  // deff-map
  DeffGrid grid;
  std::string curve_out;
  {
    auto* sub = app.add_subcommand("deff-map", "d_eff (pm/V) over a (psi, rho) grid in degrees with the collinear curve");
    add_crystal(sub, c);
    sub->add_option("-o,--out", c.out, "Map CSV file (default: standard output)");
    sub->add_option("--curve", curve_out, "Collinear-curve CSV file (omitted: not written)");
    add_process(sub);
    sub->add_option("--psi-min", grid.psi_min_deg, "Smallest psi in degrees")->capture_default_str();
    sub->add_option("--psi-max", grid.psi_max_deg, "Largest psi in degrees")->capture_default_str();
    sub->add_option("--rho-min", grid.rho_min_deg, "Smallest rho in degrees")->capture_default_str();
    sub->add_option("--rho-max", grid.rho_max_deg, "Largest rho in degrees")->capture_default_str();
    sub->add_option("--step", grid.step_deg, "Grid step in degrees")->capture_default_str();
    sub->add_flag("--kleinman", kleinman, "Use the Kleinman-symmetric d matrix");
    sub->callback([&, sub] {
      action = [&, sub] {
        const auto cr = open_crystal(c.crystal);
        const auto m = deff_map(cr, grid, process(sub), kleinman);
        Sink s(c.out);
        write_deff_map_csv(s.os(), m);
        if (!curve_out.empty()) {
          Sink cs(curve_out);
          write_curve_csv(cs.os(), m.collinear_curve);
        }
        summary(s.to_file(), "max d_eff " + num(m.max_value) + " pm/V at (" + num(m.max_psi_deg) + ", " +
                                 num(m.max_rho_deg) + ")");
      };
    });
  }

  // design-scan
  DesignScanOptions ds;
  int top = 10;
  {
    auto* sub = app.add_subcommand("design-scan", "Pump directions near the collinear curve giving the target crossing angle (deg), ranked by d_eff (pm/V)");
    add_crystal(sub, c);
    add_output(sub, c, "csv");
    add_process(sub);
    sub->add_option("--target-deg", ds.target_angle_deg, "Target cone crossing angle in degrees")->capture_default_str();
    sub->add_option("--window-deg", ds.window_deg, "Accepted deviation from the target in degrees")->capture_default_str();
    sub->add_option("--psi-step", ds.psi_step_deg, "Curve sampling step in psi, degrees")->capture_default_str();
    sub->add_option("--max-offset-deg", ds.max_offset_deg, "Largest pump offset from the curve in degrees")->capture_default_str();
    sub->add_option("--top", top, "Number of candidates written")->capture_default_str();
    sub->add_flag("--kleinman", ds.kleinman, "Use the Kleinman-symmetric d matrix");
    sub->callback([&, sub] {
      action = [&, sub] {
        positive(ds.psi_step_deg, "--psi-step");
        if (top < 1) throw ValidationError("--top must be >= 1");
        const auto cr = open_crystal(c.crystal);
        auto cands = design_scan(cr, process(sub), ds);
        if (cands.empty()) throw NoPhaseMatchingError("no pump direction reaches the target crossing angle");
        if (cands.size() > static_cast<std::size_t>(top)) cands.resize(top);
        Sink s(c.out);
        if (c.format == "json") {
          json arr = json::array();
          for (const auto& k : cands)
            arr.push_back({{"pump", direction_json(k.pump)},
                           {"curve_point", direction_json(k.curve_point)},
                           {"offset_deg", round_sig(k.offset_deg)},
                           {"crossing_angle_deg", round_sig(k.crossing_angle_deg)},
                           {"separation_deg", round_sig(k.separation_deg)},
                           {"deff_pm_per_V", round_sig(k.deff)}});
          write_json(s.os(), {{"schema_version", kSchemaVersion}, {"candidates", arr}});
        } else {
          CsvWriter w(s.os(), {"pump_psi_deg", "pump_rho_deg", "curve_psi_deg", "curve_rho_deg", "offset_deg",
                               "crossing_angle_deg", "separation_deg", "deff_pm_per_V"});
          for (const auto& k : cands) {
            w << k.pump.psi_deg() << k.pump.rho_deg() << k.curve_point.psi_deg() << k.curve_point.rho_deg() << k.offset_deg
              << k.crossing_angle_deg << k.separation_deg << k.deff;
            w.end_row();
          }
        }
        const auto& b = cands.front();
        summary(s.to_file(), "best pump (" + num(b.pump.psi_deg()) + ", " + num(b.pump.rho_deg()) + "), d_eff " + num(b.deff) +
                                 " pm/V, crossing angle " + num(b.crossing_angle_deg) + " deg");
      };
    });
  }

  // spectra
  double pump_fwhm_nm = 2.0;
  std::string shape = "gaussian";
  int points = 512;
  std::string grid_out, summary_out;
  auto spectrum_inputs = [&] {
    PumpSpec p{pump_nm, pump_fwhm_nm, shape_from_string(shape)};
    FilterSpec f{filter_nm, filter_fwhm_nm, shape_from_string(shape)};
    SpectrumOptions o;
    o.points = points;
    return std::tuple{p, f, o};
  };
  auto add_spectrum = [&](CLI::App* sub) {
    sub->add_option("--pump-nm", pump_nm, "Pump centre wavelength in nm")->capture_default_str();
    sub->add_option("--pump-fwhm-nm", pump_fwhm_nm, "Pump FWHM in nm")->capture_default_str();
    sub->add_option("--filter-nm", filter_nm, "Filter centre wavelength in nm")->capture_default_str();
    sub->add_option("--shape", shape, "Pump and filter line shape")->check(CLI::IsMember({"gaussian", "rectangular"}))->capture_default_str();
    sub->add_option("--points", points, "Grid points per wavelength axis")->capture_default_str();
    add_dir(sub);
  };
  {
    auto* sub = app.add_subcommand("spectra", "Joint spectrum and marginals (nm) for a crystal thickness in mm; overlap summary");
    add_crystal(sub, c);
    add_spectrum(sub);
    sub->add_option("--filter-fwhm-nm", filter_fwhm_nm, "Filter FWHM in nm")->capture_default_str();
    sub->add_option("--thickness-mm", thickness_mm, "Crystal thickness in mm")->capture_default_str();
    sub->add_option("-o,--out", c.out, "Marginals CSV file (default: standard output)");
    sub->add_option("--grid", grid_out, "Joint-intensity CSV file (omitted: not written)");
    sub->add_option("--summary", summary_out, "Summary JSON file (omitted: not written)");
    sub->callback([&] {
      action = [&] {
        const auto cr = open_crystal(c.crystal);
        const auto [p, f, o] = spectrum_inputs();
        const auto js = joint_spectrum(cr, p, parse_dir(dir), thickness_mm, f, o);
        Sink s(c.out);
        write_marginals_csv(s.os(), js);
        if (!grid_out.empty()) {
          Sink g(grid_out);
          write_spectrum_grid_csv(g.os(), js);
        }
        if (!summary_out.empty()) write_json_file(summary_out, to_json(js));
        summary(s.to_file(), "overlap " + num(100.0 * js.overlap) + " %, exchange overlap " + num(100.0 * js.exchange_overlap) + " %");
      };
    });
  }

  // sweep-thickness
  std::string thickness_list = "0.5,1,1.5,2,2.5,3", filter_list;
  {
    auto* sub = app.add_subcommand("sweep-thickness", "Spectral overlap against crystal thickness (mm) and filter FWHM (nm)");
    add_crystal(sub, c);
    add_output(sub, c, "csv");
    add_spectrum(sub);
    sub->add_option("--thickness-mm", thickness_list, "Comma-separated thicknesses in mm")->capture_default_str();
    sub->add_option("--filter-fwhm-nm", filter_list, "Comma-separated filter FWHMs in nm (default 3)");
    sub->callback([&] {
      action = [&] {
        const auto Ls = parse_list(thickness_list, "--thickness-mm");
        const auto Ws = filter_list.empty() ? std::vector<double>{3.0} : parse_list(filter_list, "--filter-fwhm-nm");
        for (double L : Ls) positive(L, "--thickness-mm");
        for (double W : Ws) positive(W, "--filter-fwhm-nm");
        const auto cr = open_crystal(c.crystal);
        const Direction d = parse_dir(dir);
        auto [p, f, o] = spectrum_inputs();
        struct Row { double L, W, ov, mn, ex; };
        std::vector<Row> rows;
        for (double W : Ws) {
          f.fwhm_nm = W;
          for (const auto& r : overlap_vs_thickness(cr, p, d, Ls, f, o)) rows.push_back({r.parameter, W, r.overlap, r.min_overlap, r.exchange_overlap});
        }
        Sink s(c.out);
        if (c.format == "json") {
          json arr = json::array();
          for (const auto& r : rows)
            arr.push_back({{"thickness_mm", round_sig(r.L)}, {"filter_fwhm_nm", round_sig(r.W)}, {"overlap", round_sig(r.ov)},
                           {"min_overlap", round_sig(r.mn)}, {"exchange_overlap", round_sig(r.ex)}});
          write_json(s.os(), {{"schema_version", kSchemaVersion}, {"rows", arr}});
        } else {
          CsvWriter w(s.os(), {"thickness_mm", "filter_fwhm_nm", "overlap", "min_overlap", "exchange_overlap"});
          for (const auto& r : rows) {
            w << r.L << r.W << r.ov << r.mn << r.ex;
            w.end_row();
          }
        }
        summary(s.to_file(), std::to_string(rows.size()) + " spectra; overlap " + num(100.0 * rows.front().ov) + " % to " +
                                 num(100.0 * rows.back().ov) + " %");
      };
    });
  }

  // sweep-pump / sweep-filter
  std::string pump_list = "389,390,391", edge_list = "778.5,781.51";
  double reference_nm = 390.0;
  {
    auto* sub = app.add_subcommand("sweep-pump", "Cone radii (deg) against pump wavelength (nm) at fixed down-converted wavelength");
    add_crystal(sub, c);
    add_output(sub, c, "json");
    add_dir(sub);
    sub->add_option("--pump-nm", pump_list, "Comma-separated pump wavelengths in nm")->capture_default_str();
    sub->add_option("--dc-nm", dc_nm, "Fixed down-converted wavelength in nm")->capture_default_str();
    sub->add_option("--reference-nm", reference_nm, "Pump wavelength normalizing the radii, nm")->capture_default_str();
    sub->add_option("--azimuths", azimuths, "Azimuth samples per cone")->capture_default_str();
    sub->callback([&] {
      action = [&] {
        const auto cr = open_crystal(c.crystal);
        const auto r = pump_bandwidth_sweep(cr, parse_dir(dir), parse_list(pump_list, "--pump-nm"), dc_nm, reference_nm, cone_opts());
        Sink s(c.out);
        if (c.format == "json") {
          write_json(s.os(), to_json(r));
        } else {
          CsvWriter w(s.os(), {"process", "lambda_f_nm", "lambda_s_nm", "lambda_i_nm", "polarization", "radius_deg", "normalized_radius"});
          for (const auto& row : r.rows) {
            w << row.label << row.lambda_f_nm << row.lambda_s_nm << row.lambda_i_nm << std::string(to_string(row.polarization))
              << row.radius_deg << row.normalized_radius;
            w.end_row();
          }
        }
        summary(s.to_file(), "slope ratio " + num(r.slope_ratio) + ", width ratio " + num(r.width_ratio));
      };
    });
  }
  {
    auto* sub = app.add_subcommand("sweep-filter", "Cone radii (deg) at the filter-edge wavelengths (nm) for a fixed pump");
    add_crystal(sub, c);
    add_output(sub, c, "json");
    add_dir(sub);
    sub->add_option("--pump-nm", pump_nm, "Pump wavelength in nm")->capture_default_str();
    sub->add_option("--edges-nm", edge_list, "Comma-separated slow-photon wavelengths in nm")->capture_default_str();
    sub->add_option("--azimuths", azimuths, "Azimuth samples per cone")->capture_default_str();
    sub->callback([&] {
      action = [&] {
        const auto cr = open_crystal(c.crystal);
        const auto r = filter_bandwidth_sweep(cr, parse_dir(dir), pump_nm, parse_list(edge_list, "--edges-nm"), cone_opts());
        Sink s(c.out);
        if (c.format == "json") {
          write_json(s.os(), to_json(r));
        } else {
          CsvWriter w(s.os(), {"process", "lambda_f_nm", "lambda_s_nm", "lambda_i_nm", "polarization", "radius_deg"});
          for (const auto& row : r.rows) {
            w << row.label << row.lambda_f_nm << row.lambda_s_nm << row.lambda_i_nm << std::string(to_string(row.polarization))
              << row.radius_deg;
            w.end_row();
          }
        }
        summary(s.to_file(), "spread slow " + num(r.spread_slow_deg) + " deg, fast " + num(r.spread_fast_deg) +
                                 " deg, ratio " + num(r.asymmetry_ratio));
      };
    });
  }

  // reproduce-paper
  std::string crystal_dir;
  double tolerance_scale = 1.0;
  std::string report_out;
  {
    auto* sub = app.add_subcommand("reproduce-paper", "Published BiBO/BBO design numbers against computed values in their own units (nm, deg, pm/V, fs, %); table and JSON report");
    sub->add_option("--crystal-dir", crystal_dir, "Directory with bibo.json and bbo.json (default: bundled data)");
    sub->add_option("--tolerance-scale", tolerance_scale, "Factor widening every tolerance")->capture_default_str();
    sub->add_option("--json", report_out, "Report JSON file (omitted: not written)");
    sub->callback([&] {
      action = [&] {
        positive(tolerance_scale, "--tolerance-scale");
        const fs::path d = crystal_dir.empty() ? bundled_data_dir() : fs::path(crystal_dir);
        if (!fs::is_directory(d)) throw ValidationError("crystal directory " + d.string() + " does not exist");
        const auto report = reproduce_paper(d, tolerance_scale);
        if (!report_out.empty()) write_json_file(report_out, to_json(report));
        std::cout << format_table(report);
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  const CLI::App* chosen = app.get_subcommands().front();
  if (c.format.empty() && g_default_format.count(chosen)) c.format = g_default_format[chosen];
  try {
    action();
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const ComputationError& e) {
    std::cerr << "computation failed: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "computation failed: " << e.what() << '\n';
    return 2;
  }
}
