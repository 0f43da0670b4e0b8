#include "pdc/nonlinearity.hpp"

#include <algorithm>
#include <cmath>

#include "pdc/errors.hpp"

namespace pdc {

namespace {

using Tensor3 = std::array<std::array<std::array<double, 3>, 3>, 3>;

constexpr int voigt(int j, int k) {
  if (j == k) return j;
  const int s = j + k;  // (1,2) -> 3, (0,2) -> 4, (0,1) -> 5
  return s == 3 ? 3 : (s == 2 ? 4 : 5);
}

Tensor3 expand(const DMatrix& d) {
  Tensor3 t{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) t[i][j][k] = d(i, voigt(j, k));
  return t;
}

struct Waves {
  Indicatrix pump, signal, idler;
  PdcProcess process;

  Waves(const CrystalDefinition& c, const PdcProcess& p)
      : pump(c, p.lambda_f_nm), signal(c, p.lambda_s_nm), idler(c, p.lambda_i_nm), process(p) {}

  double deff(const DMatrix& d, const Vec3& k) const {
    return std::abs(contract(d, pump.polarization(k, process.pump), signal.polarization(k, process.signal),
                             idler.polarization(k, process.idler)));
  }
};

}  // namespace

DMatrix rotate_dmatrix(const DMatrix& d, const Mat3& r) {
  const Tensor3 t = expand(d);
  DMatrix out = DMatrix::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = j; k < 3; ++k) {
        double s = 0.0;
        for (int l = 0; l < 3; ++l)
          for (int m = 0; m < 3; ++m)
            for (int n = 0; n < 3; ++n) s += r(i, l) * r(j, m) * r(k, n) * t[l][m][n];
        out(i, voigt(j, k)) = s;
      }
  return out;
}

double contract(const DMatrix& d, const Vec3& p, const Vec3& s, const Vec3& f) {
  Eigen::Matrix<double, 6, 1> v;
  v << s.x() * f.x(), s.y() * f.y(), s.z() * f.z(), s.y() * f.z() + s.z() * f.y(), s.x() * f.z() + s.z() * f.x(),
      s.x() * f.y() + s.y() * f.x();
  return p.dot(d * v);
}

NonlinearTensor nonlinear_tensor(const CrystalDefinition& crystal, bool kleinman) {
  const auto& src = kleinman ? crystal.nonlinear.kleinman : crystal.nonlinear.general;
  if (!src)
    throw ValidationError(std::string("crystal ") + crystal.name + " has no " +
                          (kleinman ? "Kleinman-symmetric" : "general (non-Kleinman)") + " d matrix");
  NonlinearTensor t;
  t.kleinman = kleinman;
  t.d = *src * static_cast<double>(crystal.handedness);
  if (crystal.nonlinear.frame == TensorFrame::Indicatrix)
    t.d = rotate_dmatrix(t.d, indicatrix_rotation(crystal, crystal.nonlinear.reference_nm).matrix);
  return t;
}

double deff_collinear(const NonlinearTensor& tensor, const CrystalDefinition& crystal, const Direction& dir,
                      const PdcProcess& process) {
  process.validate();
  return Waves(crystal, process).deff(tensor.d, dir.vec());
}

double deff_collinear(const CrystalDefinition& crystal, const Direction& dir, const PdcProcess& process, bool kleinman) {
  return deff_collinear(nonlinear_tensor(crystal, kleinman), crystal, dir, process);
}

int DeffGrid::psi_count() const { return static_cast<int>(std::floor((psi_max_deg - psi_min_deg) / step_deg + 1e-9)) + 1; }
int DeffGrid::rho_count() const { return static_cast<int>(std::floor((rho_max_deg - rho_min_deg) / step_deg + 1e-9)) + 1; }

DeffMap deff_map(const CrystalDefinition& crystal, const DeffGrid& grid, const PdcProcess& process, bool kleinman) {
  process.validate();
  if (!(grid.step_deg > 0.0)) throw ValidationError("map step must be positive");
  if (!(grid.psi_max_deg >= grid.psi_min_deg) || !(grid.rho_max_deg >= grid.rho_min_deg))
    throw ValidationError("map range is empty");
  if (grid.rho_min_deg < -90.0 || grid.rho_max_deg > 90.0) throw ValidationError("rho must lie in [-90, 90] degrees");
  const NonlinearTensor tensor = nonlinear_tensor(crystal, kleinman);
  const Waves waves(crystal, process);
  DeffMap m;
  m.grid = grid;
  m.process = process;
  m.kleinman = kleinman;
  const int np = grid.psi_count(), nr = grid.rho_count();
  m.values.reserve(static_cast<std::size_t>(np) * nr);
  bool any = false;
  for (int i = 0; i < np; ++i)
    for (int j = 0; j < nr; ++j) {
      try {
        const double v = waves.deff(tensor.d, Direction::from_angles(grid.psi(i), grid.rho(j)).vec());
        m.values.emplace_back(v);
        if (!any || v > m.max_value) {
          m.max_value = v;
          m.max_psi_deg = grid.psi(i);
          m.max_rho_deg = grid.rho(j);
          any = true;
        }
      } catch (const DegenerateDirectionError&) {
        m.values.emplace_back(std::nullopt);
      }
    }
  CollinearOptions co;
  co.psi_min_deg = grid.psi_min_deg;
  co.psi_max_deg = grid.psi_max_deg;
  co.psi_step_deg = grid.step_deg;
  co.rho_min_deg = grid.rho_min_deg;
  co.rho_max_deg = grid.rho_max_deg;
  if (co.rho_max_deg > co.rho_min_deg) m.collinear_curve = collinear_curve(crystal, process, co);
  return m;
}

namespace {

struct CrossingProbe {
  bool ok = false;
  double angle = 0.0;
  double separation = 0.0;
};

CrossingProbe probe(const CrystalDefinition& crystal, const PdcProcess& process, const Vec3& pump, const ConeOptions& opt) {
  CrossingProbe p;
  try {
    const Direction d = Direction::from_vector(pump);
    const auto cones = emission_cones(crystal, process, d, opt);
    const auto g = cone_geometry(crystal, process, cones, d);
    p.ok = true;
    p.angle = g.crossing_angle_deg;
    p.separation = g.separation_deg;
  } catch (const ComputationError&) {
  }
  return p;
}

}  // namespace

std::vector<DesignCandidate> design_scan(const CrystalDefinition& crystal, const PdcProcess& process,
                                         const DesignScanOptions& o) {
  process.validate();
  if (!(o.offset_step_deg > 0.0) || !(o.max_offset_deg > 0.0) || !(o.window_deg >= 0.0))
    throw ValidationError("design scan needs positive offset step, offset span and a non-negative window");
  const NonlinearTensor tensor = nonlinear_tensor(crystal, o.kleinman);
  const Waves waves(crystal, process);

  CollinearOptions co;
  co.psi_step_deg = o.psi_step_deg;
  co.rho_min_deg = 0.0;
  const auto curve = collinear_curve(crystal, process, co);
  if (curve.empty()) throw NoPhaseMatchingError("no collinear phase matching for this process");

  std::vector<std::optional<double>> dv;
  double dmax = 0.0;
  for (const auto& c : curve) {
    try {
      dv.emplace_back(waves.deff(tensor.d, c.vec()));
      dmax = std::max(dmax, *dv.back());
    } catch (const DegenerateDirectionError&) {
      dv.emplace_back(std::nullopt);
    }
  }

  auto nearest_on_curve = [&](std::size_t self, double psi) -> std::optional<Vec3> {
    std::optional<Vec3> best;
    double bd = 1e300;
    for (std::size_t k = 0; k < curve.size(); ++k) {
      if (k == self || std::abs(curve[k].psi_deg() - psi) > 1e-6) continue;
      const double d = (curve[k].vec() - curve[self].vec()).norm();
      if (d < bd) {
        bd = d;
        best = curve[k].vec();
      }
    }
    return best;
  };

  std::vector<DesignCandidate> out;
  const int steps = static_cast<int>(std::floor(o.max_offset_deg / o.offset_step_deg + 1e-9));
  for (std::size_t m = 0; m < curve.size(); ++m) {
    if (!dv[m] || *dv[m] < o.deff_fraction * dmax) continue;
    const Vec3 c = curve[m].vec();
    const double psi = curve[m].psi_deg();
    const auto prev = nearest_on_curve(m, psi - o.psi_step_deg);
    const auto next = nearest_on_curve(m, psi + o.psi_step_deg);
    Vec3 tangent = (next ? *next : c) - (prev ? *prev : c);
    if (tangent.norm() < 1e-12) continue;
    const Vec3 normal = c.cross(tangent).normalized();

    for (double side : {1.0, -1.0}) {
      auto pump_at = [&](double off) { return Vec3(std::cos(deg2rad(off)) * c + side * std::sin(deg2rad(off)) * normal); };
      // Step away from the curve until the crossing angle passes the target, then bisect.
      std::optional<std::pair<double, CrossingProbe>> prev;
      int misses = 0;
      for (int k = 1; k <= steps; ++k) {
        const double off = k * o.offset_step_deg;
        const CrossingProbe p = probe(crystal, process, pump_at(off), o.cones);
        if (!p.ok) {
          if (++misses >= 5 && !prev) break;  // cones never cross on this side
          continue;
        }
        if (!prev || (prev->second.angle < o.target_angle_deg) == (p.angle < o.target_angle_deg)) {
          prev = {off, p};
          continue;
        }
        const bool rising = prev->second.angle < o.target_angle_deg;
        double lo = prev->first, hi = off;
        CrossingProbe best = std::abs(p.angle - o.target_angle_deg) < std::abs(prev->second.angle - o.target_angle_deg)
                                 ? p
                                 : prev->second;
        double best_off = best.angle == p.angle ? off : prev->first;
        for (int it = 0; it < 10; ++it) {
          const double mid = 0.5 * (lo + hi);
          const CrossingProbe q = probe(crystal, process, pump_at(mid), o.cones);
          if (!q.ok) break;
          if (std::abs(q.angle - o.target_angle_deg) < std::abs(best.angle - o.target_angle_deg)) {
            best = q;
            best_off = mid;
          }
          if ((q.angle < o.target_angle_deg) == rising)
            lo = mid;
          else
            hi = mid;
        }
        if (std::abs(best.angle - o.target_angle_deg) <= o.window_deg) {
          DesignCandidate cand;
          cand.curve_point = curve[m];
          cand.pump = Direction::from_vector(pump_at(best_off));
          cand.offset_deg = side * best_off;
          cand.crossing_angle_deg = best.angle;
          cand.separation_deg = best.separation;
          try {
            cand.deff = waves.deff(tensor.d, cand.pump.vec());
            out.push_back(cand);
          } catch (const DegenerateDirectionError&) {
          }
        }
        break;
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const DesignCandidate& a, const DesignCandidate& b) { return a.deff > b.deff; });
  return out;
}

}  // namespace pdc
