#include "pdc/waveoptics.hpp"

#include <cmath>
#include <sstream>

#include "pdc/errors.hpp"

namespace pdc {

namespace {

Vec3 sign_fixed(Vec3 d) {
  Eigen::Index i;
  d.cwiseAbs().maxCoeff(&i);
  return d(i) < 0.0 ? Vec3(-d) : d;
}

// Any unit vector orthogonal to k.
Vec3 orthogonal_to(const Vec3& k) {
  const Vec3 seed = std::abs(k.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  return k.cross(seed).normalized();
}

}  // namespace

Indicatrix::Indicatrix(const CrystalDefinition& crystal, double lambda_nm)
    : lambda_nm_(lambda_nm),
      principal_(principal_indices(crystal, lambda_nm)),
      frame_(indicatrix_rotation(crystal, lambda_nm)) {
  const auto n = principal_.as_array();
  for (int i = 0; i < 3; ++i) a_[i] = 1.0 / (n[i] * n[i]);
}

ModeIndices Indicatrix::indices(const Vec3& k) const {
  // The roots u = 1/n^2 of the Fresnel quadratic are the eigenvalues of the
  // impermeability restricted to the plane normal to k. In that 2x2 form the
  // discriminant is a sum of squares, so the splitting stays accurate down to
  // the optic axes. Extended precision keeps the ordinary root of a uniaxial
  // crystal independent of direction to the last bit.
  using L = long double;
  const Vec3 q = frame_.to_indicatrix(k.normalized());
  const Vec3 e = orthogonal_to(q);
  const Vec3 f = q.cross(e).normalized();
  L m11 = 0, m22 = 0, m12 = 0;
  const L ref = a_[1];
  for (int i = 0; i < 3; ++i) {
    const L d = L(a_[i]) - ref;  // shift by a_2 so near-equal a_i do not cancel
    m11 += d * L(e(i)) * L(e(i));
    m22 += d * L(f(i)) * L(f(i));
    m12 += d * L(e(i)) * L(f(i));
  }
  const L mean = ref + 0.5L * (m11 + m22);
  const L half = std::sqrt(0.25L * (m11 - m22) * (m11 - m22) + m12 * m12);
  return {static_cast<double>(1.0L / std::sqrt(mean + half)), static_cast<double>(1.0L / std::sqrt(mean - half))};
}

double Indicatrix::fresnel_residual(const Vec3& k, double n) const {
  const Vec3 q = frame_.to_indicatrix(k.normalized());
  const double u = 1.0 / (n * n);
  // sum_i k_i^2 prod_{j != i} (a_j - u) = 0
  const double r = q.x() * q.x() * (a_[1] - u) * (a_[2] - u) + q.y() * q.y() * (a_[0] - u) * (a_[2] - u) +
      q.z() * q.z() * (a_[0] - u) * (a_[1] - u);
  const double scale = std::max({a_[0], a_[1], a_[2]});
  return std::abs(r) / (scale * scale);
}

void Indicatrix::require_distinct(const ModeIndices& n) const {
  if (n.slow - n.fast < kDegeneracyTolerance) {
    std::ostringstream os;
    os << "direction is (numerically) along an optic axis at " << lambda_nm_
       << " nm: polarization modes are undefined (|n_fast - n_slow| = " << n.slow - n.fast << ")";
    throw DegenerateDirectionError(os.str());
  }
}

std::pair<Vec3, Vec3> Indicatrix::polarizations(const Vec3& k_in) const {
  const Vec3 k = k_in.normalized();
  const ModeIndices n = indices(k);
  require_distinct(n);
  const Vec3 q = frame_.to_indicatrix(k);

  auto mode_vector = [&](double ni) -> Vec3 {
    const double u = 1.0 / (ni * ni);
    // D_i ∝ k_i / (a_i - u); ill-conditioned when a denominator vanishes
    // (principal planes, ordinary wave of a uniaxial crystal).
    bool well_posed = true;
    for (int i = 0; i < 3; ++i)
      if (std::abs(a_[i] - u) < 1e-6 * a_[i]) well_posed = false;
    Vec3 d;
    if (well_posed) {
      for (int i = 0; i < 3; ++i) d(i) = q(i) / (a_[i] - u);
    } else {
      // Eigenvector of the impermeability projected onto the plane normal to k.
      const Mat3 proj = Mat3::Identity() - q * q.transpose();
      const Mat3 m = proj * Vec3(a_[0], a_[1], a_[2]).asDiagonal() * proj;
      Eigen::SelfAdjointEigenSolver<Mat3> es(m);
      Eigen::Index best = 0;
      (es.eigenvalues().array() - u).abs().minCoeff(&best);
      d = es.eigenvectors().col(best);
    }
    return sign_fixed(frame_.to_physical(d.normalized()));
  };
  return {mode_vector(n.fast), mode_vector(n.slow)};
}

Vec3 Indicatrix::polarization(const Vec3& k, Mode m) const {
  const auto [f, s] = polarizations(k);
  return m == Mode::Fast ? f : s;
}

Vec3 Indicatrix::poynting(const Vec3& k_in, Mode m, double step_rad) const {
  if (!(step_rad > 0.0)) throw ValidationError("Poynting step must be positive");
  const Vec3 k = k_in.normalized();
  if (a_[0] == a_[1] && a_[1] == a_[2]) return k;  // isotropic: no walk-off
  require_distinct(indices(k));
  const Vec3 a1 = orthogonal_to(k);
  const Vec3 a2 = k.cross(a1);
  auto surface = [&](const Vec3& axis, double t) {
    const Vec3 kk = rotate_about(k, axis, t);
    return Vec3(index(kk, m) * kk);
  };
  // Central differences along two tangent directions of the wave-vector surface.
  const Vec3 d1 = surface(a1, step_rad) - surface(a1, -step_rad);
  const Vec3 d2 = surface(a2, step_rad) - surface(a2, -step_rad);
  Vec3 s = d1.cross(d2).normalized();
  if (s.dot(k) < 0.0) s = -s;
  return s;
}

ModeIndices mode_indices(const CrystalDefinition& crystal, double lambda_nm, const Direction& k) {
  return Indicatrix(crystal, lambda_nm).indices(k.vec());
}

double mode_index(const CrystalDefinition& crystal, double lambda_nm, const Direction& k, Mode m) {
  return mode_indices(crystal, lambda_nm, k)[m];
}

std::pair<Vec3, Vec3> mode_polarizations(const CrystalDefinition& crystal, double lambda_nm, const Direction& k) {
  return Indicatrix(crystal, lambda_nm).polarizations(k.vec());
}

Vec3 poynting_vector(const CrystalDefinition& crystal, double lambda_nm, const Direction& k, Mode m, double step_rad) {
  return Indicatrix(crystal, lambda_nm).poynting(k.vec(), m, step_rad);
}

WalkoffResult spatial_walkoff(const CrystalDefinition& crystal, double lambda_nm, const Direction& k, double thickness_mm) {
  if (!(thickness_mm >= 0.0)) throw ValidationError("thickness must be >= 0 mm");
  const Indicatrix ind(crystal, lambda_nm);
  const Vec3 sf = ind.poynting(k.vec(), Mode::Fast);
  const Vec3 ss = ind.poynting(k.vec(), Mode::Slow);
  WalkoffResult r;
  const double t = angle_between(sf, ss);
  r.theta_swo_deg = rad2deg(t);
  r.thickness_mm = thickness_mm;
  r.transverse_displacement_um = thickness_mm * 1e3 * std::tan(t);
  return r;
}

WaveSolution solve_wave(const CrystalDefinition& crystal, double lambda_nm, const Direction& k) {
  const Indicatrix ind(crystal, lambda_nm);
  WaveSolution w;
  w.lambda_nm = lambda_nm;
  w.k_dir = k;
  const ModeIndices n = ind.indices(k.vec());
  w.n_fast = n.fast;
  w.n_slow = n.slow;
  std::tie(w.D_fast, w.D_slow) = ind.polarizations(k.vec());
  w.S_fast = ind.poynting(k.vec(), Mode::Fast);
  w.S_slow = ind.poynting(k.vec(), Mode::Slow);
  const double af = angle_between(k.vec(), w.S_fast);
  const double as = angle_between(k.vec(), w.S_slow);
  w.alpha_fast_deg = rad2deg(af);
  w.alpha_slow_deg = rad2deg(as);
  w.n_r_fast = n.fast * std::cos(af);
  w.n_r_slow = n.slow * std::cos(as);
  return w;
}

ModeIndices ray_indices(const CrystalDefinition& crystal, double lambda_nm, const Direction& k) {
  const WaveSolution w = solve_wave(crystal, lambda_nm, k);
  return {w.n_r_fast, w.n_r_slow};
}

TemporalWalkoff temporal_walkoff(const CrystalDefinition& crystal, double lambda_nm, const Direction& k, double thickness_mm) {
  if (!(thickness_mm >= 0.0)) throw ValidationError("thickness must be >= 0 mm");
  const ModeIndices nr = ray_indices(crystal, lambda_nm, k);
  TemporalWalkoff t;
  t.thickness_mm = thickness_mm;
  t.delta_n_r = nr.slow - nr.fast;
  t.delta_T_fs = thickness_mm * 1e-3 * t.delta_n_r / kSpeedOfLight * 1e15;
  return t;
}

}  // namespace pdc
