#include "opdnp/errors.hpp"
#include "opdnp/masdnp.hpp"
#include "opdnp/units.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace opdnp {

double box_side_nm(std::size_t n_units, double concentration_mM) {
  if (n_units == 0 || !(concentration_mM > 0))
    throw InvalidArgument("box_side_nm: need n_units >= 1 and concentration > 0");
  // mM -> molecules per nm^3 (1 L = 1e24 nm^3)
  const double per_nm3 = concentration_mM * 1e-3 * units::avogadro * 1e-24;
  return std::cbrt(static_cast<double>(n_units) / per_nm3);
}

double intra_distance_nm(double D_ab) {
  if (D_ab == 0) return 0.0;
  return std::cbrt(units::electron_dipolar_hz_nm3 / std::abs(D_ab));
}

std::vector<EulerAngles> crystallite_orientations(std::size_t n, std::uint64_t seed) {
  if (n == 0) return {};
  const auto grid = powder_grid(PowderScheme::GoldenSpiral, n, seed);
  std::vector<EulerAngles> out(n);
  const double step = 0.7548776662466927;  // inverse plastic number
  for (std::size_t i = 0; i < n; ++i) {
    const double frac = std::fmod(step * static_cast<double>(i + 1), 1.0);
    out[i] = {grid[i].phi, grid[i].theta, 2.0 * units::pi * frac};
  }
  std::mt19937_64 rng(seed);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

BoxEnsemble build_box(const SpinSystemSpec& spec, std::size_t n_units, double concentration_mM,
                      double min_distance_nm, std::uint64_t seed,
                      const std::vector<EulerAngles>& orientations, double inter_cutoff_hz) {
  if (n_units == 0) throw InvalidArgument("build_box: n_units must be >= 1");
  if (!(concentration_mM > 0)) throw InvalidArgument("build_box: concentration must be > 0");
  if (!orientations.empty() && orientations.size() != n_units)
    throw InvalidArgument("build_box: need one orientation per unit");

  BoxEnsemble box;
  box.spec = spec;
  box.seed = seed;
  box.side_nm = box_side_nm(n_units, concentration_mM);
  const auto orient =
      orientations.empty() ? crystallite_orientations(n_units, seed) : orientations;

  const double half = 0.5 * intra_distance_nm(spec.D_ab);
  const Vec3 u_dip = unit_vector(spec.dipolar_theta, spec.dipolar_phi);
  std::seed_seq seq{seed, std::uint64_t{0x626f78}};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> coord(0.0, box.side_nm);

  constexpr int kTriesPerUnit = 20000;
  constexpr int kRestarts = 50;
  bool placed = false;
  for (int restart = 0; restart < kRestarts && !placed; ++restart) {
    box.units.clear();
    placed = true;
    for (std::size_t u = 0; u < n_units && placed; ++u) {
      const Vec3 axis = rotation_matrix(orient[u]) * u_dip;
      bool ok = false;
      for (int attempt = 0; attempt < kTriesPerUnit && !ok; ++attempt) {
        BoxUnit unit;
        unit.crystallite = orient[u];
        unit.center = {coord(rng), coord(rng), coord(rng)};
        unit.electron_a = unit.center - half * axis;
        unit.electron_b = unit.center + half * axis;
        ok = true;
        for (const auto& other : box.units) {
          for (const Vec3* p : {&unit.electron_a, &unit.electron_b})
            for (const Vec3* q : {&other.electron_a, &other.electron_b})
              if ((*p - *q).norm() < min_distance_nm) ok = false;
          if (!ok) break;
        }
        if (ok) box.units.push_back(unit);
      }
      if (!ok) placed = false;
    }
  }
  if (!placed)
    throw ConfigError("build_box: cannot place " + std::to_string(n_units) + " units at " +
                      std::to_string(concentration_mM) + " mM with minimum distance " +
                      std::to_string(min_distance_nm) + " nm");

  for (std::size_t u = 0; u < n_units; ++u)
    for (std::size_t v = u + 1; v < n_units; ++v)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
          const Vec3& p = x == 0 ? box.units[u].electron_a : box.units[u].electron_b;
          const Vec3& q = y == 0 ? box.units[v].electron_a : box.units[v].electron_b;
          const Vec3 r = q - p;
          const double dist = r.norm();
          const double d = units::electron_dipolar_hz_nm3 / (dist * dist * dist);
          if (d < inter_cutoff_hz) continue;
          box.inter_couplings.push_back(
              {static_cast<int>(2 * u + x), static_cast<int>(2 * v + y), d, r / dist});
        }
  return box;
}

std::vector<BoxEnsemble> build_replicas(const BoxTemplate& tpl, double inter_cutoff_hz) {
  if (tpl.n_replicas == 0) throw InvalidArgument("build_replicas: n_replicas must be >= 1");
  const auto all = crystallite_orientations(tpl.n_units * tpl.n_replicas, tpl.seed);
  std::vector<BoxEnsemble> boxes;
  boxes.reserve(tpl.n_replicas);
  for (std::size_t r = 0; r < tpl.n_replicas; ++r) {
    std::vector<EulerAngles> slice(all.begin() + static_cast<long>(r * tpl.n_units),
                                   all.begin() + static_cast<long>((r + 1) * tpl.n_units));
    boxes.push_back(build_box(tpl.spec, tpl.n_units, tpl.concentration_mM, tpl.min_distance_nm,
                              tpl.seed + 7919 * (r + 1), slice, inter_cutoff_hz));
  }
  return boxes;
}

}  // namespace opdnp
