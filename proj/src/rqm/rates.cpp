#include "opdnp/errors.hpp"
#include "opdnp/rqm.hpp"
#include "opdnp/units.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace opdnp {

double arrhenius_factor(double E_a_kj_per_mol, double temperature_k) {
  if (!(temperature_k > 0)) throw InvalidArgument("arrhenius_factor: temperature must be > 0 K");
  return std::exp(-E_a_kj_per_mol * 1e3 / (units::gas_constant * temperature_k));
}

RateTable dq_rate_constants(const RqmParams& p, const std::vector<Orientation>& grid) {
  if (grid.empty()) throw InvalidArgument("dq_rate_constants: empty orientation grid");
  RateTable t;
  t.levels = level_scheme(p.J_CR, p.field_frequency);
  const CoupledBasis basis = coupled_basis(p.J_CR, p.field_frequency);
  t.diagnostics = basis.diagnostics;

  std::array<std::array<cplx, kDoubletLevels>, kQuartetLevels> mean_elem{};
  double wsum = 0;
  for (const auto& o : grid) {
    const auto el = zfs_matrix_elements(basis, p.D_zfs, p.E_zfs, o);
    wsum += o.weight;
    for (int q = 0; q < kQuartetLevels; ++q)
      for (int d = 0; d < kDoubletLevels; ++d) {
        t.mean_element_sq[q][d] += o.weight * el.qd_sq[q][d];
        mean_elem[q][d] += o.weight * el.qd[q][d];
      }
  }
  if (!(wsum > 0)) throw InvalidArgument("dq_rate_constants: grid weights sum to zero");
  for (int q = 0; q < kQuartetLevels; ++q)
    for (int d = 0; d < kDoubletLevels; ++d) {
      if (p.averaging == ZfsAveraging::MeanOfSquare)
        t.mean_element_sq[q][d] /= wsum;
      else
        t.mean_element_sq[q][d] = std::norm(mean_elem[q][d] / wsum);
    }

  const double prefactor = p.k0_DQ * arrhenius_factor(p.E_a, p.temperature);
  const double kT_cm = units::hz_to_wavenumber(units::boltzmann * p.temperature / units::planck);
  for (int q = 0; q < kQuartetLevels; ++q)
    for (int d = 0; d < kDoubletLevels; ++d) {
      if (!rqm_pair_allowed(q, d)) continue;
      const double dE = t.levels.deltaE[q][d];
      double dE2 = std::max(dE * dE, p.deltaE_floor * p.deltaE_floor);
      double k;
      if (dE2 == 0.0) {
        k = prefactor * t.mean_element_sq[q][d] == 0.0 ? 0.0
                                                       : std::numeric_limits<double>::infinity();
        std::ostringstream msg;
        msg << "Delta E = 0 for " << quartet_label(q) << " <-> " << doublet_label(d)
            << " at J = " << p.J_CR << " cm^-1; rate set to +inf";
        t.diagnostics.push_back(msg.str());
      } else {
        k = prefactor * t.mean_element_sq[q][d] / dE2;
      }
      t.k_dq[q][d] = k;
      t.k_qd[q][d] = k;
      if (p.detailed_balance_qd && std::isfinite(k)) {
        // dE = E(D) - E(Q): positive means Q -> D is uphill
        const double f = std::exp(-std::abs(dE) / kT_cm);
        if (dE > 0)
          t.k_qd[q][d] = k * f;
        else
          t.k_dq[q][d] = k * f;
      }
    }
  return t;
}

double selectivity_factor(const RateTable& t) {
  double up = 0, down = 0;
  for (int q = 0; q < kQuartetLevels; ++q) {
    if (rqm_pair_allowed(q, 0)) up += t.k_dq[q][0];
    if (rqm_pair_allowed(q, 1)) down += t.k_dq[q][1];
  }
  if (down == 0.0)
    throw DivisionByZero(
        "selectivity_factor: k_dq(Q+3/2,D1-1/2), k_dq(Q+1/2,D1-1/2) and k_dq(Q-3/2,D1-1/2) are "
        "all zero");
  if (std::isinf(up) && std::isinf(down)) return std::numeric_limits<double>::quiet_NaN();
  return up / down;
}

double rqm_polarization(double R_D1) {
  if (!(R_D1 >= 0)) throw InvalidArgument("rqm_polarization: R_D1 must be >= 0");
  if (std::isinf(R_D1)) return -1.0;
  return (1.0 - R_D1) / (1.0 + R_D1);
}

SoIscPopulations soisc_populations(double kx, double ky, double kz, double D_T_cm,
                                   double B0_frequency_hz) {
  if (kx < 0 || ky < 0 || kz < 0 || kx + ky + kz == 0)
    throw InvalidArgument("soisc_populations: rates must be >= 0 and not all zero");
  if (B0_frequency_hz == 0) throw InvalidArgument("soisc_populations: zero field");
  const double sum = kx + ky + kz;
  const double field_cm = units::hz_to_wavenumber(B0_frequency_hz);
  SoIscPopulations p;
  p.P0 = sum / 3.0;
  const double shift = 0.4 * D_T_cm / field_cm * sum;
  p.Pplus1 = p.P0 + shift;
  p.Pminus1 = p.P0 - shift;
  return p;
}

double slr_direct_scaling(double W_ref, double D_ref, double T_ref, double D_target,
                          double T_target) {
  if (!(W_ref > 0) || !(D_ref > 0) || !(T_ref > 0) || !(D_target > 0) || !(T_target > 0))
    throw InvalidArgument("slr_direct_scaling: all inputs must be positive");
  const double r = D_target / D_ref;
  return W_ref * r * r * (T_target / T_ref);
}

JScanRow j_scan_row(const RqmParams& p, double J, const std::vector<Orientation>& grid) {
  if (J > 0) throw InvalidArgument("j_scan: J_CR must be <= 0 (got " + std::to_string(J) + ")");
  RqmParams q = p;
  q.J_CR = J;
  const RateTable t = dq_rate_constants(q, grid);
  JScanRow row;
  row.J = J;
  row.R_D1 = selectivity_factor(t);
  row.k_dq = t.k_dq[kQm32][0];
  row.P = rqm_polarization(row.R_D1);
  return row;
}

std::vector<JScanRow> j_scan(const RqmParams& p, const std::vector<double>& J_values,
                             const std::vector<Orientation>& grid) {
  if (J_values.empty()) throw InvalidArgument("j_scan: empty J list");
  for (double J : J_values)
    if (J > 0) throw InvalidArgument("j_scan: J_CR must be <= 0 (got " + std::to_string(J) + ")");
  std::vector<JScanRow> rows;
  rows.reserve(J_values.size());
  for (double J : J_values) rows.push_back(j_scan_row(p, J, grid));
  return rows;
}

}  // namespace opdnp
