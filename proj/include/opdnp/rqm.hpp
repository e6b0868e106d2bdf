#pragma once

#include "opdnp/spincore.hpp"

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

namespace opdnp {

// Quartet sublevels are indexed m = +3/2, +1/2, -1/2, -3/2 -> 0..3,
// doublet sublevels n = +1/2, -1/2 -> 0..1.
inline constexpr int kQuartetLevels = 4;
inline constexpr int kDoubletLevels = 2;
double quartet_m(int q);
double doublet_m(int d);
std::string quartet_label(int q);
std::string doublet_label(int d);

// Population vector order used by the kinetic model.
enum KineticIndex : int { kQp32, kQp12, kQm12, kQm32, kD1p, kD1m, kD0p, kD0m };
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

enum class ZfsAveraging { MeanOfSquare, SquareOfMean };

struct RqmParams {
  double J_CR = -3.4;            // cm^-1
  double D_zfs = 0.31;           // cm^-1
  double E_zfs = 0.0;            // cm^-1
  double k0_DQ = 1e13;           // s^-1
  double E_a = 10.2;             // kJ/mol
  double temperature = 100.0;    // K
  double field_frequency = 9.5e9;  // Hz
  double k_qt = 20e6;            // s^-1
  double k_Q0 = 303.0;           // s^-1
  double W_Q1 = 0.1e6;           // s^-1
  double W_D1 = 0.0062e6;        // s^-1
  double W_D0 = 0.0062e6;        // s^-1
  std::array<double, 8> initial_populations{1, 0, 0, 0, 0.22, 0, 0, 0};

  // Boltzmann factor on the uphill direction of each Q<->D1 pair instead of k_qd = k_dq.
  bool detailed_balance_qd = false;
  // Lower bound on |Delta E| in cm^-1; 0 keeps the bare resonance.
  double deltaE_floor = 0.0;
  ZfsAveraging averaging = ZfsAveraging::MeanOfSquare;
};

struct DqLevelScheme {
  double E_B = 0.0;  // cm^-1, Zeeman term
  std::array<double, kQuartetLevels> quartet_energy{};
  std::array<double, kDoubletLevels> doublet_energy{};
  // deltaE[q][d] = E(D1^d) - E(Q^q)
  std::array<std::array<double, kDoubletLevels>, kQuartetLevels> deltaE{};
};

// The six Q -> D1 transitions that carry RQM rates; the two Delta m = 0 pairs carry none.
bool rqm_pair_allowed(int q, int d);

DqLevelScheme level_scheme(double J_CR, double field_frequency_hz);

struct ZfsElements {
  // |<Q^q|H_ZFS|D1^d>|^2 in cm^-2
  std::array<std::array<double, kDoubletLevels>, kQuartetLevels> qd_sq{};
  // complex elements, kept for the square-of-mean convention
  std::array<std::array<cplx, kDoubletLevels>, kQuartetLevels> qd{};
  // |<i|H_ZFS|j>|^2 over all six eigenstates, order Q+3/2..Q-3/2, D+1/2, D-1/2
  Eigen::Matrix<double, 6, 6> all_sq = Eigen::Matrix<double, 6, 6>::Zero();
  std::array<double, 6> energies{};  // eigenvalues of Zeeman + exchange, same order
  std::vector<std::string> diagnostics;
};

// Eigenbasis of Zeeman + exchange on chromophore triplet x radical doublet.
struct CoupledBasis {
  Eigen::Matrix<cplx, 6, 6> vectors;  // columns in the labelled order above
  std::array<double, 6> energies{};
  std::vector<std::string> diagnostics;
};

CoupledBasis coupled_basis(double J_CR, double field_frequency_hz);
ZfsElements zfs_matrix_elements(const CoupledBasis& basis, double D_zfs, double E_zfs,
                                const Orientation& o);
ZfsElements zfs_matrix_elements(double D_zfs, double E_zfs, double J_CR, double field_frequency_hz,
                                const Orientation& o);

struct RateTable {
  // both indexed [q][d]; k_dq is D1^d -> Q^q, k_qd is Q^q -> D1^d
  std::array<std::array<double, kDoubletLevels>, kQuartetLevels> k_dq{};
  std::array<std::array<double, kDoubletLevels>, kQuartetLevels> k_qd{};
  std::array<std::array<double, kDoubletLevels>, kQuartetLevels> mean_element_sq{};
  DqLevelScheme levels;
  std::vector<std::string> diagnostics;
};

double arrhenius_factor(double E_a_kj_per_mol, double temperature_k);

RateTable dq_rate_constants(const RqmParams& p, const std::vector<Orientation>& grid);

double selectivity_factor(const RateTable& t);
double rqm_polarization(double R_D1);

struct SoIscPopulations {
  double P0 = 0, Pplus1 = 0, Pminus1 = 0;
};

SoIscPopulations soisc_populations(double kx, double ky, double kz, double D_T_cm,
                                   double B0_frequency_hz);

double slr_direct_scaling(double W_ref, double D_ref, double T_ref, double D_target,
                          double T_target);

Mat8 build_kinetic_generator(const RqmParams& p, const RateTable& t);

struct KineticState {
  double t = 0.0;
  Vec8 populations = Vec8::Zero();
};

enum class KineticsMethod { MatrixExponential, Rk4FixedStep };

KineticsMethod parse_kinetics_method(const std::string& name);
std::string to_string(KineticsMethod m);

// Step used by the rk4 method: 0.1 / max |M_ii|.
double rk4_step(const Mat8& M);

std::vector<KineticState> evolve_kinetics(const Mat8& M, const KineticState& initial,
                                          const std::vector<double>& times, KineticsMethod method);

// Normalized D0 polarization relative to equilibrium, minus one, after a causal
// unit-area exponential response of width irf_time (0 = no smoothing).
std::vector<double> d0_polarization_trace(const std::vector<KineticState>& states, double irf_time,
                                          double P_eq);

struct JScanRow {
  double J = 0, R_D1 = 0, k_dq = 0, P = 0;
};

// k_dq column is the Q^-3/2 <-> D1^+1/2 rate.
JScanRow j_scan_row(const RqmParams& p, double J, const std::vector<Orientation>& grid);
std::vector<JScanRow> j_scan(const RqmParams& p, const std::vector<double>& J_values,
                             const std::vector<Orientation>& grid);

struct PumpingReduction {
  double l_Tz0 = 0.0;
  double T1_eff = 1.0;  // s
};

// Steady state of the triplet / nitroxide exchange model. P_eq is the nitroxide's
// own thermal polarization toward which it relaxes with T1e_NO.
PumpingReduction pumping_reduction(double Tz0, double T1_T, double r, double T1e_NO,
                                   double P_eq = 0.0);

}  // namespace opdnp
