#pragma once

#include "opdnp/rqm.hpp"
#include "opdnp/spincore.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace opdnp {

// One electron a / electron b / proton unit. Angles are rad, couplings Hz.
// The molecular frame is the principal frame of g_a.
struct SpinSystemSpec {
  Vec3 g_a{2.0023, 2.0023, 2.0023};
  Vec3 g_b{2.0023, 2.0023, 2.0023};
  EulerAngles euler_ab;            // g_b principal frame relative to g_a
  double D_ab = 0.0;               // dipolar constant
  double dipolar_theta = 0.0, dipolar_phi = 0.0;
  double J_ab = 0.0;
  double A_hf = 0.0;               // dipolar hyperfine constant
  double hf_theta = 0.0, hf_phi = 0.0;
};

struct RelaxationSet {
  double T1e_a_eff = 10e-6;  // pumped electron a
  double T1e_a = 10e-6;      // electron a without pumping
  double T1e_b = 1e-3;
  double T2e = 2.5e-6;
  double T1n = 0.1;
};

struct DriveConfig {
  double uw_frequency = 526.9e9;  // Hz
  double uw_nutation = 0.2e6;     // Hz, 0 = microwaves off
  std::optional<double> optical_target;
  double B0 = 18.8;               // T
  double temperature = 100.0;     // K
  double mas_rate = 8e3;          // Hz
};

// Knobs for event detection and the effective couplings.
struct EventModel {
  int samples_per_period = 2048;
  int relaxation_segments = 64;   // per rotor period, raised so dt <= T2e
  double uw_scale = 1.0;
  double dj_scale = 1.0;
  double ce_scale = 1.0;
  double inter_cutoff = 1e3;      // Hz, weaker inter-unit couplings dropped
  bool inter_unit_events = true;
  // CE coupling uses |D_ab| by default; when set, the instantaneous secular
  // dipolar plus exchange term at the crossing is used instead.
  bool ce_secular_dipolar = false;
};

struct Offsets {
  double offset_a = 0, offset_b = 0;  // electron frequency minus uw_frequency, Hz
  double nuclear_larmor = 0;          // Hz
};

Mat3 g_tensor_a(const SpinSystemSpec& s);
Mat3 g_tensor_b(const SpinSystemSpec& s);
Vec3 field_in_rotor_frame(double rotor_phase);
// B0 direction expressed in the molecular frame of a crystallite.
Vec3 field_in_molecular_frame(const EulerAngles& crystallite, double rotor_phase);

double electron_frequency(const Mat3& g, const Vec3& b_mol, double B0);
double proton_larmor(double B0);

Offsets instantaneous_offsets(const SpinSystemSpec& spec, const EulerAngles& crystallite,
                              double rotor_phase, const DriveConfig& drive);

enum class EventKind { Microwave, DipolarExchange, CrossEffect };
std::string to_string(EventKind k);

struct RotorEvent {
  double time = 0;        // s within the rotor period
  EventKind kind = EventKind::Microwave;
  int i = 0, j = -1, n = -1;  // electron, partner electron, proton
  int branch = 0;         // CE only: nu_i - nu_j = branch * nu_n
  double sweep_rate = 0;  // Hz/s
  double coupling = 0;    // Hz
  double probability = 0;
};

double landau_zener_probability(double coupling_hz, double sweep_rate_hz_per_s,
                                std::string* diagnostic = nullptr);

// Events of one isolated unit over one rotor period; electron indices 0 (a), 1 (b), proton 0.
std::vector<RotorEvent> detect_rotor_events(const SpinSystemSpec& spec,
                                            const EulerAngles& crystallite,
                                            const DriveConfig& drive, int samples_per_period,
                                            const EventModel& model = {});

struct PolarizationState {
  double t = 0;
  std::vector<double> P_e;  // electrons 2u (a) and 2u+1 (b) of unit u
  std::vector<double> P_n;  // proton of unit u
};

PolarizationState apply_event(const PolarizationState& s, const RotorEvent& e);

// The two combinations a CE event leaves unchanged: P_i + P_j and P_i + branch * P_n.
std::pair<double, double> ce_invariants(const PolarizationState& s, const RotorEvent& e);

// Per-spin relaxation targets and times for one interval.
struct RelaxTargets {
  std::vector<double> electron_target, electron_T1;
  std::vector<double> nuclear_target, nuclear_T1;
};

RelaxTargets relaxation_targets(const std::vector<double>& electron_frequencies,
                                std::size_t n_protons, const RelaxationSet& relax,
                                const DriveConfig& drive,
                                const std::optional<PumpingReduction>& pumping);

PolarizationState relax_step(const PolarizationState& s, double dt, const RelaxTargets& targets);
// Thermal targets from the given electron frequencies, pumping on every electron a.
PolarizationState relax_step(const PolarizationState& s, double dt, const RelaxationSet& relax,
                             const DriveConfig& drive,
                             const std::optional<PumpingReduction>& pumping,
                             const std::vector<double>& electron_frequencies);

std::optional<PumpingReduction> pumping_from_drive(const DriveConfig& drive,
                                                   const RelaxationSet& relax);

struct BoxUnit {
  EulerAngles crystallite;
  Vec3 center;          // nm, rotor frame
  Vec3 electron_a, electron_b;
};

struct InterCoupling {
  int i = 0, j = 0;     // global electron indices
  double d = 0;         // Hz, dipolar constant
  Vec3 direction;       // unit vector, rotor frame
};

struct BoxEnsemble {
  SpinSystemSpec spec;
  std::vector<BoxUnit> units;
  std::vector<InterCoupling> inter_couplings;
  double side_nm = 0;
  std::uint64_t seed = 0;
};

double box_side_nm(std::size_t n_units, double concentration_mM);
double intra_distance_nm(double D_ab);

// Low-discrepancy crystallite orientations, shuffled by seed.
std::vector<EulerAngles> crystallite_orientations(std::size_t n, std::uint64_t seed);

BoxEnsemble build_box(const SpinSystemSpec& spec, std::size_t n_units, double concentration_mM,
                      double min_distance_nm, std::uint64_t seed,
                      const std::vector<EulerAngles>& orientations = {},
                      double inter_cutoff_hz = 1e3);

struct SimSettings {
  int max_rotor_periods = 20000;
  double convergence_tol = 1e-4;
  int convergence_window = 10;
  EventModel events;
};

struct SimDiagnostics {
  bool converged = false;
  int periods = 0;
  std::vector<double> max_polarization_difference;  // per unit, over the last period
  std::vector<double> convergence_history;           // max relative P_n change per period
  int microwave_events = 0, dipolar_events = 0, cross_effect_events = 0, inter_unit_events = 0;
  double max_ce_invariant_drift = 0;
  bool eq3_holds = true;   // |P_n| <= max(max |P_a - P_b|, P_n^eq) for every unit
  std::vector<std::string> notes;
};

struct SimResult {
  PolarizationState state;
  SimDiagnostics diagnostics;
};

SimResult simulate_to_steady_state(const BoxEnsemble& box, const RelaxationSet& relax,
                                   const DriveConfig& drive,
                                   const std::optional<PumpingReduction>& pumping,
                                   const SimSettings& settings);

double proton_thermal_polarization(const DriveConfig& drive);
double epsilon_B(double P_n, const DriveConfig& drive);

struct BoxTemplate {
  SpinSystemSpec spec;
  std::size_t n_units = 8;
  double concentration_mM = 10.0;
  double min_distance_nm = 4.2;
  std::size_t n_replicas = 4;
  std::uint64_t seed = 1;
};

std::vector<BoxEnsemble> build_replicas(const BoxTemplate& tpl, double inter_cutoff_hz = 1e3);

struct EnsembleResult {
  double epsilon_B = 0;
  double mean_P_n = 0;
  bool converged = true;
  std::vector<SimDiagnostics> replicas;
};

EnsembleResult run_ensemble(const std::vector<BoxEnsemble>& boxes, const RelaxationSet& relax,
                            const DriveConfig& drive,
                            const std::optional<PumpingReduction>& pumping,
                            const SimSettings& settings, unsigned workers = 1);

enum class ProfileMode { Conventional, Optical, OpticalMicrowave };
std::string to_string(ProfileMode m);

// Drive for a mode: conventional drops pumping, optical drops microwaves.
DriveConfig drive_for_mode(const DriveConfig& base, ProfileMode mode);

struct ProfilePoint {
  double B0 = 0;
  ProfileMode mode = ProfileMode::Conventional;
  double epsilon_B = 0;
  bool converged = true;
};

std::vector<ProfilePoint> field_profile(const BoxTemplate& tpl, const std::vector<double>& B0_values,
                                        const RelaxationSet& relax, const DriveConfig& drive,
                                        const std::vector<ProfileMode>& modes,
                                        const SimSettings& settings, unsigned workers = 1);

struct SweepPoint {
  double P_target = 0;
  double epsilon_B = 0;
  bool converged = true;
};

std::vector<SweepPoint> hyperpolarization_sweep(const BoxTemplate& tpl,
                                                const std::vector<double>& P_targets,
                                                const RelaxationSet& relax,
                                                const DriveConfig& drive, bool with_uw,
                                                const SimSettings& settings, unsigned workers = 1);

struct FieldFit {
  double B_eff = 0;     // T
  double residual = 0;  // root-mean-square relative residual
};

FieldFit fit_effective_field(const std::vector<double>& B0, const std::vector<double>& eps);

}  // namespace opdnp
