#include "opdnp/errors.hpp"
#include "opdnp/harness.hpp"

#include <map>

namespace opdnp::harness {

namespace {

// Nitroxide is electron a, trityl electron b. The nitroxide has one longitudinal
// time, used both with and without pumping.
const char* kTritylTempo = R"(
[spin]
g_a = 2.0095 2.0061 2.0021
g_b = 2.0032 2.0030 2.0027
euler_ab = 90 90 90 deg
D_ab = 30 MHz
dipolar_angles = 90 180 deg
J_ab = 0 MHz
A_hf = 3 MHz
hf_angles = 90 0 deg

[relaxation]
T1_eff = 10 us
T1e_a = 10 us
T1e_b = 1 ms
T2e = 2.5 us
T1n = 0.1 s

[drive]
uw_frequency = 526.9 GHz
uw_nutation = 0.2 MHz
B0 = 18.8 T
temperature = 100 K
mas_rate = 8 kHz

[box]
n_units = 8
n_replicas = 4
concentration = 10 mM
min_distance = 4.2 nm

[simulation]
convergence_tol = 1e-7
max_rotor_periods = 40000
)";

const char* kAmupol = R"(
[spin]
g_a = 2.00923 2.00619 2.00212
g_b = 2.00923 2.00619 2.00212
euler_ab = 58 57 126 deg
D_ab = 35 MHz
dipolar_angles = 78 167 deg
J_ab = -16 MHz
A_hf = 3 MHz
hf_angles = 0 90 deg

[relaxation]
T1_eff = 10 us
T1e_a = 10 us
T1e_b = 0.3 ms
T2e = 2.5 us
T1n = 0.1 s

[drive]
uw_frequency = 526.9 GHz
uw_nutation = 0.2 MHz
B0 = 18.8 T
temperature = 100 K
mas_rate = 8 kHz

[box]
n_units = 8
n_replicas = 4
concentration = 10 mM
min_distance = 4.2 nm

[simulation]
convergence_tol = 1e-7
max_rotor_periods = 40000
)";

// X-band kinetics, triplet-only pathway (no ZFS coupling of D1 and Q1).
const char* kAncootSoisc = R"(
[rqm]
J_CR = -3.4 cm-1
D_zfs = 0 cm-1
E_zfs = 0 cm-1
k0_DQ = 1e13 s-1
E_a = 10.2 kJ/mol
temperature = 100 K
field_frequency = 9.5 GHz
k_qt = 20e6 s-1
k_Q0 = 303 s-1
W_Q1 = 0.1e6 s-1
W_D1 = 0.0062e6 s-1
W_D0 = 0.0062e6 s-1
initial_populations = 1 0 0 0 0.75 0 0 0

[kinetics]
irf_time = 100 ns
)";

const char* kAncootRqm = R"(
[rqm]
J_CR = -3.4 cm-1
D_zfs = 0.31 cm-1
E_zfs = 0 cm-1
k0_DQ = 1e13 s-1
E_a = 10.4 kJ/mol
temperature = 100 K
field_frequency = 9.5 GHz
k_qt = 20e6 s-1
k_Q0 = 303 s-1
W_Q1 = 0.1e6 s-1
W_D1 = 0.0062e6 s-1
W_D0 = 0.0062e6 s-1
initial_populations = 1 0 0 0 0.22 0 0 0

[kinetics]
irf_time = 100 ns
)";

const std::map<std::string, std::string>& documents() {
  static const std::map<std::string, std::string> m{
      {"trityl-tempo", kTritylTempo},
      {"amupol", kAmupol},
      {"ancoot-soisc", kAncootSoisc},
      {"ancoot-rqm", kAncootRqm},
  };
  return m;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"trityl-tempo", "amupol", "ancoot-soisc",
                                              "ancoot-rqm"};
  return names;
}

const std::string& preset_document(const std::string& name) {
  auto it = documents().find(name);
  if (it == documents().end())
    throw ConfigError("preset: unknown name '" + name +
                      "' (expected trityl-tempo, amupol, ancoot-soisc or ancoot-rqm)");
  return it->second;
}

BoxTemplate box_template(const ScenarioConfig& c) {
  BoxTemplate t;
  t.spec = c.spin;
  t.n_units = c.box.n_units;
  t.n_replicas = c.box.n_replicas;
  t.concentration_mM = c.box.concentration_mM;
  t.min_distance_nm = c.box.min_distance_nm;
  t.seed = c.seed;
  return t;
}

std::vector<Orientation> powder(const ScenarioConfig& c) {
  return powder_grid(c.powder.scheme, c.powder.n, c.powder.seed, c.powder.file);
}

}  // namespace opdnp::harness
