#pragma once

#include "opdnp/masdnp.hpp"

#include <vector>

namespace opdnp::detail {

// Quantities sampled at k * period / S for k = 0..S (entry S repeats entry 0).
struct UnitTrajectory {
  std::vector<double> nu_a, nu_b;  // electron frequencies, Hz
  std::vector<double> dsec;        // secular intra-unit dipolar coupling, Hz
  std::vector<double> hf_amp;      // pseudo-secular hyperfine amplitude, Hz
};

struct Trajectories {
  int samples = 0;
  double period = 0;
  double nu_n = 0;
  std::vector<UnitTrajectory> units;
  std::vector<std::vector<double>> inter_dsec;  // parallel to BoxEnsemble::inter_couplings
};

Trajectories sample_trajectories(const BoxEnsemble& box, const DriveConfig& drive, int samples);

std::vector<RotorEvent> events_from_trajectories(const Trajectories& tr, const BoxEnsemble& box,
                                                 const DriveConfig& drive, const EventModel& model,
                                                 std::vector<std::string>* notes = nullptr);

}  // namespace opdnp::detail
