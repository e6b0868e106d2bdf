#include "opdnp/errors.hpp"
#include "opdnp/masdnp.hpp"
#include "opdnp/parallel.hpp"

namespace opdnp {

std::string to_string(ProfileMode m) {
  switch (m) {
    case ProfileMode::Conventional: return "conventional";
    case ProfileMode::Optical: return "optical";
    case ProfileMode::OpticalMicrowave: return "optical+uw";
  }
  return "?";
}

DriveConfig drive_for_mode(const DriveConfig& base, ProfileMode mode) {
  DriveConfig d = base;
  if (mode == ProfileMode::Conventional) d.optical_target.reset();
  if (mode == ProfileMode::Optical) d.uw_nutation = 0.0;
  if (mode != ProfileMode::Conventional && !d.optical_target)
    throw InvalidArgument("optical modes need an optical target polarization");
  return d;
}

namespace {

struct ReplicaOutcome {
  double sum_pn = 0;
  std::size_t count = 0;
  SimDiagnostics diagnostics;
};

ReplicaOutcome run_one(const BoxEnsemble& box, const RelaxationSet& relax,
                       const DriveConfig& drive, const std::optional<PumpingReduction>& pumping,
                       const SimSettings& settings) {
  auto res = simulate_to_steady_state(box, relax, drive, pumping, settings);
  ReplicaOutcome out;
  for (double v : res.state.P_n) out.sum_pn += v;
  out.count = res.state.P_n.size();
  out.diagnostics = std::move(res.diagnostics);
  return out;
}

EnsembleResult reduce(const std::vector<ReplicaOutcome>& parts, std::size_t first,
                      std::size_t count, const DriveConfig& drive) {
  EnsembleResult r;
  double sum = 0;
  std::size_t n = 0;
  for (std::size_t k = first; k < first + count; ++k) {
    sum += parts[k].sum_pn;
    n += parts[k].count;
    r.converged = r.converged && parts[k].diagnostics.converged;
    r.replicas.push_back(parts[k].diagnostics);
  }
  r.mean_P_n = sum / static_cast<double>(n);
  r.epsilon_B = epsilon_B(r.mean_P_n, drive);
  return r;
}

}  // namespace

EnsembleResult run_ensemble(const std::vector<BoxEnsemble>& boxes, const RelaxationSet& relax,
                            const DriveConfig& drive,
                            const std::optional<PumpingReduction>& pumping,
                            const SimSettings& settings, unsigned workers) {
  if (boxes.empty()) throw InvalidArgument("run_ensemble: no boxes");
  const auto parts = parallel_map<ReplicaOutcome>(boxes.size(), workers, [&](std::size_t i) {
    return run_one(boxes[i], relax, drive, pumping, settings);
  });
  return reduce(parts, 0, parts.size(), drive);
}

std::vector<ProfilePoint> field_profile(const BoxTemplate& tpl, const std::vector<double>& B0_values,
                                        const RelaxationSet& relax, const DriveConfig& drive,
                                        const std::vector<ProfileMode>& modes,
                                        const SimSettings& settings, unsigned workers) {
  if (B0_values.empty()) throw InvalidArgument("field_profile: empty field list");
  if (modes.empty()) throw InvalidArgument("field_profile: no modes");
  const auto boxes = build_replicas(tpl, settings.events.inter_cutoff);
  const std::size_t R = boxes.size();
  std::vector<DriveConfig> drives;
  for (double B0 : B0_values)
    for (auto m : modes) {
      DriveConfig d = drive_for_mode(drive, m);
      d.B0 = B0;
      drives.push_back(d);
    }
  const auto parts =
      parallel_map<ReplicaOutcome>(drives.size() * R, workers, [&](std::size_t task) {
        const auto& d = drives[task / R];
        return run_one(boxes[task % R], relax, d, pumping_from_drive(d, relax), settings);
      });
  std::vector<ProfilePoint> out;
  for (std::size_t k = 0; k < drives.size(); ++k) {
    const auto r = reduce(parts, k * R, R, drives[k]);
    out.push_back({drives[k].B0, modes[k % modes.size()], r.epsilon_B, r.converged});
  }
  return out;
}

std::vector<SweepPoint> hyperpolarization_sweep(const BoxTemplate& tpl,
                                                const std::vector<double>& P_targets,
                                                const RelaxationSet& relax,
                                                const DriveConfig& drive, bool with_uw,
                                                const SimSettings& settings, unsigned workers) {
  if (P_targets.empty()) throw InvalidArgument("hyperpolarization_sweep: empty target list");
  for (double p : P_targets)
    if (p < -1 || p > 1) throw InvalidArgument("hyperpolarization_sweep: targets must lie in [-1, 1]");
  const auto boxes = build_replicas(tpl, settings.events.inter_cutoff);
  const std::size_t R = boxes.size();
  std::vector<DriveConfig> drives;
  for (double p : P_targets) {
    DriveConfig d = drive;
    d.optical_target = p;
    if (!with_uw) d.uw_nutation = 0.0;
    drives.push_back(d);
  }
  const auto parts =
      parallel_map<ReplicaOutcome>(drives.size() * R, workers, [&](std::size_t task) {
        const auto& d = drives[task / R];
        return run_one(boxes[task % R], relax, d, pumping_from_drive(d, relax), settings);
      });
  std::vector<SweepPoint> out;
  for (std::size_t k = 0; k < drives.size(); ++k) {
    const auto r = reduce(parts, k * R, R, drives[k]);
    out.push_back({P_targets[k], r.epsilon_B, r.converged});
  }
  return out;
}

}  // namespace opdnp
