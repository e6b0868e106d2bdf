#include "internal.hpp"
#include "opdnp/errors.hpp"
#include "opdnp/units.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>

namespace opdnp {

PolarizationState apply_event(const PolarizationState& s, const RotorEvent& e) {
  PolarizationState out = s;
  const double p = e.probability;
  switch (e.kind) {
    case EventKind::Microwave:
      // saturation toward zero polarization
      out.P_e[e.i] = (1.0 - p) * s.P_e[e.i];
      break;
    case EventKind::DipolarExchange:
      out.P_e[e.i] = (1.0 - p) * s.P_e[e.i] + p * s.P_e[e.j];
      out.P_e[e.j] = (1.0 - p) * s.P_e[e.j] + p * s.P_e[e.i];
      break;
    case EventKind::CrossEffect: {
      // Population exchange between the two crossing levels, linear in the polarizations.
      const double c = e.branch;
      const double pa = s.P_e[e.i], pb = s.P_e[e.j], pn = s.P_n[e.n];
      const double x = pa - pb - c * pn;
      const double da = -0.5 * x, db = 0.5 * x, dn = 0.5 * c * x;
      double scale = p;
      for (auto [v, d] : {std::pair{pa, da}, std::pair{pb, db}, std::pair{pn, dn}}) {
        if (d == 0) continue;
        const double room = ((d > 0 ? 1.0 : -1.0) - v) / d;
        scale = std::min(scale, std::max(0.0, room));
      }
      out.P_e[e.i] = pa + scale * da;
      out.P_e[e.j] = pb + scale * db;
      out.P_n[e.n] = pn + scale * dn;
      break;
    }
  }
  return out;
}

std::pair<double, double> ce_invariants(const PolarizationState& s, const RotorEvent& e) {
  return {s.P_e[e.i] + s.P_e[e.j], s.P_e[e.i] + e.branch * s.P_n[e.n]};
}

std::optional<PumpingReduction> pumping_from_drive(const DriveConfig& drive,
                                                   const RelaxationSet& relax) {
  if (!drive.optical_target) return std::nullopt;
  return PumpingReduction{*drive.optical_target, relax.T1e_a_eff};
}

RelaxTargets relaxation_targets(const std::vector<double>& electron_frequencies,
                                std::size_t n_protons, const RelaxationSet& relax,
                                const DriveConfig& drive,
                                const std::optional<PumpingReduction>& pumping) {
  RelaxTargets t;
  const std::size_t ne = electron_frequencies.size();
  t.electron_target.resize(ne);
  t.electron_T1.resize(ne);
  for (std::size_t i = 0; i < ne; ++i) {
    const bool is_a = i % 2 == 0;
    if (is_a && pumping) {
      t.electron_target[i] = pumping->l_Tz0;
      t.electron_T1[i] = pumping->T1_eff;
    } else {
      t.electron_target[i] = thermal_polarization(electron_frequencies[i], drive.temperature);
      t.electron_T1[i] = is_a ? relax.T1e_a : relax.T1e_b;
    }
  }
  const double pn = proton_thermal_polarization(drive);
  t.nuclear_target.assign(n_protons, pn);
  t.nuclear_T1.assign(n_protons, relax.T1n);
  return t;
}

PolarizationState relax_step(const PolarizationState& s, double dt, const RelaxTargets& targets) {
  if (!(dt > 0)) throw InvalidArgument("relax_step: dt must be > 0");
  PolarizationState out = s;
  out.t = s.t + dt;
  for (std::size_t i = 0; i < s.P_e.size(); ++i) {
    const double f = std::exp(-dt / targets.electron_T1[i]);
    out.P_e[i] = targets.electron_target[i] + (s.P_e[i] - targets.electron_target[i]) * f;
  }
  for (std::size_t i = 0; i < s.P_n.size(); ++i) {
    const double f = std::exp(-dt / targets.nuclear_T1[i]);
    out.P_n[i] = targets.nuclear_target[i] + (s.P_n[i] - targets.nuclear_target[i]) * f;
  }
  return out;
}

PolarizationState relax_step(const PolarizationState& s, double dt, const RelaxationSet& relax,
                             const DriveConfig& drive,
                             const std::optional<PumpingReduction>& pumping,
                             const std::vector<double>& electron_frequencies) {
  if (electron_frequencies.size() != s.P_e.size())
    throw InvalidArgument("relax_step: one frequency per electron required");
  return relax_step(s, dt, relaxation_targets(electron_frequencies, s.P_n.size(), relax, drive,
                                              pumping));
}

double proton_thermal_polarization(const DriveConfig& drive) {
  return thermal_polarization(proton_larmor(drive.B0), drive.temperature);
}

double epsilon_B(double P_n, const DriveConfig& drive) {
  const double eq = proton_thermal_polarization(drive);
  if (eq == 0) throw InvalidArgument("epsilon_B: thermal proton polarization is zero");
  return P_n / eq;
}

namespace {

// One rotor period flattened into relaxation intervals and events.
struct Schedule {
  struct Item {
    bool is_event;
    std::size_t index;  // into events or relax blocks
  };
  std::vector<Item> items;
  std::vector<RotorEvent> events;
  // per relaxation block: target and decay factor for every spin, electrons then protons
  std::vector<double> target, factor;
  std::size_t n_spins = 0;
  std::vector<double> block_dt;
  std::vector<double> initial_electron;  // thermal at rotor phase zero
};

double interp_periodic(const std::vector<double>& v, int samples, double frac_of_period) {
  const double x = frac_of_period * samples;
  int k = static_cast<int>(std::floor(x));
  k = std::clamp(k, 0, samples - 1);
  const double f = x - k;
  return v[k] + f * (v[k + 1] - v[k]);
}

Schedule build_schedule(const BoxEnsemble& box, const RelaxationSet& relax,
                        const DriveConfig& drive, const std::optional<PumpingReduction>& pumping,
                        const EventModel& model, std::vector<std::string>& notes) {
  Schedule sch;
  const auto tr = detail::sample_trajectories(box, drive, model.samples_per_period);
  sch.events = detail::events_from_trajectories(tr, box, drive, model, &notes);

  const double period = tr.period;
  const int n_seg =
      std::max(model.relaxation_segments, static_cast<int>(std::ceil(period / relax.T2e - 1e-9)));
  std::vector<double> marks;
  for (int m = 0; m <= n_seg; ++m) marks.push_back(period * m / n_seg);

  const std::size_t nu = box.units.size();
  const std::size_t ne = 2 * nu;
  sch.n_spins = ne + nu;
  std::vector<double> freqs(ne);
  for (std::size_t u = 0; u < nu; ++u) {
    sch.initial_electron.push_back(thermal_polarization(tr.units[u].nu_a[0], drive.temperature));
    sch.initial_electron.push_back(thermal_polarization(tr.units[u].nu_b[0], drive.temperature));
  }

  auto add_block = [&](double t0, double t1) {
    if (!(t1 > t0)) return;
    const double mid = 0.5 * (t0 + t1) / period;
    for (std::size_t u = 0; u < nu; ++u) {
      freqs[2 * u] = interp_periodic(tr.units[u].nu_a, tr.samples, mid);
      freqs[2 * u + 1] = interp_periodic(tr.units[u].nu_b, tr.samples, mid);
    }
    const auto tg = relaxation_targets(freqs, nu, relax, drive, pumping);
    const double dt = t1 - t0;
    for (std::size_t i = 0; i < ne; ++i) {
      sch.target.push_back(tg.electron_target[i]);
      sch.factor.push_back(std::exp(-dt / tg.electron_T1[i]));
    }
    for (std::size_t i = 0; i < nu; ++i) {
      sch.target.push_back(tg.nuclear_target[i]);
      sch.factor.push_back(std::exp(-dt / tg.nuclear_T1[i]));
    }
    sch.items.push_back({false, sch.block_dt.size()});
    sch.block_dt.push_back(dt);
  };

  double t = 0;
  std::size_t next_event = 0;
  for (int m = 1; m <= n_seg; ++m) {
    while (next_event < sch.events.size() && sch.events[next_event].time < marks[m]) {
      add_block(t, sch.events[next_event].time);
      t = std::max(t, sch.events[next_event].time);
      sch.items.push_back({true, next_event});
      ++next_event;
    }
    add_block(t, marks[m]);
    t = marks[m];
  }
  for (; next_event < sch.events.size(); ++next_event) sch.items.push_back({true, next_event});
  return sch;
}

}  // namespace

SimResult simulate_to_steady_state(const BoxEnsemble& box, const RelaxationSet& relax,
                                   const DriveConfig& drive,
                                   const std::optional<PumpingReduction>& pumping,
                                   const SimSettings& settings) {
  if (settings.max_rotor_periods < 1 || !(settings.convergence_tol > 0) ||
      settings.convergence_window < 1)
    throw InvalidArgument("simulate_to_steady_state: limits must be positive");
  if (!(drive.mas_rate > 0) || !(drive.temperature > 0))
    throw InvalidArgument("simulate_to_steady_state: mas_rate and temperature must be > 0");
  if (settings.events.samples_per_period < 512)
    throw InvalidArgument("simulate_to_steady_state: samples_per_period must be >= 512");
  if (box.units.empty()) throw InvalidArgument("simulate_to_steady_state: empty box");

  SimResult res;
  auto& diag = res.diagnostics;
  const Schedule sch = build_schedule(box, relax, drive, pumping, settings.events, diag.notes);
  for (const auto& e : sch.events) {
    if (e.kind == EventKind::Microwave) ++diag.microwave_events;
    if (e.kind == EventKind::CrossEffect) ++diag.cross_effect_events;
    if (e.kind == EventKind::DipolarExchange) {
      if (e.i / 2 == e.j / 2)
        ++diag.dipolar_events;
      else
        ++diag.inter_unit_events;
    }
  }

  const std::size_t nu = box.units.size();
  const std::size_t ne = 2 * nu;
  const double period = 1.0 / drive.mas_rate;
  const double pn_eq = proton_thermal_polarization(drive);

  PolarizationState st;
  st.P_e = sch.initial_electron;
  st.P_n.assign(nu, pn_eq);

  std::vector<double> max_diff(nu, 0.0), prev_pn = st.P_n;
  int streak = 0;
  double* pe = st.P_e.data();
  double* pn = st.P_n.data();

  for (int period_index = 1; period_index <= settings.max_rotor_periods; ++period_index) {
    std::fill(max_diff.begin(), max_diff.end(), 0.0);
    auto track = [&] {
      for (std::size_t u = 0; u < nu; ++u)
        max_diff[u] = std::max(max_diff[u], std::abs(pe[2 * u] - pe[2 * u + 1]));
    };
    track();
    for (const auto& item : sch.items) {
      if (item.is_event) {
        const auto& e = sch.events[item.index];
        if (e.kind == EventKind::CrossEffect) {
          const auto before = ce_invariants(st, e);
          st = apply_event(st, e);
          pe = st.P_e.data();
          pn = st.P_n.data();
          const auto after = ce_invariants(st, e);
          diag.max_ce_invariant_drift =
              std::max({diag.max_ce_invariant_drift, std::abs(before.first - after.first),
                        std::abs(before.second - after.second)});
        } else {
          const double p = e.probability;
          if (e.kind == EventKind::Microwave) {
            pe[e.i] *= (1.0 - p);
          } else {
            const double a = pe[e.i], b = pe[e.j];
            pe[e.i] = (1.0 - p) * a + p * b;
            pe[e.j] = (1.0 - p) * b + p * a;
          }
        }
      } else {
        const std::size_t off = item.index * sch.n_spins;
        const double* tg = sch.target.data() + off;
        const double* f = sch.factor.data() + off;
        for (std::size_t i = 0; i < ne; ++i) pe[i] = tg[i] + (pe[i] - tg[i]) * f[i];
        for (std::size_t i = 0; i < nu; ++i)
          pn[i] = tg[ne + i] + (pn[i] - tg[ne + i]) * f[ne + i];
      }
      track();
#ifndef NDEBUG
      for (double v : st.P_e) assert(std::abs(v) <= 1.0 + 1e-12);
      for (double v : st.P_n) assert(std::abs(v) <= 1.0 + 1e-12);
#endif
    }
    st.t += period;

    double change = 0;
    for (std::size_t u = 0; u < nu; ++u) {
      const double scale = std::max(std::abs(pn[u]), std::abs(pn_eq));
      change = std::max(change, std::abs(pn[u] - prev_pn[u]) / scale);
    }
    prev_pn = st.P_n;
    diag.convergence_history.push_back(change);
    diag.periods = period_index;
    streak = change < settings.convergence_tol ? streak + 1 : 0;
    if (streak >= settings.convergence_window) {
      diag.converged = true;
      break;
    }
  }

  diag.max_polarization_difference = max_diff;
  for (std::size_t u = 0; u < nu; ++u) {
    const double bound = std::max(max_diff[u], std::abs(pn_eq));
    if (std::abs(st.P_n[u]) > bound * (1 + 1e-9) + 1e-15) diag.eq3_holds = false;
  }
  if (!diag.converged) {
    std::ostringstream msg;
    msg << "no steady state after " << diag.periods << " rotor periods (last relative change "
        << (diag.convergence_history.empty() ? 0.0 : diag.convergence_history.back()) << ")";
    diag.notes.push_back(msg.str());
  }
  res.state = st;
  return res;
}

}  // namespace opdnp
