#include "opdnp/errors.hpp"
#include "opdnp/harness.hpp"
#include "opdnp/parallel.hpp"
#include "opdnp/units.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>

#ifndef OPDNP_VERSION
#define OPDNP_VERSION "unknown"
#endif

namespace opdnp::harness {

namespace {

using json = nlohmann::json;

void note_row(SweepResult& r, std::size_t row, const std::string& note) {
  auto& notes = r.diagnostics["row_notes"];
  const std::string key = std::to_string(row);
  if (notes.contains(key)) notes[key] = notes[key].get<std::string>() + "; " + note;
  else notes[key] = note;
}

void add_row(SweepResult& r, std::vector<double> values, const std::string& label = {},
             const std::string& note = {}) {
  bool finite = true;
  for (double v : values) finite = finite && std::isfinite(v);
  if (!r.label_name.empty()) r.labels.push_back(label);
  r.rows.push_back(std::move(values));
  if (!note.empty()) note_row(r, r.rows.size() - 1, note);
  else if (!finite) note_row(r, r.rows.size() - 1, "non-finite value");
}

void set_columns(SweepResult& r, Scenario s) {
  const auto h = expected_header(s);
  std::size_t first = 0;
  if (h[0] == "transition" || h[0] == "scope" || h[0] == "mode" || h[0] == "series") {
    r.label_name = h[0];
    first = 1;
  }
  static const std::vector<std::string> suffixes{"_cm-1", "_cm-2", "_s-1", "_s", "_T", "_K"};
  for (std::size_t i = first; i < h.size(); ++i) {
    Column c{h[i], ""};
    for (const auto& suf : suffixes)
      if (h[i].size() > suf.size() && h[i].compare(h[i].size() - suf.size(), suf.size(), suf) == 0) {
        c.name = h[i].substr(0, h[i].size() - suf.size());
        c.unit = suf.substr(1);
        break;
      }
    r.columns.push_back(c);
  }
}

void record(RunOutcome& o, std::string id, bool converged, const std::string& message = {}) {
  o.tasks.push_back({std::move(id), converged ? "ok" : "not-converged", converged, message});
}

json diag_json(const SimDiagnostics& d) {
  json j;
  j["converged"] = d.converged;
  j["periods"] = d.periods;
  j["events"] = {{"microwave", d.microwave_events},
                 {"dipolar_exchange", d.dipolar_events},
                 {"cross_effect", d.cross_effect_events},
                 {"inter_unit", d.inter_unit_events}};
  j["max_ce_invariant_drift"] = d.max_ce_invariant_drift;
  j["steady_state_bound_holds"] = d.eq3_holds;
  j["max_polarization_difference"] = d.max_polarization_difference;
  const auto& h = d.convergence_history;
  j["final_relative_change"] = h.empty() ? 0.0 : h.back();
  j["notes"] = d.notes;
  return j;
}

double max_of(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, x);
  return m;
}

void rqm_rates(const ScenarioConfig& c, RunOutcome& o) {
  const auto grid = powder(c);
  const auto t = dq_rate_constants(c.rqm, grid);
  auto& r = o.result;
  for (int q = 0; q < kQuartetLevels; ++q)
    for (int d = 0; d < kDoubletLevels; ++d) {
      const std::string label = quartet_label(q) + "->" + doublet_label(d);
      std::string note;
      if (!rqm_pair_allowed(q, d)) note = "no RQM rate for a Delta m = 0 pair";
      else if (!std::isfinite(t.k_dq[q][d])) note = "exact resonance, Delta E = 0";
      add_row(r,
              {quartet_m(q), doublet_m(d), t.levels.deltaE[q][d], t.mean_element_sq[q][d],
               t.k_dq[q][d], t.k_qd[q][d]},
              label, note);
    }
  r.diagnostics["E_B_cm-1"] = t.levels.E_B;
  r.diagnostics["rate_notes"] = t.diagnostics;
  try {
    const double R = selectivity_factor(t);
    r.diagnostics["R_D1"] = R;
    r.diagnostics["P"] = rqm_polarization(R);
  } catch (const DivisionByZero& e) {
    r.diagnostics["R_D1"] = nullptr;
    r.diagnostics["selectivity_error"] = e.what();
  }
  record(o, "rates", true);
}

void rqm_kinetics(const ScenarioConfig& c, RunOutcome& o) {
  const auto grid = powder(c);
  const auto t = dq_rate_constants(c.rqm, grid);
  const Mat8 M = build_kinetic_generator(c.rqm, t);
  KineticState init;
  for (int i = 0; i < 8; ++i) init.populations[i] = c.rqm.initial_populations[i];
  std::vector<double> times(c.kinetics.t_count);
  for (std::size_t k = 0; k < times.size(); ++k)
    times[k] = c.kinetics.t_stop * static_cast<double>(k) / static_cast<double>(times.size() - 1);
  const auto states = evolve_kinetics(M, init, times, c.kinetics.method);
  const double P_eq = c.kinetics.P_eq.value_or(
      thermal_polarization(c.rqm.field_frequency, c.rqm.temperature));
  const auto trace = d0_polarization_trace(states, c.kinetics.irf_time, P_eq);
  for (std::size_t k = 0; k < states.size(); ++k) {
    std::vector<double> row{states[k].t};
    for (int i = 0; i < 8; ++i) row.push_back(states[k].populations[i]);
    row.push_back(trace[k]);
    add_row(o.result, row);
  }
  o.result.diagnostics["P_eq"] = P_eq;
  o.result.diagnostics["method"] = to_string(c.kinetics.method);
  o.result.diagnostics["rk4_step_s"] = rk4_step(M);
  o.result.diagnostics["rate_notes"] = t.diagnostics;
  record(o, "kinetics", true);
}

void j_scan_task(const ScenarioConfig& c, unsigned workers, RunOutcome& o) {
  const auto grid = powder(c);
  const auto& J = c.sweep.J_values;
  std::vector<JScanRow> rows;
  try {
    rows = parallel_map<JScanRow>(J.size(), workers,
                                  [&](std::size_t i) { return j_scan_row(c.rqm, J[i], grid); });
  } catch (const TaskError& e) {
    throw TaskError(e.task, "J = " + std::to_string(J[e.task]) + " cm-1: " + e.what());
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    add_row(o.result, {rows[i].J, rows[i].R_D1, rows[i].k_dq, rows[i].P}, {},
            std::isfinite(rows[i].k_dq) ? "" : "exact resonance, Delta E = 0");
    record(o, "J=" + std::to_string(J[i]), true);
  }
}

void masdnp_run(const ScenarioConfig& c, unsigned workers, RunOutcome& o) {
  const auto boxes = build_replicas(box_template(c), c.simulation.events.inter_cutoff);
  const auto pumping = pumping_from_drive(c.drive, c.relaxation);
  const auto sims = parallel_map<SimResult>(boxes.size(), workers, [&](std::size_t i) {
    return simulate_to_steady_state(boxes[i], c.relaxation, c.drive, pumping, c.simulation);
  });
  double sum = 0;
  std::size_t n = 0;
  bool all = true;
  json reps = json::array();
  for (std::size_t i = 0; i < sims.size(); ++i) {
    const auto& s = sims[i];
    double rs = 0;
    for (double v : s.state.P_n) rs += v;
    sum += rs;
    n += s.state.P_n.size();
    const double mean = rs / static_cast<double>(s.state.P_n.size());
    const bool conv = s.diagnostics.converged;
    all = all && conv;
    add_row(o.result,
            {epsilon_B(mean, c.drive), mean, static_cast<double>(s.diagnostics.periods),
             conv ? 1.0 : 0.0, max_of(s.diagnostics.max_polarization_difference)},
            "replica-" + std::to_string(i));
    reps.push_back(diag_json(s.diagnostics));
    record(o, "replica-" + std::to_string(i), conv);
  }
  const double mean = sum / static_cast<double>(n);
  double maxd = 0;
  int periods = 0;
  for (const auto& s : sims) {
    maxd = std::max(maxd, max_of(s.diagnostics.max_polarization_difference));
    periods = std::max(periods, s.diagnostics.periods);
  }
  add_row(o.result,
          {epsilon_B(mean, c.drive), mean, static_cast<double>(periods), all ? 1.0 : 0.0, maxd},
          "ensemble");
  o.result.diagnostics["replicas"] = reps;
  o.result.diagnostics["P_n_eq"] = proton_thermal_polarization(c.drive);
  if (pumping)
    o.result.diagnostics["pumping"] = {{"l_Tz0", pumping->l_Tz0}, {"T1_eff_s", pumping->T1_eff}};
}

void field_profile_task(const ScenarioConfig& c, unsigned workers, RunOutcome& o) {
  const auto pts = field_profile(box_template(c), c.sweep.B0_values, c.relaxation, c.drive,
                                 c.sweep.modes, c.simulation, workers);
  for (const auto& p : pts) {
    add_row(o.result, {p.B0, p.epsilon_B, p.converged ? 1.0 : 0.0}, to_string(p.mode));
    record(o, to_string(p.mode) + "@" + std::to_string(p.B0) + "T", p.converged);
  }
  o.result.diagnostics["uw_frequency_Hz"] = c.drive.uw_frequency;
}

void hp_sweep_task(const ScenarioConfig& c, unsigned workers, RunOutcome& o) {
  std::vector<bool> series;
  if (c.sweep.uw_series != UwSeries::With) series.push_back(false);
  if (c.sweep.uw_series != UwSeries::Without) series.push_back(true);
  for (bool uw : series) {
    const std::string name = uw ? "with-uw" : "without-uw";
    const auto pts = hyperpolarization_sweep(box_template(c), c.sweep.P_targets, c.relaxation,
                                             c.drive, uw, c.simulation, workers);
    for (const auto& p : pts) {
      add_row(o.result, {p.P_target, p.epsilon_B, p.converged ? 1.0 : 0.0}, name);
      record(o, name + "@" + std::to_string(p.P_target), p.converged);
    }
  }
  const double g_iso = c.spin.g_b.sum() / 3.0;
  o.result.diagnostics["P_e_b_eq"] = thermal_polarization(
      g_iso * units::bohr_hz_per_t * c.drive.B0, c.drive.temperature);
}

void fit_beff_task(const ScenarioConfig& c, unsigned workers, RunOutcome& o) {
  std::vector<double> temps = c.sweep.temperatures;
  if (temps.empty()) temps.push_back(c.drive.temperature);
  json fits = json::array();
  for (double T : temps) {
    DriveConfig d = c.drive;
    d.temperature = T;
    const auto pts = field_profile(box_template(c), c.sweep.B0_values, c.relaxation, d,
                                   {c.sweep.fit_mode}, c.simulation, workers);
    std::vector<double> B, e;
    for (const auto& p : pts) {
      B.push_back(p.B0);
      e.push_back(p.epsilon_B);
    }
    std::optional<FieldFit> fit;
    std::string failure;
    try {
      fit = fit_effective_field(B, e);
    } catch (const FitDegenerate& ex) {
      failure = ex.what();
    }
    for (const auto& p : pts) {
      const double f = fit ? std::abs(fit->B_eff - p.B0) / p.B0 : std::nan("");
      add_row(o.result, {T, p.B0, p.epsilon_B, f, p.converged ? 1.0 : 0.0}, {},
              fit ? "" : "fit failed: " + failure);
      record(o, std::to_string(T) + "K@" + std::to_string(p.B0) + "T", p.converged);
    }
    if (fit) fits.push_back({{"T_K", T}, {"B_eff_T", fit->B_eff}, {"residual", fit->residual}});
    else {
      fits.push_back({{"T_K", T}, {"error", failure}});
      o.tasks.push_back({"fit@" + std::to_string(T) + "K", "failed", true, failure});
    }
  }
  o.result.diagnostics["fits"] = fits;
}

std::string utc_stamp(bool compact) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, compact ? "%Y%m%dT%H%M%SZ" : "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

}  // namespace

unsigned resolve_workers(const ScenarioConfig& c) {
  if (c.workers) return *c.workers;
  if (const char* env = std::getenv("OPDNP_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    throw ConfigError(std::string("OPDNP_WORKERS: expected a positive integer, got '") + env + "'");
  }
  return default_workers();
}

std::filesystem::path resolve_output_dir(const ScenarioConfig& c) {
  if (!c.output_dir.empty()) return c.output_dir;
  if (const char* env = std::getenv("OPDNP_OUT"); env && *env) return env;
  return "runs";
}

RunOutcome execute(const ScenarioConfig& c, unsigned workers) {
  RunOutcome o;
  set_columns(o.result, c.scenario);
  try {
    switch (c.scenario) {
      case Scenario::RqmRates: rqm_rates(c, o); break;
      case Scenario::RqmKinetics: rqm_kinetics(c, o); break;
      case Scenario::JScan: j_scan_task(c, workers, o); break;
      case Scenario::MasdnpRun: masdnp_run(c, workers, o); break;
      case Scenario::FieldProfile: field_profile_task(c, workers, o); break;
      case Scenario::HpSweep: hp_sweep_task(c, workers, o); break;
      case Scenario::FitBeff: fit_beff_task(c, workers, o); break;
    }
  } catch (const TaskError& e) {
    o.tasks.push_back({"task-" + std::to_string(e.task), "failed", false, e.what()});
  } catch (const std::exception& e) {
    o.tasks.push_back({to_string(c.scenario), "failed", false, e.what()});
  }
  o.ok = true;
  for (const auto& t : o.tasks) o.ok = o.ok && t.status == "ok";
  return o;
}

RunOutcome run_scenario(const ScenarioConfig& c) {
  const unsigned workers = resolve_workers(c);
  const auto out = resolve_output_dir(c);
  std::filesystem::create_directories(out);
  const std::string hash = config_hash_hex(c);
  const std::string base = utc_stamp(true) + "-" + hash.substr(0, 8);
  std::filesystem::path dir = out / base;
  for (int n = 1; !std::filesystem::create_directory(dir); ++n)
    dir = out / (base + "-" + std::to_string(n));

  json manifest;
  manifest["config_hash"] = hash;
  manifest["toolkit_version"] = OPDNP_VERSION;
  manifest["timestamp"] = utc_stamp(false);
  manifest["scenario"] = to_string(c.scenario);
  manifest["preset"] = c.preset;
  manifest["seed"] = c.seed;
  manifest["workers"] = workers;
  manifest["status"] = "running";
  manifest["tasks"] = json::array();
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  write_file(dir / "config.txt", serialize(c));

  RunOutcome o = execute(c, workers);
  o.run_dir = dir;
  o.result.provenance = (dir / "manifest.json").string();
  write_file(dir / "results.csv", to_csv(o.result));
  write_file(dir / "diagnostics.json", o.result.diagnostics.dump(2) + "\n");

  if (c.scenario == Scenario::FieldProfile && o.ok)
    export_plot_data(o.result, PlotKind::Profile, dir / "plot");
  if (c.scenario == Scenario::HpSweep && o.ok)
    export_plot_data(o.result, PlotKind::Sweep, dir / "plot");
  if (c.scenario == Scenario::RqmKinetics && o.ok)
    export_plot_data(o.result, PlotKind::Trace, dir / "plot");

  bool converged = true, failed = false;
  json tasks = json::array();
  for (const auto& t : o.tasks) {
    converged = converged && t.converged;
    failed = failed || t.status == "failed";
    json tj{{"id", t.id}, {"status", t.status}, {"converged", t.converged}};
    if (!t.message.empty()) tj["message"] = t.message;
    tasks.push_back(tj);
  }
  manifest["tasks"] = tasks;
  manifest["converged"] = converged;
  manifest["status"] = failed ? "failed" : (converged ? "ok" : "not-converged");
  manifest["files"] = {"config.txt", "results.csv", "diagnostics.json"};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  o.manifest = manifest;
  return o;
}

}  // namespace opdnp::harness
