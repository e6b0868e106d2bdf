#pragma once

#include "opdnp/masdnp.hpp"
#include "opdnp/rqm.hpp"
#include "opdnp/spincore.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace opdnp::harness {

enum class Scenario { RqmRates, RqmKinetics, JScan, MasdnpRun, FieldProfile, HpSweep, FitBeff };
std::string to_string(Scenario s);
Scenario parse_scenario(const std::string& name);
const std::vector<Scenario>& all_scenarios();

enum class UwSeries { Without, With, Both };

struct PowderSettings {
  PowderScheme scheme = PowderScheme::GoldenSpiral;
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  std::string file;
};

struct KineticsSettings {
  KineticsMethod method = KineticsMethod::Rk4FixedStep;
  double t_stop = 10e-6;  // s
  std::size_t t_count = 201;
  double irf_time = 100e-9;  // s
  std::optional<double> P_eq;  // thermal value at the rqm field and temperature when unset
};

struct BoxSettings {
  std::size_t n_units = 8;
  std::size_t n_replicas = 4;
  double concentration_mM = 10.0;
  double min_distance_nm = 4.2;
};

struct SweepAxes {
  std::vector<double> J_values;      // cm^-1
  std::vector<double> B0_values;     // T
  std::vector<double> P_targets;
  std::vector<double> temperatures;  // K, fit-beff only; empty = drive temperature
  std::vector<ProfileMode> modes{ProfileMode::Conventional, ProfileMode::Optical,
                                 ProfileMode::OpticalMicrowave};
  UwSeries uw_series = UwSeries::Both;
  ProfileMode fit_mode = ProfileMode::Optical;
};

// Values are held in engine units: cm^-1 for rqm energies, Hz, s, T, K, rad.
struct ScenarioConfig {
  Scenario scenario = Scenario::RqmRates;
  std::string preset;
  std::uint64_t seed = 1;
  std::optional<unsigned> workers;
  std::string output_dir;

  RqmParams rqm;
  PowderSettings powder;
  KineticsSettings kinetics;
  SpinSystemSpec spin;
  RelaxationSet relaxation;
  DriveConfig drive;
  BoxSettings box;
  SimSettings simulation;
  SweepAxes sweep;
};

// Document grammar: optional "[section]" headers, "key = values [unit]" lines,
// '#' comments. Top-level keys: scenario, preset, seed, workers, output_dir.
// A preset is applied first and the remaining keys override it. When
// `scenario` is given it fills in a document that lacks the scenario key.
ScenarioConfig parse_config(const std::string& text,
                            std::optional<Scenario> scenario = std::nullopt);
ScenarioConfig load_config(const std::filesystem::path& path,
                           std::optional<Scenario> scenario = std::nullopt);

// Every key with its unit, in a fixed order; parse_config inverts it exactly.
std::string serialize(const ScenarioConfig& c);

// FNV-1a of the serialized physics. Worker count and output directory are
// excluded so reruns on other machines share the hash.
std::uint64_t config_hash(const ScenarioConfig& c);
std::string config_hash_hex(const ScenarioConfig& c);

// Preset documents, written in the same grammar as user configs.
const std::vector<std::string>& preset_names();
const std::string& preset_document(const std::string& name);

BoxTemplate box_template(const ScenarioConfig& c);
std::vector<Orientation> powder(const ScenarioConfig& c);

struct Column {
  std::string name, unit;  // empty unit = dimensionless
  std::string header() const { return unit.empty() ? name : name + "_" + unit; }
};

struct SweepResult {
  std::string label_name;           // optional leading text column ("mode", "series", ...)
  std::vector<std::string> labels;  // one per row when label_name is set
  std::vector<Column> columns;
  std::vector<std::vector<double>> rows;
  nlohmann::json diagnostics = nlohmann::json::object();
  std::string provenance;  // run directory or manifest reference
};

std::vector<std::string> csv_header(const SweepResult& r);
std::string to_csv(const SweepResult& r);
// Column layout each scenario emits.
std::vector<std::string> expected_header(Scenario s);

// Problems found in a results.csv / diagnostics.json pair; empty when valid.
std::vector<std::string> validate_results(const std::string& csv_text,
                                          const nlohmann::json& diagnostics, Scenario s);

struct TaskRecord {
  std::string id;
  std::string status;  // "ok", "failed", "not-converged"
  bool converged = true;
  std::string message;
};

struct RunOutcome {
  SweepResult result;
  std::vector<TaskRecord> tasks;
  nlohmann::json manifest;
  std::filesystem::path run_dir;
  bool ok = true;
};

unsigned resolve_workers(const ScenarioConfig& c);
std::filesystem::path resolve_output_dir(const ScenarioConfig& c);

// Runs the scenario without touching the filesystem.
RunOutcome execute(const ScenarioConfig& c, unsigned workers);

// Creates a fresh run directory, writes manifest.json first, then results.csv
// and diagnostics.json, and finally the completed manifest.
RunOutcome run_scenario(const ScenarioConfig& c);

enum class PlotKind { Profile, Sweep, Trace };
std::string to_string(PlotKind k);
PlotKind parse_plot_kind(const std::string& name);

// One long-format file per series plus plot.json; returns the files written.
std::vector<std::filesystem::path> export_plot_data(const SweepResult& r, PlotKind kind,
                                                    const std::filesystem::path& dir);

}  // namespace opdnp::harness
