#include "opdnp/errors.hpp"
#include "opdnp/harness.hpp"
#include "opdnp/units.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace opdnp::harness {

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::RqmRates: return "rqm-rates";
    case Scenario::RqmKinetics: return "rqm-kinetics";
    case Scenario::JScan: return "j-scan";
    case Scenario::MasdnpRun: return "masdnp-run";
    case Scenario::FieldProfile: return "field-profile";
    case Scenario::HpSweep: return "hp-sweep";
    case Scenario::FitBeff: return "fit-beff";
  }
  return "?";
}

const std::vector<Scenario>& all_scenarios() {
  static const std::vector<Scenario> v{Scenario::RqmRates,     Scenario::RqmKinetics,
                                       Scenario::JScan,        Scenario::MasdnpRun,
                                       Scenario::FieldProfile, Scenario::HpSweep,
                                       Scenario::FitBeff};
  return v;
}

namespace {

std::string scenario_list() {
  std::string s;
  for (auto sc : all_scenarios()) s += (s.empty() ? "" : ", ") + to_string(sc);
  return s;
}

}  // namespace

Scenario parse_scenario(const std::string& name) {
  for (auto s : all_scenarios())
    if (to_string(s) == name) return s;
  throw ConfigError("scenario: unknown value '" + name + "' (expected one of " + scenario_list() +
                    ")");
}

namespace {

enum class Dim {
  None, Count, Flag, Text,
  Frequency, Wavenumber, Time, Rate, Field, Temperature, MolarEnergy, Angle, Concentration, Length
};

struct UnitInfo {
  std::string canonical;
  std::vector<std::pair<std::string, double>> accepted;  // name -> factor to canonical
};

const UnitInfo* unit_info(Dim d) {
  static const std::map<Dim, UnitInfo> table{
      {Dim::Frequency, {"Hz", {{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}}}},
      {Dim::Wavenumber, {"cm-1", {{"cm-1", 1.0}}}},
      {Dim::Time, {"s", {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}, {"ps", 1e-12}}}},
      {Dim::Rate, {"s-1", {{"s-1", 1.0}, {"1/s", 1.0}}}},
      {Dim::Field, {"T", {{"T", 1.0}, {"mT", 1e-3}}}},
      {Dim::Temperature, {"K", {{"K", 1.0}}}},
      {Dim::MolarEnergy, {"kJ/mol", {{"kJ/mol", 1.0}, {"J/mol", 1e-3}}}},
      {Dim::Angle, {"rad", {{"rad", 1.0}, {"deg", units::pi / 180.0}}}},
      {Dim::Concentration, {"mM", {{"mM", 1.0}, {"M", 1e3}}}},
      {Dim::Length, {"nm", {{"nm", 1.0}, {"A", 0.1}}}},
  };
  auto it = table.find(d);
  return it == table.end() ? nullptr : &it->second;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

struct Value {
  std::vector<double> num;
  std::vector<std::string> text;
};

using Setter = std::function<void(ScenarioConfig&, const Value&)>;
// Returns tokens (numbers already formatted, unit excluded); nullopt omits the key.
using Getter = std::function<std::vector<std::string>(const ScenarioConfig&)>;
using Check = std::function<bool(double)>;

struct Key {
  std::string section, name;
  Dim dim;
  int arity;  // -1 = list of any length
  Setter set;
  Getter get;
  Check check;  // applied to every converted number
  std::string range;
  bool optional = false;  // accepts "none"
  std::string qualified() const {
    return section.empty() ? name : "[" + section + "] " + name;
  }
};

template <typename Acc>
Key scalar(std::string sec, std::string name, Dim d, Acc acc, Check check, std::string range) {
  return {sec, name, d, 1,
          [acc](ScenarioConfig& c, const Value& v) { acc(c) = v.num[0]; },
          [acc](const ScenarioConfig& c) {
            return std::vector<std::string>{fmt(acc(const_cast<ScenarioConfig&>(c)))};
          },
          check, range};
}

template <typename Acc>
Key optional_scalar(std::string sec, std::string name, Dim d, Acc acc, Check check,
                    std::string range) {
  Key k{sec, name, d, 1,
        [acc](ScenarioConfig& c, const Value& v) {
          if (v.num.empty()) acc(c).reset();
          else acc(c) = v.num[0];
        },
        [acc](const ScenarioConfig& c) {
          const auto& o = acc(const_cast<ScenarioConfig&>(c));
          return o ? std::vector<std::string>{fmt(*o)} : std::vector<std::string>{"none"};
        },
        check, range};
  k.optional = true;
  return k;
}

template <typename Acc>
Key fixed(std::string sec, std::string name, Dim d, int n, Acc acc, Check check,
          std::string range) {
  return {sec, name, d, n,
          [acc, n](ScenarioConfig& c, const Value& v) {
            for (int i = 0; i < n; ++i) acc(c, i) = v.num[i];
          },
          [acc, n](const ScenarioConfig& c) {
            std::vector<std::string> out;
            for (int i = 0; i < n; ++i) out.push_back(fmt(acc(const_cast<ScenarioConfig&>(c), i)));
            return out;
          },
          check, range};
}

template <typename Acc>
Key list(std::string sec, std::string name, Dim d, Acc acc, Check check, std::string range) {
  return {sec, name, d, -1,
          [acc](ScenarioConfig& c, const Value& v) { acc(c) = v.num; },
          [acc](const ScenarioConfig& c) {
            std::vector<std::string> out;
            for (double x : acc(const_cast<ScenarioConfig&>(c))) out.push_back(fmt(x));
            return out;
          },
          check, range};
}

template <typename T, typename Acc>
Key count(std::string sec, std::string name, Acc acc, std::uint64_t lo, std::uint64_t hi) {
  const std::string range = "integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
  const std::string q = sec.empty() ? name : "[" + sec + "] " + name;
  return {sec, name, Dim::Count, 1,
          [acc, lo, hi, range, q](ScenarioConfig& c, const Value& v) {
            const std::string& s = v.text[0];
            std::uint64_t x = 0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
            if (ec != std::errc() || p != s.data() + s.size() || x < lo || x > hi)
              throw ConfigError(q + ": value '" + s + "' out of range (expected " + range + ")");
            acc(c) = static_cast<T>(x);
          },
          [acc](const ScenarioConfig& c) {
            return std::vector<std::string>{
                std::to_string(static_cast<std::uint64_t>(acc(const_cast<ScenarioConfig&>(c))))};
          },
          nullptr, range};
}

Key flag(std::string sec, std::string name, std::function<bool&(ScenarioConfig&)> acc) {
  const std::string q = "[" + sec + "] " + name;
  return {sec, name, Dim::Flag, 1,
          [acc, q](ScenarioConfig& c, const Value& v) {
            const std::string& s = v.text[0];
            if (s == "true" || s == "yes" || s == "on") acc(c) = true;
            else if (s == "false" || s == "no" || s == "off") acc(c) = false;
            else throw ConfigError(q + ": expected true or false, got '" + s + "'");
          },
          [acc](const ScenarioConfig& c) {
            return std::vector<std::string>{acc(const_cast<ScenarioConfig&>(c)) ? "true" : "false"};
          },
          nullptr, "true or false"};
}

Key text(std::string sec, std::string name, int arity, Setter set, Getter get, std::string range) {
  return {sec, name, Dim::Text, arity, std::move(set), std::move(get), nullptr, std::move(range)};
}

const Check any = [](double x) { return std::isfinite(x); };
const Check positive = [](double x) { return std::isfinite(x) && x > 0; };
const Check nonneg = [](double x) { return std::isfinite(x) && x >= 0; };
const Check nonpos = [](double x) { return std::isfinite(x) && x <= 0; };
const Check unit_interval = [](double x) { return std::isfinite(x) && x >= -1 && x <= 1; };
const Check g_range = [](double x) { return x > 1.9 && x < 2.1; };

std::string mode_name(ProfileMode m) { return to_string(m); }

ProfileMode parse_mode(const std::string& s, const std::string& q) {
  for (auto m : {ProfileMode::Conventional, ProfileMode::Optical, ProfileMode::OpticalMicrowave})
    if (to_string(m) == s) return m;
  throw ConfigError(q + ": unknown mode '" + s + "' (expected conventional, optical or optical+uw)");
}

const std::vector<Key>& registry() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    using C = ScenarioConfig;
    // top level
    k.push_back(text("", "scenario", 1,
                     [](C& c, const Value& v) { c.scenario = parse_scenario(v.text[0]); },
                     [](const C& c) { return std::vector<std::string>{to_string(c.scenario)}; },
                     scenario_list()));
    k.push_back(text("", "preset", 1,
                     [](C& c, const Value& v) {
                       preset_document(v.text[0]);  // throws for unknown names
                       c.preset = v.text[0];
                     },
                     [](const C& c) {
                       return c.preset.empty() ? std::vector<std::string>{}
                                               : std::vector<std::string>{c.preset};
                     },
                     "trityl-tempo, amupol, ancoot-soisc, ancoot-rqm"));
    k.push_back(count<std::uint64_t>("", "seed", [](C& c) -> std::uint64_t& { return c.seed; }, 0,
                                     UINT64_MAX));
    k.push_back(text(
        "", "workers", 1,
        [](C& c, const Value& v) {
          unsigned x = 0;
          const auto& s = v.text[0];
          auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
          if (ec != std::errc() || p != s.data() + s.size() || x == 0 || x > 4096)
            throw ConfigError("workers: value '" + s + "' out of range (expected 1..4096)");
          c.workers = x;
        },
        [](const C& c) {
          return c.workers ? std::vector<std::string>{std::to_string(*c.workers)}
                           : std::vector<std::string>{};
        },
        "integer in [1, 4096]"));
    k.push_back(text("", "output_dir", -1,
                     [](C& c, const Value& v) {
                       std::string s;
                       for (const auto& t : v.text) s += (s.empty() ? "" : " ") + t;
                       c.output_dir = s;
                     },
                     [](const C& c) {
                       return c.output_dir.empty() ? std::vector<std::string>{}
                                                   : std::vector<std::string>{c.output_dir};
                     },
                     "path"));

    // [rqm]
    const std::string R = "rqm";
    k.push_back(scalar(R, "J_CR", Dim::Wavenumber, [](C& c) -> double& { return c.rqm.J_CR; },
                       any, "finite"));
    k.push_back(scalar(R, "D_zfs", Dim::Wavenumber, [](C& c) -> double& { return c.rqm.D_zfs; },
                       any, "finite"));
    k.push_back(scalar(R, "E_zfs", Dim::Wavenumber, [](C& c) -> double& { return c.rqm.E_zfs; },
                       any, "finite"));
    k.push_back(scalar(R, "k0_DQ", Dim::Rate, [](C& c) -> double& { return c.rqm.k0_DQ; },
                       nonneg, ">= 0"));
    k.push_back(scalar(R, "E_a", Dim::MolarEnergy, [](C& c) -> double& { return c.rqm.E_a; },
                       nonneg, ">= 0"));
    k.push_back(scalar(R, "temperature", Dim::Temperature,
                       [](C& c) -> double& { return c.rqm.temperature; }, positive, "> 0"));
    k.push_back(scalar(R, "field_frequency", Dim::Frequency,
                       [](C& c) -> double& { return c.rqm.field_frequency; }, positive, "> 0"));
    k.push_back(scalar(R, "k_qt", Dim::Rate, [](C& c) -> double& { return c.rqm.k_qt; }, nonneg,
                       ">= 0"));
    k.push_back(scalar(R, "k_Q0", Dim::Rate, [](C& c) -> double& { return c.rqm.k_Q0; }, nonneg,
                       ">= 0"));
    k.push_back(scalar(R, "W_Q1", Dim::Rate, [](C& c) -> double& { return c.rqm.W_Q1; }, nonneg,
                       ">= 0"));
    k.push_back(scalar(R, "W_D1", Dim::Rate, [](C& c) -> double& { return c.rqm.W_D1; }, nonneg,
                       ">= 0"));
    k.push_back(scalar(R, "W_D0", Dim::Rate, [](C& c) -> double& { return c.rqm.W_D0; }, nonneg,
                       ">= 0"));
    k.push_back(fixed(R, "initial_populations", Dim::None, 8,
                      [](C& c, int i) -> double& { return c.rqm.initial_populations[i]; }, nonneg,
                      ">= 0"));
    k.push_back(flag(R, "detailed_balance_qd",
                     [](C& c) -> bool& { return c.rqm.detailed_balance_qd; }));
    k.push_back(scalar(R, "deltaE_floor", Dim::Wavenumber,
                       [](C& c) -> double& { return c.rqm.deltaE_floor; }, nonneg, ">= 0"));
    k.push_back(text(
        R, "averaging", 1,
        [](C& c, const Value& v) {
          if (v.text[0] == "mean-of-square") c.rqm.averaging = ZfsAveraging::MeanOfSquare;
          else if (v.text[0] == "square-of-mean") c.rqm.averaging = ZfsAveraging::SquareOfMean;
          else
            throw ConfigError("[rqm] averaging: unknown value '" + v.text[0] +
                              "' (expected mean-of-square or square-of-mean)");
        },
        [](const C& c) {
          return std::vector<std::string>{c.rqm.averaging == ZfsAveraging::MeanOfSquare
                                              ? "mean-of-square"
                                              : "square-of-mean"};
        },
        "mean-of-square or square-of-mean"));

    // [powder]
    const std::string P = "powder";
    k.push_back(text(
        P, "scheme", 1, [](C& c, const Value& v) { c.powder.scheme = parse_powder_scheme(v.text[0]); },
        [](const C& c) { return std::vector<std::string>{to_string(c.powder.scheme)}; },
        "golden-spiral, repulsion-file or uniform-random"));
    k.push_back(count<std::size_t>(P, "n", [](C& c) -> std::size_t& { return c.powder.n; }, 1,
                                   10000000));
    k.push_back(count<std::uint64_t>(P, "seed", [](C& c) -> std::uint64_t& { return c.powder.seed; },
                                     0, UINT64_MAX));
    k.push_back(text(P, "file", -1,
                     [](C& c, const Value& v) {
                       std::string s;
                       for (const auto& t : v.text) s += (s.empty() ? "" : " ") + t;
                       c.powder.file = s;
                     },
                     [](const C& c) {
                       return c.powder.file.empty() ? std::vector<std::string>{}
                                                    : std::vector<std::string>{c.powder.file};
                     },
                     "path"));

    // [kinetics]
    const std::string K = "kinetics";
    k.push_back(text(
        K, "method", 1,
        [](C& c, const Value& v) { c.kinetics.method = parse_kinetics_method(v.text[0]); },
        [](const C& c) { return std::vector<std::string>{to_string(c.kinetics.method)}; },
        "matrix-exponential or rk4-fixed-step"));
    k.push_back(scalar(K, "t_stop", Dim::Time, [](C& c) -> double& { return c.kinetics.t_stop; },
                       positive, "> 0"));
    k.push_back(count<std::size_t>(K, "t_count", [](C& c) -> std::size_t& { return c.kinetics.t_count; },
                                   2, 10000000));
    k.push_back(scalar(K, "irf_time", Dim::Time,
                       [](C& c) -> double& { return c.kinetics.irf_time; }, nonneg, ">= 0"));
    k.push_back(optional_scalar(
        K, "P_eq", Dim::None, [](C& c) -> std::optional<double>& { return c.kinetics.P_eq; },
        [](double x) { return std::isfinite(x) && x != 0 && x >= -1 && x <= 1; },
        "nonzero, in [-1, 1]"));

    // [spin]
    const std::string S = "spin";
    k.push_back(fixed(S, "g_a", Dim::None, 3, [](C& c, int i) -> double& { return c.spin.g_a[i]; },
                      g_range, "in (1.9, 2.1)"));
    k.push_back(fixed(S, "g_b", Dim::None, 3, [](C& c, int i) -> double& { return c.spin.g_b[i]; },
                      g_range, "in (1.9, 2.1)"));
    k.push_back(fixed(S, "euler_ab", Dim::Angle, 3,
                      [](C& c, int i) -> double& {
                        return i == 0 ? c.spin.euler_ab.alpha
                                      : i == 1 ? c.spin.euler_ab.beta : c.spin.euler_ab.gamma;
                      },
                      any, "finite"));
    k.push_back(scalar(S, "D_ab", Dim::Frequency, [](C& c) -> double& { return c.spin.D_ab; }, any,
                       "finite"));
    k.push_back(fixed(S, "dipolar_angles", Dim::Angle, 2,
                      [](C& c, int i) -> double& {
                        return i == 0 ? c.spin.dipolar_theta : c.spin.dipolar_phi;
                      },
                      any, "finite"));
    k.push_back(scalar(S, "J_ab", Dim::Frequency, [](C& c) -> double& { return c.spin.J_ab; }, any,
                       "finite"));
    k.push_back(scalar(S, "A_hf", Dim::Frequency, [](C& c) -> double& { return c.spin.A_hf; }, any,
                       "finite"));
    k.push_back(fixed(S, "hf_angles", Dim::Angle, 2,
                      [](C& c, int i) -> double& { return i == 0 ? c.spin.hf_theta : c.spin.hf_phi; },
                      any, "finite"));

    // [relaxation]
    const std::string X = "relaxation";
    k.push_back(scalar(X, "T1_eff", Dim::Time,
                       [](C& c) -> double& { return c.relaxation.T1e_a_eff; }, positive, "> 0"));
    k.push_back(scalar(X, "T1e_a", Dim::Time, [](C& c) -> double& { return c.relaxation.T1e_a; },
                       positive, "> 0"));
    k.push_back(scalar(X, "T1e_b", Dim::Time, [](C& c) -> double& { return c.relaxation.T1e_b; },
                       positive, "> 0"));
    k.push_back(scalar(X, "T2e", Dim::Time, [](C& c) -> double& { return c.relaxation.T2e; },
                       positive, "> 0"));
    k.push_back(scalar(X, "T1n", Dim::Time, [](C& c) -> double& { return c.relaxation.T1n; },
                       positive, "> 0"));

    // [drive]
    const std::string D = "drive";
    k.push_back(scalar(D, "uw_frequency", Dim::Frequency,
                       [](C& c) -> double& { return c.drive.uw_frequency; }, positive, "> 0"));
    k.push_back(scalar(D, "uw_nutation", Dim::Frequency,
                       [](C& c) -> double& { return c.drive.uw_nutation; }, nonneg, ">= 0"));
    k.push_back(optional_scalar(
        D, "optical_target", Dim::None,
        [](C& c) -> std::optional<double>& { return c.drive.optical_target; }, unit_interval,
        "in [-1, 1]"));
    k.push_back(scalar(D, "B0", Dim::Field, [](C& c) -> double& { return c.drive.B0; }, positive,
                       "> 0"));
    k.push_back(scalar(D, "temperature", Dim::Temperature,
                       [](C& c) -> double& { return c.drive.temperature; }, positive, "> 0"));
    k.push_back(scalar(D, "mas_rate", Dim::Frequency,
                       [](C& c) -> double& { return c.drive.mas_rate; }, positive, "> 0"));

    // [box]
    const std::string B = "box";
    k.push_back(count<std::size_t>(B, "n_units", [](C& c) -> std::size_t& { return c.box.n_units; },
                                   1, 100000));
    k.push_back(count<std::size_t>(B, "n_replicas",
                                   [](C& c) -> std::size_t& { return c.box.n_replicas; }, 1, 100000));
    k.push_back(scalar(B, "concentration", Dim::Concentration,
                       [](C& c) -> double& { return c.box.concentration_mM; }, positive, "> 0"));
    k.push_back(scalar(B, "min_distance", Dim::Length,
                       [](C& c) -> double& { return c.box.min_distance_nm; }, nonneg, ">= 0"));

    // [simulation]
    const std::string M = "simulation";
    k.push_back(count<int>(M, "max_rotor_periods",
                           [](C& c) -> int& { return c.simulation.max_rotor_periods; }, 1,
                           100000000));
    k.push_back(scalar(M, "convergence_tol", Dim::None,
                       [](C& c) -> double& { return c.simulation.convergence_tol; }, positive,
                       "> 0"));
    k.push_back(count<int>(M, "convergence_window",
                           [](C& c) -> int& { return c.simulation.convergence_window; }, 1, 1000000));
    k.push_back(count<int>(M, "samples_per_period",
                           [](C& c) -> int& { return c.simulation.events.samples_per_period; }, 512,
                           10000000));
    k.push_back(count<int>(M, "relaxation_segments",
                           [](C& c) -> int& { return c.simulation.events.relaxation_segments; }, 1,
                           10000000));
    k.push_back(scalar(M, "uw_scale", Dim::None,
                       [](C& c) -> double& { return c.simulation.events.uw_scale; }, nonneg,
                       ">= 0"));
    k.push_back(scalar(M, "dj_scale", Dim::None,
                       [](C& c) -> double& { return c.simulation.events.dj_scale; }, nonneg,
                       ">= 0"));
    k.push_back(scalar(M, "ce_scale", Dim::None,
                       [](C& c) -> double& { return c.simulation.events.ce_scale; }, nonneg,
                       ">= 0"));
    k.push_back(scalar(M, "inter_cutoff", Dim::Frequency,
                       [](C& c) -> double& { return c.simulation.events.inter_cutoff; }, nonneg,
                       ">= 0"));
    k.push_back(flag(M, "inter_unit_events",
                     [](C& c) -> bool& { return c.simulation.events.inter_unit_events; }));
    k.push_back(flag(M, "ce_secular_dipolar",
                     [](C& c) -> bool& { return c.simulation.events.ce_secular_dipolar; }));

    // [sweep]
    const std::string W = "sweep";
    k.push_back(list(W, "J_values", Dim::Wavenumber, [](C& c) -> auto& { return c.sweep.J_values; },
                     nonpos, "<= 0"));
    k.push_back(list(W, "B0_values", Dim::Field, [](C& c) -> auto& { return c.sweep.B0_values; },
                     positive, "> 0"));
    k.push_back(list(W, "P_targets", Dim::None, [](C& c) -> auto& { return c.sweep.P_targets; },
                     unit_interval, "in [-1, 1]"));
    k.push_back(list(W, "temperatures", Dim::Temperature,
                     [](C& c) -> auto& { return c.sweep.temperatures; }, positive, "> 0"));
    k.push_back(text(
        W, "modes", -1,
        [](C& c, const Value& v) {
          c.sweep.modes.clear();
          for (const auto& t : v.text) c.sweep.modes.push_back(parse_mode(t, "[sweep] modes"));
        },
        [](const C& c) {
          std::vector<std::string> out;
          for (auto m : c.sweep.modes) out.push_back(mode_name(m));
          return out;
        },
        "conventional, optical, optical+uw"));
    k.push_back(text(
        W, "uw_series", 1,
        [](C& c, const Value& v) {
          const auto& s = v.text[0];
          if (s == "without") c.sweep.uw_series = UwSeries::Without;
          else if (s == "with") c.sweep.uw_series = UwSeries::With;
          else if (s == "both") c.sweep.uw_series = UwSeries::Both;
          else
            throw ConfigError("[sweep] uw_series: unknown value '" + s +
                              "' (expected without, with or both)");
        },
        [](const C& c) {
          const char* s = c.sweep.uw_series == UwSeries::Without ? "without"
                          : c.sweep.uw_series == UwSeries::With  ? "with"
                                                                  : "both";
          return std::vector<std::string>{s};
        },
        "without, with or both"));
    k.push_back(text(
        W, "fit_mode", 1,
        [](C& c, const Value& v) { c.sweep.fit_mode = parse_mode(v.text[0], "[sweep] fit_mode"); },
        [](const C& c) { return std::vector<std::string>{mode_name(c.sweep.fit_mode)}; },
        "conventional, optical, optical+uw"));
    return k;
  }();
  return keys;
}

const Key* find_key(const std::string& section, const std::string& name) {
  for (const auto& k : registry())
    if (k.section == section && k.name == name) return &k;
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

struct Entry {
  const Key* key;
  std::vector<std::string> tokens;
  int line;
};

std::vector<Entry> read_entries(const std::string& text, const std::string& origin) {
  std::vector<Entry> out;
  std::set<std::pair<std::string, std::string>> seen;
  std::string section;
  std::istringstream in(text);
  int lineno = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = origin + " line " + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      static const std::set<std::string> sections{"rqm",   "powder",     "kinetics", "spin",
                                                  "relaxation", "drive", "box",
                                                  "simulation", "sweep"};
      if (!sections.count(section)) throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string name = trim(line.substr(0, eq));
    const Key* k = find_key(section, name);
    if (!k)
      throw ConfigError(where + ": unknown key " +
                        (section.empty() ? name : "[" + section + "] " + name));
    if (!seen.insert({section, name}).second)
      throw ConfigError(where + ": duplicate key " + k->qualified());
    out.push_back({k, tokens(line.substr(eq + 1)), lineno});
  }
  return out;
}

Value convert(const Key& k, std::vector<std::string> toks) {
  Value v;
  const std::string q = k.qualified();
  if (k.dim == Dim::Text || k.dim == Dim::Count || k.dim == Dim::Flag) {
    if (k.arity == 1 && toks.size() != 1)
      throw ConfigError(q + ": expected a single value (" + k.range + ")");
    v.text = std::move(toks);
    return v;
  }
  if (k.optional && toks.size() == 1 && toks[0] == "none") return v;
  const UnitInfo* ui = unit_info(k.dim);
  double factor = 1.0;
  if (ui) {
    if (toks.empty()) {
      if (k.arity == -1) return v;
      throw ConfigError(q + ": missing value and unit (" + ui->canonical + ")");
    }
    double dummy;
    std::string accepted;
    for (const auto& [name, f] : ui->accepted) accepted += (accepted.empty() ? "" : ", ") + name;
    if (parse_double(toks.back(), dummy))
      throw ConfigError(q + ": missing unit (expected one of " + accepted + ")");
    bool found = false;
    for (const auto& [name, f] : ui->accepted)
      if (name == toks.back()) {
        factor = f;
        found = true;
      }
    if (!found)
      throw ConfigError(q + ": unknown unit '" + toks.back() + "' (expected one of " + accepted +
                        ")");
    toks.pop_back();
  }
  if (k.arity >= 0 && static_cast<int>(toks.size()) != k.arity)
    throw ConfigError(q + ": expected " + std::to_string(k.arity) + " value(s), got " +
                      std::to_string(toks.size()));
  for (const auto& t : toks) {
    double x;
    if (!parse_double(t, x)) throw ConfigError(q + ": '" + t + "' is not a number");
    x *= factor;
    if (k.check && !k.check(x))
      throw ConfigError(q + ": value " + t + " out of range (expected " + k.range +
                        (ui ? " " + ui->canonical : std::string()) + ")");
    v.num.push_back(x);
  }
  return v;
}

void apply_entries(ScenarioConfig& c, const std::vector<Entry>& entries) {
  for (const auto& e : entries) e.key->set(c, convert(*e.key, e.tokens));
}

void check_requirements(const ScenarioConfig& c) {
  std::vector<std::string> missing;
  switch (c.scenario) {
    case Scenario::JScan:
      if (c.sweep.J_values.empty()) missing.push_back("[sweep] J_values");
      break;
    case Scenario::FieldProfile:
      if (c.sweep.B0_values.empty()) missing.push_back("[sweep] B0_values");
      if (c.sweep.modes.empty()) missing.push_back("[sweep] modes");
      break;
    case Scenario::HpSweep:
      if (c.sweep.P_targets.empty()) missing.push_back("[sweep] P_targets");
      break;
    case Scenario::FitBeff:
      if (c.sweep.B0_values.size() < 3) missing.push_back("[sweep] B0_values (at least 3 fields)");
      break;
    default: break;
  }
  if (c.powder.scheme == PowderScheme::RepulsionFile && c.powder.file.empty())
    missing.push_back("[powder] file (required by repulsion-file)");
  if (!missing.empty()) {
    std::string s;
    for (const auto& m : missing) s += (s.empty() ? "" : ", ") + m;
    throw ConfigError("missing required key(s) for " + to_string(c.scenario) + ": " + s);
  }
}

}  // namespace

ScenarioConfig parse_config(const std::string& text, std::optional<Scenario> scenario) {
  const auto entries = read_entries(text, "config");
  ScenarioConfig c;
  const Entry* scen = nullptr;
  const Entry* preset = nullptr;
  for (const auto& e : entries) {
    if (!e.key->section.empty()) continue;
    if (e.key->name == "scenario") scen = &e;
    if (e.key->name == "preset") preset = &e;
  }
  if (preset) {
    if (preset->tokens.size() != 1) throw ConfigError("preset: expected a single name");
    const std::string& name = preset->tokens[0];
    apply_entries(c, read_entries(preset_document(name), "preset " + name));
  }
  if (!scen && !scenario)
    throw ConfigError("missing required key(s): scenario (one of " + scenario_list() + ")");
  apply_entries(c, entries);
  if (scenario) {
    if (scen && c.scenario != *scenario)
      throw ConfigError("scenario: config names " + to_string(c.scenario) +
                        " but the command requested " + to_string(*scenario));
    c.scenario = *scenario;
  }
  check_requirements(c);
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path, std::optional<Scenario> scenario) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), scenario);
}

std::string serialize(const ScenarioConfig& c) {
  std::ostringstream out;
  std::string section = "\x01";
  for (const auto& k : registry()) {
    if (k.section != section) {
      if (k.section.empty()) {
        section = "";
      } else {
        section = k.section;
        out << "\n[" << section << "]\n";
      }
    }
    const auto toks = k.get(c);
    if (k.section.empty() && toks.empty()) continue;
    out << k.name << " =";
    for (const auto& t : toks) out << ' ' << t;
    if (const UnitInfo* ui = unit_info(k.dim); ui && !(toks.size() == 1 && toks[0] == "none"))
      out << ' ' << ui->canonical;
    out << '\n';
  }
  return out.str();
}

std::uint64_t config_hash(const ScenarioConfig& c) {
  ScenarioConfig h = c;
  h.workers.reset();
  h.output_dir.clear();
  const std::string s = serialize(h);
  std::uint64_t x = 1469598103934665603ull;
  for (unsigned char ch : s) {
    x ^= ch;
    x *= 1099511628211ull;
  }
  return x;
}

std::string config_hash_hex(const ScenarioConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(c)));
  return buf;
}

}  // namespace opdnp::harness
