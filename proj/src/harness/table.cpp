#include "opdnp/harness.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace opdnp::harness {

std::vector<std::string> csv_header(const SweepResult& r) {
  std::vector<std::string> h;
  if (!r.label_name.empty()) h.push_back(r.label_name);
  for (const auto& c : r.columns) h.push_back(c.header());
  return h;
}

namespace {

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_cell(const std::string& s, double& v) {
  if (s == "nan") return v = std::nan(""), true;
  if (s == "inf") return v = HUGE_VAL, true;
  if (s == "-inf") return v = -HUGE_VAL, true;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

std::string to_csv(const SweepResult& r) {
  std::ostringstream out;
  const auto h = csv_header(r);
  for (std::size_t i = 0; i < h.size(); ++i) out << (i ? "," : "") << h[i];
  out << '\n';
  for (std::size_t k = 0; k < r.rows.size(); ++k) {
    bool first = true;
    if (!r.label_name.empty()) {
      out << r.labels.at(k);
      first = false;
    }
    for (double v : r.rows[k]) {
      out << (first ? "" : ",") << number(v);
      first = false;
    }
    out << '\n';
  }
  return out.str();
}

std::vector<std::string> expected_header(Scenario s) {
  switch (s) {
    case Scenario::RqmRates:
      return {"transition", "q_m", "d_m", "deltaE_cm-1", "element_sq_cm-2", "k_dq_s-1", "k_qd_s-1"};
    case Scenario::RqmKinetics:
      return {"t_s", "Qp32", "Qp12", "Qm12", "Qm32", "D1p", "D1m", "D0p", "D0m", "normalized_esp"};
    case Scenario::JScan: return {"J_cm-1", "R_D1", "k_dq_s-1", "P"};
    case Scenario::MasdnpRun:
      return {"scope", "epsilon_B", "mean_P_n", "periods", "converged", "max_dP_ab"};
    case Scenario::FieldProfile: return {"mode", "B0_T", "epsilon_B", "converged"};
    case Scenario::HpSweep: return {"series", "P_target", "epsilon_B", "converged"};
    case Scenario::FitBeff:
      return {"T_K", "B0_T", "epsilon_B", "fit_abs_epsilon_B", "converged"};
  }
  return {};
}

std::vector<std::string> validate_results(const std::string& csv_text,
                                          const nlohmann::json& diagnostics, Scenario s) {
  std::vector<std::string> problems;
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) return {"missing header row"};
  const auto header = split(line);
  const auto expect = expected_header(s);
  if (header != expect) problems.push_back("header '" + line + "' does not match the schema");
  const bool labelled = !expect.empty() && (expect[0] == "transition" || expect[0] == "scope" ||
                                            expect[0] == "mode" || expect[0] == "series");
  const nlohmann::json notes =
      diagnostics.contains("row_notes") ? diagnostics["row_notes"] : nlohmann::json::object();
  std::size_t row = 0;
  while (std::getline(in, line)) {
    const auto cells = split(line);
    const std::string where = "row " + std::to_string(row);
    if (cells.size() != expect.size()) {
      problems.push_back(where + ": " + std::to_string(cells.size()) + " cells, expected " +
                         std::to_string(expect.size()));
    } else {
      bool nonfinite = false;
      for (std::size_t i = labelled ? 1 : 0; i < cells.size(); ++i) {
        double v;
        if (!parse_cell(cells[i], v)) problems.push_back(where + ": '" + cells[i] + "' is not a number");
        else if (!std::isfinite(v)) nonfinite = true;
      }
      if (nonfinite && !notes.contains(std::to_string(row)))
        problems.push_back(where + ": non-finite value without a diagnostic entry");
    }
    ++row;
  }
  return problems;
}

}  // namespace opdnp::harness
