#include "opdnp/errors.hpp"
#include "opdnp/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace opdnp::harness {

std::string to_string(PlotKind k) {
  switch (k) {
    case PlotKind::Profile: return "profile";
    case PlotKind::Sweep: return "sweep";
    case PlotKind::Trace: return "trace";
  }
  return "?";
}

PlotKind parse_plot_kind(const std::string& name) {
  for (auto k : {PlotKind::Profile, PlotKind::Sweep, PlotKind::Trace})
    if (to_string(k) == name) return k;
  throw InvalidArgument("unknown plot kind '" + name + "' (expected profile, sweep or trace)");
}

namespace {

struct Layout {
  std::string label;  // series column, empty for a single series
  std::vector<std::string> series;
  std::string x, y;   // headers
  std::string x_label, y_label, x_unit, y_unit;
};

Layout layout(PlotKind k) {
  switch (k) {
    case PlotKind::Profile:
      return {"mode", {"conventional", "optical", "optical+uw"}, "B0_T", "epsilon_B",
              "magnetic field B0", "nuclear polarization gain", "T", ""};
    case PlotKind::Sweep:
      return {"series", {"without-uw", "with-uw"}, "P_target", "epsilon_B",
              "target polarization of electron a", "nuclear polarization gain", "", ""};
    case PlotKind::Trace:
      return {"", {"trace"}, "t_s", "normalized_esp", "time", "normalized D0 polarization",
              "s", ""};
  }
  return {};
}

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string file_stem(const std::string& series) {
  std::string s = series;
  std::replace(s.begin(), s.end(), '+', '-');
  return s;
}

}  // namespace

std::vector<std::filesystem::path> export_plot_data(const SweepResult& r, PlotKind kind,
                                                    const std::filesystem::path& dir) {
  const Layout L = layout(kind);
  const auto header = csv_header(r);
  std::vector<std::string> missing;
  auto col = [&](const std::string& h) -> long {
    for (std::size_t i = 0; i < r.columns.size(); ++i)
      if (r.columns[i].header() == h) return static_cast<long>(i);
    missing.push_back(h);
    return -1;
  };
  const long xi = col(L.x), yi = col(L.y);
  if (!L.label.empty() && r.label_name != L.label) missing.push_back(L.label);
  if (!missing.empty()) {
    std::string s;
    for (const auto& m : missing) s += (s.empty() ? "" : ", ") + m;
    throw InvalidArgument("export_plot_data(" + to_string(kind) + "): missing column(s) " + s);
  }

  std::vector<std::string> series = L.series;
  for (const auto& l : r.labels)
    if (!L.label.empty() && std::find(series.begin(), series.end(), l) == series.end())
      series.push_back(l);

  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  nlohmann::json files = nlohmann::json::array();
  for (const auto& s : series) {
    const auto path = dir / (to_string(kind) + "_" + file_stem(s) + ".csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "series," << L.x << ',' << L.y << '\n';
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < r.rows.size(); ++k)
      if (L.label.empty() || r.labels[k] == s) pts.emplace_back(r.rows[k][xi], r.rows[k][yi]);
    if (kind == PlotKind::Trace)
      std::stable_sort(pts.begin(), pts.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [x, y] : pts) out << s << ',' << number(x) << ',' << number(y) << '\n';
    written.push_back(path);
    files.push_back({{"series", s}, {"file", path.filename().string()}});
  }

  nlohmann::json meta;
  meta["kind"] = to_string(kind);
  meta["x"] = {{"column", L.x}, {"label", L.x_label}, {"unit", L.x_unit}};
  meta["y"] = {{"column", L.y}, {"label", L.y_label}, {"unit", L.y_unit}};
  meta["series"] = files;
  meta["source"] = r.provenance;
  if (kind != PlotKind::Trace)
    meta["sign_convention"] =
        "epsilon_B is the signed ratio P_n / P_n_eq; plots of -epsilon_B versus B0 are a "
        "presentation choice only";
  const auto side = dir / (to_string(kind) + ".json");
  std::ofstream(side) << meta.dump(2) << '\n';
  written.push_back(side);
  return written;
}

}  // namespace opdnp::harness
