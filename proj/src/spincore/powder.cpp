#include "opdnp/errors.hpp"
#include "opdnp/spincore.hpp"
#include "opdnp/units.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace opdnp {

PowderScheme parse_powder_scheme(const std::string& name) {
  if (name == "golden-spiral") return PowderScheme::GoldenSpiral;
  if (name == "repulsion-file") return PowderScheme::RepulsionFile;
  if (name == "uniform-random") return PowderScheme::UniformRandom;
  throw InvalidArgument("unknown powder scheme '" + name +
                        "' (expected golden-spiral, repulsion-file or uniform-random)");
}

std::string to_string(PowderScheme s) {
  switch (s) {
    case PowderScheme::GoldenSpiral: return "golden-spiral";
    case PowderScheme::RepulsionFile: return "repulsion-file";
    case PowderScheme::UniformRandom: return "uniform-random";
  }
  return "?";
}

std::vector<Orientation> read_orientation_file(const std::string& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open orientation file " + path);
  std::vector<Orientation> grid;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double th, ph, w = 1.0;
    if (!(ls >> th >> ph)) continue;
    ls >> w;
    grid.push_back({units::deg(th), units::deg(ph), w});
    if (n && grid.size() == n) break;
  }
  if (grid.empty()) throw InvalidArgument("orientation file " + path + " has no entries");
  double total = 0;
  for (const auto& o : grid) total += o.weight;
  if (!(total > 0)) throw InvalidArgument("orientation file " + path + " has zero total weight");
  for (auto& o : grid) o.weight /= total;
  return grid;
}

std::vector<Orientation> powder_grid(PowderScheme scheme, std::size_t n, std::uint64_t seed,
                                     const std::string& path) {
  if (n == 0) throw InvalidArgument("powder_grid: n must be >= 1");
  std::vector<Orientation> grid;
  grid.reserve(n);
  const double w = 1.0 / static_cast<double>(n);
  switch (scheme) {
    case PowderScheme::GoldenSpiral: {
      if (n == 1) return {{0.0, 0.0, 1.0}};
      const double golden = units::pi * (1.0 + std::sqrt(5.0));
      for (std::size_t i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        grid.push_back({std::acos(z), std::fmod(golden * static_cast<double>(i), 2 * units::pi), w});
      }
      break;
    }
    case PowderScheme::UniformRandom: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * u(rng);
        grid.push_back({std::acos(z), 2 * units::pi * u(rng), w});
      }
      break;
    }
    case PowderScheme::RepulsionFile:
      if (path.empty()) throw InvalidArgument("powder_grid: repulsion-file scheme needs a file path");
      return read_orientation_file(path, n);
  }
  return grid;
}

}  // namespace opdnp
