// Command-line front end: one subcommand per scenario, physics in the config file.
#include "opdnp/errors.hpp"
#include "opdnp/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace opdnp;
using namespace opdnp::harness;

namespace {

struct Flags {
  std::string config;
  std::string out;
  unsigned workers = 0;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

int run(Scenario s, const Flags& f) {
  ScenarioConfig c;
  try {
    c = load_config(f.config, s);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  if (!f.out.empty()) c.output_dir = f.out;
  if (f.workers > 0) c.workers = f.workers;
  if (f.seed) c.seed = *f.seed;

  RunOutcome o;
  try {
    o = run_scenario(c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cout << o.run_dir.string() << '\n';
  if (f.verbose) {
    std::cerr << "scenario " << to_string(c.scenario) << ", config hash "
              << o.manifest["config_hash"].get<std::string>() << ", " << o.tasks.size()
              << " task(s), status " << o.manifest["status"].get<std::string>() << '\n';
    for (const auto& t : o.tasks)
      if (t.status != "ok")
        std::cerr << "  " << t.id << ": " << t.status
                  << (t.message.empty() ? "" : " (" + t.message + ")") << '\n';
  }
  return o.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optically pumped MAS-DNP simulation toolkit"};
  app.set_version_flag("--version", std::string(OPDNP_VERSION));
  app.require_subcommand(1);

  Flags flags;
  std::uint64_t seed = 0;
  std::optional<Scenario> chosen;
  for (Scenario s : all_scenarios()) {
    auto* sub = app.add_subcommand(to_string(s));
    sub->add_option("--config", flags.config, "scenario config file")->required()->check(
        CLI::ExistingFile);
    sub->add_option("--out", flags.out, "output directory (default $OPDNP_OUT or ./runs)");
    sub->add_option("--workers", flags.workers, "worker threads (default $OPDNP_WORKERS or cores)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_flag("--verbose", flags.verbose, "report task status on stderr");
    sub->callback([&chosen, s] { chosen = s; });
  }
  CLI11_PARSE(app, argc, argv);
  for (auto* sub : app.get_subcommands())
    if (sub->count("--seed")) flags.seed = seed;
  return run(*chosen, flags);
}
