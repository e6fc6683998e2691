// choquard: batch front end.
//
//   choquard <solve|sweep|verify-critical|multibump|constants> [--config FILE]
//            [--N n] [--q q] [--alpha a] [--gamma g] [--mu m] [--c c] [--M m] [--L l]
//            [--seed s] [--set section.key=value ...] [--out DIR] [--format csv|json|both]
//
// Exit status: 0 success, 2 non-convergence, 3 configuration error.
#include <CLI11.hpp>

#include <iostream>
#include <utility>

#include "commands.hpp"
#include "run_config.hpp"

int main(int argc, char** argv) {
  using namespace choquard::cli;

  CLI::App app{"Normalized solutions of a Choquard equation with a local perturbation"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> assignments;
  std::map<std::string, std::string> flags;
  const std::vector<std::pair<std::string, std::string>> flag_keys = {
      {"N", "problem.N"},   {"q", "problem.q"},   {"alpha", "problem.alpha"}, {"gamma", "problem.gamma"},
      {"mu", "problem.mu"}, {"c", "problem.c"},   {"M", "grid.M"},           {"L", "grid.L"},
      {"seed", "solver.seed"}, {"out", "output.dir"}, {"format", "output.format"}};

  app.add_option("--config", config_path, "Sectioned key-value config file");
  app.add_option("--set", assignments, "Override a config key: section.key=value");
  for (const auto& [flag, key] : flag_keys) app.add_option("--" + flag, flags[key], "Sets " + key);

  const std::pair<const char*, const char*> subcommands[] = {
      {"solve", "Minimize the energy on the mass sphere"},
      {"sweep", "Classify and solve over a (mu, c) lattice"},
      {"verify-critical", "Check the critical-exponent thresholds at q = 2 + 4/N"},
      {"multibump", "Basin-constrained solutions for a potential with several maxima"},
      {"constants", "Print the sharp constants"}};
  for (const auto& [name, help] : subcommands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    const Subcommand sub = parse_subcommand(app.get_subcommands().front()->get_name());
    RawConfig raw = config_path.empty() ? RawConfig{} : read_raw_file(config_path);
    for (const auto& a : assignments) apply_assignment(raw, a);
    for (const auto& [flag, key] : flag_keys)
      if (app.count("--" + flag) > 0) apply_assignment(raw, key + "=" + flags[key]);
    const RunConfig cfg = resolve(sub, raw);
    return run(cfg, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "choquard: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "choquard: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "choquard: " << e.what() << "\n";
    return kExitNotConverged;
  }
}
