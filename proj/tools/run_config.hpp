// Run configuration for the choquard command line tool: sectioned key-value
// files ([problem], [grid], [solver], [potential], [sweep], [verify]) with
// command-line overrides. Unknown sections and keys are errors.
#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "choquard/functionals.hpp"
#include "choquard/multibump.hpp"
#include "choquard/solver.hpp"

namespace choquard::cli {

/// Any problem with the configuration; the tool exits with status 3.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Subcommand { solve, sweep, verify_critical, multibump, constants };
std::string to_string(Subcommand s);
Subcommand parse_subcommand(const std::string& name);

enum class OutputFormat { csv, json, both };

/// section -> key -> raw value. List values keep their items comma separated.
using RawConfig = std::map<std::string, std::map<std::string, std::string>>;

RawConfig read_raw(std::istream& is);
RawConfig read_raw_file(const std::filesystem::path& path);
/// "section.key=value".
void apply_assignment(RawConfig& raw, const std::string& assignment);

struct SweepSettings {
  std::vector<double> mu;
  std::vector<double> c;
  int solve_every = 4;
  unsigned threads = 0;
};

struct VerifySettings {
  int trials = 100;
  std::uint64_t seed = 1;
  int descent_iters = 300;
};

struct RunConfig {
  Subcommand subcommand = Subcommand::solve;
  Problem problem;
  int points_per_axis = 512;
  double half_width = 24.0;
  SolverConfig solver;
  std::optional<PotentialSpec> potential;
  std::optional<BasinSpec> basins;
  bool levels = false;
  SweepSettings sweep;
  VerifySettings verify;
  std::filesystem::path output_dir = ".";
  OutputFormat format = OutputFormat::both;

  Grid grid() const { return Grid(problem.dim, points_per_axis, half_width); }
  bool writes_csv() const { return format != OutputFormat::json; }
  bool writes_json() const { return format != OutputFormat::csv; }
  /// Every resolved setting, in a fixed key order.
  nlohmann::json to_json() const;
};

/// Typed settings from raw sections, then the subcommand's own checks.
RunConfig resolve(Subcommand sub, const RawConfig& raw);

}  // namespace choquard::cli
