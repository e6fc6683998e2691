#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "run_config.hpp"

using namespace choquard::cli;
namespace fs = std::filesystem;

namespace {

RawConfig parse(const std::string& text) {
  std::istringstream is(text);
  return read_raw(is);
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("choquard_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Config, SectionsAndLists) {
  const RawConfig raw = parse("[problem]\nmu = 2\n# comment\n[sweep]\nmu = 0.5, 1, 2\nc = [1, 2]\n");
  const RunConfig cfg = resolve(Subcommand::sweep, raw);
  EXPECT_EQ(cfg.problem.mu, 2.0);
  EXPECT_EQ(cfg.sweep.mu, (std::vector<double>{0.5, 1.0, 2.0}));
  EXPECT_EQ(cfg.sweep.c, (std::vector<double>{1.0, 2.0}));
}

TEST(Config, UnknownKeysAndSectionsAreRejected) {
  EXPECT_THROW(resolve(Subcommand::solve, parse("[problem]\nmass = 1\n")), ConfigError);
  EXPECT_THROW(resolve(Subcommand::solve, parse("[extra]\nx = 1\n")), ConfigError);
  EXPECT_THROW(resolve(Subcommand::solve, parse("mu = 1\n")), ConfigError);
}

TEST(Config, MalformedValues) {
  EXPECT_THROW(resolve(Subcommand::solve, parse("[problem]\nmu = abc\n")), ConfigError);
  EXPECT_THROW(resolve(Subcommand::solve, parse("[grid]\nM = 100\n")), ConfigError);
  EXPECT_THROW(resolve(Subcommand::solve, parse("[solver]\nmetric = newton\n")), ConfigError);
  EXPECT_THROW(resolve(Subcommand::solve, parse("[solver]\nauto_enlarge = maybe\n")), ConfigError);
}

TEST(Config, SubcommandRequirements) {
  try {
    resolve(Subcommand::verify_critical, parse("[problem]\nq = 2.5\n"));
    FAIL() << "expected a ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_STREQ(e.what(), "verify-critical requires q = 2+4/N");
  }
  EXPECT_NO_THROW(resolve(Subcommand::verify_critical, parse("[problem]\nq = 6\n")));
  EXPECT_THROW(resolve(Subcommand::solve, parse("[problem]\nq = 6\n")), ConfigError);
  EXPECT_THROW(resolve(Subcommand::sweep, parse("[problem]\nq = 3\n")), ConfigError);
  EXPECT_THROW(resolve(Subcommand::multibump, parse("[problem]\nq = 3\n")), ConfigError);
  EXPECT_NO_THROW(resolve(Subcommand::constants, parse("[problem]\nq = 6\n")));
}

TEST(Config, AssignmentsOverrideFileKeys) {
  RawConfig raw = parse("[problem]\nmu = 2\n");
  apply_assignment(raw, "problem.mu=3.5");
  apply_assignment(raw, "grid.L = 12");
  const RunConfig cfg = resolve(Subcommand::solve, raw);
  EXPECT_EQ(cfg.problem.mu, 3.5);
  EXPECT_EQ(cfg.half_width, 12.0);
  EXPECT_THROW(apply_assignment(raw, "mu=1"), ConfigError);
}

TEST(Config, PotentialSection) {
  const RunConfig cfg = resolve(
      Subcommand::multibump,
      parse("[grid]\nM = 1024\nL = 96\n[potential]\nmaxima = 0, 4\nwidths = 1\nepsilon = 0.2\nrho_tilde = 1\n"));
  ASSERT_TRUE(cfg.potential.has_value());
  EXPECT_EQ(cfg.potential->count(), 2u);
  ASSERT_TRUE(cfg.basins.has_value());
  EXPECT_EQ(cfg.basins->rho_tilde, 1.0);
  EXPECT_EQ(cfg.basins->r_tilde, 9.0);
  EXPECT_THROW(resolve(Subcommand::multibump, parse("[potential]\nmaxima = 1, 4\n")), ConfigError);
}

TEST(Config, JsonIsCompleteAndStable) {
  const RunConfig cfg = resolve(Subcommand::solve, parse("[problem]\nmu = 2\n"));
  const auto j = cfg.to_json();
  EXPECT_EQ(j["problem"]["mu"], 2.0);
  EXPECT_EQ(j["grid"]["M"], 512);
  EXPECT_EQ(j["solver"]["rearrange_every"], 25);
  EXPECT_EQ(j.dump(), resolve(Subcommand::solve, parse("[problem]\nmu = 2\n")).to_json().dump());
}

TEST(Run, SolveWritesArtifactsDeterministically) {
  const fs::path a = scratch_dir("solve_a");
  const fs::path b = scratch_dir("solve_b");
  RawConfig raw = parse("[grid]\nM = 256\nL = 24\n");
  apply_assignment(raw, "output.dir=" + a.string());
  RunConfig cfg = resolve(Subcommand::solve, raw);
  std::ostringstream out;
  EXPECT_EQ(run(cfg, out), kExitOk);
  EXPECT_EQ(out.str().rfind("solve: sigma=", 0), 0u);
  cfg.output_dir = b;
  std::ostringstream out2;
  EXPECT_EQ(run(cfg, out2), kExitOk);
  for (const char* f : {"solve.json", "solve_profile.csv", "solve.gp"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_TRUE(fs::exists(a / "solve.meta.json"));
  const auto doc = nlohmann::json::parse(slurp(a / "solve.json"));
  EXPECT_TRUE(doc["result"].contains("sigma"));
  EXPECT_TRUE(doc["result"].contains("lambda"));
  EXPECT_TRUE(doc["result"].contains("pohozaev"));
  EXPECT_EQ(doc["config"]["grid"]["M"], 256);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Run, NonConvergenceExitsWithTwo) {
  const fs::path dir = scratch_dir("limit");
  RawConfig raw = parse("[solver]\nmax_iters = 3\n");
  apply_assignment(raw, "output.dir=" + dir.string());
  std::ostringstream out;
  EXPECT_EQ(run(resolve(Subcommand::solve, raw), out), kExitNotConverged);
  fs::remove_all(dir);
}

TEST(Run, FormatSelectsFiles) {
  const fs::path dir = scratch_dir("format");
  RawConfig raw = parse("[grid]\nM = 128\nL = 24\n[output]\nformat = json\n");
  apply_assignment(raw, "output.dir=" + dir.string());
  std::ostringstream out;
  run(resolve(Subcommand::solve, raw), out);
  EXPECT_TRUE(fs::exists(dir / "solve.json"));
  EXPECT_FALSE(fs::exists(dir / "solve_profile.csv"));
  fs::remove_all(dir);
}
