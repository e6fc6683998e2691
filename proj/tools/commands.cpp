#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "choquard/constants.hpp"
#include "choquard/multibump.hpp"
#include "choquard/thresholds.hpp"

namespace choquard::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class Artifacts {
 public:
  Artifacts(const RunConfig& cfg, std::string stem)
      : cfg_(cfg), stem_(std::move(stem)), start_(std::chrono::system_clock::now()) {
    fs::create_directories(cfg.output_dir);
  }

  fs::path path(const std::string& suffix) const { return cfg_.output_dir / (stem_ + suffix); }

  void json_result(const json& result) const {
    if (!cfg_.writes_json()) return;
    json doc = {{"config", cfg_.to_json()}, {"result", result}};
    write(path(".json"), doc.dump(2) + "\n");
  }

  /// CSV with the resolved config on a leading comment line.
  void csv(const std::string& suffix, const std::string& body) const {
    if (!cfg_.writes_csv()) return;
    write(path(suffix), "# config: " + cfg_.to_json().dump() + "\n" + body);
  }

  void gnuplot(const std::string& script) const {
    if (!cfg_.writes_csv()) return;
    write(path(".gp"), "# config: " + cfg_.to_json().dump() + "\nset datafile separator ','\n" + script);
  }

  /// Wall-clock facts live apart from the deterministic outputs.
  void metadata() const {
    const auto end = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(start_);
    std::ostringstream ts;
    ts << std::put_time(std::gmtime(&t), "%Y-%m-%dT%H:%M:%SZ");
    const json meta = {{"started", ts.str()},
                       {"elapsed_seconds", std::chrono::duration<double>(end - start_).count()},
                       {"constants_cache", ConstantsCache::instance().path().string()}};
    write(path(".meta.json"), meta.dump(2) + "\n");
  }

 private:
  static void write(const fs::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << text;
  }

  const RunConfig& cfg_;
  std::string stem_;
  std::chrono::system_clock::time_point start_;
};

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

json report_json(const SolveReport& r) {
  return {{"sigma", r.energy.total},
          {"lambda", r.multiplier},
          {"pohozaev", r.pohozaev},
          {"pohozaev_ratio", r.pohozaev / (2.0 * r.energy.kinetic)},
          {"kinetic", 2.0 * r.energy.kinetic},
          {"nonlocal", r.energy.nonlocal},
          {"local", r.energy.local},
          {"residual", r.residual},
          {"grad_tol", r.grad_tol},
          {"converged", r.converged},
          {"iterations", r.iterations},
          {"status", r.status},
          {"warnings", r.warnings},
          {"mass_error", r.mass_error},
          {"boundary_mass_fraction", r.boundary_mass_fraction},
          {"tail_error_bound", r.tail_error_bound},
          {"enlargements", r.enlargements},
          {"final_grid", {{"M", r.minimizer.grid().points_per_axis()}, {"L", r.minimizer.grid().half_width()}}},
          {"rearrangements_accepted", r.rearrangements_accepted},
          {"rearrangements_skipped", r.rearrangements_skipped},
          {"degenerate", r.degenerate}};
}

std::string profile_csv(const Field& u) {
  std::ostringstream os;
  os << std::setprecision(17);
  write_csv_slice(os, u);
  return os.str();
}

int run_solve(const RunConfig& cfg, std::ostream& out) {
  Artifacts art(cfg, "solve");
  const Problem& p = cfg.problem;
  const double s_alpha = ConstantsCache::instance().hls(p.dim, p.alpha);
  const SolveReport rep = minimize(p, cfg.grid(), cfg.solver);
  json result = report_json(rep);
  const double sb = energy_bound(p, s_alpha);
  const double lb = multiplier_bound(p, s_alpha);
  result["bounds"] = {{"s_alpha", s_alpha},
                      {"sigma_bound", sb},
                      {"lambda_bound", lb},
                      {"sigma_below_bound", rep.energy.total < sb},
                      {"lambda_above_bound", rep.multiplier > lb}};
  art.json_result(result);
  art.csv("_profile.csv", profile_csv(rep.minimizer));
  art.gnuplot("set xlabel 'x'\nset ylabel 'u'\nplot 'solve_profile.csv' using 1:2 with lines title 'minimizer'\n");
  save_field(art.path(".field"), rep.minimizer);
  art.metadata();
  out << "solve: sigma=" << num(rep.energy.total) << " lambda=" << num(rep.multiplier)
      << " pohozaev=" << num(rep.pohozaev) << " iterations=" << rep.iterations << " " << rep.status << "\n";
  for (const auto& w : rep.warnings) out << "warning: " << w << "\n";
  return rep.converged ? kExitOk : kExitNotConverged;
}

int run_sweep(const RunConfig& cfg, std::ostream& out) {
  Artifacts art(cfg, "sweep");
  const Problem& p = cfg.problem;
  auto& cache = ConstantsCache::instance();
  const double s_bar = cache.gn(p.dim, p.critical_q());
  const double s_alpha = cache.hls(p.dim, p.alpha);
  const SweepTable table =
      sweep(p, cfg.sweep.mu, cfg.sweep.c, s_bar, s_alpha, cfg.grid(), cfg.solver, {cfg.sweep.solve_every, cfg.sweep.threads});
  json result = table.to_json();
  result["s_bar"] = s_bar;
  result["s_alpha"] = s_alpha;
  art.json_result(result);
  std::ostringstream csv;
  table.write_csv(csv);
  art.csv(".csv", csv.str());
  art.gnuplot(
      "set key outside\nset xlabel 'c'\nset ylabel 'mu'\n"
      "plot 'sweep.csv' using 2:(strcol(3) eq 'critical_nonexistence' ? $1 : 1/0) with points title 'nonexistence', \\\n"
      "     'sweep.csv' using 2:(strcol(3) eq 'critical_open' ? $1 : 1/0) with points title 'open', \\\n"
      "     'sweep.csv' using 2:(strcol(3) eq 'subcritical_exists' ? $1 : 1/0) with points title 'exists'\n");
  art.metadata();
  bool all_converged = true;
  for (const auto& r : table.rows) {
    out << "sweep: mu=" << num(r.point.mu) << " c=" << num(r.point.c) << " " << to_string(r.point.regime);
    if (r.point.witness) out << " witness=" << num(*r.point.witness);
    if (r.solved) {
      out << " sigma=" << num(r.sigma) << " lambda=" << num(r.lambda) << (r.pass() ? " pass" : " FAIL");
      all_converged = all_converged && r.converged;
    }
    out << "\n";
  }
  return all_converged ? kExitOk : kExitNotConverged;
}

int run_verify(const RunConfig& cfg, std::ostream& out) {
  Artifacts art(cfg, "verify");
  const Problem& p = cfg.problem;
  auto& cache = ConstantsCache::instance();
  const double s_bar = cache.gn(p.dim, p.q);
  const PhasePoint pt = classify(p, s_bar);
  const Grid grid = cfg.grid();
  json result = {{"s_bar", s_bar}, {"regime", to_string(pt.regime)}, {"witness", *pt.witness}, {"reason", pt.reason}};
  std::string verdict = to_string(pt.regime);
  int status = kExitOk;

  if (*pt.witness < 1.0) {
    const EmptinessReport e = verify_pohozaev_emptiness(p, s_bar, cfg.verify.trials, cfg.verify.seed, grid,
                                                        cfg.verify.descent_iters);
    result["emptiness"] = {{"trials", e.trials},
                           {"min_slack", e.min_slack},
                           {"all_pass", e.all_pass},
                           {"descent_min_ratio", e.descent_min_ratio},
                           {"descent_initial_kinetic", e.descent_initial_kinetic},
                           {"descent_final_kinetic", e.descent_final_kinetic},
                           {"descent_iterations", e.descent_iterations},
                           {"flag", e.flag}};
    verdict += " min_slack=" + num(e.min_slack) + " " + e.flag;
    if (!e.all_pass) status = kExitNotConverged;
  } else {
    // No existence verdict here; record what descent does.
    SolverConfig sc = cfg.solver;
    sc.max_iters = cfg.verify.descent_iters;
    sc.auto_enlarge = false;
    sc.rearrange_every = 0;
    const Field start = initial_guess(p, grid, cfg.verify.seed);
    auto factory = [p](const Grid& g) { return EnergyModel(p, std::make_shared<const RieszOperator>(g, p.alpha)); };
    const SolveReport r = descend(factory, start, sc);
    result["descent"] = {{"initial_kinetic", grad_norm_sq(start)},
                         {"final_kinetic", 2.0 * r.energy.kinetic},
                         {"final_energy", r.energy.total},
                         {"iterations", r.iterations},
                         {"status", r.status}};
    verdict += " descent: kinetic " + num(grad_norm_sq(start)) + " -> " + num(2.0 * r.energy.kinetic);
  }

  const double mu_star = compatible_mu(p.dim, p.c);
  result["compatible_mu"] = mu_star;
  if (std::abs(p.mu - mu_star) <= 1e-9 * mu_star) {
    const double s_alpha = cache.hls(p.dim, p.alpha);
    const CriticalExtremal x = critical_manifold_minimizer(p, grid, s_alpha, 1.0, cfg.solver.singular_rule);
    result["extremal"] = {{"energy", x.energy.total},
                          {"bound", x.bound},
                          {"relative_gap", x.relative_gap},
                          {"pohozaev_ratio", x.pohozaev_ratio},
                          {"mass_error", x.mass_error}};
    verdict += " extremal gap=" + num(x.relative_gap) + " Q/kin=" + num(x.pohozaev_ratio);
  }
  art.json_result(result);
  std::ostringstream csv;
  csv << std::setprecision(12) << "mu,c,regime,witness\n"
      << p.mu << ',' << p.c << ',' << to_string(pt.regime) << ',' << *pt.witness << "\n";
  art.csv(".csv", csv.str());
  art.metadata();
  out << "verify-critical: mu=" << num(p.mu) << " c=" << num(p.c) << " witness=" << num(*pt.witness) << " "
      << verdict << "\n";
  return status;
}

int run_multibump(const RunConfig& cfg, std::ostream& out) {
  Artifacts art(cfg, "multibump");
  const Problem& p = cfg.problem;
  const PotentialSpec& pot = *cfg.potential;
  const BasinSpec basins = cfg.basins ? *cfg.basins : BasinSpec::defaults(pot);
  const MultiplicityReport rep = multiplicity_run(p, pot, basins, cfg.grid(), cfg.solver);
  json result = rep.to_json();
  bool ok = rep.all_converged && rep.distinct;
  if (cfg.levels) {
    const LevelHierarchy h = level_hierarchy(p, pot, cfg.grid(), cfg.solver);
    result["levels"] = h.to_json();
    out << "multibump: levels upsilon_hmax=" << num(h.upsilon_hmax) << " upsilon_hinf=" << num(h.upsilon_hinf)
        << " gamma_estimate=" << num(h.gamma_estimate) << (h.ordered() ? " ordered" : " NOT ordered") << "\n";
    ok = ok && h.converged;
  }
  art.json_result(result);
  std::ostringstream csv;
  csv << std::setprecision(12) << "basin,energy,lambda";
  for (int k = 0; k < p.dim; ++k) csv << ",barycenter_" << k + 1;
  csv << ",converged\n";
  for (const auto& b : rep.basins) {
    csv << b.index << ',' << b.report.energy.total << ',' << b.report.multiplier;
    for (int k = 0; k < p.dim; ++k) csv << ',' << b.barycenter[static_cast<std::size_t>(k)];
    csv << ',' << (b.report.converged ? 1 : 0) << "\n";
    out << "multibump: basin " << b.index << " energy=" << num(b.report.energy.total)
        << " lambda=" << num(b.report.multiplier) << " |Q-a|=" << num(b.basin_distance) << " "
        << b.report.status << (b.in_basin ? "" : " (left basin)") << "\n";
  }
  art.csv(".csv", csv.str());
  art.gnuplot("set xlabel 'basin'\nset ylabel 'energy'\nplot 'multibump.csv' using 1:2 with points title 'basin levels'\n");
  art.metadata();
  return ok ? kExitOk : kExitNotConverged;
}

int run_constants(const RunConfig& cfg, std::ostream& out) {
  Artifacts art(cfg, "constants");
  const Problem& p = cfg.problem;
  auto& cache = ConstantsCache::instance();
  const double s_bar = cache.gn(p.dim, p.q);
  const double s_alpha = cache.hls(p.dim, p.alpha);
  art.json_result({{"s_bar", s_bar}, {"s_alpha", s_alpha}, {"cache", cache.path().string()}});
  std::ostringstream csv;
  csv << std::setprecision(17) << "N,r,s_bar,alpha,s_alpha\n"
      << p.dim << ',' << p.q << ',' << s_bar << ',' << p.alpha << ',' << s_alpha << "\n";
  art.csv(".csv", csv.str());
  art.metadata();
  out << std::setprecision(15) << "constants: S_bar(N=" << p.dim << ", r=" << p.q << ") = " << s_bar
      << "  S_alpha(N=" << p.dim << ", alpha=" << p.alpha << ") = " << s_alpha << "\n";
  return kExitOk;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out) {
  switch (cfg.subcommand) {
    case Subcommand::solve: return run_solve(cfg, out);
    case Subcommand::sweep: return run_sweep(cfg, out);
    case Subcommand::verify_critical: return run_verify(cfg, out);
    case Subcommand::multibump: return run_multibump(cfg, out);
    case Subcommand::constants: return run_constants(cfg, out);
  }
  return kExitConfig;
}

}  // namespace choquard::cli
