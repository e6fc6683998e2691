// Existence / nonexistence regimes, the Pohozaev emptiness check at the
// critical exponent q = 2 + 4/N, the explicit extremal of the critical
// Pohozaev manifold, and (mu, c) sweeps.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "choquard/functionals.hpp"
#include "choquard/solver.hpp"

namespace choquard {

enum class Regime { subcritical_exists, critical_nonexistence, critical_open };
std::string to_string(Regime r);

struct PhasePoint {
  double mu = 0.0;
  double c = 0.0;
  Regime regime = Regime::subcritical_exists;
  /// mu c^{4/N} N S_bar / (N + 2); set at the critical exponent only.
  std::optional<double> witness;
  std::string reason;
};

/// Relative slack used when comparing the witness with 1, so that inputs
/// placed on the boundary by arithmetic still count as the boundary.
inline constexpr double kWitnessBoundarySlack = 1e-12;

/// q < 2+4/N: subcritical_exists. q = 2+4/N: critical_nonexistence if the
/// witness is <= 1, else critical_open. q > 2+4/N throws.
PhasePoint classify(const Problem& prob, double s_bar);
double critical_witness(const Problem& prob, double s_bar);

struct EmptinessReport {
  int trials = 0;
  double witness = 0.0;
  /// min over trials of Q_q(u)/|grad u|^2 - (1 - witness).
  double min_slack = 0.0;
  bool all_pass = false;
  /// Descent corroboration: smallest Q_q/|grad u|^2 seen along a descent run.
  double descent_min_ratio = 0.0;
  double descent_initial_kinetic = 0.0;
  double descent_final_kinetic = 0.0;
  int descent_iterations = 0;
  bool pohozaev_point_found = false;
  std::string flag;
};

/// Random fields on S(c) must satisfy Q_q(u) >= (1 - witness)|grad u|^2
/// (relative tolerance 1e-6); then a short descent run watches for a
/// Pohozaev point. Requires q = 2+4/N and witness < 1.
EmptinessReport verify_pohozaev_emptiness(const Problem& prob, double s_bar, int trials, std::uint64_t seed,
                                          const Grid& grid, int descent_iters = 300);

/// Norms of the profile b = (1 + |x|^2)^{-N/2} by radial quadrature.
struct BubbleNorms {
  double mass = 0.0;     // ||b||_2^2
  double kinetic = 0.0;  // ||grad b||_2^2
  double power = 0.0;    // ||b||_q^q
};
BubbleNorms bubble_norms(int dim, double q);

/// mu solving mu N/(N+2) c^{4/N} = ||b||_2^{4/N} ||grad b||_2^2 / ||b||_q^q.
double compatible_mu(int dim, double c);

struct CriticalExtremal {
  Field field;
  EnergyBreakdown energy;
  double pohozaev_ratio = 0.0;  // Q_q / |grad u|^2
  double bound = 0.0;           // -gamma N/(2(N+alpha)) S_alpha^{-(N+alpha)/N} c^{2(N+alpha)/N}
  double relative_gap = 0.0;    // |E - bound| / |bound|
  double mass_error = 0.0;
};

/// The normalized bubble c (integral (1+|x|^2)^{-N})^{-1/2} (delta/(delta^2+|x|^2))^{N/2},
/// sampled and rescaled to mass c^2 exactly. Requires q = 2+4/N and
/// |mu - compatible_mu| <= 1e-9 mu.
CriticalExtremal critical_manifold_minimizer(const Problem& prob, const Grid& grid, double s_alpha,
                                             double delta = 1.0,
                                             SingularRule rule = SingularRule::lattice_zeta);

struct SweepRow {
  PhasePoint point;
  bool solved = false;
  bool converged = false;
  double sigma = 0.0;
  double lambda = 0.0;
  double bound_sigma = 0.0;
  double bound_lambda = 0.0;
  bool sigma_pass = false;
  bool lambda_pass = false;
  bool pass() const { return !solved || (converged && sigma_pass && lambda_pass); }
};

struct SweepTable {
  Problem problem;
  std::vector<SweepRow> rows;  // sorted by (mu, c)
  void write_csv(std::ostream& os) const;
  nlohmann::json to_json() const;
};

struct SweepOptions {
  /// Every solve_every-th row (in sorted order) is solved; 0 disables solves.
  int solve_every = 4;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Classifies each (mu, c); subcritical rows picked by solve_every get a
/// ground-state solve and the two energy/multiplier inequalities.
SweepTable sweep(const Problem& prob_template, const std::vector<double>& mu_grid, const std::vector<double>& c_grid,
                 double s_bar, double s_alpha, const Grid& grid, const SolverConfig& cfg,
                 const SweepOptions& opts = {});

}  // namespace choquard
