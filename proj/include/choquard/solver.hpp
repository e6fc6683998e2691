// Minimization of the energy on the mass sphere S(c) = {||u||_2 = c}.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "choquard/functionals.hpp"
#include "choquard/grid.hpp"
#include "choquard/riesz.hpp"

namespace choquard {

enum class DescentMetric {
  /// Tangent direction of the (-Lap + shift)^{-1} preconditioned gradient.
  sobolev,
  /// Plain L2 projected gradient.
  l2,
};

struct SolverConfig {
  int max_iters = 5000;
  double step_init = 1.0;
  double backtrack_factor = 0.5;
  double armijo_c = 1e-4;
  /// Tolerance on ||E'(u) + lambda u||_2. Values <= 0 select 1e-8 sqrt(M^N).
  double grad_tol = 0.0;
  int rearrange_every = 25;
  std::uint64_t seed = 0;

  DescentMetric metric = DescentMetric::sobolev;
  double sobolev_shift = 1.0;
  int max_backtracks = 60;
  SingularRule singular_rule = SingularRule::lattice_zeta;
  /// Regrid to twice the box (same spacing) while the outermost cell layer
  /// holds more than boundary_tol of the mass.
  bool auto_enlarge = true;
  int max_enlargements = 3;
  double boundary_tol = 1e-6;

  double resolved_grad_tol(const Grid& g) const;
  void validate() const;
};

struct TracePoint {
  int iteration = 0;
  double energy = 0.0;
  double residual = 0.0;
};

struct SolveReport {
  explicit SolveReport(Field u) : minimizer(std::move(u)) {}

  Field minimizer;
  EnergyBreakdown energy;
  double multiplier = 0.0;
  double pohozaev = 0.0;
  double residual = 0.0;
  double grad_tol = 0.0;
  double mass_error = 0.0;
  int iterations = 0;
  bool converged = false;
  double boundary_mass_fraction = 0.0;
  double tail_error_bound = 0.0;
  int enlargements = 0;
  int rearrangements_accepted = 0;
  int rearrangements_skipped = 0;
  int rejected_steps = 0;
  bool degenerate = false;
  std::string status;
  std::vector<std::string> warnings;
  std::vector<TracePoint> trace;
};

/// u c / ||u||_2. Throws on a zero field.
Field project_mass(const Field& u, double c);

/// Symmetric decreasing rearrangement: |values| sorted decreasingly and laid
/// out by increasing distance from the origin (ties by flat index).
Field rearrange(const Field& u);

/// Largest energy increase for which a rearranged iterate is still taken.
inline constexpr double kRearrangeSlack = 1e-12;

/// Default initial state: project_mass of a Gaussian of width L/8; a nonzero
/// seed perturbs width, centre and shape reproducibly.
Field initial_guess(const Problem& prob, const Grid& grid, std::uint64_t seed);

struct DescentHooks {
  /// Trial iterates for which this returns false are rejected and the step
  /// is halved.
  std::function<bool(const Field&)> accept_trial;
  /// Called after each accepted iterate.
  std::function<void(int, const Field&)> observer;
};

/// Builds the energy on a given grid (called again after enlargement).
using ModelFactory = std::function<EnergyModel(const Grid&)>;

/// Armijo-backtracked projected descent from `init` for a general model.
SolveReport descend(const ModelFactory& make_model, Field init, const SolverConfig& cfg, const DescentHooks& hooks = {});

/// Ground state of E_q on S(c). Requires q < 2 + 4/N.
SolveReport minimize(const Problem& prob, const Grid& grid, const SolverConfig& cfg,
                     const std::optional<Field>& init = std::nullopt);

struct TauSample {
  double tau = 0.0;
  EnergyBreakdown energy;
};
/// E_q(u_tau) with u_tau = tau^{N/2} u(tau x), for each tau > 0.
std::vector<TauSample> energy_curve_tau(const Problem& prob, const Field& u, const std::vector<double>& taus,
                                        SingularRule rule = SingularRule::lattice_zeta);

}  // namespace choquard
