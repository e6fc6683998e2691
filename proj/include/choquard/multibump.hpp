// Potential-weighted problem
//   E_eps(u) = 1/2 |grad u|^2 - mu/q int |u|^q
//              - N/(2(N+alpha)) int (I_alpha * h(eps x)|u|^p) h(eps x)|u|^p,
// the truncated barycenter, basin-constrained minimization and the
// multiplicity run over the maxima of h.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "choquard/functionals.hpp"
#include "choquard/solver.hpp"

namespace choquard {

struct PotentialSpec {
  enum class Kind { gaussian_bumps, table };

  Kind kind = Kind::gaussian_bumps;
  int dim = 1;
  double h_max = 1.0;
  double h_inf = 0.5;
  double epsilon = 0.1;
  /// Points where h = h_max; the first one is the origin.
  std::vector<Point> maxima{Point{0.0, 0.0, 0.0}};
  /// gaussian_bumps: h(y) = h_inf + (h_max - h_inf) max_i exp(-|y - a_i|^2 / (2 w_i^2)).
  std::vector<double> widths{1.0};
  /// table (N = 1): piecewise linear through (table_x, table_h), h_inf outside.
  std::vector<double> table_x;
  std::vector<double> table_h;

  static PotentialSpec gaussian(int dim, double h_max, double h_inf, std::vector<Point> maxima,
                                std::vector<double> widths, double epsilon);
  static PotentialSpec tabulated(std::vector<double> xs, std::vector<double> hs, double h_inf,
                                 std::vector<double> maxima_x, double epsilon);

  double value(const Point& y) const;
  /// h(eps x) on the grid nodes.
  Field sample(const Grid& grid) const;
  std::size_t count() const { return maxima.size(); }
  /// Throws std::invalid_argument: 0 < h_inf < h_max, a_1 = 0, h(a_i) = h_max
  /// within 1e-12, distinct maxima, eps > 0, finite samples.
  void validate() const;
  /// Same checks plus the sampled bound h <= h_max on a grid.
  void validate_on(const Grid& grid) const;
};

struct BasinSpec {
  double rho_tilde = 0.5;
  double r_tilde = 1.0;
  /// rho = 0.45 min |a_i - a_j| (0.5 for a single maximum), r = 2 max |a_i| + 1.
  static BasinSpec defaults(const PotentialSpec& pot);
  /// Closed balls B(a_i, rho) pairwise disjoint and inside B(0, r).
  void validate(const PotentialSpec& pot) const;
};

/// Energy model with weight h(eps x) and unit coupling; gamma in prob is
/// not used.
EnergyModel weighted_model(const Problem& prob, const PotentialSpec& pot, const Grid& grid,
                           SingularRule rule = SingularRule::lattice_zeta);
double weighted_energy(const Problem& prob, const PotentialSpec& pot, const Field& u, const RieszOperator& riesz);

/// Q_eps(u) = int chi(eps x)|u|^2 / int |u|^2 with chi(x) = x for |x| <= r,
/// r x/|x| beyond.
Point barycenter(const PotentialSpec& pot, const BasinSpec& basins, const Field& u);
double distance(const Point& a, const Point& b);

/// Problem with gamma = g^2: its energy is J_g.
Problem autonomous_problem(const Problem& prob, double g);

struct BasinResult {
  explicit BasinResult(SolveReport r) : report(std::move(r)) {}

  int index = 0;  // 1-based
  SolveReport report;
  Point barycenter{};
  double basin_distance = 0.0;  // |Q_eps(u) - a_i|
  bool in_basin = false;
  double initial_energy = 0.0;
  bool ok() const { return report.converged && in_basin; }
};

/// Ground state of J_{h_max} translated to a_i/eps on a grid large enough to
/// hold it (doubling L and M as needed).
Field translated_ground_state(const Field& ground_state, const PotentialSpec& pot, int index);

/// Descent on E_eps from the translated ground state; trial iterates leaving
/// {|Q_eps(u) - a_i| <= rho} are rejected. `ground_state` is the minimizer
/// of J_{h_max}; when absent it is computed on `grid`.
BasinResult solve_in_basin(const Problem& prob, const PotentialSpec& pot, const BasinSpec& basins, int index,
                           const Grid& grid, const SolverConfig& cfg,
                           const std::optional<Field>& ground_state = std::nullopt);

struct MultiplicityReport {
  std::vector<BasinResult> basins;  // ordered by index
  Field ground_state;
  double upsilon_hmax = 0.0;
  bool all_converged = false;
  bool distinct = false;  // each Q_eps(u^i) inside its own closed ball
  std::vector<std::string> failures;
  nlohmann::json to_json() const;
};

/// solve_in_basin for i = 1..l, concurrently; failures carry their index.
MultiplicityReport multiplicity_run(const Problem& prob, const PotentialSpec& pot, const BasinSpec& basins,
                                    const Grid& grid, const SolverConfig& cfg);

struct LevelHierarchy {
  double upsilon_hmax = 0.0;
  double upsilon_hinf = 0.0;
  /// Unconstrained descent on E_eps from the ground state at the origin.
  double gamma_estimate = 0.0;
  bool converged = false;
  bool ordered() const { return upsilon_hmax < upsilon_hinf && upsilon_hinf < 0.0; }
  nlohmann::json to_json() const;
};

LevelHierarchy level_hierarchy(const Problem& prob, const PotentialSpec& pot, const Grid& grid,
                               const SolverConfig& cfg);

}  // namespace choquard
