#include "choquard/multibump.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

namespace choquard {

namespace {

double norm(const Point& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }

Point scaled(const Point& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }

nlohmann::json point_json(const Point& a, int dim) {
  nlohmann::json j = nlohmann::json::array();
  for (int k = 0; k < dim; ++k) j.push_back(a[static_cast<std::size_t>(k)]);
  return j;
}

Field autonomous_ground_state(const Problem& prob, double g, const Grid& grid, const SolverConfig& cfg) {
  SolveReport r = minimize(autonomous_problem(prob, g), grid, cfg);
  if (!r.converged) throw std::runtime_error("autonomous ground state did not converge: " + r.status);
  return r.minimizer;
}

}  // namespace

PotentialSpec PotentialSpec::gaussian(int dim, double h_max, double h_inf, std::vector<Point> maxima,
                                      std::vector<double> widths, double epsilon) {
  PotentialSpec p;
  p.kind = Kind::gaussian_bumps;
  p.dim = dim;
  p.h_max = h_max;
  p.h_inf = h_inf;
  p.epsilon = epsilon;
  p.maxima = std::move(maxima);
  p.widths = std::move(widths);
  if (p.widths.size() == 1 && p.maxima.size() > 1) p.widths.assign(p.maxima.size(), p.widths[0]);
  p.validate();
  return p;
}

PotentialSpec PotentialSpec::tabulated(std::vector<double> xs, std::vector<double> hs, double h_inf,
                                       std::vector<double> maxima_x, double epsilon) {
  PotentialSpec p;
  p.kind = Kind::table;
  p.dim = 1;
  p.h_inf = h_inf;
  p.epsilon = epsilon;
  p.table_x = std::move(xs);
  p.table_h = std::move(hs);
  if (p.table_h.empty()) throw std::invalid_argument("potential: empty table");
  p.h_max = *std::max_element(p.table_h.begin(), p.table_h.end());
  p.maxima.clear();
  for (double a : maxima_x) p.maxima.push_back({a, 0.0, 0.0});
  p.widths.clear();
  p.validate();
  return p;
}

double PotentialSpec::value(const Point& y) const {
  if (kind == Kind::gaussian_bumps) {
    double best = 0.0;
    for (std::size_t i = 0; i < maxima.size(); ++i) {
      double r2 = 0.0;
      for (std::size_t k = 0; k < 3; ++k) r2 += (y[k] - maxima[i][k]) * (y[k] - maxima[i][k]);
      best = std::max(best, std::exp(-r2 / (2.0 * widths[i] * widths[i])));
    }
    return h_inf + (h_max - h_inf) * best;
  }
  const double x = y[0];
  if (x < table_x.front() || x > table_x.back()) return h_inf;
  const auto it = std::upper_bound(table_x.begin(), table_x.end(), x);
  if (it == table_x.end()) return table_h.back();
  const std::size_t j = static_cast<std::size_t>(it - table_x.begin());
  const double t = (x - table_x[j - 1]) / (table_x[j] - table_x[j - 1]);
  return table_h[j - 1] + t * (table_h[j] - table_h[j - 1]);
}

Field PotentialSpec::sample(const Grid& grid) const {
  if (grid.dim() != dim) throw std::invalid_argument("potential: grid dimension mismatch");
  return Field::sample(grid, [&](const Point& x) { return value(scaled(x, epsilon)); });
}

void PotentialSpec::validate() const {
  if (dim < 1 || dim > 3) throw std::invalid_argument("potential: dim must be 1, 2 or 3");
  if (!(h_inf > 0.0 && h_inf < h_max)) throw std::invalid_argument("potential: need 0 < h_inf < h_max");
  if (!(epsilon > 0.0)) throw std::invalid_argument("potential: epsilon must be > 0");
  if (maxima.empty()) throw std::invalid_argument("potential: no maxima");
  if (norm(maxima[0]) != 0.0) throw std::invalid_argument("potential: the first maximum must be the origin");
  for (const auto& a : maxima) {
    for (int k = dim; k < 3; ++k)
      if (a[static_cast<std::size_t>(k)] != 0.0) throw std::invalid_argument("potential: maximum has extra coordinates");
  }
  if (kind == Kind::gaussian_bumps) {
    if (widths.size() != maxima.size()) throw std::invalid_argument("potential: need one width per maximum");
    for (double w : widths)
      if (!(w > 0.0 && std::isfinite(w))) throw std::invalid_argument("potential: widths must be > 0");
  } else {
    if (dim != 1) throw std::invalid_argument("potential: tables are 1D only");
    if (table_x.size() != table_h.size() || table_x.size() < 2)
      throw std::invalid_argument("potential: table needs >= 2 (x, h) pairs of equal length");
    for (std::size_t j = 1; j < table_x.size(); ++j)
      if (!(table_x[j] > table_x[j - 1])) throw std::invalid_argument("potential: table x must increase");
    for (double h : table_h)
      if (!(h > 0.0 && std::isfinite(h))) throw std::invalid_argument("potential: table values must be finite and > 0");
  }
  for (std::size_t i = 0; i < maxima.size(); ++i) {
    if (std::abs(value(maxima[i]) - h_max) > 1e-12)
      throw std::invalid_argument("potential: h(a_" + std::to_string(i + 1) + ") differs from h_max");
    for (std::size_t j = 0; j < i; ++j)
      if (distance(maxima[i], maxima[j]) == 0.0) throw std::invalid_argument("potential: maxima must be distinct");
  }
}

void PotentialSpec::validate_on(const Grid& grid) const {
  validate();
  const Field h = sample(grid);
  for (double v : h.values())
    if (!(std::isfinite(v) && v > 0.0 && v <= h_max * (1.0 + 1e-12)))
      throw std::invalid_argument("potential: sampled values must lie in (0, h_max]");
}

BasinSpec BasinSpec::defaults(const PotentialSpec& pot) {
  BasinSpec b;
  double min_dist = std::numeric_limits<double>::infinity();
  double max_norm = 0.0;
  for (std::size_t i = 0; i < pot.maxima.size(); ++i) {
    max_norm = std::max(max_norm, norm(pot.maxima[i]));
    for (std::size_t j = 0; j < i; ++j) min_dist = std::min(min_dist, distance(pot.maxima[i], pot.maxima[j]));
  }
  b.rho_tilde = pot.maxima.size() > 1 ? 0.45 * min_dist : 0.5;
  b.r_tilde = 2.0 * max_norm + 1.0;
  return b;
}

void BasinSpec::validate(const PotentialSpec& pot) const {
  if (!(rho_tilde > 0.0 && r_tilde > 0.0)) throw std::invalid_argument("basins: rho and r must be > 0");
  for (std::size_t i = 0; i < pot.maxima.size(); ++i) {
    if (!(norm(pot.maxima[i]) + rho_tilde < r_tilde))
      throw std::invalid_argument("basins: ball around a_" + std::to_string(i + 1) + " leaves B(0, r)");
    for (std::size_t j = 0; j < i; ++j)
      if (!(distance(pot.maxima[i], pot.maxima[j]) > 2.0 * rho_tilde))
        throw std::invalid_argument("basins: balls around a_" + std::to_string(j + 1) + " and a_" +
                                    std::to_string(i + 1) + " intersect");
  }
}

EnergyModel weighted_model(const Problem& prob, const PotentialSpec& pot, const Grid& grid, SingularRule rule) {
  return EnergyModel(prob, std::make_shared<const RieszOperator>(grid, prob.alpha, rule), 1.0, pot.sample(grid));
}

double weighted_energy(const Problem& prob, const PotentialSpec& pot, const Field& u, const RieszOperator& riesz) {
  if (!(u.grid() == riesz.grid())) throw std::invalid_argument("weighted_energy: field and operator grids differ");
  // Non-owning handle; the model does not outlive this call.
  std::shared_ptr<const RieszOperator> handle(&riesz, [](const RieszOperator*) {});
  return EnergyModel(prob, handle, 1.0, pot.sample(u.grid())).energy(u).total;
}

double distance(const Point& a, const Point& b) {
  return norm({a[0] - b[0], a[1] - b[1], a[2] - b[2]});
}

Point barycenter(const PotentialSpec& pot, const BasinSpec& basins, const Field& u) {
  const Grid& g = u.grid();
  const double r = basins.r_tilde;
  long double acc[3] = {0.0L, 0.0L, 0.0L};
  long double total = 0.0L;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = u[i] * u[i];
    if (w == 0.0) continue;
    Point y = scaled(g.position(i), pot.epsilon);
    const double ny = norm(y);
    if (ny > r) y = scaled(y, r / ny);
    for (std::size_t k = 0; k < 3; ++k) acc[k] += static_cast<long double>(w) * y[k];
    total += w;
  }
  if (!(total > 0.0L)) throw std::invalid_argument("barycenter: zero field");
  Point q{static_cast<double>(acc[0] / total), static_cast<double>(acc[1] / total), static_cast<double>(acc[2] / total)};
  // An average of points of the closed ball stays in it; remove rounding excess.
  const double nq = norm(q);
  if (nq > r) q = scaled(q, r / nq);
  return q;
}

Problem autonomous_problem(const Problem& prob, double g) {
  Problem p = prob;
  p.gamma = g * g;
  return p;
}

Field translated_ground_state(const Field& ground_state, const PotentialSpec& pot, int index) {
  if (index < 1 || static_cast<std::size_t>(index) > pot.count())
    throw std::invalid_argument("basin index out of range");
  const Point shift = scaled(pot.maxima[static_cast<std::size_t>(index - 1)], 1.0 / pot.epsilon);
  Grid grid = ground_state.grid();
  double reach = 0.0;
  for (double s : shift) reach = std::max(reach, std::abs(s));
  while (reach > 0.5 * grid.half_width()) grid = grid.enlarged(2);
  const Field base = grid == ground_state.grid() ? ground_state : regrid(ground_state, grid);
  return reach == 0.0 ? base : project_mass(translate(base, shift), std::sqrt(mass(ground_state)));
}

BasinResult solve_in_basin(const Problem& prob, const PotentialSpec& pot, const BasinSpec& basins, int index,
                           const Grid& grid, const SolverConfig& cfg, const std::optional<Field>& ground_state) {
  prob.validate();
  pot.validate_on(grid);
  basins.validate(pot);
  const Field gs = ground_state ? *ground_state : autonomous_ground_state(prob, pot.h_max, grid, cfg);
  const Field start = translated_ground_state(gs, pot, index);
  const Point target = pot.maxima[static_cast<std::size_t>(index - 1)];

  SolverConfig basin_cfg = cfg;
  basin_cfg.rearrange_every = 0;
  const SingularRule rule = cfg.singular_rule;
  auto factory = [&prob, &pot, rule](const Grid& g) { return weighted_model(prob, pot, g, rule); };
  DescentHooks hooks;
  hooks.accept_trial = [&](const Field& v) { return distance(barycenter(pot, basins, v), target) <= basins.rho_tilde; };

  const double e0 = factory(start.grid()).energy(project_mass(start, prob.c)).total;
  BasinResult out(descend(factory, start, basin_cfg, hooks));
  out.index = index;
  out.initial_energy = e0;
  out.barycenter = barycenter(pot, basins, out.report.minimizer);
  out.basin_distance = distance(out.barycenter, target);
  out.in_basin = out.basin_distance <= basins.rho_tilde;
  if (out.report.rejected_steps > 0)
    out.report.warnings.push_back(std::to_string(out.report.rejected_steps) + " trial steps left the basin");
  return out;
}

nlohmann::json MultiplicityReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& b : basins) {
    const int dim = b.report.minimizer.grid().dim();
    arr.push_back({{"basin", b.index},
                   {"energy", b.report.energy.total},
                   {"lambda", b.report.multiplier},
                   {"barycenter", point_json(b.barycenter, dim)},
                   {"basin_distance", b.basin_distance},
                   {"initial_energy", b.initial_energy},
                   {"converged", b.report.converged},
                   {"in_basin", b.in_basin},
                   {"iterations", b.report.iterations},
                   {"rejected_steps", b.report.rejected_steps},
                   {"residual", b.report.residual},
                   {"status", b.report.status}});
  }
  return {{"basins", arr},
          {"upsilon_hmax", upsilon_hmax},
          {"all_converged", all_converged},
          {"distinct", distinct},
          {"failures", failures}};
}

MultiplicityReport multiplicity_run(const Problem& prob, const PotentialSpec& pot, const BasinSpec& basins,
                                    const Grid& grid, const SolverConfig& cfg) {
  prob.validate();
  pot.validate_on(grid);
  basins.validate(pot);
  SolveReport gs = minimize(autonomous_problem(prob, pot.h_max), grid, cfg);
  if (!gs.converged) throw std::runtime_error("autonomous ground state did not converge: " + gs.status);
  MultiplicityReport rep{{}, gs.minimizer, gs.energy.total, false, false, {}};

  std::vector<std::future<BasinResult>> jobs;
  for (int i = 1; i <= static_cast<int>(pot.count()); ++i)
    jobs.push_back(std::async(std::launch::async, [&, i] {
      return solve_in_basin(prob, pot, basins, i, grid, cfg, rep.ground_state);
    }));
  for (auto& j : jobs) rep.basins.push_back(j.get());

  rep.all_converged = true;
  rep.distinct = true;
  for (const auto& b : rep.basins) {
    if (!b.report.converged) {
      rep.all_converged = false;
      rep.failures.push_back("basin " + std::to_string(b.index) + ": " + b.report.status);
    }
    if (!b.in_basin) {
      rep.distinct = false;
      rep.failures.push_back("basin " + std::to_string(b.index) + ": barycenter left the basin");
    }
  }
  return rep;
}

nlohmann::json LevelHierarchy::to_json() const {
  return {{"upsilon_hmax", upsilon_hmax},
          {"upsilon_hinf", upsilon_hinf},
          {"gamma_estimate", gamma_estimate},
          {"converged", converged},
          {"ordered", ordered()}};
}

LevelHierarchy level_hierarchy(const Problem& prob, const PotentialSpec& pot, const Grid& grid,
                               const SolverConfig& cfg) {
  prob.validate();
  pot.validate_on(grid);
  const SolveReport hi = minimize(autonomous_problem(prob, pot.h_max), grid, cfg);
  const SolveReport lo = minimize(autonomous_problem(prob, pot.h_inf), grid, cfg);
  LevelHierarchy out;
  out.upsilon_hmax = hi.energy.total;
  out.upsilon_hinf = lo.energy.total;

  SolverConfig free_cfg = cfg;
  free_cfg.rearrange_every = 0;
  const SingularRule rule = cfg.singular_rule;
  auto factory = [&prob, &pot, rule](const Grid& g) { return weighted_model(prob, pot, g, rule); };
  const SolveReport est = descend(factory, hi.minimizer, free_cfg);
  out.gamma_estimate = est.energy.total;
  out.converged = hi.converged && lo.converged && est.converged;
  return out;
}

}  // namespace choquard
