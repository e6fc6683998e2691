#include "choquard/solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace choquard {

namespace {

// Flat indices ordered by distance from the origin, ties by index. Distances
// are compared as exact integers (2i + 1 - M per axis).
const std::vector<std::size_t>& radial_order(const Grid& g) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int>, std::shared_ptr<const std::vector<std::size_t>>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  const auto key = std::make_tuple(g.dim(), g.points_per_axis());
  if (auto it = cache.find(key); it != cache.end()) return *it->second;
  const long m = g.points_per_axis();
  std::vector<long long> r2(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto idx = g.unravel(i);
    long long s = 0;
    for (int a = 0; a < g.dim(); ++a) {
      const long long d = 2 * idx[static_cast<std::size_t>(a)] + 1 - m;
      s += d * d;
    }
    r2[i] = s;
  }
  auto order = std::make_shared<std::vector<std::size_t>>(g.size());
  std::iota(order->begin(), order->end(), std::size_t{0});
  std::stable_sort(order->begin(), order->end(), [&](std::size_t a, std::size_t b) { return r2[a] < r2[b]; });
  cache.emplace(key, order);
  return *order;
}

Field tangent_direction(const Field& u, const Field& g, const SolverConfig& cfg) {
  if (cfg.metric == DescentMetric::l2) return g - u * (inner(u, g) / inner(u, u));
  const Field gg = solve_shifted_laplacian(g, cfg.sobolev_shift);
  const Field gu = solve_shifted_laplacian(u, cfg.sobolev_shift);
  return gg - gu * (inner(u, gg) / inner(u, gu));
}

constexpr int kStallWindow = 100;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

}  // namespace

double SolverConfig::resolved_grad_tol(const Grid& g) const {
  return grad_tol > 0.0 ? grad_tol : 1e-8 * std::sqrt(static_cast<double>(g.size()));
}

void SolverConfig::validate() const {
  if (max_iters <= 0) throw std::invalid_argument("solver: max_iters must be > 0");
  if (!(step_init > 0.0)) throw std::invalid_argument("solver: step_init must be > 0");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) throw std::invalid_argument("solver: backtrack_factor must lie in (0, 1)");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw std::invalid_argument("solver: armijo_c must lie in (0, 1)");
  if (rearrange_every < 0) throw std::invalid_argument("solver: rearrange_every must be >= 0");
  if (!(sobolev_shift > 0.0)) throw std::invalid_argument("solver: sobolev_shift must be > 0");
  if (max_backtracks <= 0) throw std::invalid_argument("solver: max_backtracks must be > 0");
  if (max_enlargements < 0) throw std::invalid_argument("solver: max_enlargements must be >= 0");
  if (!(boundary_tol > 0.0)) throw std::invalid_argument("solver: boundary_tol must be > 0");
}

Field project_mass(const Field& u, double c) {
  const double m = mass(u);
  if (!(m > 0.0)) throw std::invalid_argument("project_mass: zero field");
  return u * (c / std::sqrt(m));
}

Field rearrange(const Field& u) {
  std::vector<double> mags(u.size());
  for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::abs(u[i]);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  const auto& order = radial_order(u.grid());
  std::vector<double> out(u.size());
  for (std::size_t k = 0; k < order.size(); ++k) out[order[k]] = mags[k];
  return Field(u.grid(), std::move(out));
}

Field initial_guess(const Problem& prob, const Grid& grid, std::uint64_t seed) {
  const double L = grid.half_width();
  double width = L / 8.0;
  Point centre{0.0, 0.0, 0.0};
  std::optional<Field> wobble;
  if (seed != 0) {
    Rng rng(seed);
    width *= rng.uniform(0.8, 1.2);
    for (int a = 0; a < grid.dim(); ++a) centre[static_cast<std::size_t>(a)] = rng.uniform(-1.0, 1.0) * L / 32.0;
    wobble = random_smooth_field(grid, rng, true);
  }
  Field g = Field::sample(grid, [&](const Point& x) {
    double r2 = 0.0;
    for (std::size_t k = 0; k < 3; ++k) r2 += (x[k] - centre[k]) * (x[k] - centre[k]);
    return std::exp(-r2 / (2.0 * width * width));
  });
  if (wobble) {
    const double scale = 0.2 / std::max(1e-300, *std::max_element(wobble->values().begin(), wobble->values().end()));
    g = g + *wobble * scale;
  }
  return project_mass(g, prob.c);
}

SolveReport descend(const ModelFactory& make_model, Field init, const SolverConfig& cfg, const DescentHooks& hooks) {
  cfg.validate();
  EnergyModel model = make_model(init.grid());
  const Problem& prob = model.problem();
  const double c = prob.c;
  Field u = project_mass(init, c);

  SolveReport rep(u);
  rep.degenerate = prob.degenerate();
  if (rep.degenerate) rep.warnings.push_back("degenerate problem: gamma or mu is zero");

  int iter = 0;
  double step = cfg.step_init;
  double energy_now = model.energy(u).total;
  double tol = cfg.resolved_grad_tol(u.grid());
  bool failed = false;
  bool stalled = false;
  int stage_start = 0;
  std::vector<double> stage_residuals;

  while (true) {
    for (; iter < cfg.max_iters; ++iter) {
      auto ev = model.evaluate(u);
      const double lambda = -inner(ev.gradient, u) / mass(u);
      const double residual = std::sqrt(mass(ev.gradient + u * lambda));
      rep.trace.push_back({iter, energy_now, residual});
      rep.residual = residual;
      if (residual <= tol) {
        rep.converged = true;
        break;
      }
      // A box that is too small can leave a residual floor just above tol.
      stage_residuals.push_back(residual);
      const int age = iter - stage_start;
      if (cfg.auto_enlarge && rep.enlargements < cfg.max_enlargements && age >= kStallWindow * 2 &&
          residual > 0.9 * stage_residuals[stage_residuals.size() - 1 - kStallWindow] &&
          boundary_mass_fraction(u) > cfg.boundary_tol) {
        stalled = true;
        break;
      }

      if (cfg.rearrange_every > 0 && iter > 0 && iter % cfg.rearrange_every == 0) {
        const Field w = project_mass(rearrange(u), c);
        const double dE = model.difference(u, w);
        if (dE <= kRearrangeSlack && (!hooks.accept_trial || hooks.accept_trial(w))) {
          u = w;
          energy_now += dE;
          ++rep.rearrangements_accepted;
          ev = model.evaluate(u);
        } else {
          ++rep.rearrangements_skipped;
        }
      }

      const Field d = tangent_direction(u, ev.gradient, cfg);
      const double slope = inner(ev.gradient, d);
      if (!(slope > 0.0)) {
        rep.status = "descent direction lost at residual " + fmt(residual);
        failed = true;
        break;
      }
      double s = std::min(cfg.step_init, step / cfg.backtrack_factor);
      bool accepted = false;
      for (int bt = 0; bt < cfg.max_backtracks; ++bt, s *= cfg.backtrack_factor) {
        const Field v = project_mass(u - d * s, c);
        if (hooks.accept_trial && !hooks.accept_trial(v)) {
          ++rep.rejected_steps;
          continue;
        }
        const double dE = model.difference(u, v);
        if (dE <= -cfg.armijo_c * s * slope) {
          u = v;
          energy_now += dE;
          step = s;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        rep.status = "no energy decrease after " + std::to_string(cfg.max_backtracks) + " backtracks (residual " +
                     fmt(residual) + ")";
        failed = true;
        break;
      }
      if (hooks.observer) hooks.observer(iter, u);
    }
    if (failed || !(rep.converged || stalled)) break;

    const double bmf = boundary_mass_fraction(u);
    if (bmf <= cfg.boundary_tol || !cfg.auto_enlarge || rep.enlargements >= cfg.max_enlargements) break;
    // Converged or stalled on a box that is too small: regrid and keep going.
    const Grid bigger = u.grid().enlarged(2);
    u = project_mass(regrid(u, bigger), c);
    model = make_model(bigger);
    energy_now = model.energy(u).total;
    tol = cfg.resolved_grad_tol(bigger);
    rep.converged = false;
    stalled = false;
    stage_start = iter;
    stage_residuals.clear();
    ++rep.enlargements;
  }

  rep.iterations = iter;
  rep.minimizer = u;
  rep.energy = model.energy(u);
  rep.multiplier = model.multiplier(u);
  rep.pohozaev = pohozaev_residual(prob, u);
  rep.grad_tol = tol;
  rep.mass_error = std::abs(mass(u) - c * c) / (c * c);
  rep.boundary_mass_fraction = boundary_mass_fraction(u);
  rep.tail_error_bound = model.riesz().tail_error_bound(u.map([p = prob.p()](double v) { return std::pow(std::abs(v), p); }));
  if (rep.converged) {
    rep.status = "converged";
  } else if (rep.status.empty()) {
    rep.status = "iteration limit reached (residual " + fmt(rep.residual) + ")";
  }
  if (rep.boundary_mass_fraction > cfg.boundary_tol)
    rep.warnings.push_back("domain too small: boundary mass fraction " + fmt(rep.boundary_mass_fraction));
  return rep;
}

SolveReport minimize(const Problem& prob, const Grid& grid, const SolverConfig& cfg, const std::optional<Field>& init) {
  prob.validate();
  if (!(prob.q < prob.critical_q()))
    throw std::invalid_argument("minimize: q must be < 2+4/N (the critical case has no minimizer to descend to)");
  if (grid.dim() != prob.dim) throw std::invalid_argument("minimize: grid dimension does not match problem");
  Field start = init ? regrid(*init, grid) : initial_guess(prob, grid, cfg.seed);
  const SingularRule rule = cfg.singular_rule;
  auto factory = [prob, rule](const Grid& g) {
    return EnergyModel(prob, std::make_shared<const RieszOperator>(g, prob.alpha, rule));
  };
  return descend(factory, std::move(start), cfg);
}

std::vector<TauSample> energy_curve_tau(const Problem& prob, const Field& u, const std::vector<double>& taus,
                                        SingularRule rule) {
  EnergyModel model(prob, std::make_shared<const RieszOperator>(u.grid(), prob.alpha, rule));
  std::vector<TauSample> out;
  out.reserve(taus.size());
  for (double tau : taus) {
    if (!(tau > 0.0)) throw std::invalid_argument("energy_curve_tau: tau must be > 0");
    out.push_back({tau, model.energy(dilate(u, tau))});
  }
  return out;
}

}  // namespace choquard
