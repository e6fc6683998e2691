#include "choquard/thresholds.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace choquard {

namespace {

double radial_integral(int dim, const std::function<double(double)>& g) {
  const double n = dim;
  const double area = 2.0 * std::pow(std::numbers::pi, n / 2.0) / boost::math::tgamma(n / 2.0);
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  auto w = [&](double r) { return std::pow(r, n - 1.0) * g(r); };
  return area * (ts.integrate(w, 0.0, 1.0, 1e-13) + es.integrate(w, 1.0, std::numeric_limits<double>::infinity(), 1e-13));
}

}  // namespace

std::string to_string(Regime r) {
  switch (r) {
    case Regime::subcritical_exists: return "subcritical_exists";
    case Regime::critical_nonexistence: return "critical_nonexistence";
    case Regime::critical_open: return "critical_open";
  }
  return "unknown";
}

double critical_witness(const Problem& prob, double s_bar) {
  return prob.mu * std::pow(prob.c, 4.0 / prob.dim) * prob.dim * s_bar / (prob.dim + 2.0);
}

PhasePoint classify(const Problem& prob, double s_bar) {
  prob.validate();
  if (!(s_bar > 0.0)) throw std::invalid_argument("classify: S_bar must be > 0");
  PhasePoint pt{prob.mu, prob.c, Regime::subcritical_exists, std::nullopt, ""};
  if (prob.q < prob.critical_q()) {
    pt.reason = "q < 2+4/N: a ground state exists";
    return pt;
  }
  const double w = critical_witness(prob, s_bar);
  pt.witness = w;
  if (w <= 1.0 + kWitnessBoundarySlack) {
    pt.regime = Regime::critical_nonexistence;
    pt.reason = w < 1.0 - kWitnessBoundarySlack
                    ? "witness < 1: Q_q(u) >= (1 - witness)|grad u|^2 > 0 on S(c)"
                    : "witness = 1: Q_q(u) = 0 forces equality in the GN inequality and in the HLS-type "
                      "inequality at once, which no single profile achieves";
  } else {
    pt.regime = Regime::critical_open;
    pt.reason = "witness > 1: no verdict";
  }
  return pt;
}

EmptinessReport verify_pohozaev_emptiness(const Problem& prob, double s_bar, int trials, std::uint64_t seed,
                                          const Grid& grid, int descent_iters) {
  prob.validate();
  if (!prob.is_critical()) throw std::invalid_argument("verify_pohozaev_emptiness requires q = 2+4/N");
  if (trials <= 0) throw std::invalid_argument("verify_pohozaev_emptiness: trials must be > 0");
  if (grid.dim() != prob.dim) throw std::invalid_argument("verify_pohozaev_emptiness: grid dimension mismatch");
  EmptinessReport rep;
  rep.trials = trials;
  rep.witness = critical_witness(prob, s_bar);
  if (!(rep.witness < 1.0)) throw std::invalid_argument("verify_pohozaev_emptiness requires witness < 1");

  const double tol = 1e-6;
  Rng rng(seed);
  rep.min_slack = std::numeric_limits<double>::infinity();
  rep.all_pass = true;
  for (int t = 0; t < trials; ++t) {
    const Field u = project_mass(random_smooth_field(grid, rng), prob.c);
    const double kin = grad_norm_sq(u);
    const double slack = pohozaev_residual(prob, u) / kin - (1.0 - rep.witness);
    rep.min_slack = std::min(rep.min_slack, slack);
    if (slack < -tol) rep.all_pass = false;
  }

  SolverConfig cfg;
  cfg.max_iters = descent_iters;
  cfg.auto_enlarge = false;
  cfg.rearrange_every = 0;
  const Field start = initial_guess(prob, grid, seed);
  rep.descent_initial_kinetic = grad_norm_sq(start);
  rep.descent_min_ratio = pohozaev_residual(prob, start) / rep.descent_initial_kinetic;
  DescentHooks hooks;
  hooks.observer = [&](int, const Field& u) {
    rep.descent_min_ratio = std::min(rep.descent_min_ratio, pohozaev_residual(prob, u) / grad_norm_sq(u));
  };
  auto factory = [prob](const Grid& g) {
    return EnergyModel(prob, std::make_shared<const RieszOperator>(g, prob.alpha));
  };
  const SolveReport run = descend(factory, start, cfg, hooks);
  rep.descent_iterations = run.iterations;
  rep.descent_final_kinetic = 2.0 * run.energy.kinetic;
  rep.pohozaev_point_found = rep.descent_min_ratio < (1.0 - rep.witness) - tol;
  rep.flag = rep.pohozaev_point_found ? "Pohozaev point encountered" : "no Pohozaev point encountered";
  return rep;
}

BubbleNorms bubble_norms(int dim, double q) {
  const double n = dim;
  BubbleNorms b;
  b.mass = radial_integral(dim, [&](double r) { return std::pow(1.0 + r * r, -n); });
  // |b'(r)| = N r (1 + r^2)^{-N/2 - 1}.
  b.kinetic = radial_integral(dim, [&](double r) { return n * n * r * r * std::pow(1.0 + r * r, -n - 2.0); });
  b.power = radial_integral(dim, [&](double r) { return std::pow(1.0 + r * r, -n * q / 2.0); });
  return b;
}

double compatible_mu(int dim, double c) {
  const double n = dim;
  const double q = 2.0 + 4.0 / n;
  const BubbleNorms b = bubble_norms(dim, q);
  const double rhs = std::pow(b.mass, 2.0 / n) * b.kinetic / b.power;
  return rhs * (n + 2.0) / (n * std::pow(c, 4.0 / n));
}

CriticalExtremal critical_manifold_minimizer(const Problem& prob, const Grid& grid, double s_alpha, double delta,
                                             SingularRule rule) {
  prob.validate();
  if (!prob.is_critical()) throw std::invalid_argument("critical_manifold_minimizer requires q = 2+4/N");
  if (grid.dim() != prob.dim) throw std::invalid_argument("critical_manifold_minimizer: grid dimension mismatch");
  const double mu_star = compatible_mu(prob.dim, prob.c);
  if (std::abs(prob.mu - mu_star) > 1e-9 * mu_star)
    throw std::invalid_argument("critical_manifold_minimizer: (mu, c) violate the compatibility equation; need mu = " +
                                std::to_string(mu_star));
  const double n = prob.dim;
  const double norm = bubble_norms(prob.dim, prob.q).mass;
  const double amp = prob.c / std::sqrt(norm);
  const Field raw = Field::sample(grid, [&](const Point& x) {
    const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    return amp * std::pow(delta / (delta * delta + r2), n / 2.0);
  });
  CriticalExtremal out{project_mass(raw, prob.c), {}, 0.0, 0.0, 0.0, 0.0};
  EnergyModel model(prob, std::make_shared<const RieszOperator>(grid, prob.alpha, rule));
  out.energy = model.energy(out.field);
  out.pohozaev_ratio = pohozaev_residual(prob, out.field) / (2.0 * out.energy.kinetic);
  out.bound = energy_bound(prob, s_alpha);
  out.relative_gap = std::abs(out.energy.total - out.bound) / std::abs(out.bound);
  out.mass_error = std::abs(mass(out.field) - prob.c * prob.c);
  return out;
}

void SweepTable::write_csv(std::ostream& os) const {
  os << "mu,c,regime,witness,sigma,lambda,bound_sigma,bound_lambda,pass\n";
  os << std::setprecision(12);
  for (const auto& r : rows) {
    os << r.point.mu << ',' << r.point.c << ',' << to_string(r.point.regime) << ',';
    if (r.point.witness) os << *r.point.witness;
    os << ',';
    if (r.solved) os << r.sigma << ',' << r.lambda << ',' << r.bound_sigma << ',' << r.bound_lambda;
    else os << ",,,";
    os << ',' << (r.solved ? (r.pass() ? "1" : "0") : "") << '\n';
  }
}

nlohmann::json SweepTable::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  int solved = 0;
  int passed = 0;
  for (const auto& r : rows) {
    nlohmann::json j = {{"mu", r.point.mu}, {"c", r.point.c}, {"regime", to_string(r.point.regime)}};
    j["witness"] = r.point.witness ? nlohmann::json(*r.point.witness) : nlohmann::json(nullptr);
    if (r.solved) {
      ++solved;
      if (r.pass()) ++passed;
      j["sigma"] = r.sigma;
      j["lambda"] = r.lambda;
      j["bound_sigma"] = r.bound_sigma;
      j["bound_lambda"] = r.bound_lambda;
      j["converged"] = r.converged;
      j["pass"] = r.pass();
    }
    rows_json.push_back(j);
  }
  return {{"rows", rows_json}, {"summary", {{"points", rows.size()}, {"solved", solved}, {"passed", passed}}}};
}

SweepTable sweep(const Problem& prob_template, const std::vector<double>& mu_grid, const std::vector<double>& c_grid,
                 double s_bar, double s_alpha, const Grid& grid, const SolverConfig& cfg, const SweepOptions& opts) {
  if (mu_grid.empty() || c_grid.empty()) throw std::invalid_argument("sweep: empty parameter grid");
  std::vector<double> mus(mu_grid);
  std::vector<double> cs(c_grid);
  std::sort(mus.begin(), mus.end());
  std::sort(cs.begin(), cs.end());
  SweepTable table{prob_template, {}};
  for (double mu : mus)
    for (double c : cs) {
      Problem p = prob_template;
      p.mu = mu;
      p.c = c;
      SweepRow row;
      row.point = classify(p, s_bar);
      table.rows.push_back(row);
    }

  std::vector<std::size_t> todo;
  if (opts.solve_every > 0)
    for (std::size_t i = 0; i < table.rows.size(); i += static_cast<std::size_t>(opts.solve_every))
      if (table.rows[i].point.regime == Regime::subcritical_exists) todo.push_back(i);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < todo.size(); k = next++) {
      SweepRow& row = table.rows[todo[k]];
      Problem p = prob_template;
      p.mu = row.point.mu;
      p.c = row.point.c;
      const SolveReport rep = minimize(p, grid, cfg);
      row.solved = true;
      row.converged = rep.converged;
      row.sigma = rep.energy.total;
      row.lambda = rep.multiplier;
      row.bound_sigma = energy_bound(p, s_alpha);
      row.bound_lambda = multiplier_bound(p, s_alpha);
      row.sigma_pass = row.sigma < row.bound_sigma;
      row.lambda_pass = row.lambda > row.bound_lambda;
    }
  };
  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, todo.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return table;
}

}  // namespace choquard
