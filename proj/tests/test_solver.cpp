#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "choquard/constants.hpp"
#include "choquard/solver.hpp"

using namespace choquard;

namespace {

const SolveReport& benchmark() {
  static const SolveReport rep = minimize(Problem{}, Grid(1, 512, 24.0), SolverConfig{});
  return rep;
}

}  // namespace

TEST(ProjectMass, Properties) {
  const Grid g(2, 32, 4.0);
  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    const Field u = random_smooth_field(g, rng);
    const Field v = project_mass(u, 1.7);
    EXPECT_NEAR(mass(v), 1.7 * 1.7, 1e-12);
    const Field w = project_mass(u * 2.0, 1.7);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(w[i], v[i], 1e-15 * std::max(1.0, std::abs(v[i])));
    const Field again = project_mass(v, 1.7);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(again[i], v[i], 1e-15 * std::max(1.0, std::abs(v[i])));
  }
  EXPECT_THROW(project_mass(Field(g), 1.0), std::invalid_argument);
}

TEST(Rearrange, PermutesValuesAndOrdersByRadius) {
  const Grid g(2, 32, 4.0);
  Rng rng(2);
  const Field u = random_smooth_field(g, rng);
  const Field r = rearrange(u);
  std::vector<double> a(u.size());
  std::vector<double> b(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    a[i] = std::abs(u[i]);
    b[i] = r[i];
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); j += 7)
      if (g.radius_sq(i) < g.radius_sq(j)) ASSERT_GE(r[i], r[j]);
}

TEST(Rearrange, RadialDecreasingFieldIsFixed) {
  const Grid g(1, 64, 4.0);
  const Field u = Field::sample(g, [](const Point& x) { return std::exp(-x[0] * x[0]); });
  const Field r = rearrange(u);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(r[i], u[i]);
}

TEST(Rearrange, NormsKineticAndNonlocal) {
  const Grid g(1, 256, 12.0);
  const RieszOperator op(g, 0.5);
  Rng rng(99);
  for (int t = 0; t < 20; ++t) {
    const Field u = random_smooth_field(g, rng);
    const Field r = rearrange(u);
    for (double q : {1.0, 2.0, 3.0, 6.0}) EXPECT_EQ(lp_integral(r, q), lp_integral(u, q));
    EXPECT_LE(grad_norm_sq(r), grad_norm_sq(u) + 1e-8);
    auto nl = [&](const Field& f) {
      const Field fp = f.map([](double v) { return std::pow(std::abs(v), 1.5); });
      return op.bilinear_energy(fp, fp);
    };
    EXPECT_GE(nl(r), nl(u) - 1e-8);
  }
}

TEST(InitialGuess, DeterministicAndOnSphere) {
  const Problem p;
  const Grid g(1, 256, 12.0);
  const Field a = initial_guess(p, g, 5);
  const Field b = initial_guess(p, g, 5);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(a[i], b[i]);
  EXPECT_NEAR(mass(a), 1.0, 1e-14);
  const Field c = initial_guess(p, g, 0);
  EXPECT_NEAR(c[128], c[127], 0.0);
}

TEST(SolverConfig, Validation) {
  SolverConfig c;
  EXPECT_NO_THROW(c.validate());
  c.backtrack_factor = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = SolverConfig{};
  c.max_iters = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = SolverConfig{};
  EXPECT_DOUBLE_EQ(c.resolved_grad_tol(Grid(1, 512, 1.0)), 1e-8 * std::sqrt(512.0));
}

TEST(Minimize, RejectsCriticalExponent) {
  Problem p;
  p.q = 6.0;
  EXPECT_THROW(minimize(p, Grid(1, 64, 8.0), SolverConfig{}), std::invalid_argument);
}

TEST(Minimize, BenchmarkConverges) {
  const SolveReport& r = benchmark();
  ASSERT_TRUE(r.converged) << r.status;
  EXPECT_LE(r.residual, r.grad_tol);
  EXPECT_LT(r.mass_error, 1e-10);
  const double s = hls_constant(1, 0.5);
  EXPECT_LT(r.energy.total, energy_bound(Problem{}, s));
  EXPECT_GT(r.multiplier, multiplier_bound(Problem{}, s));
  EXPECT_GT(r.multiplier, 0.0);
}

TEST(Minimize, TraceIsMonotone) {
  const auto& trace = benchmark().trace;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    // Enlargement regrids, so compare only within a stage.
    if (trace[i].iteration == trace[i - 1].iteration) continue;
    EXPECT_LE(trace[i].energy, trace[i - 1].energy + kRearrangeSlack + 1e-12 * std::abs(trace[i].energy));
  }
}

TEST(Minimize, MinimizerIsSymmetricAndDecreasing) {
  const Field& u = benchmark().minimizer;
  const std::size_t m = u.size();
  double peak = 0.0;
  for (std::size_t i = 0; i < m; ++i) peak = std::max(peak, u[i]);
  for (std::size_t i = 0; i < m / 2; ++i) EXPECT_NEAR(u[i], u[m - 1 - i], 1e-6 * peak);
  for (std::size_t i = m / 2; i + 1 < m; ++i) EXPECT_GE(u[i] + 1e-9 * peak, u[i + 1]);
}

TEST(Minimize, SeedsAgreeOnTheLevel) {
  SolverConfig cfg;
  cfg.seed = 7;
  const SolveReport other = minimize(Problem{}, Grid(1, 512, 24.0), cfg);
  ASSERT_TRUE(other.converged);
  EXPECT_NEAR(other.energy.total, benchmark().energy.total, 1e-6);
}

TEST(Minimize, TranslatedStartGivesTheSameLevel) {
  SolverConfig cfg;
  cfg.auto_enlarge = false;
  const Grid g(1, 512, 24.0);
  const SolveReport base = minimize(Problem{}, g, cfg);
  const SolveReport moved = minimize(Problem{}, g, cfg, shift(base.minimizer, {40, 0, 0}));
  EXPECT_NEAR(moved.energy.total, base.energy.total, 1e-8);
}

TEST(Minimize, StrictSubadditivity) {
  Problem small;
  small.c = 0.7;
  const SolveReport r = minimize(small, Grid(1, 512, 24.0), SolverConfig{});
  ASSERT_TRUE(r.converged);
  EXPECT_GT(r.energy.total, 0.49 * benchmark().energy.total + 1e-8);
}

TEST(Minimize, DegenerateProblemIsFlagged) {
  Problem p;
  p.mu = 0.0;
  SolverConfig cfg;
  cfg.max_iters = 50;
  const SolveReport r = minimize(p, Grid(1, 128, 12.0), cfg);
  EXPECT_TRUE(r.degenerate);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Minimize, SmallBoxWarns) {
  SolverConfig cfg;
  cfg.auto_enlarge = false;
  const SolveReport r = minimize(Problem{}, Grid(1, 64, 4.0), cfg);
  bool warned = false;
  for (const auto& w : r.warnings) warned = warned || w.rfind("domain too small", 0) == 0;
  EXPECT_TRUE(warned);
}

TEST(Minimize, TwoDimensionalRunConverges) {
  Problem p;
  p.dim = 2;
  p.alpha = 1.0;
  p.q = 2.5;
  SolverConfig cfg;
  cfg.auto_enlarge = false;
  const SolveReport r = minimize(p, Grid(2, 64, 12.0), cfg);
  EXPECT_TRUE(r.converged) << r.status;
  EXPECT_LT(r.energy.total, 0.0);
}

TEST(EnergyCurve, TauOneAndKineticExponent) {
  const Grid g(1, 4096, 48.0);
  const Problem p;
  const Field u = project_mass(Field::sample(g, [](const Point& x) { return std::exp(-x[0] * x[0] / 2.0); }), 1.0);
  const auto at_one = energy_curve_tau(p, u, {1.0});
  EXPECT_NEAR(at_one[0].energy.total, energy(p, u, RieszOperator(g, 0.5)).total, 1e-14);
  std::vector<double> taus{0.5, 0.7, 1.0, 1.4, 2.0};
  const auto curve = energy_curve_tau(p, u, taus);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& s : curve) {
    const double x = std::log(s.tau);
    const double y = std::log(s.energy.kinetic);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(curve.size());
  EXPECT_NEAR((n * sxy - sx * sy) / (n * sxx - sx * sx), 2.0, 0.05);
  EXPECT_THROW(energy_curve_tau(p, u, {0.0}), std::invalid_argument);
}

TEST(EnergyCurve, BubbleApproachesTheBoundFromBelow) {
  const Grid g(1, 16384, 1536.0);
  const Problem p;
  const Field u = project_mass(Field::sample(g, [](const Point& x) { return std::pow(1.0 + x[0] * x[0], -0.5); }), 1.0);
  const double bound = energy_bound(p, hls_constant(1, 0.5));
  const auto curve = energy_curve_tau(p, u, {0.25, 0.1});
  EXPECT_LT(curve[0].energy.total, bound);
  EXPECT_LT(curve[1].energy.total, bound);
  EXPECT_LT(bound - curve[1].energy.total, bound - curve[0].energy.total);
}
