#include <gtest/gtest.h>

#include <cmath>

#include "choquard/constants.hpp"
#include "choquard/riesz.hpp"
#include "oracles.hpp"

using namespace choquard;

TEST(Riesz, NormalizationMatchesClosedForm) {
  for (int n = 1; n <= 3; ++n)
    for (double a : {0.25, 0.5, 0.9})
      EXPECT_NEAR(riesz_normalization(n, a * n), oracle::riesz_constant(n, a * n),
                  1e-14 * oracle::riesz_constant(n, a * n));
}

TEST(Riesz, RejectsAlphaOutsideRange) {
  const Grid g(1, 16, 1.0);
  EXPECT_THROW(RieszOperator(g, 0.0), std::invalid_argument);
  EXPECT_THROW(RieszOperator(g, 1.0), std::invalid_argument);
}

TEST(Riesz, LatticeZetaValues) {
  // Z_1(s) = 2 zeta(s).
  EXPECT_NEAR(lattice_zeta(1, 0.5), 2.0 * -1.4603545088095868, 1e-13);
  EXPECT_NEAR(lattice_zeta(2, 1.5), -10.077559478793152, 1e-11);
  EXPECT_NEAR(lattice_zeta(3, 1.0), -2.837297479480619, 1e-11);
  EXPECT_NEAR(lattice_zeta(3, 2.5), -21.391534098334251, 1e-10);
}

TEST(Riesz, CellAverage1dIsExact) {
  // Mean of |x|^(a-1) over [-h/2, h/2] = (h/2)^(a-1) / a.
  for (double a : {0.25, 0.5, 0.75})
    EXPECT_NEAR(cell_average_kernel(1, a, 0.3), std::pow(0.15, a - 1.0) / a, 1e-12 * std::pow(0.15, a - 1.0) / a);
  EXPECT_NEAR(cell_average_kernel(2, 1.0, 1.0), 3.525494348078171, 1e-10);
}

TEST(Riesz, KernelIsEven) {
  const Grid g(2, 16, 2.0);
  const RieszOperator op(g, 1.0);
  for (long i = -5; i <= 5; ++i)
    for (long j = -5; j <= 5; ++j) EXPECT_EQ(op.kernel({i, j, 0}), op.kernel({-i, -j, 0}));
}

TEST(Riesz, ZeroAndLinearity) {
  const Grid g(1, 64, 8.0);
  const RieszOperator op(g, 0.5);
  const Field z = op.apply(Field(g));
  for (double v : z.values()) EXPECT_EQ(v, 0.0);
  Rng rng(1);
  const Field f = random_smooth_field(g, rng);
  const Field h = random_smooth_field(g, rng);
  const Field lhs = op.apply(f * 2.0 + h * -0.5);
  const Field rhs = op.apply(f) * 2.0 + op.apply(h) * -0.5;
  double scale = 0.0;
  for (double v : rhs.values()) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(lhs[i], rhs[i], 1e-12 * scale);
}

TEST(Riesz, FftMatchesDirectSum) {
  for (auto [dim, m, L] : {std::tuple{1, 64, 8.0}, std::tuple{2, 32, 6.0}}) {
    const Grid g(dim, m, L);
    const RieszOperator op(g, 0.5 * dim);
    Rng rng(17);
    for (int t = 0; t < 20; ++t) {
      const Field f = random_smooth_field(g, rng);
      EXPECT_LT(oracle::relative_l2(op.apply(f), op.apply_direct(f)), 1e-6);
    }
  }
}

TEST(Riesz, DirectGuard) {
  const Grid g(2, 128, 1.0);
  EXPECT_THROW(RieszOperator(g, 1.0).apply_direct(Field(g)), std::invalid_argument);
}

TEST(Riesz, DeltaReproducesKernel) {
  const Grid g(1, 32, 4.0);
  const RieszOperator op(g, 0.5);
  Field d(g);
  const long centre = 16;
  d.mutable_values()[centre] = 1.0 / g.cell_volume();
  const Field out = op.apply_direct(d);
  for (long i = 0; i < 32; ++i) {
    if (i == centre) continue;
    const double x = std::abs(g.coordinate(i) - g.coordinate(centre));
    EXPECT_NEAR(out[static_cast<std::size_t>(i)], op.normalization() * std::pow(x, -0.5), 1e-12);
  }
}

TEST(Riesz, EvenInputGivesEvenOutputExactly) {
  const Grid g(1, 64, 5.0);
  const RieszOperator op(g, 0.5);
  const Field f = Field::sample(g, [](const Point& x) { return std::exp(-x[0] * x[0]) * (1.0 + x[0] * x[0]); });
  const Field out = op.apply_direct(f);
  for (std::size_t i = 0; i < 32; ++i) EXPECT_EQ(out[i], out[63 - i]);
}

TEST(Riesz, PositivityAndSymmetryOfBilinearForm) {
  const Grid g(2, 32, 5.0);
  const RieszOperator op(g, 1.0);
  Rng rng(23);
  for (int t = 0; t < 10; ++t) {
    const Field f = random_smooth_field(g, rng);
    const Field h = random_smooth_field(g, rng);
    const double bfh = op.bilinear_energy(f, h);
    const double bhf = op.bilinear_energy(h, f);
    EXPECT_NEAR(bfh, bhf, 1e-12 * std::max(1.0, std::abs(bfh)));
    EXPECT_GE(op.bilinear_energy(f, f), -1e-10);
    const Field pos = random_smooth_field(g, rng, true);
    const Field ip = op.apply(pos);
    for (double v : ip.values()) EXPECT_GE(v, 0.0);
  }
}

TEST(Riesz, GaussianProfileConverges) {
  for (auto [dim, a] : {std::pair{1, 0.5}, std::pair{2, 1.0}, std::pair{3, 2.0}}) {
    double prev = 1.0;
    for (int m : {16, 32, 64}) {
      if (dim == 3 && m == 64) break;
      const Grid g(dim, m, 8.0);
      const Field f = Field::sample(
          g, [](const Point& x) { return std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 2.0); });
      const Field out = RieszOperator(g, a).apply(f);
      double err = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double r2 = g.radius_sq(i);
        if (r2 > 4.0) continue;
        const double exact = oracle::gaussian_riesz(dim, a, std::sqrt(r2));
        err = std::max(err, std::abs(out[i] - exact) / exact);
      }
      if (m > 16) EXPECT_LT(err, prev) << "dim " << dim << " M " << m;
      prev = err;
    }
    EXPECT_LT(prev, 5e-3) << "dim " << dim;
  }
}

TEST(Riesz, BubbleEnergyMatchesSharpConstant) {
  // For the extremal, B(u^p, u^p) = (||u||^2 / S_alpha)^{(N+alpha)/N}.
  const Grid g(1, 16384, 1536.0);
  const RieszOperator op(g, 0.5);
  const Field u = Field::sample(g, [](const Point& x) { return std::pow(1.0 / (1.0 + x[0] * x[0]), 0.5); });
  const Field up = u.map([](double v) { return std::pow(v, 1.5); });
  const double expected = std::pow(mass(u) / oracle::hls_constant_sphere(1, 0.5), 1.5);
  EXPECT_NEAR(op.bilinear_energy(up, up) / expected, 1.0, 2e-3);
}

TEST(Riesz, NonlocalTermIsDilationInvariant) {
  const Grid g(1, 8192, 64.0);
  const RieszOperator op(g, 0.5);
  const Field u = Field::sample(g, [](const Point& x) { return std::exp(-x[0] * x[0] / 2.0); });
  auto nonlocal = [&](const Field& f) {
    const Field fp = f.map([](double v) { return std::pow(std::abs(v), 1.5); });
    return op.bilinear_energy(fp, fp);
  };
  const double base = nonlocal(u);
  for (double tau : {0.5, 2.0}) EXPECT_NEAR(nonlocal(dilate(u, tau)) / base, 1.0, 2e-3);
}

TEST(Riesz, TailBoundShrinksWithBox) {
  const Grid small(1, 256, 8.0);
  const Grid large(1, 1024, 32.0);
  auto bump = [](const Grid& g) { return Field::sample(g, [](const Point& x) { return std::exp(-x[0] * x[0]); }); };
  const double a = RieszOperator(small, 0.5).tail_error_bound(bump(small));
  const double b = RieszOperator(large, 0.5).tail_error_bound(bump(large));
  EXPECT_GT(a, 0.0);
  EXPECT_NEAR(a / b, 2.0, 1e-10);
}
