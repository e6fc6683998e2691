#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "choquard/grid.hpp"

using namespace choquard;

namespace {

Field gaussian(const Grid& g, double a = 1.0) {
  return Field::sample(g, [a](const Point& x) { return std::exp(-a * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])); });
}

}  // namespace

TEST(Grid, RejectsBadShapes) {
  EXPECT_THROW(Grid(0, 64, 1.0), std::invalid_argument);
  EXPECT_THROW(Grid(4, 64, 1.0), std::invalid_argument);
  EXPECT_THROW(Grid(1, 4, 1.0), std::invalid_argument);
  EXPECT_THROW(Grid(1, 48, 1.0), std::invalid_argument);
  EXPECT_THROW(Grid(1, 64, 0.0), std::invalid_argument);
  EXPECT_NO_THROW(Grid(3, 8, 1.0));
}

TEST(Grid, SpacingTimesPointsIsBoxWidth) {
  for (int m : {8, 64, 1024}) {
    const Grid g(2, m, 3.7);
    EXPECT_EQ(g.spacing() * m, 2.0 * 3.7);
    EXPECT_EQ(g.size(), static_cast<std::size_t>(m) * m);
  }
}

TEST(Grid, NodesAreSymmetric) {
  const Grid g(1, 16, 2.0);
  for (long i = 0; i < 16; ++i) EXPECT_EQ(g.coordinate(i), -g.coordinate(15 - i));
}

TEST(Grid, RavelRoundTrip) {
  const Grid g(3, 8, 1.0);
  for (std::size_t i = 0; i < g.size(); i += 37) EXPECT_EQ(g.ravel(g.unravel(i)), i);
}

TEST(Field, RejectsNonFinite) {
  const Grid g(1, 8, 1.0);
  std::vector<double> v(8, 0.0);
  v[3] = std::nan("");
  EXPECT_THROW(Field(g, v), std::invalid_argument);
  EXPECT_THROW(Field(g, std::vector<double>(7, 0.0)), std::invalid_argument);
}

TEST(Integrate, ConstantAndZero) {
  const Grid g(1, 8, 1.0);
  EXPECT_DOUBLE_EQ(integrate(Field::sample(g, [](const Point&) { return 1.0; })), 2.0);
  EXPECT_EQ(integrate(Field(g)), 0.0);
}

TEST(Integrate, Gaussian) {
  EXPECT_NEAR(integrate(gaussian(Grid(1, 1024, 12.0))), std::sqrt(std::numbers::pi), 1e-10);
  EXPECT_NEAR(integrate(gaussian(Grid(2, 128, 8.0))), std::numbers::pi, 1e-10);
}

TEST(Integrate, SecondOrderOnResolvedIntegrand) {
  // exp(-x^2) sampled coarsely enough that the error is not yet spectral.
  auto err = [](int m) {
    const Grid g(1, m, 40.0);
    const Field f = Field::sample(g, [](const Point& x) { return 1.0 / (1.0 + x[0] * x[0]); });
    return std::abs(integrate(f) - 2.0 * std::atan(40.0));
  };
  EXPECT_GE(err(64) / err(128), 3.5);
  EXPECT_GE(err(128) / err(256), 3.5);
}

TEST(Norms, MassAndLp) {
  const Grid g(1, 1024, 12.0);
  const Field f = gaussian(g);
  EXPECT_NEAR(lp_norm(f, 2.0), std::pow(std::numbers::pi / 2.0, 0.25), 1e-8);
  EXPECT_NEAR(mass(f), std::sqrt(std::numbers::pi / 2.0), 1e-10);
  EXPECT_EQ(lp_norm(Field(g), 3.0), 0.0);
  EXPECT_THROW(lp_norm(f, 0.5), std::invalid_argument);
  const Grid g2(2, 16, 1.5);
  const Field c = Field::sample(g2, [](const Point&) { return 0.7; });
  EXPECT_NEAR(lp_norm(c, 3.0), 0.7 * std::pow(3.0 * 3.0, 1.0 / 3.0), 1e-13);
}

TEST(GradNorm, ConstantSineAndGaussian) {
  const Grid g(1, 64, 5.0);
  EXPECT_NEAR(grad_norm_sq(Field::sample(g, [](const Point&) { return 2.0; })), 0.0, 1e-12);
  const double L = 5.0;
  const Field s = Field::sample(g, [L](const Point& x) { return std::sin(std::numbers::pi * x[0] / L); });
  EXPECT_NEAR(grad_norm_sq(s), std::pow(std::numbers::pi / L, 2) * L, 1e-10);
  EXPECT_NEAR(grad_norm_sq(gaussian(Grid(1, 1024, 12.0))), std::sqrt(std::numbers::pi / 2.0), 1e-8);
}

TEST(GradNorm, NonNegativeOnRandomFields) {
  const Grid g(2, 32, 4.0);
  Rng rng(3);
  for (int t = 0; t < 10; ++t) EXPECT_GE(grad_norm_sq(random_smooth_field(g, rng)), 0.0);
}

TEST(Laplacian, InverseOfShiftedLaplacian) {
  const Grid g(2, 32, 4.0);
  Rng rng(5);
  const Field f = random_smooth_field(g, rng);
  const Field v = solve_shifted_laplacian(f, 1.0);
  const Field back = neg_laplacian(v) + v;
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(back[i], f[i], 1e-12);
  // <-Lap f, f> is the Dirichlet energy.
  EXPECT_NEAR(inner(neg_laplacian(f), f), grad_norm_sq(f), 1e-10 * grad_norm_sq(f));
}

TEST(Shift, RoundTripAndPeriodicity) {
  const Grid g(1, 64, 6.0);
  const Field f = gaussian(g);
  const Field same = shift(f, {0, 0, 0});
  const Field wrap = shift(f, {64, 0, 0});
  const Field back = shift(shift(f, {16, 0, 0}), {-16, 0, 0});
  for (std::size_t i = 0; i < f.size(); ++i) {
    EXPECT_EQ(same[i], f[i]);
    EXPECT_EQ(wrap[i], f[i]);
    EXPECT_EQ(back[i], f[i]);
  }
}

TEST(Shift, PreservesNorms) {
  const Grid g(2, 32, 4.0);
  Rng rng(7);
  const Field f = random_smooth_field(g, rng);
  const Field s = shift(f, {5, -3, 0});
  EXPECT_NEAR(mass(s), mass(f), 1e-14 * mass(f));
  EXPECT_NEAR(lp_norm(s, 3.0), lp_norm(f, 3.0), 1e-14 * lp_norm(f, 3.0));
  EXPECT_NEAR(grad_norm_sq(s), grad_norm_sq(f), 1e-12 * grad_norm_sq(f));
}

TEST(Dilate, IdentityMassAndScaling) {
  const Grid g(1, 2048, 16.0);
  const Field f = gaussian(g);
  const Field one = dilate(f, 1.0);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(one[i], f[i], 1e-15);
  for (double tau : {0.5, 2.0}) {
    const Field d = dilate(f, tau);
    EXPECT_NEAR(mass(d), mass(f), 1e-4);
    EXPECT_NEAR(grad_norm_sq(d) / (tau * tau * grad_norm_sq(f)), 1.0, 1e-3);
  }
  EXPECT_THROW(dilate(f, 0.0), std::invalid_argument);
}

TEST(Translate, MovesTheCentre) {
  const Grid g(1, 1024, 16.0);
  const Field f = gaussian(g);
  const Field t = translate(f, {3.0, 0.0, 0.0});
  double first = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) first += g.position(i)[0] * t[i] * t[i] * g.cell_volume();
  EXPECT_NEAR(first / mass(t), 3.0, 1e-6);
}

TEST(Regrid, SameGridIsIdentityAndEnlargedKeepsMass) {
  const Grid g(1, 256, 8.0);
  const Field f = gaussian(g);
  const Field big = regrid(f, g.enlarged(2));
  EXPECT_EQ(big.grid().half_width(), 16.0);
  EXPECT_EQ(big.grid().spacing(), g.spacing());
  EXPECT_NEAR(mass(big), mass(f), 1e-14);
}

TEST(BoundaryMass, SmallForDecayedLargeForFlat) {
  const Grid g(2, 64, 8.0);
  EXPECT_LT(boundary_mass_fraction(gaussian(g)), 1e-20);
  const Field flat = Field::sample(g, [](const Point&) { return 1.0; });
  EXPECT_NEAR(boundary_mass_fraction(flat), 1.0 - std::pow(62.0 / 64.0, 2), 1e-12);
}

TEST(Rng, DeterministicAndInRange) {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 1000; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
}

TEST(FieldIo, BinaryRoundTripIsExact) {
  const Grid g(2, 16, 3.0);
  Rng rng(11);
  const Field f = random_smooth_field(g, rng);
  std::stringstream ss;
  write_field(ss, f);
  const Field back = read_field(ss);
  ASSERT_EQ(back.grid(), g);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(back[i], f[i]);
}

TEST(FieldIo, CsvSliceHasOneRowPerNode) {
  const Grid g(2, 8, 1.0);
  std::stringstream ss;
  write_csv_slice(ss, gaussian(g));
  std::string line;
  int rows = 0;
  std::getline(ss, line);
  EXPECT_EQ(line, "x,u");
  while (std::getline(ss, line)) ++rows;
  EXPECT_EQ(rows, 8);
}
