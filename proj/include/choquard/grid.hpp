// Uniform periodic Cartesian grids on [-L, L)^N and real sample fields.
//
// Samples sit at cell midpoints x_i = -L + (i + 1/2) dx, so the reflection
// x -> -x maps the grid onto itself. Values are stored axis-major: axis 0
// varies slowest.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace choquard {

using Point = std::array<double, 3>;
using IndexOffset = std::array<long, 3>;

class Grid {
 public:
  /// Throws std::invalid_argument unless dim in {1,2,3}, M >= 8 is a power of
  /// two and L > 0.
  Grid(int dim, int points_per_axis, double half_width);

  int dim() const { return dim_; }
  int points_per_axis() const { return points_; }
  double half_width() const { return half_width_; }
  double spacing() const { return spacing_; }
  double cell_volume() const { return cell_volume_; }
  std::size_t size() const { return size_; }

  double coordinate(long i) const { return -half_width_ + (static_cast<double>(i) + 0.5) * spacing_; }

  /// Per-axis indices of a flat index; unused axes are 0.
  std::array<long, 3> unravel(std::size_t flat) const;
  std::size_t ravel(const std::array<long, 3>& idx) const;
  /// Physical position of a flat index; unused axes are 0.
  Point position(std::size_t flat) const;
  /// Squared distance of a sample point from the origin.
  double radius_sq(std::size_t flat) const;

  /// FFT shape (M repeated dim times).
  std::vector<int> shape() const { return std::vector<int>(static_cast<std::size_t>(dim_), points_); }

  /// Same dim, M scaled by `factor`, L scaled by `factor` (spacing kept).
  Grid enlarged(int factor) const;

  bool operator==(const Grid& other) const = default;

  std::string describe() const;

 private:
  int dim_;
  int points_;
  double half_width_;
  double spacing_;
  double cell_volume_;
  std::size_t size_;
};

/// Real samples of a function on a Grid. Public operations return new fields
/// and never modify their arguments.
class Field {
 public:
  explicit Field(Grid grid);
  /// Throws if the size does not match or any value is not finite.
  Field(Grid grid, std::vector<double> values);

  template <class F>
  static Field sample(const Grid& grid, F&& fn) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid.position(i));
    return Field(grid, std::move(v));
  }

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Raw access for builders; callers must keep the values finite.
  std::vector<double>& mutable_values() { return values_; }

  bool all_finite() const;

  Field operator+(const Field& other) const;
  Field operator-(const Field& other) const;
  Field operator*(double s) const;
  friend Field operator*(double s, const Field& f) { return f * s; }
  /// Pointwise product.
  Field hadamard(const Field& other) const;
  Field map(const std::function<double(double)>& fn) const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

void require_same_grid(const Field& a, const Field& b, const char* what);

/// dx^N * sum(values), compensated summation.
double integrate(const Field& f);
/// Discrete L2 inner product.
double inner(const Field& a, const Field& b);
double mass(const Field& f);
/// (integral |f|^r)^(1/r); r >= 1.
double lp_norm(const Field& f, double r);
/// integral |f|^r without the outer root.
double lp_integral(const Field& f, double r);

/// integral |grad f|^2 from the Fourier multiplier i*xi on the periodic box.
double grad_norm_sq(const Field& f);
/// -Laplacian via the same multiplier |xi|^2.
Field neg_laplacian(const Field& f);
/// 0.5 * <grad a, grad b>, spectral.
double grad_inner(const Field& a, const Field& b);
/// Solves (-Laplacian + shift) v = f spectrally; shift > 0.
Field solve_shifted_laplacian(const Field& f, double shift);

/// Circular shift of the sample array: out[i] = f[i - offset].
Field shift(const Field& f, const IndexOffset& offset);
/// tau^(N/2) f(tau x) by multilinear interpolation, zero outside the box.
Field dilate(const Field& f, double tau);
/// f(x - a) by multilinear interpolation, zero outside the box.
Field translate(const Field& f, const Point& a);
/// Interpolates f onto another grid of the same dimension (zero outside).
Field regrid(const Field& f, const Grid& target);
/// Multilinear interpolation of f at an arbitrary point (zero outside the
/// sample hull).
double interpolate(const Field& f, const Point& x);

/// Fraction of the mass carried by the outermost layer of cells.
double boundary_mass_fraction(const Field& f);

/// Deterministic 64-bit generator with a portable uniform mapping.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

/// Sum of a few random Gaussians of random sign/centre/width, supported well
/// inside the box. Smooth and decaying; used for property checks.
Field random_smooth_field(const Grid& grid, Rng& rng, bool positive = false);

/// Binary format: one JSON header line {"dim","M","L","count"} followed by
/// little-endian float64 values.
void write_field(std::ostream& os, const Field& f);
Field read_field(std::istream& is);
void save_field(const std::filesystem::path& path, const Field& f);
Field load_field(const std::filesystem::path& path);

/// CSV "x,u" of the line through the origin along axis 0 (the other axes at
/// the sample nearest 0).
void write_csv_slice(std::ostream& os, const Field& f);

}  // namespace choquard
