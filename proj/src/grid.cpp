#include "choquard/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "choquard/fft.hpp"

namespace choquard {

namespace {

bool is_power_of_two(int m) { return m > 0 && (m & (m - 1)) == 0; }

// Neumaier summation; quadrature sums over 10^5+ terms feed 1e-12 checks.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// |xi|^2 for every r2c coefficient of the grid's shape.
std::vector<double> wavenumber_sq(const Grid& g) {
  const long m = g.points_per_axis();
  const long half = m / 2 + 1;
  const double k0 = std::numbers::pi / g.half_width();
  const int n = g.dim();
  std::size_t count = static_cast<std::size_t>(half);
  for (int a = 0; a + 1 < n; ++a) count *= static_cast<std::size_t>(m);
  std::vector<double> out(count);
  for (std::size_t flat = 0; flat < count; ++flat) {
    std::size_t rest = flat;
    double s = 0.0;
    const long last = static_cast<long>(rest % static_cast<std::size_t>(half));
    rest /= static_cast<std::size_t>(half);
    s += std::pow(k0 * static_cast<double>(last), 2);
    for (int a = 0; a + 1 < n; ++a) {
      const long k = static_cast<long>(rest % static_cast<std::size_t>(m));
      rest /= static_cast<std::size_t>(m);
      s += std::pow(k0 * static_cast<double>(RealFft::signed_mode(k, m)), 2);
    }
    out[flat] = s;
  }
  return out;
}

// Weight of each r2c coefficient in a full-spectrum Parseval sum.
std::vector<double> hermitian_weights(const Grid& g) {
  const long m = g.points_per_axis();
  const long half = m / 2 + 1;
  std::size_t count = static_cast<std::size_t>(half);
  for (int a = 0; a + 1 < g.dim(); ++a) count *= static_cast<std::size_t>(m);
  std::vector<double> w(count);
  for (std::size_t flat = 0; flat < count; ++flat) {
    const long last = static_cast<long>(flat % static_cast<std::size_t>(half));
    w[flat] = (last == 0 || last == m / 2) ? 1.0 : 2.0;
  }
  return w;
}

std::vector<std::complex<double>> spectrum(const Field& f) {
  auto plan = fft_for(f.grid().shape());
  std::vector<std::complex<double>> out(plan->complex_size());
  plan->forward(f.values(), out);
  return out;
}

Field from_spectrum(const Grid& g, const std::vector<std::complex<double>>& s) {
  auto plan = fft_for(g.shape());
  std::vector<double> v(g.size());
  plan->inverse(s, v);
  const double scale = 1.0 / static_cast<double>(g.size());
  for (double& x : v) x *= scale;
  return Field(g, std::move(v));
}

}  // namespace

Grid::Grid(int dim, int points_per_axis, double half_width)
    : dim_(dim), points_(points_per_axis), half_width_(half_width) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("Grid: dimension must be 1, 2 or 3");
  if (points_per_axis < 8 || !is_power_of_two(points_per_axis))
    throw std::invalid_argument("Grid: points per axis must be a power of two >= 8");
  if (!(half_width > 0.0) || !std::isfinite(half_width)) throw std::invalid_argument("Grid: half width must be > 0");
  spacing_ = 2.0 * half_width / points_per_axis;
  cell_volume_ = std::pow(spacing_, dim);
  size_ = 1;
  for (int a = 0; a < dim; ++a) size_ *= static_cast<std::size_t>(points_per_axis);
}

std::array<long, 3> Grid::unravel(std::size_t flat) const {
  std::array<long, 3> idx{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[static_cast<std::size_t>(a)] = static_cast<long>(flat % static_cast<std::size_t>(points_));
    flat /= static_cast<std::size_t>(points_);
  }
  return idx;
}

std::size_t Grid::ravel(const std::array<long, 3>& idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) flat = flat * static_cast<std::size_t>(points_) + static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
  return flat;
}

Point Grid::position(std::size_t flat) const {
  const auto idx = unravel(flat);
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) p[static_cast<std::size_t>(a)] = coordinate(idx[static_cast<std::size_t>(a)]);
  return p;
}

double Grid::radius_sq(std::size_t flat) const {
  const Point p = position(flat);
  return p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
}

Grid Grid::enlarged(int factor) const { return Grid(dim_, points_ * factor, half_width_ * factor); }

std::string Grid::describe() const {
  std::ostringstream os;
  os << "Grid(N=" << dim_ << ", M=" << points_ << ", L=" << half_width_ << ")";
  return os.str();
}

Field::Field(Grid grid) : grid_(grid), values_(grid.size(), 0.0) {}

Field::Field(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw std::invalid_argument("Field: value count does not match grid");
  if (!all_finite()) throw std::invalid_argument("Field: non-finite value");
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_grid(const Field& a, const Field& b, const char* what) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

Field Field::operator+(const Field& other) const {
  require_same_grid(*this, other, "Field::operator+");
  std::vector<double> v(values_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += other.values_[i];
  return Field(grid_, std::move(v));
}

Field Field::operator-(const Field& other) const {
  require_same_grid(*this, other, "Field::operator-");
  std::vector<double> v(values_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= other.values_[i];
  return Field(grid_, std::move(v));
}

Field Field::operator*(double s) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= s;
  return Field(grid_, std::move(v));
}

Field Field::hadamard(const Field& other) const {
  require_same_grid(*this, other, "Field::hadamard");
  std::vector<double> v(values_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= other.values_[i];
  return Field(grid_, std::move(v));
}

Field Field::map(const std::function<double(double)>& fn) const {
  std::vector<double> v(values_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(values_[i]);
  return Field(grid_, std::move(v));
}

double integrate(const Field& f) {
  CompensatedSum s;
  for (double v : f.values()) s.add(v);
  return f.grid().cell_volume() * s.value();
}

double inner(const Field& a, const Field& b) {
  require_same_grid(a, b, "inner");
  CompensatedSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
  return a.grid().cell_volume() * s.value();
}

double mass(const Field& f) { return inner(f, f); }

double lp_integral(const Field& f, double r) {
  if (!(r >= 1.0)) throw std::invalid_argument("lp_norm: exponent must be >= 1");
  CompensatedSum s;
  for (double v : f.values()) s.add(std::pow(std::abs(v), r));
  return f.grid().cell_volume() * s.value();
}

double lp_norm(const Field& f, double r) { return std::pow(lp_integral(f, r), 1.0 / r); }

double grad_inner(const Field& a, const Field& b) {
  require_same_grid(a, b, "grad_inner");
  const auto fa = spectrum(a);
  const auto fb = spectrum(b);
  const auto k2 = wavenumber_sq(a.grid());
  const auto w = hermitian_weights(a.grid());
  CompensatedSum s;
  for (std::size_t i = 0; i < fa.size(); ++i) s.add(w[i] * k2[i] * std::real(fa[i] * std::conj(fb[i])));
  // Parseval: sum |f|^2 dx^N = dx^N / M^N * sum |F|^2.
  return 0.5 * s.value() * a.grid().cell_volume() / static_cast<double>(a.size());
}

double grad_norm_sq(const Field& f) { return std::max(0.0, 2.0 * grad_inner(f, f)); }

Field neg_laplacian(const Field& f) {
  auto s = spectrum(f);
  const auto k2 = wavenumber_sq(f.grid());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= k2[i];
  return from_spectrum(f.grid(), s);
}

Field solve_shifted_laplacian(const Field& f, double shift) {
  if (!(shift > 0.0)) throw std::invalid_argument("solve_shifted_laplacian: shift must be > 0");
  auto s = spectrum(f);
  const auto k2 = wavenumber_sq(f.grid());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] /= (k2[i] + shift);
  return from_spectrum(f.grid(), s);
}

Field shift(const Field& f, const IndexOffset& offset) {
  const Grid& g = f.grid();
  const long m = g.points_per_axis();
  std::vector<double> out(f.size());
  for (std::size_t flat = 0; flat < f.size(); ++flat) {
    auto idx = g.unravel(flat);
    for (int a = 0; a < g.dim(); ++a) {
      auto& k = idx[static_cast<std::size_t>(a)];
      k = ((k + offset[static_cast<std::size_t>(a)]) % m + m) % m;
    }
    out[g.ravel(idx)] = f[flat];
  }
  return Field(g, std::move(out));
}

double interpolate(const Field& f, const Point& x) {
  const Grid& g = f.grid();
  const int n = g.dim();
  const long m = g.points_per_axis();
  std::array<long, 3> base{0, 0, 0};
  std::array<double, 3> frac{0.0, 0.0, 0.0};
  for (int a = 0; a < n; ++a) {
    const double t = (x[static_cast<std::size_t>(a)] + g.half_width()) / g.spacing() - 0.5;
    const double fl = std::floor(t);
    if (fl < -1.0 || fl > static_cast<double>(m - 1)) return 0.0;
    base[static_cast<std::size_t>(a)] = static_cast<long>(fl);
    frac[static_cast<std::size_t>(a)] = t - fl;
  }
  double acc = 0.0;
  for (int corner = 0; corner < (1 << n); ++corner) {
    std::array<long, 3> idx{0, 0, 0};
    double w = 1.0;
    bool inside = true;
    for (int a = 0; a < n; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      const int bit = (corner >> a) & 1;
      idx[ua] = base[ua] + bit;
      w *= bit ? frac[ua] : 1.0 - frac[ua];
      if (idx[ua] < 0 || idx[ua] >= m) inside = false;
    }
    if (inside && w != 0.0) acc += w * f[g.ravel(idx)];
  }
  return acc;
}

Field dilate(const Field& f, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("dilate: tau must be > 0");
  if (tau == 1.0) return f;
  const Grid& g = f.grid();
  const double amp = std::pow(tau, 0.5 * g.dim());
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    Point p = g.position(i);
    for (double& c : p) c *= tau;
    out[i] = amp * interpolate(f, p);
  }
  return Field(g, std::move(out));
}

Field translate(const Field& f, const Point& a) {
  const Grid& g = f.grid();
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    Point p = g.position(i);
    for (std::size_t k = 0; k < 3; ++k) p[k] -= a[k];
    out[i] = interpolate(f, p);
  }
  return Field(g, std::move(out));
}

Field regrid(const Field& f, const Grid& target) {
  if (target.dim() != f.grid().dim()) throw std::invalid_argument("regrid: dimension mismatch");
  if (target == f.grid()) return f;
  std::vector<double> out(target.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = interpolate(f, target.position(i));
  return Field(target, std::move(out));
}

double boundary_mass_fraction(const Field& f) {
  const Grid& g = f.grid();
  const long m = g.points_per_axis();
  CompensatedSum edge;
  CompensatedSum total;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double v = f[i] * f[i];
    total.add(v);
    const auto idx = g.unravel(i);
    bool on_edge = false;
    for (int a = 0; a < g.dim(); ++a) {
      const long k = idx[static_cast<std::size_t>(a)];
      if (k == 0 || k == m - 1) on_edge = true;
    }
    if (on_edge) edge.add(v);
  }
  return total.value() > 0.0 ? edge.value() / total.value() : 0.0;
}

// splitmix64: tiny, portable, and the output sequence is fixed by the seed
// on every platform (unlike std::uniform_real_distribution).
Rng::Rng(std::uint64_t seed) : state_(seed) {}

double Rng::uniform() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

Field random_smooth_field(const Grid& grid, Rng& rng, bool positive) {
  const int bumps = 3 + static_cast<int>(rng.uniform() * 3.0);
  const double L = grid.half_width();
  struct Bump {
    Point centre;
    double width;
    double amp;
  };
  std::vector<Bump> list;
  for (int b = 0; b < bumps; ++b) {
    Bump bump{{0.0, 0.0, 0.0}, rng.uniform(0.06, 0.14) * L, rng.uniform(0.3, 1.0)};
    for (int a = 0; a < grid.dim(); ++a) bump.centre[static_cast<std::size_t>(a)] = rng.uniform(-0.25, 0.25) * L;
    if (!positive && rng.uniform() < 0.3) bump.amp = -0.5 * bump.amp;
    list.push_back(bump);
  }
  return Field::sample(grid, [&](const Point& x) {
    double s = 0.0;
    for (const auto& b : list) {
      double r2 = 0.0;
      for (std::size_t k = 0; k < 3; ++k) r2 += (x[k] - b.centre[k]) * (x[k] - b.centre[k]);
      s += b.amp * std::exp(-r2 / (2.0 * b.width * b.width));
    }
    return s;
  });
}

}  // namespace choquard
