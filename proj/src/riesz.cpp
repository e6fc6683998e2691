#include "choquard/riesz.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "choquard/fft.hpp"

namespace choquard {

namespace {

void check_alpha(int dim, double alpha) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("riesz: dimension must be 1, 2 or 3");
  if (!(alpha > 0.0 && alpha < dim)) throw std::invalid_argument("riesz: alpha must lie in (0, N)");
}

std::vector<int> padded_shape(const Grid& g) {
  return std::vector<int>(static_cast<std::size_t>(g.dim()), 2 * g.points_per_axis());
}

}  // namespace

double riesz_normalization(int dim, double alpha) {
  check_alpha(dim, alpha);
  using boost::math::tgamma;
  const double n = dim;
  return tgamma((n - alpha) / 2.0) / (tgamma(alpha / 2.0) * std::pow(std::numbers::pi, n / 2.0) * std::pow(2.0, alpha));
}

double lattice_zeta(int dim, double s) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("lattice_zeta: dimension must be 1, 2 or 3");
  if (!(s > 0.0 && s < dim)) throw std::invalid_argument("lattice_zeta: need 0 < s < N");
  static std::mutex mutex;
  static std::map<std::pair<int, double>, double> cache;
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find({dim, s}); it != cache.end()) return it->second;
  }
  using boost::math::tgamma;
  const double z = s / 2.0;
  const double zc = dim / 2.0 - z;
  const int r = 6;
  const int ry = dim >= 2 ? r : 0;
  const int rz = dim >= 3 ? r : 0;
  double sum = 0.0;
  for (int i = -r; i <= r; ++i)
    for (int j = -ry; j <= ry; ++j)
      for (int k = -rz; k <= rz; ++k) {
        const int n2 = i * i + j * j + k * k;
        if (n2 == 0) continue;
        const double x = std::numbers::pi * n2;
        sum += tgamma(z, x) / std::pow(x, z) + tgamma(zc, x) / std::pow(x, zc);
      }
  sum -= 1.0 / z + 1.0 / zc;
  const double value = sum * std::pow(std::numbers::pi, z) / tgamma(z);
  std::lock_guard<std::mutex> lock(mutex);
  cache.emplace(std::make_pair(dim, s), value);
  return value;
}

double cell_average_kernel(int dim, double alpha, double h) {
  check_alpha(dim, alpha);
  const double beta = alpha - dim;
  const double half = h / 2.0;
  if (dim == 1) return 2.0 * std::pow(half, alpha) / (alpha * h);
  // Divergence theorem: div(x |x|^beta) = alpha |x|^beta, so the cube
  // integral is (h/2)/alpha times the integral of |x|^beta over its 2N faces.
  using boost::math::quadrature::gauss_kronrod;
  double face = 0.0;
  if (dim == 2) {
    face = gauss_kronrod<double, 61>::integrate(
        [&](double t) { return std::pow(half * half + t * t, beta / 2.0); }, -half, half, 8, 1e-14);
  } else {
    face = gauss_kronrod<double, 61>::integrate(
        [&](double t) {
          return gauss_kronrod<double, 61>::integrate(
              [&](double u) { return std::pow(half * half + t * t + u * u, beta / 2.0); }, -half, half, 8, 1e-14);
        },
        -half, half, 8, 1e-14);
  }
  const double cube = 2.0 * dim * half * face / alpha;
  return cube / std::pow(h, dim);
}

RieszOperator::RieszOperator(const Grid& grid, double alpha, SingularRule rule)
    : grid_(grid), alpha_(alpha), normalization_(riesz_normalization(grid.dim(), alpha)), rule_(rule) {
  const int n = grid.dim();
  const long m = grid.points_per_axis();
  const long pm = 2 * m;
  const double h = grid.spacing();
  std::size_t total = 1;
  for (int a = 0; a < n; ++a) total *= static_cast<std::size_t>(pm);
  kernel_.assign(total, 0.0);
  const double singular = rule == SingularRule::lattice_zeta
                              ? -normalization_ * lattice_zeta(n, n - alpha) * std::pow(h, alpha - n)
                              : normalization_ * cell_average_kernel(n, alpha, h);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    double r2 = 0.0;
    for (int a = 0; a < n; ++a) {
      const long k = static_cast<long>(rest % static_cast<std::size_t>(pm));
      rest /= static_cast<std::size_t>(pm);
      const long off = k < m ? k : k - pm;
      r2 += static_cast<double>(off * off);
    }
    kernel_[flat] = r2 == 0.0 ? singular : normalization_ * std::pow(r2 * h * h, (alpha - n) / 2.0);
  }
  padded_fft_ = fft_for(padded_shape(grid));
  kernel_hat_.resize(padded_fft_->complex_size());
  padded_fft_->forward(kernel_, kernel_hat_);
}

double RieszOperator::kernel(const IndexOffset& offset) const {
  const long pm = 2 * grid_.points_per_axis();
  std::size_t flat = 0;
  for (int a = 0; a < grid_.dim(); ++a) {
    const long k = ((offset[static_cast<std::size_t>(a)] % pm) + pm) % pm;
    flat = flat * static_cast<std::size_t>(pm) + static_cast<std::size_t>(k);
  }
  return kernel_[flat];
}

Field RieszOperator::apply(const Field& f) const {
  if (!(f.grid() == grid_)) throw std::invalid_argument("RieszOperator::apply: grid mismatch");
  const int n = grid_.dim();
  const long m = grid_.points_per_axis();
  const long pm = 2 * m;
  std::vector<double> padded(padded_fft_->real_size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto idx = grid_.unravel(i);
    std::size_t flat = 0;
    for (int a = 0; a < n; ++a) flat = flat * static_cast<std::size_t>(pm) + static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
    padded[flat] = f[i];
  }
  std::vector<std::complex<double>> spec(padded_fft_->complex_size());
  padded_fft_->forward(padded, spec);
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= kernel_hat_[i];
  padded_fft_->inverse(spec, padded);
  const double scale = grid_.cell_volume() / static_cast<double>(padded.size());
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto idx = grid_.unravel(i);
    std::size_t flat = 0;
    for (int a = 0; a < n; ++a) flat = flat * static_cast<std::size_t>(pm) + static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
    out[i] = padded[flat] * scale;
  }
  return Field(grid_, std::move(out));
}

Field RieszOperator::apply_direct(const Field& f) const {
  if (!(f.grid() == grid_)) throw std::invalid_argument("RieszOperator::apply_direct: grid mismatch");
  if (grid_.size() > 4096) throw std::invalid_argument("RieszOperator::apply_direct: grid too large (M^N > 4096)");
  const int n = grid_.dim();
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto xi = grid_.unravel(i);
    auto term = [&](std::size_t j) {
      const auto xj = grid_.unravel(j);
      IndexOffset off{0, 0, 0};
      for (int a = 0; a < n; ++a) off[static_cast<std::size_t>(a)] = xi[static_cast<std::size_t>(a)] - xj[static_cast<std::size_t>(a)];
      return kernel(off) * f[j];
    };
    // Each cell is summed together with its mirror image x -> -x (flat index
    // size-1-j), so even inputs give bit-exactly even outputs.
    double acc = 0.0;
    for (std::size_t j = 0; j < f.size() / 2; ++j) acc += term(j) + term(f.size() - 1 - j);
    out[i] = grid_.cell_volume() * acc;
  }
  return Field(grid_, std::move(out));
}

double RieszOperator::bilinear_energy(const Field& f, const Field& g) const {
  require_same_grid(f, g, "bilinear_energy");
  return inner(apply(f), g);
}

double RieszOperator::tail_error_bound(const Field& f) const {
  const double l1 = lp_integral(f, 1.0);
  return normalization_ * std::pow(grid_.half_width(), alpha_ - grid_.dim()) * l1 * l1;
}

}  // namespace choquard
