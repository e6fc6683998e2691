#include "choquard/constants.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace choquard {

namespace {

using boost::math::quadrature::exp_sinh;
using boost::math::quadrature::gauss_kronrod;
using boost::math::quadrature::tanh_sinh;

// Area of the unit sphere S^{N-1} in R^N (2 for N = 1).
double sphere_area(int dim) {
  const double n = dim;
  return 2.0 * std::pow(std::numbers::pi, n / 2.0) / boost::math::tgamma(n / 2.0);
}

double max_subcritical(int dim) { return dim <= 2 ? std::numeric_limits<double>::infinity() : 2.0 * dim / (dim - 2.0); }

void check_gn_exponent(int dim, double r) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("gn_constant: N must be 1, 2 or 3");
  if (!(r > 2.0 && r < max_subcritical(dim)))
    throw std::invalid_argument("gn_constant: need 2 < r < 2N/(N-2)^+");
}

// integral over [0, inf) of g, with breakpoints `cuts` (ascending, first 0).
// The first piece uses tanh-sinh so an integrable endpoint singularity at 0
// is harmless; the tail uses exp-sinh.
double half_line(const std::function<double(double)>& g, std::vector<double> cuts, double tol) {
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  tanh_sinh<double> ts;
  exp_sinh<double> es;
  auto fn = [&g](double x) { return g(x); };
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (i == 0)
      total += ts.integrate(fn, cuts[0], cuts[1], tol);
    else
      total += gauss_kronrod<double, 31>::integrate(fn, cuts[i], cuts[i + 1], 12, tol);
  }
  total += es.integrate(fn, cuts.back(), std::numeric_limits<double>::infinity(), tol);
  return total;
}

}  // namespace

double gn_quotient(const Field& u, double r) {
  const int n = u.grid().dim();
  const double eta = n / 2.0 - n / r;
  const double power = lp_integral(u, r);
  const double m = std::sqrt(mass(u));
  const double k = std::sqrt(grad_norm_sq(u));
  return power / (std::pow(m, r * (1.0 - eta)) * std::pow(k, r * eta));
}

double RadialIntegrals::quotient(int dim, double r) const {
  const double eta = dim / 2.0 - dim / r;
  return power / (std::pow(mass, r * (1.0 - eta) / 2.0) * std::pow(kinetic, r * eta / 2.0));
}

double gn_constant_soliton_1d(double r) {
  check_gn_exponent(1, r);
  const double amp = std::pow(r / 2.0, 1.0 / (r - 2.0));
  const double b = (r - 2.0) / 2.0;
  const double e = 2.0 / (r - 2.0);
  auto w = [&](double x) { return amp * std::pow(1.0 / std::cosh(b * x), e); };
  // w' = -amp sech^e(bx) tanh(bx) since e b = 1.
  auto dw = [&](double x) { return -w(x) * std::tanh(b * x); };
  const double tol = 1e-14;
  RadialIntegrals in;
  in.mass = 2.0 * half_line([&](double x) { return w(x) * w(x); }, {0.0, 1.0, 4.0}, tol);
  in.kinetic = 2.0 * half_line([&](double x) { return dw(x) * dw(x); }, {0.0, 1.0, 4.0}, tol);
  in.power = 2.0 * half_line([&](double x) { return std::pow(w(x), r); }, {0.0, 1.0, 4.0}, tol);
  return in.quotient(1, r);
}

ShootingResult shoot_ground_state(int dim, double r) {
  check_gn_exponent(dim, r);
  namespace ode = boost::numeric::odeint;
  using State = std::array<double, 5>;  // w, w', mass, kinetic, power (radial weights)
  const double n = dim;
  const double rho_max = 40.0;

  auto rhs = [&](const State& s, State& d, double rho) {
    const double w = s[0];
    const double wp = s[1];
    const double wpos = std::max(w, 0.0);
    const double jac = std::pow(rho, n - 1.0);
    d[0] = wp;
    d[1] = -(n - 1.0) / rho * wp + w - std::pow(wpos, r - 1.0);
    d[2] = jac * w * w;
    d[3] = jac * wp * wp;
    d[4] = jac * std::pow(wpos, r);
  };

  // +1: turned upward before crossing (w0 too small); -1: crossed zero
  // (w0 too large); 0: reached rho_max.
  auto run = [&](double w0, State& out, double& stop) {
    const double curv = (w0 - std::pow(w0, r - 1.0)) / n;
    const double rho0 = 1e-4;
    State s{w0 + 0.5 * curv * rho0 * rho0, curv * rho0, std::pow(rho0, n) / n * w0 * w0, 0.0,
            std::pow(rho0, n) / n * std::pow(w0, r)};
    auto stepper = ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_dopri5<State>());
    double rho = rho0;
    double dt = 1e-3;
    int sign = 0;
    while (rho < rho_max) {
      State trial = s;
      double t = rho;
      double h = std::min(dt, rho_max - rho);
      if (stepper.try_step(rhs, trial, t, h) == ode::fail) {
        dt = h;
        continue;
      }
      dt = h;
      if (trial[0] <= 0.0) {
        sign = -1;
        break;
      }
      if (trial[1] >= 0.0) {
        sign = 1;
        break;
      }
      s = trial;
      rho = t;
    }
    out = s;
    stop = rho;
    return sign;
  };

  State st{};
  double stop = 0.0;
  double lo = 1.0;
  double hi = 2.0;
  while (run(hi, st, stop) != -1) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw std::runtime_error("shoot_ground_state: no overshoot found");
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (run(mid, st, stop) == -1)
      hi = mid;
    else
      lo = mid;
  }
  run(lo, st, stop);
  const double area = sphere_area(dim);
  ShootingResult res;
  res.w0 = lo;
  res.stop_radius = stop;
  res.integrals.mass = area * st[2];
  res.integrals.kinetic = area * st[3];
  res.integrals.power = area * st[4];
  return res;
}

double gn_constant_shooting(int dim, double r) { return shoot_ground_state(dim, r).integrals.quotient(dim, r); }

double gn_constant(int dim, double r) {
  check_gn_exponent(dim, r);
  return dim == 1 ? gn_constant_soliton_1d(r) : gn_constant_shooting(dim, r);
}

double hls_bubble_quotient(int dim, double alpha, double amplitude, double delta, HlsRoute route) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("hls_constant: N must be 1, 2 or 3");
  if (!(alpha > 0.0 && alpha < dim)) throw std::invalid_argument("hls_constant: alpha must lie in (0, N)");
  if (!(amplitude > 0.0 && delta > 0.0)) throw std::invalid_argument("hls_constant: amplitude and delta must be > 0");
  const double n = dim;
  const double p = (n + alpha) / n;
  const double a_norm = riesz_normalization(dim, alpha);
  auto u = [&](double rho) { return amplitude * std::pow(delta / (delta * delta + rho * rho), n / 2.0); };
  auto f = [&](double rho) { return std::pow(u(rho), p); };
  const double tol = 1e-11;

  const double area = sphere_area(dim);
  double b = 0.0;
  if (route == HlsRoute::physical_1d) {
    if (dim != 1) throw std::invalid_argument("hls_constant: physical-space route is 1D only");
    // (I * f)(s) = A int_0^inf rho^(alpha-1) (f(s + rho) + f(|s - rho|)) drho.
    auto potential = [&](double s) {
      auto g = [&](double rho) { return std::pow(rho, alpha - 1.0) * (f(s + rho) + f(std::abs(s - rho))); };
      std::vector<double> cuts{0.0, 0.5 * delta, s, s + delta, 2.0 * (s + delta)};
      if (s > delta) cuts.push_back(s - delta);
      return a_norm * half_line(g, cuts, tol);
    };
    b = area * half_line([&](double s) { return f(s) * potential(s); }, {0.0, delta, 4.0 * delta}, 1e-10);
  } else {
    // Fourier side: B = int |f^(xi)|^2 (2 pi |xi|)^(-alpha) dxi, and
    // (1 + |x|^2)^(-k) has transform 2 pi^k / Gamma(k) |xi|^(k - N/2) K_(k - N/2)(2 pi |xi|).
    const double k = (n + alpha) / 2.0;
    const double scale = std::pow(amplitude, p) * std::pow(delta, n - k);
    const double pre = 2.0 * std::pow(std::numbers::pi, k) / boost::math::tgamma(k);
    auto fhat = [&](double xi) {
      const double z = delta * xi;
      if (z > 100.0) return 0.0;
      if (z < 1e-200) return scale * std::pow(std::numbers::pi, n / 2.0) * boost::math::tgamma(k - n / 2.0) / boost::math::tgamma(k);
      return scale * pre * std::pow(z, k - n / 2.0) * boost::math::cyl_bessel_k(k - n / 2.0, 2.0 * std::numbers::pi * z);
    };
    // xi = t^2 removes the xi^(N-1-alpha) endpoint singularity.
    b = area * half_line(
                   [&](double t) {
                     if (t == 0.0) return 0.0;
                     const double xi = t * t;
                     const double fh = fhat(xi);
                     if (fh == 0.0) return 0.0;
                     return 2.0 * std::pow(t, 2.0 * (n - 1.0 - alpha) + 1.0) * fh * fh * std::pow(2.0 * std::numbers::pi, -alpha);
                   },
                   {0.0, 0.3 / std::sqrt(delta), 1.0 / std::sqrt(delta)}, 1e-13);
  }
  const double m = area * half_line([&](double s) { return std::pow(s, n - 1.0) * u(s) * u(s); },
                                    {0.0, delta, 4.0 * delta}, 1e-13);
  return m / std::pow(b, n / (n + alpha));
}

double hls_constant(int dim, double alpha) { return hls_bubble_quotient(dim, alpha, 1.0, 1.0); }

double hls_quotient(const Field& u, const RieszOperator& riesz) {
  const int n = u.grid().dim();
  const double p = (n + riesz.alpha()) / n;
  const Field f = u.map([p](double v) { return std::pow(std::abs(v), p); });
  return mass(u) / std::pow(riesz.bilinear_energy(f, f), n / (n + riesz.alpha()));
}

namespace {

std::string key_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

nlohmann::json read_cache_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) return nlohmann::json::object();
  try {
    auto j = nlohmann::json::parse(is);
    return j.is_object() ? j : nlohmann::json::object();
  } catch (const nlohmann::json::exception&) {
    return nlohmann::json::object();
  }
}

}  // namespace

ConstantsCache::ConstantsCache(std::filesystem::path path) : path_(std::move(path)) {}

std::filesystem::path ConstantsCache::default_path() {
  if (const char* env = std::getenv("CHOQUARD_CACHE"); env && *env) return env;
  return "choquard_constants.json";
}

ConstantsCache& ConstantsCache::instance() {
  static ConstantsCache cache(default_path());
  return cache;
}

std::optional<double> ConstantsCache::lookup(const std::string& key) const {
  std::shared_lock lock(mutex_);
  const auto j = read_cache_file(path_);
  if (auto it = j.find(key); it != j.end() && it->contains("value")) return it->at("value").get<double>();
  return std::nullopt;
}

void ConstantsCache::store(const std::string& key, double value, const std::string& method, double tolerance) {
  std::unique_lock lock(mutex_);
  auto j = read_cache_file(path_);
  j[key] = {{"value", value}, {"method", method}, {"tolerance", tolerance}};
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  auto tmp = path_;
  tmp += ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw std::runtime_error("ConstantsCache: cannot write " + tmp.string());
    os << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path_);
}

double ConstantsCache::gn(int dim, double r) {
  const std::string key = "N=" + std::to_string(dim) + "/gn/r=" + key_number(r);
  if (auto v = lookup(key)) return *v;
  const double v = gn_constant(dim, r);
  store(key, v, dim == 1 ? "closed-form soliton quadrature" : "radial shooting", dim == 1 ? 1e-12 : 1e-6);
  return v;
}

double ConstantsCache::hls(int dim, double alpha) {
  const std::string key = "N=" + std::to_string(dim) + "/hls/alpha=" + key_number(alpha);
  if (auto v = lookup(key)) return *v;
  const double v = hls_constant(dim, alpha);
  store(key, v, "bubble quadrature", dim == 1 ? 1e-9 : 1e-6);
  return v;
}

}  // namespace choquard
