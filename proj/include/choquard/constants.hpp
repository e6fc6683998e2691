// Sharp constants:
//   S_bar(N, r): best constant in int |u|^r <= S_bar ||u||_2^{r(1-eta_r)} ||grad u||_2^{r eta_r},
//   S_alpha(N, alpha): inf of ||u||_2^2 / (int (I_alpha * |u|^p)|u|^p)^{N/(N+alpha)}.
#pragma once

#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <string>

#include "choquard/grid.hpp"
#include "choquard/riesz.hpp"

namespace choquard {

/// GN quotient int |u|^r / (||u||_2^{r(1-eta_r)} ||grad u||_2^{r eta_r}) on a
/// grid field.
double gn_quotient(const Field& u, double r);

/// Mass, kinetic and L^r integrals of a radial profile, already multiplied by
/// the sphere area.
struct RadialIntegrals {
  double mass = 0.0;
  double kinetic = 0.0;
  double power = 0.0;
  double quotient(int dim, double r) const;
};

/// Ground state of -w'' - (N-1)/rho w' + w = w^{r-1} by shooting on w(0):
/// bisection to 1e-10, adaptive Dormand-Prince, integration to rho = 40.
struct ShootingResult {
  double w0 = 0.0;
  double stop_radius = 0.0;
  RadialIntegrals integrals;
};
ShootingResult shoot_ground_state(int dim, double r);

/// S_bar from the 1D closed-form soliton ((r/2) sech^2((r-2)x/2))^{1/(r-2)}.
double gn_constant_soliton_1d(double r);
/// S_bar for 2 < r < 2N/(N-2)^+. N = 1 uses the closed form, N = 2, 3 use
/// shooting. The quotient is invariant under u -> a u(b x), so the rescaled
/// extremal has the same value as w.
double gn_constant(int dim, double r);
double gn_constant_shooting(int dim, double r);

enum class HlsRoute {
  /// One radial integral of |f^(xi)|^2 (2 pi |xi|)^(-alpha), with the bubble
  /// density's Bessel-K transform.
  fourier,
  /// Nested adaptive quadrature of the convolution in x (N = 1 only, slower).
  physical_1d,
};

/// HLS quotient at a (delta/(delta^2 + |x|^2))^{N/2}.
double hls_bubble_quotient(int dim, double alpha, double amplitude = 1.0, double delta = 1.0,
                           HlsRoute route = HlsRoute::fourier);
/// S_alpha = hls_bubble_quotient(N, alpha, 1, 1).
double hls_constant(int dim, double alpha);
/// ||u||_2^2 / B(|u|^p, |u|^p)^{N/(N+alpha)} on a grid field.
double hls_quotient(const Field& u, const RieszOperator& riesz);

/// JSON cache {"N=1/gn/r=6": {value, method, tolerance}, ...}. Location from
/// CHOQUARD_CACHE, else ./choquard_constants.json. Reads share a lock; writes
/// are exclusive and replace the file atomically.
class ConstantsCache {
 public:
  explicit ConstantsCache(std::filesystem::path path);
  static ConstantsCache& instance();
  static std::filesystem::path default_path();

  const std::filesystem::path& path() const { return path_; }

  double gn(int dim, double r);
  double hls(int dim, double alpha);

  std::optional<double> lookup(const std::string& key) const;
  void store(const std::string& key, double value, const std::string& method, double tolerance);

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mutex_;
};

}  // namespace choquard
