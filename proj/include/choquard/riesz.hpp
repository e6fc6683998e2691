// Riesz potential I_alpha * f with kernel A_alpha(N) / |x|^(N - alpha).
#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "choquard/grid.hpp"

namespace choquard {

class RealFft;

/// How the kernel sample at offset 0 is chosen.
enum class SingularRule {
  /// Corrected weight -A Z_N(N - alpha) dx^(alpha - N), Z_N the lattice
  /// (Epstein) zeta function. Makes the discrete sum accurate to
  /// O(dx^(2 + alpha)) on smooth decaying densities.
  lattice_zeta,
  /// Mean of the kernel over the central cell. Only O(dx^alpha) accurate.
  cell_average,
};

/// A_alpha(N) = Gamma((N - alpha)/2) / (Gamma(alpha/2) pi^(N/2) 2^alpha).
double riesz_normalization(int dim, double alpha);

/// Z_N(s) = sum over nonzero n in Z^N of |n|^(-s), analytically continued;
/// evaluated by theta-function splitting. Valid for 0 < s < N.
double lattice_zeta(int dim, double s);

/// Mean of |x|^(alpha - N) over the cube [-h/2, h/2]^N (no A factor).
double cell_average_kernel(int dim, double alpha, double h);

class RieszOperator {
 public:
  RieszOperator(const Grid& grid, double alpha, SingularRule rule = SingularRule::lattice_zeta);

  const Grid& grid() const { return grid_; }
  double alpha() const { return alpha_; }
  double normalization() const { return normalization_; }
  SingularRule rule() const { return rule_; }

  /// Kernel sample at integer offset (per axis, unused axes ignored).
  double kernel(const IndexOffset& offset) const;
  /// Samples on the padded (2M)^N grid, offsets k < M ? k : k - 2M.
  const std::vector<double>& kernel_cache() const { return kernel_; }

  /// Linear (non-periodic) convolution restricted to the box, by zero-padded
  /// FFT.
  Field apply(const Field& f) const;
  /// Literal O(M^{2N}) double sum; requires M^N <= 4096.
  Field apply_direct(const Field& f) const;
  /// integral (I_alpha * f) g.
  double bilinear_energy(const Field& f, const Field& g) const;

  /// A_alpha L^(alpha - N) ||f||_1 * ||f||_1: size of the interaction with mass
  /// at distance >= L that the box cannot represent.
  double tail_error_bound(const Field& f) const;

 private:
  Grid grid_;
  double alpha_;
  double normalization_;
  SingularRule rule_;
  std::vector<double> kernel_;
  std::vector<std::complex<double>> kernel_hat_;
  std::shared_ptr<const RealFft> padded_fft_;
};

}  // namespace choquard
