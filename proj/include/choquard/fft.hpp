// Thin FFTW wrapper: one r2c/c2r plan pair per shape, shared process-wide.
#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace choquard {

class RealFft {
 public:
  explicit RealFft(std::vector<int> shape);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  const std::vector<int>& shape() const { return shape_; }
  std::size_t real_size() const { return real_size_; }
  /// Number of complex coefficients (last axis halved + 1).
  std::size_t complex_size() const { return complex_size_; }

  /// Unnormalized forward transform. Safe to call concurrently.
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  /// Unnormalized inverse transform (caller divides by real_size()).
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

  /// Angular wavenumber index of mode k along an axis of length n.
  static long signed_mode(long k, long n) { return k <= n / 2 ? k : k - n; }

 private:
  std::vector<int> shape_;
  std::size_t real_size_ = 0;
  std::size_t complex_size_ = 0;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

/// Cached plan for a shape. Planning is serialized; execution is reentrant.
std::shared_ptr<const RealFft> fft_for(const std::vector<int>& shape);

}  // namespace choquard
