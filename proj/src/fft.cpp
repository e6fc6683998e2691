#include "choquard/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace choquard {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft::RealFft(std::vector<int> shape) : shape_(std::move(shape)) {
  if (shape_.empty()) throw std::invalid_argument("RealFft: empty shape");
  real_size_ = 1;
  for (int n : shape_) real_size_ *= static_cast<std::size_t>(n);
  complex_size_ = real_size_ / static_cast<std::size_t>(shape_.back()) *
                  static_cast<std::size_t>(shape_.back() / 2 + 1);

  std::vector<double> rbuf(real_size_);
  std::vector<std::complex<double>> cbuf(complex_size_);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto* c = reinterpret_cast<fftw_complex*>(cbuf.data());
  forward_plan_ = fftw_plan_dft_r2c(static_cast<int>(shape_.size()), shape_.data(), rbuf.data(), c, flags);
  inverse_plan_ = fftw_plan_dft_c2r(static_cast<int>(shape_.size()), shape_.data(), c, rbuf.data(),
                                    flags | FFTW_DESTROY_INPUT);
  if (!forward_plan_ || !inverse_plan_) throw std::runtime_error("RealFft: FFTW planning failed");
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (forward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (inverse_plan_) fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  if (in.size() != real_size_ || out.size() != complex_size_)
    throw std::invalid_argument("RealFft::forward: size mismatch");
  // r2c does not modify its input, FFTW just lacks const.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
  if (in.size() != complex_size_ || out.size() != real_size_)
    throw std::invalid_argument("RealFft::inverse: size mismatch");
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), reinterpret_cast<fftw_complex*>(scratch.data()),
                       out.data());
}

std::shared_ptr<const RealFft> fft_for(const std::vector<int>& shape) {
  static std::mutex cache_mutex;
  static std::map<std::vector<int>, std::shared_ptr<const RealFft>> cache;
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(shape);
    if (it != cache.end()) return it->second;
  }
  auto plan = std::make_shared<const RealFft>(shape);
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto [it, inserted] = cache.emplace(shape, plan);
  return it->second;
}

}  // namespace choquard
