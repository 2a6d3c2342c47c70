#pragma once

// Thin RAII wrapper around FFTW's real-to-complex transforms.
//
// FFTW plan creation and destruction are not thread-safe, so both go through
// a process-wide mutex. Execution is safe as long as one RealFft object is
// used by one thread at a time; `thread_local_fft(n)` hands out a per-thread
// instance for the free functions of the library.

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>

#include "gkdv/error.hpp"

namespace gkdv {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    if (n < 2) throw InvalidArgument("RealFft: size must be at least 2");
    real_ = static_cast<double*>(fftw_malloc(sizeof(double) * n_));
    spec_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * modes()));
    if (real_ == nullptr || spec_ == nullptr) {
      release();
      throw std::bad_alloc();
    }
    std::lock_guard lock(fftw_planner_mutex());
    // FFTW_ESTIMATE keeps the chosen algorithm, and therefore every rounded
    // bit, independent of machine load.
    const int ni = static_cast<int>(n_);
    forward_ = fftw_plan_dft_r2c_1d(ni, real_, spec_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(ni, spec_, real_, FFTW_ESTIMATE);
  }

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  ~RealFft() { release(); }

  std::size_t size() const noexcept { return n_; }
  std::size_t modes() const noexcept { return n_ / 2 + 1; }

  /// Unnormalized forward transform: out[m] = sum_j in[j] exp(-2 pi i j m / n).
  void forward(std::span<const double> in, std::span<std::complex<double>> out) {
    std::copy(in.begin(), in.end(), real_);
    fftw_execute(forward_);
    const auto* s = reinterpret_cast<const std::complex<double>*>(spec_);
    std::copy(s, s + modes(), out.begin());
  }

  /// Normalized inverse: inverse(forward(x)) == x up to rounding.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) {
    auto* s = reinterpret_cast<std::complex<double>*>(spec_);
    std::copy(in.begin(), in.end(), s);
    fftw_execute(inverse_);
    const double scale = 1.0 / static_cast<double>(n_);
    std::transform(real_, real_ + n_, out.begin(), [scale](double v) { return v * scale; });
  }

 private:
  void release() noexcept {
    {
      std::lock_guard lock(fftw_planner_mutex());
      if (forward_ != nullptr) fftw_destroy_plan(forward_);
      if (inverse_ != nullptr) fftw_destroy_plan(inverse_);
    }
    forward_ = inverse_ = nullptr;
    fftw_free(real_);
    fftw_free(spec_);
    real_ = nullptr;
    spec_ = nullptr;
  }

  std::size_t n_;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

/// Per-thread transform of size n, created on first use.
inline RealFft& thread_local_fft(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<RealFft>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFft>(n);
  return *slot;
}

}  // namespace gkdv
