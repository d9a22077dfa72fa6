#pragma once

// Thin FFTW wrapper. Plans are created once per (kind, size) under a lock
// and then only executed through the new-array interface, which FFTW
// documents as thread-safe. Buffers come from fftw_malloc so their alignment
// matches the planning buffers.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bandfit/error.hpp"

namespace bandfit::fft {

namespace detail {

enum class Kind { dft_forward, dft_backward, dct1 };

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using PlanPtr = std::unique_ptr<fftw_plan_s, PlanDeleter>;

template <class T>
struct Buffer {
  explicit Buffer(std::size_t n) : ptr(static_cast<T*>(fftw_malloc(sizeof(T) * (n ? n : 1)))), size(n) {
    if (!ptr) throw std::bad_alloc();
  }
  ~Buffer() { fftw_free(ptr); }
  Buffer(const Buffer&) = delete;
  Buffer& operator=(const Buffer&) = delete;
  T* ptr;
  std::size_t size;
};

inline fftw_plan plan_for(Kind kind, std::size_t n) {
  static std::mutex mutex;
  static std::map<std::pair<Kind, std::size_t>, PlanPtr> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{kind, n}];
  if (!slot) {
    const int size = static_cast<int>(n);
    if (kind == Kind::dct1) {
      Buffer<double> in(n), out(n);
      slot.reset(fftw_plan_r2r_1d(size, in.ptr, out.ptr, FFTW_REDFT00, FFTW_ESTIMATE));
    } else {
      Buffer<fftw_complex> in(n), out(n);
      slot.reset(fftw_plan_dft_1d(size, in.ptr, out.ptr, kind == Kind::dft_forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                  FFTW_ESTIMATE));
    }
    if (!slot) throw Error(ErrorKind::size, "FFTW could not plan a transform of size " + std::to_string(n));
  }
  return slot.get();
}

inline std::vector<std::complex<double>> run_dft(Kind kind, std::span<const std::complex<double>> input) {
  const std::size_t n = input.size();
  if (n == 0) return {};
  fftw_plan plan = plan_for(kind, n);
  Buffer<fftw_complex> in(n), out(n);
  std::memcpy(in.ptr, input.data(), sizeof(fftw_complex) * n);
  fftw_execute_dft(plan, in.ptr, out.ptr);
  std::vector<std::complex<double>> result(n);
  std::memcpy(static_cast<void*>(result.data()), out.ptr, sizeof(fftw_complex) * n);
  return result;
}

}  // namespace detail

/// Unnormalized forward DFT: X_k = sum_j x_j exp(-2 pi i jk / n).
inline std::vector<std::complex<double>> dft(std::span<const std::complex<double>> x) {
  return detail::run_dft(detail::Kind::dft_forward, x);
}

/// Unnormalized backward DFT: x_j = sum_k X_k exp(+2 pi i jk / n).
inline std::vector<std::complex<double>> idft(std::span<const std::complex<double>> X) {
  return detail::run_dft(detail::Kind::dft_backward, X);
}

/// Type-I DCT (FFTW REDFT00):
///   Y_k = x_0 + (-1)^k x_{n-1} + 2 sum_{j=1}^{n-2} x_j cos(pi jk / (n-1)).
inline std::vector<double> dct1(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) throw Error(ErrorKind::size, "type-I DCT needs at least 2 samples");
  fftw_plan plan = detail::plan_for(detail::Kind::dct1, n);
  detail::Buffer<double> in(n), out(n);
  std::memcpy(in.ptr, x.data(), sizeof(double) * n);
  fftw_execute_r2r(plan, in.ptr, out.ptr);
  return std::vector<double>(out.ptr, out.ptr + n);
}

}  // namespace bandfit::fft
