#pragma once

// Chebyshev and Fourier representations on a parameter interval [0, L]:
// transforms, spectral calculus and Gaussian filtering.
//
// Chebyshev series live on the practical (extrema) grid
//     t_j = (1 - cos(j pi / (N-1))) L / 2,   j = 0..N-1,
// and map [0, L] affinely onto [-1, 1]. Fourier series use the equispaced
// grid t_j = j L / N and centred coefficients k = -N/2..N/2-1 with the 1/N
// scaling on the forward transform.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "bandfit/error.hpp"
#include "bandfit/fft.hpp"

namespace bandfit {

enum class Basis { chebyshev, fourier };

inline const char* to_string(Basis b) { return b == Basis::chebyshev ? "chebyshev" : "fourier"; }

using cplx = std::complex<double>;

struct ChebyshevSeries {
  double length = 1.0;
  std::vector<double> coeffs;

  std::size_t size() const { return coeffs.size(); }
};

/// Centred Fourier coefficients; `coeffs[k + N/2]` holds index k.
struct FourierSeries {
  double length = 1.0;
  std::vector<cplx> coeffs;

  std::size_t size() const { return coeffs.size(); }
  long half() const { return static_cast<long>(coeffs.size() / 2); }
  long min_index() const { return -half(); }
  long max_index() const { return half() - 1; }
  cplx& at(long k) { return coeffs[static_cast<std::size_t>(k + half())]; }
  const cplx& at(long k) const { return coeffs[static_cast<std::size_t>(k + half())]; }
};

// ---------------------------------------------------------------------------
// Gaussian filter

struct GaussianFilterSpec {
  double a;

  explicit GaussianFilterSpec(double bandwidth) : a(bandwidth) {
    if (!(a > 0.0)) throw Error(ErrorKind::domain, "Gaussian filter bandwidth must be positive");
  }
};

/// exp(-pi k^2 / a^2): unit gain at k = 0, e^{-pi} at k = a.
inline double gaussian_gain(double k, double a) {
  if (!(a > 0.0)) throw Error(ErrorKind::domain, "Gaussian filter bandwidth must be positive");
  const double r = k / a;
  return std::exp(-std::numbers::pi * r * r);
}

// ---------------------------------------------------------------------------
// Chebyshev

inline std::vector<double> cheb_nodes(std::size_t n, double length) {
  if (n < 2) throw Error(ErrorKind::size, "Chebyshev grid needs at least 2 nodes");
  std::vector<double> t(n);
  const double m = static_cast<double>(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    // Symmetric evaluation keeps t_j + t_{n-1-j} == L and the ends exact.
    if (2 * j < n - 1)
      t[j] = length * std::sin(std::numbers::pi * static_cast<double>(j) / (2.0 * m)) *
             std::sin(std::numbers::pi * static_cast<double>(j) / (2.0 * m));
    else
      t[j] = length - length * std::sin(std::numbers::pi * static_cast<double>(n - 1 - j) / (2.0 * m)) *
                          std::sin(std::numbers::pi * static_cast<double>(n - 1 - j) / (2.0 * m));
  }
  t.front() = 0.0;
  t.back() = length;
  return t;
}

/// Coefficients of the degree N-1 interpolant through values at the
/// practical nodes (type-I cosine transform with half-weighted ends).
inline ChebyshevSeries cheb_forward(std::span<const double> values, double length) {
  const std::size_t n = values.size();
  if (n < 2) throw Error(ErrorKind::size, "Chebyshev transform needs at least 2 values");
  std::vector<double> c = fft::dct1(values);
  const double m = static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    c[k] /= m;
    if (k % 2 == 1) c[k] = -c[k];
  }
  c.front() *= 0.5;
  c.back() *= 0.5;
  return {length, std::move(c)};
}

/// Values of the series at the n-point practical grid. Terms above degree
/// n-1 are folded back onto the grid by aliasing (T_{M+r} = T_{M-r} there).
inline std::vector<double> cheb_values_at_nodes(const ChebyshevSeries& s, std::size_t n) {
  if (n < 2) throw Error(ErrorKind::size, "Chebyshev grid needs at least 2 nodes");
  const std::size_t m = n - 1;
  std::vector<double> a(n, 0.0);
  for (std::size_t k = 0; k < s.size(); ++k) {
    std::size_t kk = k % (2 * m);
    if (kk > m) kk = 2 * m - kk;
    a[kk] += s.coeffs[k];
  }
  for (std::size_t k = 1; k < n; k += 2) a[k] = -a[k];
  std::vector<double> y = fft::dct1(a);
  for (std::size_t j = 0; j < n; ++j) y[j] = 0.5 * (y[j] + a[0] + (j % 2 ? -a[m] : a[m]));
  return y;
}

inline std::vector<double> cheb_values_at_nodes(const ChebyshevSeries& s) { return cheb_values_at_nodes(s, s.size()); }

/// Clenshaw summation at one parameter in [0, L].
inline double cheb_evaluate(const ChebyshevSeries& s, double t) {
  if (!(t >= 0.0 && t <= s.length))
    throw Error(ErrorKind::domain, "Chebyshev query " + std::to_string(t) + " outside [0, L]");
  const double x = 2.0 * t / s.length - 1.0;
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t k = s.size(); k-- > 1;) {
    const double b0 = s.coeffs[k] + 2.0 * x * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return (s.size() ? s.coeffs[0] : 0.0) + x * b1 - b2;
}

inline std::vector<double> cheb_inverse(const ChebyshevSeries& s, std::span<const double> t) {
  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = cheb_evaluate(s, t[i]);
  return out;
}

/// d/dt on [0, L], including the 2/L chain-rule factor. Same length as input.
inline ChebyshevSeries cheb_differentiate(const ChebyshevSeries& s) {
  const std::size_t n = s.size();
  std::vector<double> d(n, 0.0);
  if (n >= 2) {
    // d_{k-1} = d_{k+1} + 2k c_k, run downwards.
    for (std::size_t k = n - 1; k >= 1; --k) d[k - 1] = (k + 1 < n ? d[k + 1] : 0.0) + 2.0 * static_cast<double>(k) * s.coeffs[k];
    d[0] *= 0.5;
  }
  const double chain = 2.0 / s.length;
  for (double& v : d) v *= chain;
  return {s.length, std::move(d)};
}

/// Antiderivative t -> int_0^t f on [0, L]; one term longer than the input.
inline ChebyshevSeries cheb_integrate(const ChebyshevSeries& s) {
  const std::size_t n = s.size();
  std::vector<double> b(n + 1, 0.0);
  auto c = [&](std::size_t k) { return k < n ? s.coeffs[k] : 0.0; };
  if (n >= 1) {
    b[1] = c(0) - 0.5 * c(2);
    for (std::size_t k = 2; k <= n; ++k) b[k] = (c(k - 1) - c(k + 1)) / (2.0 * static_cast<double>(k));
    // Fix the constant so the value at t = 0 (x = -1) vanishes.
    double at_left = 0.0;
    for (std::size_t k = 1; k <= n; ++k) at_left += (k % 2 ? -b[k] : b[k]);
    b[0] = -at_left;
  }
  const double half_length = 0.5 * s.length;
  for (double& v : b) v *= half_length;
  return {s.length, std::move(b)};
}

/// Clenshaw-Curtis weights on [0, L] for the practical grid.
inline std::vector<double> cheb_quadrature_weights(std::size_t n, double length) {
  if (n < 2) throw Error(ErrorKind::size, "Chebyshev grid needs at least 2 nodes");
  const std::size_t m = n - 1;
  std::vector<double> moments(n, 0.0);
  for (std::size_t k = 0; k <= m; k += 2) moments[k] = 2.0 / (1.0 - static_cast<double>(k) * static_cast<double>(k));
  std::vector<double> w = fft::dct1(moments);
  for (std::size_t j = 0; j < n; ++j) w[j] *= (j == 0 || j == m ? 0.5 : 1.0) / static_cast<double>(m) * 0.5 * length;
  return w;
}

inline ChebyshevSeries filter_chebyshev(const ChebyshevSeries& s, double a) {
  ChebyshevSeries out = s;
  for (std::size_t k = 0; k < out.size(); ++k) out.coeffs[k] *= gaussian_gain(static_cast<double>(k), a);
  return out;
}

// ---------------------------------------------------------------------------
// Fourier

inline std::vector<double> fourier_nodes(std::size_t n, double length) {
  std::vector<double> t(n);
  for (std::size_t j = 0; j < n; ++j) t[j] = static_cast<double>(j) * length / static_cast<double>(n);
  return t;
}

inline void require_even(std::size_t n) {
  if (n == 0 || n % 2 != 0) throw Error(ErrorKind::size, "Fourier grid size must be even and nonzero, got " + std::to_string(n));
}

inline FourierSeries fourier_forward(std::span<const cplx> values, double length) {
  const std::size_t n = values.size();
  require_even(n);
  std::vector<cplx> raw = fft::dft(values);
  FourierSeries s{length, std::vector<cplx>(n)};
  const double inv = 1.0 / static_cast<double>(n);
  const std::size_t h = n / 2;
  // Raw bin b holds k = b for b < N/2 and k = b - N otherwise.
  for (std::size_t b = 0; b < n; ++b) s.coeffs[(b + h) % n] = raw[b] * inv;
  return s;
}

inline FourierSeries fourier_forward(std::span<const double> values, double length) {
  std::vector<cplx> c(values.begin(), values.end());
  return fourier_forward(std::span<const cplx>(c), length);
}

inline std::vector<cplx> fourier_inverse(const FourierSeries& s) {
  const std::size_t n = s.size();
  require_even(n);
  const std::size_t h = n / 2;
  std::vector<cplx> raw(n);
  for (std::size_t i = 0; i < n; ++i) raw[(i + h) % n] = s.coeffs[i];
  return fft::idft(raw);
}

inline std::vector<double> fourier_inverse_real(const FourierSeries& s) {
  const std::vector<cplx> v = fourier_inverse(s);
  std::vector<double> out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) out[j] = v[j].real();
  return out;
}

/// Real trigonometric interpolant of a conjugate-symmetric series at any t
/// (the Nyquist term contributes its cosine part only, matching the samples).
inline double fourier_evaluate_real(const FourierSeries& s, double t) {
  const long h = s.half();
  const double theta = 2.0 * std::numbers::pi * t / s.length;
  // exp(i theta k) assembled from two short tables keeps the phase error at a
  // few ulps for every k instead of accumulating along a recurrence.
  constexpr long block = 64;
  cplx step[block];
  for (long b = 0; b < block; ++b) step[b] = std::polar(1.0, theta * static_cast<double>(b));
  double sum = s.at(0).real();
  cplx coarse{1.0, 0.0};
  for (long base = 0; base < h; base += block) {
    coarse = std::polar(1.0, theta * static_cast<double>(base));
    for (long b = 0; b < block && base + b < h; ++b) {
      const long k = base + b;
      if (k == 0) continue;
      sum += 2.0 * (s.at(k) * coarse * step[b]).real();
    }
  }
  sum += s.at(-h).real() * std::cos(theta * static_cast<double>(h));
  return sum;
}

/// Multiply coefficient k by 2 pi i k / L.
inline FourierSeries fourier_differentiate(const FourierSeries& s) {
  FourierSeries out = s;
  const double w = 2.0 * std::numbers::pi / s.length;
  for (long k = s.min_index(); k <= s.max_index(); ++k) out.at(k) *= cplx(0.0, w * static_cast<double>(k));
  return out;
}

/// Relative size of the mean coefficient above which an integrand is treated
/// as non-periodic.
inline constexpr double kFourierMeanTolerance = 1e-10;

/// Periodic antiderivative vanishing at t = 0. Requires a (numerically)
/// zero-mean integrand.
inline FourierSeries fourier_integrate(const FourierSeries& s) {
  double biggest = 0.0;
  for (const cplx& c : s.coeffs) biggest = std::max(biggest, std::abs(c));
  if (s.size() && std::abs(s.at(0)) > kFourierMeanTolerance * biggest)
    throw Error(ErrorKind::non_periodic, "integrand has nonzero mean " + std::to_string(std::abs(s.at(0))));
  FourierSeries out = s;
  const double w = 2.0 * std::numbers::pi / s.length;
  cplx constant{0.0, 0.0};
  for (long k = s.min_index(); k <= s.max_index(); ++k) {
    if (k == 0) continue;
    out.at(k) = s.at(k) / cplx(0.0, w * static_cast<double>(k));
    constant -= out.at(k);
  }
  if (s.size()) out.at(0) = constant;
  return out;
}

inline FourierSeries filter_fourier(const FourierSeries& s, double a) {
  FourierSeries out = s;
  for (long k = s.min_index(); k <= s.max_index(); ++k) out.at(k) *= gaussian_gain(static_cast<double>(k), a);
  return out;
}

// ---------------------------------------------------------------------------
// Basis policies: the uniform interface the curve code is templated on.

struct ChebyshevBasis {
  using Series = ChebyshevSeries;
  static constexpr Basis tag = Basis::chebyshev;
  static constexpr bool periodic = false;

  static std::vector<double> nodes(std::size_t n, double length) { return cheb_nodes(n, length); }
  static Series forward(std::span<const double> v, double length) { return cheb_forward(v, length); }
  static std::vector<double> values(const Series& s, std::size_t n) { return cheb_values_at_nodes(s, n); }
  static Series differentiate(const Series& s) { return cheb_differentiate(s); }
  static Series integrate(const Series& s) { return cheb_integrate(s); }
  static Series filter(const Series& s, double a) { return filter_chebyshev(s, a); }
  static double evaluate(const Series& s, double t) { return cheb_evaluate(s, std::clamp(t, 0.0, s.length)); }
  static std::vector<double> weights(std::size_t n, double length) { return cheb_quadrature_weights(n, length); }
  /// Largest frequency index carried by an n-node representation.
  static double max_frequency(std::size_t n) { return static_cast<double>(n - 1); }

  /// Number of coefficients with magnitude above delta.
  static std::size_t count_above(const Series& s, double delta) {
    return static_cast<std::size_t>(std::count_if(s.coeffs.begin(), s.coeffs.end(),
                                                  [&](double c) { return std::abs(c) > delta; }));
  }
  /// Highest index whose magnitude exceeds delta, plus one (0 if none).
  static std::size_t decay_index(const Series& s, double delta) {
    for (std::size_t k = s.size(); k-- > 0;)
      if (std::abs(s.coeffs[k]) > delta) return k + 1;
    return 0;
  }
};

struct FourierBasis {
  using Series = FourierSeries;
  static constexpr Basis tag = Basis::fourier;
  static constexpr bool periodic = true;

  static std::vector<double> nodes(std::size_t n, double length) { return fourier_nodes(n, length); }
  static Series forward(std::span<const double> v, double length) { return fourier_forward(v, length); }
  static std::vector<double> values(const Series& s, std::size_t n) {
    if (n != s.size()) throw Error(ErrorKind::size, "Fourier series and grid sizes differ");
    return fourier_inverse_real(s);
  }
  static Series differentiate(const Series& s) { return fourier_differentiate(s); }
  static Series integrate(const Series& s) { return fourier_integrate(s); }
  static Series filter(const Series& s, double a) { return filter_fourier(s, a); }
  static double evaluate(const Series& s, double t) { return fourier_evaluate_real(s, t); }
  static std::vector<double> weights(std::size_t n, double length) {
    return std::vector<double>(n, length / static_cast<double>(n));
  }
  static double max_frequency(std::size_t n) { return static_cast<double>(n / 2); }

  /// Counts every centred coefficient, so a conjugate pair counts twice.
  static std::size_t count_above(const Series& s, double delta) {
    return static_cast<std::size_t>(std::count_if(s.coeffs.begin(), s.coeffs.end(),
                                                  [&](const cplx& c) { return std::abs(c) > delta; }));
  }
  /// Highest |k| whose coefficient exceeds delta, plus one (0 if none).
  static std::size_t decay_index(const Series& s, double delta) {
    for (long k = s.half(); k >= 0; --k) {
      const bool hit = std::abs(s.at(-k)) > delta || (k < s.half() && std::abs(s.at(k)) > delta);
      if (hit) return static_cast<std::size_t>(k) + 1;
    }
    return 0;
  }
};

}  // namespace bandfit
