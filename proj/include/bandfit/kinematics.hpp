#pragma once

// Sampled curve <-> (tangential angle, arc-length derivative).
//
//   s'(t) = |(x'(t), y'(t))|,   theta(t) = atan2(y'(t), x'(t)) (unwrapped),
//   x(t) = x(0) + int_0^t s' cos(theta),   y(t) = y(0) + int_0^t s' sin(theta).
//
// Closed curves carry theta(L) - theta(0) = c = 2 pi * winding; the Fourier
// machinery works on the periodic remainder theta - (c / L) t.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "bandfit/bezier_seed.hpp"
#include "bandfit/error.hpp"
#include "bandfit/geometry.hpp"
#include "bandfit/spectral.hpp"

namespace bandfit {

template <class B>
struct CurveState {
  static constexpr Basis basis = B::tag;

  double length = 1.0;
  std::vector<double> t;  // basis nodes on [0, L]
  std::vector<double> x, y;
  std::vector<double> dx, dy;  // spectral derivatives, filled by extract_kinematics
  std::vector<double> theta;
  std::vector<double> sprime;
  double c = 0.0;          // theta(L) - theta(0); closed curves only
  bool detrended = false;  // theta holds theta - (c/L) t
  Vec2 anchor{};           // (x(0), y(0)) used by reconstruct_curve

  std::size_t size() const { return t.size(); }
};

/// Spectral interpolant of the sampled (x, y) curve, evaluable anywhere.
template <class B>
struct CurveSeries {
  typename B::Series x, y;

  static CurveSeries from(const CurveState<B>& s) {
    return {B::forward(s.x, s.length), B::forward(s.y, s.length)};
  }
  Vec2 operator()(double t) const { return {B::evaluate(x, t), B::evaluate(y, t)}; }
  CurveSeries derivative() const { return {B::differentiate(x), B::differentiate(y)}; }
};

template <class B>
CurveState<B> discretize_spline(const BezierSpline& spline, std::size_t n) {
  if (B::periodic != spline.is_closed())
    throw Error(ErrorKind::config, "basis does not match the open/closed type of the spline");
  const std::size_t points = spline.segments().size() + (spline.is_closed() ? 0 : 1);
  if (n < 4 * points)
    throw Error(ErrorKind::config, "N = " + std::to_string(n) + " is too small for " + std::to_string(points) +
                                       " data points (need N >= " + std::to_string(4 * points) + ")");
  if constexpr (B::periodic) require_even(n);
  CurveState<B> s;
  s.length = spline.length();
  s.t = B::nodes(n, s.length);
  s.x.resize(n);
  s.y.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Vec2 p = spline(s.t[j]);
    s.x[j] = p.x;
    s.y[j] = p.y;
  }
  s.anchor = {s.x[0], s.y[0]};
  return s;
}

/// Greedy unwrap: shift each sample by a multiple of 2 pi to land within pi
/// of its predecessor. The first entry is left untouched.
inline std::vector<double> unwrap_angles(std::span<const double> raw) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> out(raw.begin(), raw.end());
  for (std::size_t j = 1; j < out.size(); ++j) out[j] -= two_pi * std::round((out[j] - out[j - 1]) / two_pi);
  return out;
}

/// Total turning theta(L) - theta(0) of a closed sampled curve, rounded to
/// the exact multiple of 2 pi it must be.
inline double closed_turning(std::span<const double> unwrapped) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double last = unwrapped.back();
  const double first = unwrapped.front();
  const double wrapped_end = last + std::remainder(first - last, two_pi);
  return two_pi * std::round((wrapped_end - first) / two_pi);
}

template <class B>
CurveState<B> detrend_theta(CurveState<B> s) {
  if (s.detrended) return s;
  const double slope = s.c / s.length;
  for (std::size_t j = 0; j < s.size(); ++j) s.theta[j] -= slope * s.t[j];
  s.detrended = true;
  return s;
}

template <class B>
CurveState<B> retrend_theta(CurveState<B> s) {
  if (!s.detrended) return s;
  const double slope = s.c / s.length;
  for (std::size_t j = 0; j < s.size(); ++j) s.theta[j] += slope * s.t[j];
  s.detrended = false;
  return s;
}

/// Fills dx, dy, theta, sprime (and c for closed curves) from x, y. Closed
/// states come back detrended.
template <class B>
CurveState<B> extract_kinematics(CurveState<B> s) {
  const std::size_t n = s.size();
  if (s.x.size() != n || s.y.size() != n) throw Error(ErrorKind::size, "curve samples do not match the grid");
  s.dx = B::values(B::differentiate(B::forward(s.x, s.length)), n);
  s.dy = B::values(B::differentiate(B::forward(s.y, s.length)), n);
  std::vector<double> raw(n);
  s.sprime.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double sp = std::hypot(s.dx[j], s.dy[j]);
    if (!(sp > 0.0) || !std::isfinite(sp))
      throw Error(ErrorKind::singular, "singular parametrization: |gamma'| = " + std::to_string(sp) + " at node " +
                                           std::to_string(j));
    s.sprime[j] = sp;
    raw[j] = std::atan2(s.dy[j], s.dx[j]);
  }
  s.theta = unwrap_angles(raw);
  s.detrended = false;
  if constexpr (B::periodic) {
    s.c = closed_turning(s.theta);
    s = detrend_theta(std::move(s));
  } else {
    s.c = 0.0;
  }
  return s;
}

/// Integrates s' cos(theta), s' sin(theta) from the anchor. Closed states must
/// already satisfy the closure conditions; the Fourier antiderivative refuses
/// an integrand with a non-negligible mean.
template <class B>
CurveState<B> reconstruct_curve(CurveState<B> s) {
  const std::size_t n = s.size();
  const CurveState<B> full = retrend_theta(s);
  std::vector<double> fx(n), fy(n);
  for (std::size_t j = 0; j < n; ++j) {
    fx[j] = full.sprime[j] * std::cos(full.theta[j]);
    fy[j] = full.sprime[j] * std::sin(full.theta[j]);
  }
  try {
    const auto ix = B::values(B::integrate(B::forward(fx, s.length)), n);
    const auto iy = B::values(B::integrate(B::forward(fy, s.length)), n);
    s.x.resize(n);
    s.y.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      s.x[j] = s.anchor.x + ix[j];
      s.y[j] = s.anchor.y + iy[j];
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::non_periodic) throw Error(ErrorKind::non_closed, e.what());
    throw;
  }
  return s;
}

/// |int_0^L s' (cos theta, sin theta) dt| by the trapezoidal rule; the gap the
/// reconstructed closed curve would leave at t = L.
template <class B>
double closure_residual(const CurveState<B>& s) {
  const CurveState<B> full = retrend_theta(s);
  double cx = 0.0, cy = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    cx += full.sprime[j] * std::cos(full.theta[j]);
    cy += full.sprime[j] * std::sin(full.theta[j]);
  }
  return std::hypot(cx, cy) * s.length / static_cast<double>(s.size());
}

}  // namespace bandfit
