#pragma once

// C^2 cubic Bezier seed curve through the data points.
//
// Segment i (1-based, as in the derivation) runs from C_{i-1} to C_i with
// control points (C_{i-1}, P_i1, P_i2, C_i). C^1 at the joints fixes
// P_{(i-1)2} = 2 C_{i-1} - P_i1, and C^2 then leaves the [1, 4, 1] system
//
//     P_{(i-1)1} + 4 P_i1 + P_{(i+1)1} = 2 C_i + 4 C_{i-1}
//
// for the first control points. Open curves close the system with the
// user-supplied end derivatives; closed curves wrap it cyclically.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bandfit/error.hpp"
#include "bandfit/geometry.hpp"
#include "bandfit/linalg.hpp"

namespace bandfit {

/// Ordered sample points with the open/closed flag. End derivatives are
/// present exactly when the curve is open.
class PointSet {
 public:
  static PointSet open(std::vector<Vec2> points, Vec2 slope_left, Vec2 slope_right) {
    PointSet p(std::move(points), false);
    p.slope_left_ = slope_left;
    p.slope_right_ = slope_right;
    p.validate();
    return p;
  }

  static PointSet closed(std::vector<Vec2> points) {
    PointSet p(std::move(points), true);
    p.validate();
    return p;
  }

  std::span<const Vec2> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const Vec2& operator[](std::size_t i) const { return points_[i]; }
  bool is_closed() const { return closed_; }
  std::optional<Vec2> slope_left() const { return slope_left_; }
  std::optional<Vec2> slope_right() const { return slope_right_; }

  /// Diameter of the bounding box; the length unit of every tolerance.
  double scale() const {
    Vec2 lo = points_.front(), hi = points_.front();
    for (const Vec2& p : points_) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    return norm(hi - lo);
  }

  friend bool operator==(const PointSet&, const PointSet&) = default;

 private:
  PointSet(std::vector<Vec2> points, bool closed) : points_(std::move(points)), closed_(closed) {}

  void validate() const {
    const std::size_t min_points = closed_ ? 3 : 2;
    if (points_.size() < min_points)
      throw Error(ErrorKind::size, std::string(closed_ ? "closed" : "open") + " curve needs at least " +
                                       std::to_string(min_points) + " points");
    for (const Vec2& p : points_)
      if (!std::isfinite(p.x) || !std::isfinite(p.y))
        throw Error(ErrorKind::degenerate_input, "non-finite point coordinate");
    for (std::size_t i = 1; i < points_.size(); ++i)
      if (points_[i] == points_[i - 1])
        throw Error(ErrorKind::degenerate_input, "points " + std::to_string(i - 1) + " and " + std::to_string(i) +
                                                     " coincide");
    if (closed_ && points_.front() == points_.back())
      throw Error(ErrorKind::degenerate_input, "first and last points of a closed curve coincide");
  }

  std::vector<Vec2> points_;
  bool closed_ = false;
  std::optional<Vec2> slope_left_;
  std::optional<Vec2> slope_right_;
};

using ControlPoints = std::array<Vec2, 4>;

class BezierSpline {
 public:
  BezierSpline(std::vector<ControlPoints> segments, bool closed) : segments_(std::move(segments)), closed_(closed) {
    if (segments_.empty()) throw Error(ErrorKind::size, "spline needs at least one segment");
  }

  std::span<const ControlPoints> segments() const { return segments_; }
  bool is_closed() const { return closed_; }
  /// Parameter domain is [0, L] with one unit of parameter per segment.
  double length() const { return static_cast<double>(segments_.size()); }

  Vec2 operator()(double t) const { return eval(t, 0); }
  Vec2 derivative(double t) const { return eval(t, 1); }
  Vec2 second_derivative(double t) const { return eval(t, 2); }

  /// Derivatives of segment `i` (0-based) at local parameter u in [0, 1].
  static Vec2 segment_value(const ControlPoints& p, double u, int order) {
    const double v = 1.0 - u;
    switch (order) {
      case 0: return v * v * v * p[0] + 3.0 * v * v * u * p[1] + 3.0 * v * u * u * p[2] + u * u * u * p[3];
      case 1: return 3.0 * (v * v * (p[1] - p[0]) + 2.0 * v * u * (p[2] - p[1]) + u * u * (p[3] - p[2]));
      case 2: return 6.0 * (v * (p[2] - 2.0 * p[1] + p[0]) + u * (p[3] - 2.0 * p[2] + p[1]));
      default: return 6.0 * (p[3] - 3.0 * p[2] + 3.0 * p[1] - p[0]);
    }
  }

 private:
  Vec2 eval(double t, int order) const {
    const double L = length();
    if (!std::isfinite(t)) throw Error(ErrorKind::domain, "non-finite spline parameter");
    if (closed_) {
      t = std::fmod(t, L);
      if (t < 0.0) t += L;
    } else if (t < 0.0 || t > L) {
      throw Error(ErrorKind::domain, "parameter " + std::to_string(t) + " outside [0, " + std::to_string(L) + "]");
    }
    // S(t) = B_i(t - i + 1) with i = ceil(t) clamped to [1, L].
    const auto count = static_cast<long>(segments_.size());
    const long i = std::clamp(static_cast<long>(std::ceil(t)), 1L, count);
    return segment_value(segments_[static_cast<std::size_t>(i - 1)], t - static_cast<double>(i - 1), order);
  }

  std::vector<ControlPoints> segments_;
  bool closed_;
};

/// Open C^2 spline with prescribed end derivatives (n segments for n+1
/// points). Tridiagonal solve for P_11..P_n1, then P_i2 by C^1 matching.
inline BezierSpline fit_open_spline(const PointSet& pts) {
  if (pts.is_closed()) throw Error(ErrorKind::config, "fit_open_spline called with a closed point set");
  const auto C = pts.points();
  const std::size_t n = C.size() - 1;
  if (n == 0) throw Error(ErrorKind::size, "open spline needs at least one segment");
  const Vec2 c_left = *pts.slope_left();
  const Vec2 c_right = *pts.slope_right();

  std::vector<double> lower(n, 1.0), diag(n, 4.0), upper(n, 1.0);
  std::vector<Vec2> rhs(n);
  // Row 1: B_1'(0) = c_left.
  diag[0] = 1.0;
  upper[0] = 0.0;
  rhs[0] = (c_left + 3.0 * C[0]) / 3.0;
  for (std::size_t i = 2; i < n; ++i) rhs[i - 1] = 2.0 * C[i] + 4.0 * C[i - 1];
  if (n >= 2) {
    // Row n: B_n'(1) = c_right folded into the C^2 condition at C_{n-1}.
    rhs[n - 1] = 4.0 * C[n - 1] + C[n] - c_right / 3.0;
    upper[n - 1] = 0.0;
  }
  lower[0] = 0.0;
  const std::vector<Vec2> p1 = solve_tridiagonal<Vec2>(lower, diag, upper, rhs);

  std::vector<ControlPoints> segs(n);
  for (std::size_t i = 1; i <= n; ++i) {
    const Vec2 p2 = i < n ? 2.0 * C[i] - p1[i] : (3.0 * C[n] - c_right) / 3.0;
    segs[i - 1] = {C[i - 1], p1[i - 1], p2, C[i]};
  }
  return BezierSpline(std::move(segs), false);
}

/// Closed periodic C^2 spline: n+1 segments for points C_0..C_n, the last one
/// joining C_n back to C_0.
///
/// The two closing rows (derivative and second-derivative matching at C_0)
/// are row-equivalent to the [1, 4, 1] condition applied cyclically at C_0,
/// so the whole system is a circulant cyclic-tridiagonal one.
inline BezierSpline fit_closed_spline(const PointSet& pts) {
  if (!pts.is_closed()) throw Error(ErrorKind::config, "fit_closed_spline called with an open point set");
  const auto C = pts.points();
  const std::size_t m = C.size();  // n + 1 segments
  if (m < 3) throw Error(ErrorKind::size, "closed spline needs at least 3 points");

  // Unknown k (0-based) is P_{(k+1)1}, the first control point of the segment
  // starting at C_k. Row k is the C^2 condition at C_k.
  std::vector<double> lower(m, 1.0), diag(m, 4.0), upper(m, 1.0);
  std::vector<Vec2> rhs(m);
  for (std::size_t k = 0; k < m; ++k) rhs[k] = 2.0 * C[(k + 1) % m] + 4.0 * C[k];
  const std::vector<Vec2> p1 = solve_cyclic_tridiagonal<Vec2>(lower, diag, upper, rhs);

  std::vector<ControlPoints> segs(m);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t next = (k + 1) % m;
    segs[k] = {C[k], p1[k], 2.0 * C[next] - p1[next], C[next]};
  }
  return BezierSpline(std::move(segs), true);
}

inline BezierSpline fit_spline(const PointSet& pts) {
  return pts.is_closed() ? fit_closed_spline(pts) : fit_open_spline(pts);
}

inline Vec2 eval_spline(const BezierSpline& spline, double t) { return spline(t); }

}  // namespace bandfit
