#pragma once

// Shared fixtures and brute-force reference implementations for the tests.
// Everything here is deliberately slow and direct: dense solves, O(N^2)
// transforms, explicit sums.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bandfit.hpp"

namespace support {

using bandfit::Vec2;
using cplx = std::complex<double>;
constexpr double pi = std::numbers::pi;

inline std::string data_path(const std::string& name) { return std::string(BANDFIT_DATA_DIR) + "/" + name; }
inline std::string golden_path(const std::string& name) { return std::string(BANDFIT_GOLDEN_DIR) + "/" + name; }

/// A fixture scaled the same way the command-line tool scales it.
inline bandfit::PointSet load_normalized(const std::string& name) {
  const bandfit::PointSet raw = bandfit::read_points(data_path(name));
  const bandfit::Normalized n = bandfit::normalize_points(raw.points());
  if (raw.is_closed()) return bandfit::PointSet::closed(n.points);
  return bandfit::PointSet::open(n.points, *raw.slope_left(), *raw.slope_right());
}

inline bandfit::FitConfig spiral_config() {
  bandfit::FitConfig cfg;
  cfg.N = 1000;
  cfg.n_iters = 60;
  cfg.h_filter = 1.0 / 25.0;
  cfg.eps = 1e-16;
  cfg.n_coefs = 500;
  cfg.n_bands = 8;
  cfg.closed = false;
  return cfg;
}

inline bandfit::FitConfig flower_config() {
  bandfit::FitConfig cfg;
  cfg.N = 2000;
  cfg.n_iters = 60;
  cfg.h_filter = 1.0 / 35.0;
  cfg.eps = 1e-16;
  cfg.n_coefs = 1560;
  cfg.n_bands = 8;
  cfg.closed = true;
  return cfg;
}

/// Points on r = 1 + cos(18 phi) sin(4 phi) / alpha, phi = 2 pi i / n.
inline std::vector<Vec2> flower_points(std::size_t n, double alpha) {
  std::vector<Vec2> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = 2.0 * pi * static_cast<double>(i) / static_cast<double>(n);
    const double r = 1.0 + std::cos(18.0 * phi) * std::sin(4.0 * phi) / alpha;
    p[i] = {r * std::cos(phi), r * std::sin(phi)};
  }
  return p;
}

inline std::vector<Vec2> circle_points(std::size_t n, double radius = 1.0) {
  std::vector<Vec2> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = 2.0 * pi * static_cast<double>(i) / static_cast<double>(n);
    p[i] = {radius * std::cos(phi), radius * std::sin(phi)};
  }
  return p;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// ---------------------------------------------------------------------------
// Random inputs

/// Random polygon: points spread along a wobbly path with a minimum spacing.
inline std::vector<Vec2> random_polyline(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> step(0.3, 1.0), turn(-1.2, 1.2);
  std::vector<Vec2> p(n);
  double heading = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    heading += turn(rng);
    p[i] = p[i - 1] + step(rng) * Vec2{std::cos(heading), std::sin(heading)};
  }
  return p;
}

/// Random star-shaped closed polygon with n vertices.
inline std::vector<Vec2> random_star(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> radius(0.6, 1.4), jitter(-0.3, 0.3);
  std::vector<Vec2> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = 2.0 * pi * (static_cast<double>(i) + jitter(rng)) / static_cast<double>(n);
    const double r = radius(rng);
    p[i] = {r * std::cos(phi), r * std::sin(phi)};
  }
  return p;
}

/// Smooth periodic samples: a random trigonometric polynomial of low degree.
inline std::vector<double> random_trig(std::mt19937_64& rng, std::size_t n, int degree, double mean, double amp) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> a(degree + 1), b(degree + 1);
  for (int k = 1; k <= degree; ++k) {
    a[k] = amp * g(rng) / k;
    b[k] = amp * g(rng) / k;
  }
  std::vector<double> v(n, mean);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(n);
    for (int k = 1; k <= degree; ++k) v[j] += a[k] * std::cos(2 * pi * k * t) + b[k] * std::sin(2 * pi * k * t);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Dense linear algebra

inline std::vector<double> dense_solve(const Eigen::MatrixXd& a, const std::vector<double>& rhs) {
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  const Eigen::VectorXd x = a.fullPivLu().solve(b);
  return {x.data(), x.data() + x.size()};
}

/// Control points of every segment from the raw C^1 / C^2 / end conditions,
/// solved as one dense system in the unknowns (P_k1, P_k2) of all segments.
inline std::vector<bandfit::ControlPoints> dense_spline(const bandfit::PointSet& pts) {
  const auto C = pts.points();
  const bool closed = pts.is_closed();
  const std::size_t m = closed ? C.size() : C.size() - 1;  // segments
  const auto node = [&](std::size_t k) { return C[k % C.size()]; };
  const auto a = [](std::size_t k) { return static_cast<Eigen::Index>(2 * k); };
  const auto b = [](std::size_t k) { return static_cast<Eigen::Index>(2 * k + 1); };
  const Eigen::Index n = static_cast<Eigen::Index>(2 * m);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, 2);
  Eigen::Index row = 0;
  auto put_rhs = [&](Vec2 v) { rhs(row, 0) = v.x; rhs(row, 1) = v.y; };
  const std::size_t joints = closed ? m : m - 1;
  for (std::size_t k = 0; k < joints; ++k) {
    const std::size_t k1 = (k + 1) % m;
    // C^1 at the knot between segments k and k + 1.
    A(row, b(k)) = 1.0;
    A(row, a(k1)) = 1.0;
    put_rhs(2.0 * node(k + 1));
    ++row;
    // C^2 there: P_k1 - 2 P_k2 = P_(k+1)2 - 2 P_(k+1)1.
    A(row, a(k)) = 1.0;
    A(row, b(k)) = -2.0;
    A(row, b(k1)) = -1.0;
    A(row, a(k1)) = 2.0;
    put_rhs({0.0, 0.0});
    ++row;
  }
  if (!closed) {
    A(row, a(0)) = 3.0;
    put_rhs(*pts.slope_left() + 3.0 * C[0]);
    ++row;
    A(row, b(m - 1)) = -3.0;
    put_rhs(*pts.slope_right() - 3.0 * C[m]);
    ++row;
  }
  const Eigen::MatrixXd x = A.fullPivLu().solve(rhs);
  std::vector<bandfit::ControlPoints> segs(m);
  for (std::size_t k = 0; k < m; ++k)
    segs[k] = {node(k), Vec2{x(a(k), 0), x(a(k), 1)}, Vec2{x(b(k), 0), x(b(k), 1)}, node(k + 1)};
  return segs;
}

/// Largest jump of the first and second derivative across the knots.
struct KnotJumps {
  double first = 0.0, second = 0.0;
};

inline KnotJumps knot_jumps(const bandfit::BezierSpline& s) {
  using bandfit::BezierSpline;
  const auto segs = s.segments();
  KnotJumps j;
  const std::size_t count = s.is_closed() ? segs.size() : segs.size() - 1;
  for (std::size_t k = 0; k < count; ++k) {
    const auto& p = segs[k];
    const auto& q = segs[(k + 1) % segs.size()];
    j.first = std::max(j.first, bandfit::distance(BezierSpline::segment_value(p, 1.0, 1), BezierSpline::segment_value(q, 0.0, 1)));
    j.second = std::max(j.second, bandfit::distance(BezierSpline::segment_value(p, 1.0, 2), BezierSpline::segment_value(q, 0.0, 2)));
  }
  return j;
}

// ---------------------------------------------------------------------------
// Transforms by direct summation

/// Centred DFT with the 1/N forward scaling, k = -N/2 .. N/2-1.
inline std::vector<cplx> direct_dft(const std::vector<cplx>& f) {
  const std::size_t n = f.size();
  const long h = static_cast<long>(n / 2);
  std::vector<cplx> out(n);
  for (long k = -h; k < h; ++k) {
    cplx s{};
    for (std::size_t j = 0; j < n; ++j) s += f[j] * std::polar(1.0, -2.0 * pi * k * static_cast<double>(j) / n);
    out[static_cast<std::size_t>(k + h)] = s / static_cast<double>(n);
  }
  return out;
}

/// T_k(x) = cos(k arccos x) on [-1, 1].
inline double cheb_t(std::size_t k, double x) {
  x = std::clamp(x, -1.0, 1.0);
  return std::cos(static_cast<double>(k) * std::acos(x));
}

inline double cheb_sum(const std::vector<double>& c, double t, double length) {
  const double x = 2.0 * t / length - 1.0;
  double s = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) s += c[k] * cheb_t(k, x);
  return s;
}

/// Coefficients of the interpolant through values at the practical nodes by a
/// dense collocation solve.
inline std::vector<double> cheb_collocation(const std::vector<double>& values, double length) {
  const std::size_t n = values.size();
  const std::vector<double> t = bandfit::cheb_nodes(n, length);
  Eigen::MatrixXd A(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) A(j, k) = cheb_t(k, 2.0 * t[j] / length - 1.0);
  return dense_solve(A, values);
}

/// Composite Gauss-Legendre (5 points per panel) integral of f over [a, b].
template <class F>
double gauss_integral(F&& f, double a, double b, int panels = 200) {
  static const double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
  static const double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                              0.2369268850561891};
  double sum = 0.0;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int i = 0; i < 5; ++i) sum += 0.5 * h * w[i] * f(mid + 0.5 * h * x[i]);
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Kinematic states

template <class B>
bandfit::CurveState<B> sampled_state(double length, std::size_t n, auto&& fx, auto&& fy) {
  bandfit::CurveState<B> s;
  s.length = length;
  s.t = B::nodes(n, length);
  s.x.resize(n);
  s.y.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    s.x[j] = fx(s.t[j]);
    s.y[j] = fy(s.t[j]);
  }
  s.anchor = {s.x[0], s.y[0]};
  return s;
}

inline bandfit::CurveState<bandfit::FourierBasis> circle_state(std::size_t n, double radius = 1.0) {
  return bandfit::extract_kinematics(sampled_state<bandfit::FourierBasis>(
      1.0, n, [&](double t) { return radius * std::cos(2 * pi * t); },
      [&](double t) { return radius * std::sin(2 * pi * t); }));
}

/// Discrete closure sums (1/N) sum s' cos(theta) and (1/N) sum s' sin(theta).
inline Vec2 closure_sums(const std::vector<double>& theta, const std::vector<double>& sprime) {
  Vec2 s;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    s.x += sprime[j] * std::cos(theta[j]);
    s.y += sprime[j] * std::sin(theta[j]);
  }
  return s / static_cast<double>(theta.size());
}

inline double rms(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace support
