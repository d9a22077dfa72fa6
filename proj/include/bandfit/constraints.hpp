#pragma once

// The three corrections applied after every filtering pass:
//   1. close_sprime       - make s' orthogonal to cos(theta) and sin(theta)
//   2. reposition         - rigid rotation + translation fitting the data
//   3. apply_perturbations- Gaussian bumps restoring exact interpolation
// plus the one-off nearest-parameter search they all rely on.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bandfit/bezier_seed.hpp"
#include "bandfit/error.hpp"
#include "bandfit/geometry.hpp"
#include "bandfit/kinematics.hpp"
#include "bandfit/linalg.hpp"

namespace bandfit {

// ---------------------------------------------------------------------------
// Closure

/// Two-step Gram-Schmidt of s' against cos(theta), then against the part of
/// sin(theta) orthogonal to cos(theta). Uniform (trapezoidal) weights.
inline std::vector<double> close_sprime(std::span<const double> theta, std::span<const double> sprime) {
  const std::size_t n = theta.size();
  if (n == 0 || sprime.size() != n) throw Error(ErrorKind::size, "theta and s' must have equal nonzero length");
  std::vector<double> cs(n), sn(n), out(sprime.begin(), sprime.end());
  double cc = 0.0, sc = 0.0, oc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    cs[j] = std::cos(theta[j]);
    sn[j] = std::sin(theta[j]);
    cc += cs[j] * cs[j];
    sc += sn[j] * cs[j];
    oc += out[j] * cs[j];
  }
  if (cc <= 1e-24 * static_cast<double>(n))
    throw Error(ErrorKind::degenerate_input, "cos(theta) is numerically zero; cannot close the curve");
  for (std::size_t j = 0; j < n; ++j) out[j] -= cs[j] * (oc / cc);

  std::vector<double> lambda(n);
  double ll = 0.0, ol = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    lambda[j] = sn[j] - cs[j] * (sc / cc);
    ll += lambda[j] * lambda[j];
  }
  if (ll <= 1e-24 * static_cast<double>(n))
    throw Error(ErrorKind::degenerate_input, "sin(theta) is parallel to cos(theta); cannot close the curve");
  for (std::size_t j = 0; j < n; ++j) ol += out[j] * lambda[j];
  for (std::size_t j = 0; j < n; ++j) out[j] -= lambda[j] * (ol / ll);
  return out;
}

// ---------------------------------------------------------------------------
// Nearest parameters

struct NearestParams {
  std::vector<double> tpar;   // curve parameter of the closest point to each datum
  std::vector<double> sigma;  // Gaussian width of the perturbation centred there
  double length = 1.0;
  bool closed = false;
};

/// Parameter distance, wrapped on the circle of circumference L when closed.
inline double parameter_gap(double a, double b, double length, bool closed) {
  double d = std::abs(a - b);
  if (closed) d = std::min(d, length - std::fmod(d, length));
  return d;
}

/// sigma_i = ln(1/eps) L^2 / Delta_i^2 with Delta_i the parameter distance to
/// the nearer of the neighbours n_bands positions away along the curve. The
/// bump centred at t_i is then at most eps at every datum more than n_bands
/// positions away, so the interpolation matrix has half-bandwidth n_bands.
inline std::vector<double> perturbation_widths(std::span<const double> tpar, double length, bool closed,
                                               std::size_t n_bands, double eps) {
  const std::size_t n = tpar.size();
  if (n_bands == 0) throw Error(ErrorKind::config, "n_bands must be at least 1");
  std::vector<double> sigma(n);
  const double log_inv_eps = std::log(1.0 / eps);
  for (std::size_t i = 0; i < n; ++i) {
    double delta = std::numeric_limits<double>::infinity();
    if (closed) {
      if (2 * n_bands < n) {
        delta = std::min(parameter_gap(tpar[i], tpar[(i + n_bands) % n], length, true),
                         parameter_gap(tpar[i], tpar[(i + n - n_bands % n) % n], length, true));
      }
    } else {
      if (i + n_bands < n) delta = std::min(delta, std::abs(tpar[i + n_bands] - tpar[i]));
      if (i >= n_bands) delta = std::min(delta, std::abs(tpar[i] - tpar[i - n_bands]));
    }
    if (!std::isfinite(delta)) {
      // Every other datum is inside the band: no decay is required.
      delta = 0.0;
      for (std::size_t j = 0; j < n; ++j) delta = std::max(delta, parameter_gap(tpar[i], tpar[j], length, closed));
      if (delta == 0.0) delta = length;
    }
    if (!(delta > 0.0)) throw Error(ErrorKind::degenerate_input, "two data points share a nearest parameter");
    sigma[i] = log_inv_eps * length * length / (delta * delta);
  }
  return sigma;
}

/// Closest-point parameters, computed once on the seed curve: a coarse argmin
/// over all grid samples, then safeguarded 1D Newton on |gamma(t) - C|^2.
template <class B>
NearestParams nearest_parameters(const CurveState<B>& state, const PointSet& pts, std::size_t n_bands, double eps) {
  const double L = state.length;
  const auto curve = CurveSeries<B>::from(state);
  const auto d1 = curve.derivative();
  const auto d2 = d1.derivative();
  const std::size_t n = state.size();

  auto wrap = [&](double t) {
    if constexpr (B::periodic) {
      t = std::fmod(t, L);
      return t < 0.0 ? t + L : t;
    } else {
      return std::clamp(t, 0.0, L);
    }
  };

  NearestParams out;
  out.length = L;
  out.closed = B::periodic;
  out.tpar.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2 target = pts[i];
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      const double dd = (state.x[j] - target.x) * (state.x[j] - target.x) + (state.y[j] - target.y) * (state.y[j] - target.y);
      if (dd < best_d2) { best_d2 = dd; best = j; }
    }
    double t = state.t[best];
    double dist2 = dot(curve(t) - target, curve(t) - target);
    // Steps never leave the two grid cells around the coarse minimum.
    const double max_step = std::max(best > 0 ? state.t[best] - state.t[best - 1] : 0.0,
                                     best + 1 < n ? state.t[best + 1] - state.t[best] : L - state.t[best]);
    for (int iter = 0; iter < 30; ++iter) {
      const Vec2 r = curve(t) - target;
      const Vec2 g1 = d1(t), g2 = d2(t);
      const double grad = 2.0 * dot(r, g1);
      const double hess = 2.0 * (dot(g1, g1) + dot(r, g2));
      if (!(hess > 0.0)) break;
      double step = std::clamp(-grad / hess, -max_step, max_step);
      double trial = wrap(t + step);
      double trial_d2 = dot(curve(trial) - target, curve(trial) - target);
      int halvings = 0;
      while (trial_d2 > dist2 && halvings < 30) {
        step *= 0.5;
        trial = wrap(t + step);
        trial_d2 = dot(curve(trial) - target, curve(trial) - target);
        ++halvings;
      }
      if (trial_d2 > dist2) break;
      const bool done = std::abs(trial - t) <= 1e-12 * L;
      t = trial;
      dist2 = trial_d2;
      if (done) break;
    }
    out.tpar[i] = t;
  }
  out.sigma = perturbation_widths(out.tpar, L, out.closed, n_bands, eps);
  return out;
}

// ---------------------------------------------------------------------------
// Rigid repositioning

struct RigidFix {
  double psi = 0.0;
  double dx = 0.0, dy = 0.0;
  Vec2 center{};
  std::vector<double> r, phi;
  bool used_fallback = false;

  Vec2 apply(Vec2 p) const { return center + Vec2{dx, dy} + rotate(p - center, psi); }
};

/// Sum of squared distances between the rotated/translated closest points and
/// the data.
class RepositionObjective {
 public:
  RepositionObjective(std::span<const Vec2> closest, std::span<const Vec2> data) : data_(data.begin(), data.end()) {
    if (closest.size() != data.size() || closest.empty())
      throw Error(ErrorKind::size, "closest points and data must have equal nonzero length");
    for (const Vec2& p : closest) center_ += p;
    center_ /= static_cast<double>(closest.size());
    for (const Vec2& p : closest) {
      r_.push_back(norm(p - center_));
      phi_.push_back(std::atan2(p.y - center_.y, p.x - center_.x));
    }
  }

  Vec2 center() const { return center_; }
  const std::vector<double>& r() const { return r_; }
  const std::vector<double>& phi() const { return phi_; }

  double value(double psi, double dx, double dy) const {
    double f = 0.0;
    for (std::size_t i = 0; i < r_.size(); ++i) {
      const double ex = center_.x + dx + r_[i] * std::cos(phi_[i] + psi) - data_[i].x;
      const double ey = center_.y + dy + r_[i] * std::sin(phi_[i] + psi) - data_[i].y;
      f += ex * ex + ey * ey;
    }
    return f;
  }

  /// Gradient and Hessian in the variable order (psi, dx, dy).
  void derivatives(double psi, double dx, double dy, std::array<double, 3>& g, std::array<std::array<double, 3>, 3>& h) const {
    g = {0.0, 0.0, 0.0};
    double h_pp = 0.0, h_px = 0.0, h_py = 0.0;
    for (std::size_t i = 0; i < r_.size(); ++i) {
      const double c = r_[i] * std::cos(phi_[i] + psi), s = r_[i] * std::sin(phi_[i] + psi);
      const double ex = center_.x + dx + c - data_[i].x;
      const double ey = center_.y + dy + s - data_[i].y;
      // d/dpsi of (c, s) is (-s, c); second derivative is (-c, -s).
      g[0] += 2.0 * (-ex * s + ey * c);
      g[1] += 2.0 * ex;
      g[2] += 2.0 * ey;
      h_pp += 2.0 * (s * s + c * c - ex * c - ey * s);
      h_px += -2.0 * s;
      h_py += 2.0 * c;
    }
    const double m = 2.0 * static_cast<double>(r_.size());
    h = {{{h_pp, h_px, h_py}, {h_px, m, 0.0}, {h_py, 0.0, m}}};
  }

 private:
  std::vector<Vec2> data_;
  Vec2 center_{};
  std::vector<double> r_, phi_;
};

namespace detail {

inline bool solve3(const std::array<std::array<double, 3>, 3>& a, const std::array<double, 3>& b, std::array<double, 3>& x) {
  const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                     a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  if (!(std::abs(det) > 0.0) || !std::isfinite(det)) return false;
  for (int c = 0; c < 3; ++c) {
    auto m = a;
    for (int r = 0; r < 3; ++r) m[r][c] = b[r];
    x[c] = (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
            m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])) / det;
  }
  return true;
}

}  // namespace detail

/// Newton's method on the 3-parameter objective from (0, 0, 0), with step
/// halving; falls back to the closed-form translation and golden-section on
/// the angle if Newton stalls.
inline RigidFix solve_reposition(std::span<const Vec2> closest, std::span<const Vec2> data) {
  const RepositionObjective f(closest, data);
  RigidFix fix;
  fix.center = f.center();
  fix.r = f.r();
  fix.phi = f.phi();

  std::array<double, 3> p{0.0, 0.0, 0.0};
  double fp = f.value(0.0, 0.0, 0.0);
  bool converged = false;
  for (int iter = 0; iter < 50; ++iter) {
    std::array<double, 3> g{};
    std::array<std::array<double, 3>, 3> h{};
    f.derivatives(p[0], p[1], p[2], g, h);
    std::array<double, 3> step{};
    if (!detail::solve3(h, g, step) || h[0][0] * h[1][1] - h[0][1] * h[1][0] <= 0.0) break;
    double lambda = 1.0;
    std::array<double, 3> trial{};
    double ft = 0.0;
    for (int k = 0; k < 40; ++k) {
      for (int c = 0; c < 3; ++c) trial[c] = p[c] - lambda * step[c];
      ft = f.value(trial[0], trial[1], trial[2]);
      if (ft <= fp) break;
      lambda *= 0.5;
    }
    if (ft > fp) {
      converged = true;  // no descent possible at working precision
      break;
    }
    const double size = std::abs(step[0]) + std::abs(step[1]) + std::abs(step[2]);
    p = trial;
    fp = ft;
    if (lambda * size <= 1e-15 * (1.0 + std::abs(p[0]) + std::abs(p[1]) + std::abs(p[2]))) {
      converged = true;
      break;
    }
  }
  if (!converged || !std::isfinite(fp)) {
    // Translation is exact for any angle: the rotated offsets have zero mean.
    Vec2 mean_data{};
    for (const Vec2& c : data) mean_data += c;
    mean_data /= static_cast<double>(data.size());
    const Vec2 shift = mean_data - f.center();
    auto along = [&](double psi) { return f.value(psi, shift.x, shift.y); };
    double best = 0.0, best_f = along(0.0);
    constexpr int coarse = 72;
    for (int k = 1; k < coarse; ++k) {
      const double psi = -std::numbers::pi + 2.0 * std::numbers::pi * k / coarse;
      if (along(psi) < best_f) { best_f = along(psi); best = psi; }
    }
    double lo = best - 2.0 * std::numbers::pi / coarse, hi = best + 2.0 * std::numbers::pi / coarse;
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = hi - golden * (hi - lo), b = lo + golden * (hi - lo);
    double fa = along(a), fb = along(b);
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      if (fa < fb) { hi = b; b = a; fb = fa; a = hi - golden * (hi - lo); fa = along(a); }
      else { lo = a; a = b; fa = fb; b = lo + golden * (hi - lo); fb = along(b); }
    }
    p = {0.5 * (lo + hi), shift.x, shift.y};
    fix.used_fallback = true;
  }
  fix.psi = std::remainder(p[0], 2.0 * std::numbers::pi);
  fix.dx = p[1];
  fix.dy = p[2];
  return fix;
}

/// Rigidly moves every sample of the state so the closest points best match
/// the data in the least-squares sense.
template <class B>
std::pair<RigidFix, CurveState<B>> reposition(CurveState<B> state, const NearestParams& nearest, const PointSet& pts) {
  const auto curve = CurveSeries<B>::from(state);
  std::vector<Vec2> closest(nearest.tpar.size());
  for (std::size_t i = 0; i < closest.size(); ++i) closest[i] = curve(nearest.tpar[i]);
  RigidFix fix = solve_reposition(closest, pts.points());
  for (std::size_t j = 0; j < state.size(); ++j) {
    const Vec2 q = fix.apply({state.x[j], state.y[j]});
    state.x[j] = q.x;
    state.y[j] = q.y;
  }
  state.anchor = fix.apply(state.anchor);
  return {std::move(fix), std::move(state)};
}

// ---------------------------------------------------------------------------
// Gaussian perturbations

/// The bumps g_i(t) = exp(-sigma_i ((t - t_i) / L)^2), summed over periodic
/// images when the curve is closed.
class PerturbationBasis {
 public:
  /// exp(-x) below this is treated as an exact zero (e^-41.4 ~ 1e-18).
  static constexpr double kCutoffExponent = 41.5;

  explicit PerturbationBasis(const NearestParams& np) : np_(np) {
    images_.resize(np_.sigma.size(), 0);
    if (np_.closed)
      for (std::size_t i = 0; i < images_.size(); ++i) images_[i] = image_count(np_.sigma[i]);
  }

  /// Number of images K on each side: the first omitted term, at reduced
  /// offset |u + k| >= K + 1/2, falls below 1e-17.
  static int image_count(double sigma) {
    int k = 1;
    while (std::exp(-sigma * (k + 0.5) * (k + 0.5)) >= 1e-17) ++k;
    return k;
  }

  std::size_t size() const { return np_.tpar.size(); }
  int images(std::size_t i) const { return images_[i]; }

  double operator()(std::size_t i, double t) const { return eval(i, t, images_[i]); }

  /// Explicit image count, for checking the truncation.
  double eval(std::size_t i, double t, int images) const {
    const double L = np_.length;
    double u = (t - np_.tpar[i]) / L;
    if (!np_.closed) {
      const double e = np_.sigma[i] * u * u;
      return e > kCutoffExponent ? 0.0 : std::exp(-e);
    }
    u -= std::round(u);  // u in [-1/2, 1/2]
    double sum = 0.0;
    for (int k = -images; k <= images; ++k) {
      const double e = np_.sigma[i] * (u + k) * (u + k);
      if (e <= kCutoffExponent) sum += std::exp(-e);
    }
    return sum;
  }

  /// g_i sampled on a node vector.
  std::vector<double> sample(std::size_t i, std::span<const double> t) const {
    std::vector<double> out(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) out[j] = (*this)(i, t[j]);
    return out;
  }

 private:
  const NearestParams& np_;
  std::vector<int> images_;
};

struct PerturbationCoefficients {
  std::vector<double> cx, cy;
  double max_residual_before = 0.0;
};

/// Solves A c = C - curve(t~) with A_ij = g_j(t~_i), kept to the
/// (cyclic) band |i - j| <= n_bands; entries beyond it are below eps by the
/// choice of widths.
template <class B>
PerturbationCoefficients solve_perturbations(const CurveState<B>& state, const NearestParams& nearest,
                                            const PointSet& pts, std::size_t n_bands) {
  const auto curve = CurveSeries<B>::from(state);
  const PerturbationBasis g(nearest);
  const std::size_t m = pts.size();
  std::vector<double> rx(m), ry(m);
  PerturbationCoefficients out;
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2 r = pts[i] - curve(nearest.tpar[i]);
    rx[i] = r.x;
    ry[i] = r.y;
    out.max_residual_before = std::max(out.max_residual_before, norm(r));
  }
  std::vector<std::vector<double>> sol;
  try {
    if (nearest.closed) {
      CyclicBandedMatrix a(m, n_bands);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
          if (a.cyclic_distance(i, j) <= n_bands) a.set(i, j, g(j, nearest.tpar[i]));
      sol = a.solve({rx, ry});
    } else {
      BandedMatrix a(m, n_bands);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = (i > n_bands ? i - n_bands : 0); j < std::min(m, i + n_bands + 1); ++j)
          a.set(i, j, g(j, nearest.tpar[i]));
      sol = a.solve({rx, ry});
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::singular)
      throw Error(ErrorKind::ill_conditioned,
                  std::string("perturbation system is singular (bumps too narrow or data too close): ") + e.what());
    throw;
  }
  out.cx = std::move(sol[0]);
  out.cy = std::move(sol[1]);
  for (double v : out.cx)
    if (!std::isfinite(v)) throw Error(ErrorKind::ill_conditioned, "non-finite perturbation coefficient");
  for (double v : out.cy)
    if (!std::isfinite(v)) throw Error(ErrorKind::ill_conditioned, "non-finite perturbation coefficient");
  return out;
}

/// Adds sum_i c_i g_i(t_j) to every sample so the curve passes through the
/// data at the fixed nearest parameters.
template <class B>
CurveState<B> add_perturbations(CurveState<B> state, const NearestParams& nearest, const PerturbationCoefficients& c) {
  const PerturbationBasis g(nearest);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (c.cx[i] == 0.0 && c.cy[i] == 0.0) continue;
    for (std::size_t j = 0; j < state.size(); ++j) {
      const double v = g(i, state.t[j]);
      if (v == 0.0) continue;
      state.x[j] += c.cx[i] * v;
      state.y[j] += c.cy[i] * v;
    }
  }
  state.anchor = {state.x[0], state.y[0]};
  return state;
}

template <class B>
CurveState<B> apply_perturbations(CurveState<B> state, const NearestParams& nearest, const PointSet& pts,
                                  std::size_t n_bands) {
  const PerturbationCoefficients c = solve_perturbations(state, nearest, pts, n_bands);
  return add_perturbations(std::move(state), nearest, c);
}

/// max_i |curve(t~_i) - C_i| for the spectral interpolant of the samples.
template <class B>
double interpolation_residual(const CurveState<B>& state, const NearestParams& nearest, const PointSet& pts) {
  const auto curve = CurveSeries<B>::from(state);
  double worst = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) worst = std::max(worst, distance(curve(nearest.tpar[i]), pts[i]));
  return worst;
}

}  // namespace bandfit
