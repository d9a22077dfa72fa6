#pragma once

// The outer continuation loop. Each iteration filters theta and s' slightly
// harder than the last, rebuilds the curve, and repairs interpolation; it
// stops once few enough coefficients of theta and s' remain above the noise
// thresholds computed from the seed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "bandfit/bezier_seed.hpp"
#include "bandfit/constraints.hpp"
#include "bandfit/error.hpp"
#include "bandfit/geometry.hpp"
#include "bandfit/kinematics.hpp"
#include "bandfit/spectral.hpp"

namespace bandfit {

/// How the tangent norm in the theta threshold is measured: the plain
/// minimum speed, or the speed scaled by the square root of the quadrature
/// weight at each node.
enum class TangentNorm { pointwise, weighted };

struct FitConfig {
  std::size_t N = 1000;
  std::size_t n_iters = 60;
  double h_filter = 1.0 / 25.0;
  double eps = 1e-16;
  std::size_t n_coefs = 500;
  std::size_t n_bands = 8;
  bool closed = false;
  TangentNorm tangent_norm = TangentNorm::weighted;
  /// Skip the termination test and run all n_iters iterations (benchmarks).
  bool ignore_budget = false;

  void validate() const {
    if (!(h_filter > 0.0 && h_filter < 1.0)) throw Error(ErrorKind::config, "h_filter must lie in (0, 1)");
    if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorKind::config, "eps must lie in (0, 1)");
    if (n_coefs < 4 || n_coefs > N)
      throw Error(ErrorKind::config, "n_coefs must satisfy 4 <= n_coefs <= N (got " + std::to_string(n_coefs) + ")");
    if (n_bands < 1) throw Error(ErrorKind::config, "n_bands must be at least 1");
    if (n_iters < 1) throw Error(ErrorKind::config, "n_iters must be at least 1");
    if (closed && N % 2 != 0) throw Error(ErrorKind::config, "N must be even for a closed curve");
    if (closed && n_coefs % 2 != 0)
      throw Error(ErrorKind::config, "n_coefs must be even for a closed curve (coefficients come in pairs)");
  }
};

struct Thresholds {
  double theta = 0.0;
  double sprime = 0.0;
};

struct Budgets {
  std::size_t theta = 0;
  std::size_t sprime = 0;
};

/// Per-iteration record passed to the observer and kept in the result.
struct IterationInfo {
  std::size_t m = 0;
  double bandwidth = 0.0;            // a_m used by the filter (0 on the final check)
  std::size_t theta_count = 0;       // coefficients above the threshold, before filtering
  std::size_t sprime_count = 0;
  std::size_t theta_decay = 0;       // highest one-sided index above the threshold, +1
  std::size_t sprime_decay = 0;
  double closure_gap = 0.0;          // after closing s' (closed curves)
  double interpolation_residual = 0.0;  // after the perturbation step
  double rigid_angle = 0.0;
  double seconds = 0.0;
};

struct FitResult {
  Basis basis = Basis::chebyshev;
  double length = 1.0;
  std::size_t n_coefs = 0;
  /// Chebyshev: c_0..c_{n-1}. Fourier: (Re X_k, Im X_k) for k = 0..n/2-1.
  std::vector<double> x_coefs, y_coefs;
  std::size_t n_stop = 0;
  double e_samp = 0.0;
  bool converged = false;
  std::size_t theta_decay = 0, sprime_decay = 0;
  std::size_t theta_count = 0, sprime_count = 0;
  Thresholds thresholds;
  Budgets budgets;
  std::vector<double> tpar;        // nearest parameter of each datum
  std::vector<Vec2> points;        // the data, in fitted units
  double scale = 1.0;              // fitted units per input unit
  FitConfig config;
  std::vector<IterationInfo> history;
};

// ---------------------------------------------------------------------------

template <class B>
Thresholds compute_thresholds(const CurveState<B>& s, double eps, TangentNorm norm = TangentNorm::weighted) {
  const std::size_t n = s.size();
  const std::vector<double> w = B::weights(n, s.length);
  double mass = 0.0;
  double min_tangent = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    mass += (s.x[j] * s.x[j] + s.y[j] * s.y[j]) * w[j];
    min_tangent = std::min(min_tangent, std::sqrt((s.dx[j] * s.dx[j] + s.dy[j] * s.dy[j]) * (norm == TangentNorm::weighted ? w[j] : 1.0)));
  }
  const double nn = static_cast<double>(n);
  const double growth = B::periodic ? nn : nn * std::sqrt(nn);
  Thresholds t;
  t.sprime = eps * growth * std::sqrt(mass);
  if (!(min_tangent > 0.0) || !std::isfinite(min_tangent))
    throw Error(ErrorKind::singular, "vanishing tangent on the seed curve");
  t.theta = t.sprime / min_tangent;
  return t;
}

inline std::size_t coef_budget(std::size_t n_coefs, double eps, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorKind::domain, "threshold must lie in (0, 1)");
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorKind::domain, "eps must lie in (0, 1)");
  const double raw = static_cast<double>(n_coefs) * std::log(1.0 / delta) / std::log(1.0 / eps);
  // Absorb rounding in the logarithms so exact ratios are not bumped up.
  return static_cast<std::size_t>(std::ceil(raw - 1e-9));
}

/// Gaussian bandwidth for iteration m: the cutoff K (1 - h)^m is where the
/// gain reaches eps.
inline double filter_bandwidth(std::size_t m, double max_frequency, double h_filter, double eps) {
  if (m < 1) throw Error(ErrorKind::domain, "iteration index starts at 1");
  const double cutoff = max_frequency * std::pow(1.0 - h_filter, static_cast<double>(m));
  return cutoff * std::sqrt(std::numbers::pi / std::log(1.0 / eps));
}

template <class Series, class B = std::conditional_t<std::is_same_v<Series, FourierSeries>, FourierBasis, ChebyshevBasis>>
bool check_termination(const Series& theta, const Series& sprime, const Thresholds& delta, const Budgets& budget) {
  return B::count_above(theta, delta.theta) <= budget.theta && B::count_above(sprime, delta.sprime) <= budget.sprime;
}

// ---------------------------------------------------------------------------
// Truncated result series

namespace detail {

inline void truncate_into(const ChebyshevSeries& s, std::size_t n, std::vector<double>& out) {
  out.assign(n, 0.0);
  for (std::size_t k = 0; k < n && k < s.size(); ++k) out[k] = s.coeffs[k];
}

inline void truncate_into(const FourierSeries& s, std::size_t n, std::vector<double>& out) {
  out.assign(n, 0.0);
  for (std::size_t k = 0; 2 * k + 1 < n && static_cast<long>(k) < s.half(); ++k) {
    const cplx c = s.at(static_cast<long>(k));
    out[2 * k] = c.real();
    out[2 * k + 1] = k == 0 ? 0.0 : c.imag();
  }
}

inline double eval_truncated(Basis basis, double length, std::span<const double> c, double t) {
  if (basis == Basis::chebyshev) {
    ChebyshevSeries s{length, std::vector<double>(c.begin(), c.end())};
    return cheb_evaluate(s, std::clamp(t, 0.0, length));
  }
  const std::size_t pairs = c.size() / 2;
  double sum = c.empty() ? 0.0 : c[0];
  if (pairs < 2) return sum;
  // Rotating phasor by recurrence, re-anchored every block to limit drift.
  const double step = 2.0 * std::numbers::pi * t / length;
  const cplx w = std::polar(1.0, step);
  cplx z{1.0, 0.0};
  double acc = 0.0;
  for (std::size_t k = 1; k < pairs; ++k) {
    z = (k % 64 == 0) ? std::polar(1.0, step * static_cast<double>(k)) : z * w;
    acc += c[2 * k] * z.real() - c[2 * k + 1] * z.imag();
  }
  return sum + 2.0 * acc;
}

}  // namespace detail

inline Vec2 eval_result(const FitResult& r, double t) {
  return {detail::eval_truncated(r.basis, r.length, r.x_coefs, t), detail::eval_truncated(r.basis, r.length, r.y_coefs, t)};
}

inline std::vector<Vec2> eval_result(const FitResult& r, std::span<const double> t) {
  std::vector<Vec2> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = eval_result(r, t[i]);
  return out;
}

inline double residual_at_samples(const FitResult& r, const PointSet& pts, std::span<const double> tpar) {
  if (tpar.size() != pts.size()) throw Error(ErrorKind::size, "one parameter per data point required");
  double worst = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) worst = std::max(worst, distance(eval_result(r, tpar[i]), pts[i]));
  return worst;
}

/// Samples the truncated result on the n-node grid of its basis.
template <class B>
CurveState<B> result_state(const FitResult& r, std::size_t n) {
  if (r.basis != B::tag) throw Error(ErrorKind::config, "result basis does not match the requested grid");
  CurveState<B> s;
  s.length = r.length;
  s.t = B::nodes(n, r.length);
  if constexpr (B::periodic) {
    require_even(n);
    auto sample = [&](std::span<const double> c) {
      FourierSeries f{r.length, std::vector<cplx>(n, cplx{})};
      const long h = f.half();
      for (std::size_t k = 0; 2 * k + 1 < c.size() && static_cast<long>(k) < h; ++k) {
        const cplx v{c[2 * k], c[2 * k + 1]};
        f.coeffs[static_cast<std::size_t>(h + static_cast<long>(k))] = v;
        if (k > 0) f.coeffs[static_cast<std::size_t>(h - static_cast<long>(k))] = std::conj(v);
      }
      return fourier_inverse_real(f);
    };
    s.x = sample(r.x_coefs);
    s.y = sample(r.y_coefs);
  } else {
    s.x = cheb_values_at_nodes(ChebyshevSeries{r.length, r.x_coefs}, n);
    s.y = cheb_values_at_nodes(ChebyshevSeries{r.length, r.y_coefs}, n);
  }
  s.anchor = {s.x[0], s.y[0]};
  return s;
}

// ---------------------------------------------------------------------------

using IterationObserver = std::function<void(const IterationInfo&)>;

template <class B>
FitResult run_continuation_with(const PointSet& pts, const FitConfig& cfg, const IterationObserver& observe = {}) {
  using Clock = std::chrono::steady_clock;
  cfg.validate();
  if (cfg.closed != pts.is_closed()) throw Error(ErrorKind::config, "config and point set disagree on closedness");
  if (B::periodic != cfg.closed) throw Error(ErrorKind::config, "basis does not match the curve type");

  const BezierSpline seed = fit_spline(pts);
  CurveState<B> state = extract_kinematics(discretize_spline<B>(seed, cfg.N));
  const NearestParams nearest = nearest_parameters(state, pts, cfg.n_bands, cfg.eps);

  FitResult result;
  result.basis = B::tag;
  result.length = state.length;
  result.n_coefs = cfg.n_coefs;
  result.config = cfg;
  result.tpar = nearest.tpar;
  result.points.assign(pts.points().begin(), pts.points().end());
  result.thresholds = compute_thresholds(state, cfg.eps, cfg.tangent_norm);
  result.budgets = {coef_budget(cfg.n_coefs, cfg.eps, result.thresholds.theta),
                    coef_budget(cfg.n_coefs, cfg.eps, result.thresholds.sprime)};
  const double K = B::max_frequency(cfg.N);

  auto finish = [&](const CurveState<B>& s, std::size_t m, bool converged) {
    const auto curve = CurveSeries<B>::from(s);
    detail::truncate_into(curve.x, cfg.n_coefs, result.x_coefs);
    detail::truncate_into(curve.y, cfg.n_coefs, result.y_coefs);
    result.n_stop = m;
    result.converged = converged;
    result.e_samp = residual_at_samples(result, pts, nearest.tpar);
    return result;
  };

  for (std::size_t m = 1;; ++m) {
    const auto start = Clock::now();
    IterationInfo info;
    info.m = m;

    // Steps 3-4: spectra of theta (detrended when closed) and s'.
    const auto theta_hat = B::forward(state.theta, state.length);
    const auto sprime_hat = B::forward(state.sprime, state.length);
    info.theta_count = B::count_above(theta_hat, result.thresholds.theta);
    info.sprime_count = B::count_above(sprime_hat, result.thresholds.sprime);
    info.theta_decay = B::decay_index(theta_hat, result.thresholds.theta);
    info.sprime_decay = B::decay_index(sprime_hat, result.thresholds.sprime);
    result.theta_count = info.theta_count;
    result.sprime_count = info.sprime_count;
    result.theta_decay = info.theta_decay;
    result.sprime_decay = info.sprime_decay;

    const bool done = info.theta_count <= result.budgets.theta && info.sprime_count <= result.budgets.sprime;
    if ((done && !cfg.ignore_budget) || m > cfg.n_iters) {
      info.seconds = std::chrono::duration<double>(Clock::now() - start).count();
      info.interpolation_residual = interpolation_residual(state, nearest, pts);
      result.history.push_back(info);
      if (observe) observe(info);
      return finish(state, m, done);
    }

    // Step 5: filter.
    info.bandwidth = filter_bandwidth(m, K, cfg.h_filter, cfg.eps);
    state.theta = B::values(B::filter(theta_hat, info.bandwidth), state.size());
    state.sprime = B::values(B::filter(sprime_hat, info.bandwidth), state.size());

    // Step 6: closure.
    if constexpr (B::periodic) {
      const CurveState<B> full = retrend_theta(state);
      state.sprime = close_sprime(full.theta, state.sprime);
      info.closure_gap = closure_residual(state);
    }

    // Steps 7-9: rebuild, move rigidly onto the data, restore interpolation.
    state = reconstruct_curve(std::move(state));
    auto [fix, moved] = reposition(std::move(state), nearest, pts);
    info.rigid_angle = fix.psi;
    state = apply_perturbations(std::move(moved), nearest, pts, cfg.n_bands);
    info.interpolation_residual = interpolation_residual(state, nearest, pts);
    state = extract_kinematics(std::move(state));

    info.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    result.history.push_back(info);
    if (observe) observe(info);
  }
}

inline FitResult run_continuation(const PointSet& pts, const FitConfig& cfg, const IterationObserver& observe = {}) {
  return cfg.closed ? run_continuation_with<FourierBasis>(pts, cfg, observe)
                    : run_continuation_with<ChebyshevBasis>(pts, cfg, observe);
}

}  // namespace bandfit
