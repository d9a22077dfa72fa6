#include <gtest/gtest.h>

#include "support.hpp"

using namespace bandfit;
using support::pi;

namespace {

CurveState<ChebyshevBasis> spiral_seed() {
  return extract_kinematics(discretize_spline<ChebyshevBasis>(fit_open_spline(support::load_normalized("spiral.txt")), 1000));
}

struct Run {
  PointSet pts;
  FitResult result;
};

// The two reference fits are slow enough to share between tests.
const Run& spiral_run() {
  static const Run run = [] {
    PointSet pts = support::load_normalized("spiral.txt");
    FitResult r = run_continuation(pts, support::spiral_config());
    return Run{std::move(pts), std::move(r)};
  }();
  return run;
}

const Run& flower_run() {
  static const Run run = [] {
    PointSet pts = support::load_normalized("flower8.txt");
    FitResult r = run_continuation(pts, support::flower_config());
    return Run{std::move(pts), std::move(r)};
  }();
  return run;
}

}  // namespace

// ---------------------------------------------------------------------------
// Thresholds and budgets

TEST(Thresholds, UnitCircle) {
  const auto s = support::circle_state(1024);
  const Thresholds t = compute_thresholds(s, 1e-16);
  EXPECT_NEAR(t.sprime, 1.024e-13, 1e-12 * 1.024e-13 * 1e3);
  // Speed 2 pi, weight 1/N.
  EXPECT_NEAR(t.theta, t.sprime / (2 * pi / 32.0), 1e-9 * t.theta);
}

TEST(Thresholds, SpiralMatchesDirectSum) {
  const auto s = spiral_seed();
  const std::size_t n = s.size();
  // Quadrature weights from the moment conditions on the node grid.
  Eigen::MatrixXd v(n, n);
  std::vector<double> moments(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) v(k, j) = support::cheb_t(k, 2.0 * s.t[j] / s.length - 1.0);
    if (k % 2 == 0) moments[k] = s.length / 2.0 * 2.0 / (1.0 - static_cast<double>(k * k));
  }
  const std::vector<double> w = support::dense_solve(v, moments);
  long double mass = 0.0L, min_tangent = 1e300L;
  for (std::size_t j = 0; j < n; ++j) {
    mass += static_cast<long double>((s.x[j] * s.x[j] + s.y[j] * s.y[j]) * w[j]);
    min_tangent = std::min<long double>(min_tangent, std::sqrt((s.dx[j] * s.dx[j] + s.dy[j] * s.dy[j]) * w[j]));
  }
  const double sprime = 1e-16 * std::pow(static_cast<double>(n), 1.5) * std::sqrt(static_cast<double>(mass));
  const Thresholds t = compute_thresholds(s, 1e-16);
  EXPECT_NEAR(t.sprime, sprime, 1e-10 * sprime);
  EXPECT_NEAR(t.theta, sprime / static_cast<double>(min_tangent), 1e-10 * t.theta);
  const Thresholds p = compute_thresholds(s, 1e-16, TangentNorm::pointwise);
  EXPECT_EQ(p.sprime, t.sprime);
  EXPECT_LT(p.theta, t.theta);
}

TEST(Thresholds, ScalingLeavesThetaThresholdInvariant) {
  auto s = support::circle_state(256, 1.0);
  const Thresholds a = compute_thresholds(s, 1e-16);
  for (std::vector<double>* v : {&s.x, &s.y, &s.dx, &s.dy})
    for (double& e : *v) e *= 3.5;
  const Thresholds b = compute_thresholds(s, 1e-16);
  EXPECT_NEAR(b.sprime, 3.5 * a.sprime, 1e-14 * b.sprime);
  EXPECT_NEAR(b.theta, a.theta, 1e-14 * a.theta);
}

TEST(Thresholds, StationarySeedIsSingular) {
  auto s = support::circle_state(64);
  s.dx.assign(64, 0.0);
  s.dy.assign(64, 0.0);
  try {
    compute_thresholds(s, 1e-16);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::singular);
  }
}

TEST(CoefBudget, Examples) {
  EXPECT_EQ(coef_budget(500, 1e-16, 1e-12), 375u);
  EXPECT_EQ(coef_budget(500, 1e-16, 1e-16), 500u);
  EXPECT_EQ(coef_budget(840, 1e-16, 1e-13), 683u);
  EXPECT_THROW(coef_budget(500, 1e-16, 1.0), Error);
  EXPECT_THROW(coef_budget(500, 1e-16, 2.0), Error);
  EXPECT_THROW(coef_budget(500, 0.0, 1e-12), Error);
}

TEST(FilterBandwidth, HalfCutoff) {
  // (1 - h)^m = 1/2 with h = 1 - 2^(-1/m).
  const std::size_t m = 7;
  const double h = 1.0 - std::pow(0.5, 1.0 / m);
  const double a = filter_bandwidth(m, 1000.0, h, 1e-16);
  EXPECT_NEAR(a, 500.0 * std::sqrt(pi / std::log(1e16)), 1e-9);
  EXPECT_NEAR(a, 146.0, 0.05);
  EXPECT_NEAR(gaussian_gain(500.0, a), 1e-16, 1e-26);
}

TEST(FilterBandwidth, ScheduleDecreasesSmoothly) {
  double last = filter_bandwidth(1, 999.0, 1.0 / 25.0, 1e-16);
  for (std::size_t m = 2; m <= 100; ++m) {
    const double a = filter_bandwidth(m, 999.0, 1.0 / 25.0, 1e-16);
    EXPECT_LT(a, last);
    last = a;
  }
  EXPECT_NEAR(filter_bandwidth(5, 999.0, 1e-9, 1e-16), filter_bandwidth(4, 999.0, 1e-9, 1e-16), 1e-6);
  EXPECT_THROW(filter_bandwidth(0, 999.0, 0.1, 1e-16), Error);
}

TEST(CheckTermination, Examples) {
  const Thresholds d{1e-10, 1e-12};
  const ChebyshevSeries zero{1.0, std::vector<double>(64, 0.0)};
  EXPECT_TRUE(check_termination(zero, zero, d, Budgets{0, 0}));
  const ChebyshevSeries full{1.0, std::vector<double>(64, 1.0)};
  EXPECT_FALSE(check_termination(full, zero, d, Budgets{63, 63}));
  EXPECT_FALSE(check_termination(zero, full, d, Budgets{63, 63}));
  EXPECT_TRUE(check_termination(full, full, d, Budgets{64, 64}));
  // Fourier counts include both signs of each frequency.
  FourierSeries f{1.0, std::vector<cplx>(16, cplx{})};
  f.coeffs[8 + 3] = f.coeffs[8 - 3] = 1.0;
  EXPECT_TRUE(check_termination(f, f, d, Budgets{2, 2}));
  EXPECT_FALSE(check_termination(f, f, d, Budgets{1, 2}));
}

TEST(CheckTermination, SpiralBudgetBoundary) {
  const auto s = spiral_seed();
  const Thresholds d = compute_thresholds(s, 1e-16);
  const Budgets b{coef_budget(500, 1e-16, d.theta), coef_budget(500, 1e-16, d.sprime)};
  // Exponentially decaying spectra whose highest index above the threshold
  // is chosen exactly.
  auto decaying = [&](double delta, std::size_t above) {
    ChebyshevSeries c{s.length, std::vector<double>(1000)};
    for (std::size_t k = 0; k < 1000; ++k)
      c.coeffs[k] = delta * std::pow(10.0, (static_cast<double>(above) - static_cast<double>(k) - 0.5) / 40.0);
    return c;
  };
  EXPECT_TRUE(check_termination(decaying(d.theta, b.theta), decaying(d.sprime, b.sprime), d, b));
  EXPECT_FALSE(check_termination(decaying(d.theta, b.theta + 1), decaying(d.sprime, b.sprime), d, b));
  EXPECT_FALSE(check_termination(decaying(d.theta, b.theta), decaying(d.sprime, b.sprime + 1), d, b));
  EXPECT_EQ(ChebyshevBasis::count_above(decaying(d.sprime, b.sprime), d.sprime), b.sprime);
}

// ---------------------------------------------------------------------------
// Residuals

TEST(Residual, ExactAndOffset) {
  FitResult r;
  r.basis = Basis::chebyshev;
  r.length = 2.0;
  r.x_coefs = {1.0, 1.0, 0.0, 0.0};  // x = t
  r.y_coefs = {0.0, 0.0, 0.0, 0.0};
  const std::vector<double> t{0.0, 0.5, 2.0};
  PointSet exact = PointSet::open({{0.0, 0.0}, {0.5, 0.0}, {2.0, 0.0}}, {1, 0}, {1, 0});
  EXPECT_NEAR(residual_at_samples(r, exact, t), 0.0, 1e-15);
  PointSet off = PointSet::open({{0.0, 0.0}, {0.5, 1e-6}, {2.0, 0.0}}, {1, 0}, {1, 0});
  EXPECT_NEAR(residual_at_samples(r, off, t), 1e-6, 1e-15);
  EXPECT_THROW(residual_at_samples(r, off, std::vector<double>{0.0}), Error);
}

TEST(Residual, ResultStateResamplesTruncatedSeries) {
  const auto& run = spiral_run();
  const auto s = result_state<ChebyshevBasis>(run.result, 1000);
  const auto c = CurveSeries<ChebyshevBasis>::from(s);
  for (std::size_t i = 0; i < run.pts.size(); ++i) EXPECT_LE(distance(c(run.result.tpar[i]), run.pts[i]), 1e-12);
  EXPECT_THROW(result_state<FourierBasis>(run.result, 1000), Error);
}

// ---------------------------------------------------------------------------
// Full runs

namespace {

void check_run(const Run& run, std::size_t max_iters) {
  const FitResult& r = run.result;
  const double scale = run.pts.scale();
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.n_stop, max_iters);
  EXPECT_LE(r.e_samp, 1e-12);
  EXPECT_LE(r.e_samp, 100 * 1e-16 * scale * r.config.N);
  EXPECT_EQ(r.history.size(), r.n_stop);
  EXPECT_LE(r.theta_count, r.budgets.theta);
  EXPECT_LE(r.sprime_count, r.budgets.sprime);
  EXPECT_EQ(r.x_coefs.size(), r.n_coefs);
  std::size_t best = r.history.front().theta_count;
  for (const IterationInfo& it : r.history) {
    EXPECT_LE(it.interpolation_residual, 1e-12 * scale) << "iteration " << it.m;
    EXPECT_LE(static_cast<double>(it.theta_count), 1.05 * static_cast<double>(best)) << "iteration " << it.m;
    best = std::min(best, it.theta_count);
    if (r.config.closed && it.bandwidth > 0.0) EXPECT_LE(it.closure_gap, 1e-11 * scale) << "iteration " << it.m;
  }
}

}  // namespace

TEST(Continuation, Spiral) {
  const auto& run = spiral_run();
  check_run(run, 60);
  EXPECT_EQ(run.result.basis, Basis::chebyshev);
  EXPECT_NEAR(run.result.tpar.front(), 0.0, 1e-12);
}

TEST(Continuation, Flower) {
  const auto& run = flower_run();
  check_run(run, 60);
  EXPECT_EQ(run.result.basis, Basis::fourier);
  EXPECT_LE(run.result.theta_decay, 882u);
  EXPECT_LE(run.result.sprime_decay, 882u);
}

TEST(Continuation, CircleStopsAtOnce) {
  // The seed spline misses the circle by O(h^4), so the points must be dense
  // for the seed alone to meet the sample tolerance.
  const PointSet pts = PointSet::closed(support::circle_points(4096, 1.0));
  FitConfig cfg;
  cfg.closed = true;
  cfg.N = 16384;
  cfg.n_coefs = 512;
  const FitResult r = run_continuation(pts, cfg);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.n_stop, 2u);
  EXPECT_LE(r.e_samp, 1e-13);
  const auto s = extract_kinematics(result_state<FourierBasis>(r, 16384));
  const auto [lo, hi] = std::minmax_element(s.theta.begin(), s.theta.end());
  EXPECT_LE(*hi - *lo, 1e-9);
}

TEST(Continuation, ObserverSeesEveryIteration) {
  std::vector<std::size_t> seen;
  FitConfig cfg = support::spiral_config();
  cfg.n_iters = 3;
  cfg.ignore_budget = true;
  const FitResult r = run_continuation(support::load_normalized("spiral.txt"), cfg,
                                       [&](const IterationInfo& it) { seen.push_back(it.m); });
  EXPECT_EQ(seen, (std::vector<std::size_t>{1, 2, 3, 4}));
  EXPECT_EQ(r.n_stop, 4u);
  EXPECT_EQ(r.history.size(), 4u);
}

TEST(Continuation, ExhaustionIsFlaggedNotThrown) {
  FitConfig cfg = support::spiral_config();
  cfg.n_iters = 2;
  cfg.n_coefs = 4;
  const FitResult r = run_continuation(support::load_normalized("spiral.txt"), cfg);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.n_stop, 3u);
}

TEST(FitConfig, Validation) {
  auto expect_config_error = [](FitConfig cfg) {
    try {
      cfg.validate();
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::config);
    }
  };
  FitConfig ok;
  EXPECT_NO_THROW(ok.validate());
  FitConfig c = ok;
  c.h_filter = 0.0;
  expect_config_error(c);
  c = ok;
  c.h_filter = 1.0;
  expect_config_error(c);
  c = ok;
  c.n_coefs = ok.N + 1;
  expect_config_error(c);
  c = ok;
  c.n_bands = 0;
  expect_config_error(c);
  c = ok;
  c.closed = true;
  c.n_coefs = 501;
  expect_config_error(c);
  c = ok;
  c.closed = true;
  c.N = 1001;
  expect_config_error(c);
  // Config and data must agree on closedness.
  EXPECT_THROW(run_continuation(support::load_normalized("spiral.txt"), support::flower_config()), Error);
}
