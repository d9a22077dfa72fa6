#pragma once

// Deterministic SVG figures: the curve as one path, data points as red
// circles, and optionally the theta / s' coefficient magnitudes on a log axis
// with the thresholds and the coefficient count drawn as guide lines.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "bandfit/continuation.hpp"
#include "bandfit/geometry.hpp"
#include "bandfit/kinematics.hpp"
#include "bandfit/spectral.hpp"

namespace bandfit {

struct SvgOptions {
  int width = 640;
  int curve_height = 480;
  int spectrum_height = 260;
  int margin = 24;
  double marker_radius = 3.0;
  std::size_t curve_samples = 2000;
  bool spectrum = false;
};

/// One-sided coefficient magnitudes with their guide values.
struct SpectrumPlot {
  std::vector<double> theta, sprime;
  double delta_theta = 0.0, delta_sprime = 0.0;
  std::size_t coef_guide = 0;
};

namespace svg_detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  // Avoid "-0.00" so equal pictures print equal bytes.
  if (std::string(buf) == "-0.00") return "0.00";
  return buf;
}

struct Box {
  double x0, y0, x1, y1;
};

inline void polyline(std::ostringstream& out, const std::vector<Vec2>& pts, const char* style) {
  out << "<polyline fill=\"none\" " << style << " points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) out << (i ? " " : "") << num(pts[i].x) << ',' << num(pts[i].y);
  out << "\"/>\n";
}

inline void line(std::ostringstream& out, Vec2 a, Vec2 b, const char* style) {
  out << "<line x1=\"" << num(a.x) << "\" y1=\"" << num(a.y) << "\" x2=\"" << num(b.x) << "\" y2=\"" << num(b.y)
      << "\" " << style << "/>\n";
}

}  // namespace svg_detail

inline std::string render_svg(std::span<const Vec2> curve, std::span<const Vec2> markers, const SpectrumPlot* spectrum,
                              const SvgOptions& opt = {}) {
  using namespace svg_detail;
  const int height = opt.curve_height + (spectrum ? opt.spectrum_height : 0);
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << opt.width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << opt.width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Curve panel, equal aspect, y up.
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool first = true;
  auto grow = [&](Vec2 p) {
    if (first) { x0 = x1 = p.x; y0 = y1 = p.y; first = false; return; }
    x0 = std::min(x0, p.x); x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y); y1 = std::max(y1, p.y);
  };
  for (const Vec2& p : curve) grow(p);
  for (const Vec2& p : markers) grow(p);
  const double span_x = std::max(x1 - x0, 1e-300), span_y = std::max(y1 - y0, 1e-300);
  const double avail_w = opt.width - 2.0 * opt.margin, avail_h = opt.curve_height - 2.0 * opt.margin;
  const double s = std::min(avail_w / span_x, avail_h / span_y);
  const double ox = opt.margin + 0.5 * (avail_w - s * (x1 - x0));
  const double oy = opt.margin + 0.5 * (avail_h - s * (y1 - y0));
  auto map = [&](Vec2 p) { return Vec2{ox + s * (p.x - x0), oy + s * (y1 - p.y)}; };

  if (!curve.empty()) {
    out << "<path fill=\"none\" stroke=\"black\" stroke-width=\"1.2\" d=\"";
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const Vec2 q = map(curve[i]);
      out << (i ? " L" : "M") << num(q.x) << ' ' << num(q.y);
    }
    out << "\"/>\n";
  }
  for (const Vec2& p : markers) {
    const Vec2 q = map(p);
    out << "<circle cx=\"" << num(q.x) << "\" cy=\"" << num(q.y) << "\" r=\"" << num(opt.marker_radius)
        << "\" fill=\"red\"/>\n";
  }

  if (spectrum) {
    const double top = opt.curve_height + opt.margin;
    const double bottom = opt.curve_height + opt.spectrum_height - opt.margin;
    const double left = opt.margin * 2.0, right = opt.width - opt.margin;
    const std::size_t count = std::max({spectrum->theta.size(), spectrum->sprime.size(), std::size_t{2}});
    double hi = std::max(spectrum->delta_theta, spectrum->delta_sprime);
    for (double v : spectrum->theta) hi = std::max(hi, v);
    for (double v : spectrum->sprime) hi = std::max(hi, v);
    const double log_hi = std::ceil(std::log10(std::max(hi, 1e-300)));
    const double log_lo = log_hi - 20.0;
    auto px = [&](double k) { return left + (right - left) * k / static_cast<double>(count - 1); };
    auto py = [&](double v) {
      const double l = std::clamp(v > 0.0 ? std::log10(v) : log_lo, log_lo, log_hi);
      return bottom - (bottom - top) * (l - log_lo) / (log_hi - log_lo);
    };
    out << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(right - left) << "\" height=\""
        << num(bottom - top) << "\" fill=\"none\" stroke=\"gray\"/>\n";
    for (double d = log_lo; d <= log_hi; d += 4.0) {
      line(out, {left - 4.0, py(std::pow(10.0, d))}, {left, py(std::pow(10.0, d))}, "stroke=\"gray\"");
      out << "<text x=\"" << num(left - 6.0) << "\" y=\"" << num(py(std::pow(10.0, d)) + 3.0)
          << "\" font-size=\"9\" text-anchor=\"end\">1e" << static_cast<int>(d) << "</text>\n";
    }
    auto series = [&](const std::vector<double>& v, const char* style) {
      std::vector<Vec2> pts(v.size());
      for (std::size_t k = 0; k < v.size(); ++k) pts[k] = {px(static_cast<double>(k)), py(v[k])};
      polyline(out, pts, style);
    };
    series(spectrum->sprime, "stroke=\"steelblue\" stroke-width=\"0.8\"");
    series(spectrum->theta, "stroke=\"darkorange\" stroke-width=\"0.8\"");
    line(out, {left, py(spectrum->delta_sprime)}, {right, py(spectrum->delta_sprime)}, "stroke=\"black\"");
    line(out, {left, py(spectrum->delta_theta)}, {right, py(spectrum->delta_theta)},
         "stroke=\"black\" stroke-dasharray=\"4 3\"");
    if (spectrum->coef_guide > 0) {
      const double g = px(static_cast<double>(std::min(spectrum->coef_guide, count - 1)));
      line(out, {g, top}, {g, bottom}, "stroke=\"gray\" stroke-dasharray=\"2 2\"");
    }
  }
  out << "</svg>\n";
  return out.str();
}

template <class B>
std::vector<double> one_sided_magnitudes(const typename B::Series& s) {
  std::vector<double> out;
  if constexpr (B::periodic) {
    for (long k = 0; k <= s.max_index(); ++k) out.push_back(std::abs(s.at(k)));
  } else {
    for (double c : s.coeffs) out.push_back(std::abs(c));
  }
  return out;
}

/// theta / s' spectra of a fitted curve on its own grid.
template <class B>
SpectrumPlot result_spectrum(const FitResult& r) {
  const CurveState<B> s = extract_kinematics(result_state<B>(r, r.config.N));
  SpectrumPlot plot;
  plot.theta = one_sided_magnitudes<B>(B::forward(s.theta, s.length));
  plot.sprime = one_sided_magnitudes<B>(B::forward(s.sprime, s.length));
  plot.delta_theta = r.thresholds.theta;
  plot.delta_sprime = r.thresholds.sprime;
  plot.coef_guide = B::periodic ? r.n_coefs / 2 : r.n_coefs;
  return plot;
}

inline std::string render_svg(const FitResult& r, const SvgOptions& opt = {}) {
  const std::size_t n = std::max<std::size_t>(opt.curve_samples, 2);
  std::vector<Vec2> curve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = r.length * static_cast<double>(i) / static_cast<double>(n - 1);
    curve[i] = eval_result(r, t);
  }
  if (!opt.spectrum) return render_svg(curve, r.points, nullptr, opt);
  const SpectrumPlot plot =
      r.basis == Basis::fourier ? result_spectrum<FourierBasis>(r) : result_spectrum<ChebyshevBasis>(r);
  return render_svg(curve, r.points, &plot, opt);
}

/// A sampled state drawn through its nodes (closed states are closed up).
template <class B>
std::string render_svg(const CurveState<B>& s, std::span<const Vec2> markers, const SvgOptions& opt = {}) {
  std::vector<Vec2> curve(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) curve[j] = {s.x[j], s.y[j]};
  if (B::periodic && !curve.empty()) curve.push_back(curve.front());
  return render_svg(curve, markers, nullptr, opt);
}

}  // namespace bandfit
