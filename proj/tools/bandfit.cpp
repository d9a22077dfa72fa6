// bandfit: fit, evaluate, render and inspect band-limited curves.
//
//   bandfit fit points.txt -o curve.txt --slope-left 0.05 0.05 --slope-right 0.05 0.05 -N 1000 ...
//   bandfit fit flower.txt -o curve.txt --closed -N 2000 --ncoefs 1560 ...
//   bandfit eval curve.txt 0 0.5 1
//   bandfit render curve.txt -o curve.svg --spectrum
//   bandfit spectrum curve.txt
//
// Exit status: 0 success, 2 bad input or configuration, 3 no convergence,
// 1 any other numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bandfit.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNoConvergence = 3;

int exit_code_for(const bandfit::Error& e) {
  switch (e.kind()) {
    case bandfit::ErrorKind::parse:
    case bandfit::ErrorKind::config:
    case bandfit::ErrorKind::degenerate_input:
    case bandfit::ErrorKind::size:
    case bandfit::ErrorKind::domain:
      return kExitUsage;
    default:
      return kExitFailure;
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct FitArgs {
  std::string input, output;
  bool closed = false;
  std::vector<double> slope_left, slope_right;
  bandfit::FitConfig cfg;
  std::string tangent_norm = "weighted";
  bool no_normalize = false;
};

int run_fit(const FitArgs& a) {
  const bandfit::PointSet raw = bandfit::read_points(a.input);
  const bool have_slopes = !a.slope_left.empty() || !a.slope_right.empty();
  if (a.closed && have_slopes) throw bandfit::Error(bandfit::ErrorKind::config, "--closed cannot be combined with slopes");
  if (!a.closed && (a.slope_left.empty() || a.slope_right.empty()))
    throw bandfit::Error(bandfit::ErrorKind::config,
                         "open curves need --slope-left SX SY and --slope-right SX SY (or pass --closed)");
  if (a.closed != raw.is_closed())
    throw bandfit::Error(bandfit::ErrorKind::config, a.input + " is " + (raw.is_closed() ? "closed" : "open") +
                                                         " but the command line says otherwise");

  bandfit::Normalized norm;
  if (a.no_normalize) {
    norm.points.assign(raw.points().begin(), raw.points().end());
  } else {
    norm = bandfit::normalize_points(raw.points());
  }
  const bandfit::PointSet pts =
      a.closed ? bandfit::PointSet::closed(norm.points)
               : bandfit::PointSet::open(norm.points, {a.slope_left[0], a.slope_left[1]}, {a.slope_right[0], a.slope_right[1]});

  bandfit::FitConfig cfg = a.cfg;
  cfg.closed = a.closed;
  cfg.tangent_norm = a.tangent_norm == "pointwise" ? bandfit::TangentNorm::pointwise : bandfit::TangentNorm::weighted;
  bandfit::FitResult r = bandfit::run_continuation(pts, cfg);
  r.scale = norm.scale;
  bandfit::write_curve(a.output, r);

  std::cout << "n_stop " << r.n_stop << '\n'
            << "converged " << (r.converged ? "yes" : "no") << '\n'
            << "e_samp " << fmt(r.e_samp) << '\n'
            << "delta_theta " << fmt(r.thresholds.theta) << '\n'
            << "delta_sprime " << fmt(r.thresholds.sprime) << '\n'
            << "theta_decay " << r.theta_decay << " (budget " << r.budgets.theta << ")\n"
            << "sprime_decay " << r.sprime_decay << " (budget " << r.budgets.sprime << ")\n";
  if (!r.converged) {
    std::cerr << "bandfit: no convergence after " << cfg.n_iters << " iterations; wrote best effort to " << a.output
              << '\n';
    return kExitNoConvergence;
  }
  return 0;
}

int run_eval(const std::string& path, const std::vector<double>& params) {
  const bandfit::FitResult r = bandfit::read_curve(path);
  for (double t : params) {
    if (r.basis == bandfit::Basis::chebyshev && (t < 0.0 || t > r.length))
      throw bandfit::Error(bandfit::ErrorKind::domain,
                           "parameter " + fmt(t) + " outside [0, " + fmt(r.length) + "] for an open curve");
    const bandfit::Vec2 p = bandfit::eval_result(r, t) / r.scale;
    std::cout << fmt(p.x) << ' ' << fmt(p.y) << '\n';
  }
  return 0;
}

int run_render(const std::string& path, const std::string& output, const bandfit::SvgOptions& opt) {
  const bandfit::FitResult r = bandfit::read_curve(path);
  const std::string svg = bandfit::render_svg(r, opt);
  if (output.empty() || output == "-") {
    std::cout << svg;
    return 0;
  }
  std::ofstream out(output, std::ios::binary);
  if (!out) throw bandfit::Error(bandfit::ErrorKind::parse, output + ": cannot open for writing");
  out << svg;
  return 0;
}

int run_spectrum(const std::string& path) {
  const bandfit::FitResult r = bandfit::read_curve(path);
  std::cout << "# k |x_k| |y_k|\n";
  if (r.basis == bandfit::Basis::chebyshev) {
    for (std::size_t k = 0; k < r.x_coefs.size(); ++k)
      std::cout << k << ' ' << fmt(std::abs(r.x_coefs[k])) << ' ' << fmt(std::abs(r.y_coefs[k])) << '\n';
  } else {
    for (std::size_t k = 0; 2 * k + 1 < r.x_coefs.size(); ++k)
      std::cout << k << ' ' << fmt(std::hypot(r.x_coefs[2 * k], r.x_coefs[2 * k + 1])) << ' '
                << fmt(std::hypot(r.y_coefs[2 * k], r.y_coefs[2 * k + 1])) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Band-limited smooth curves through ordered points"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit a curve to a point file and write a curve file");
  fit_cmd->add_option("input", fit.input, "point file")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("-o,--output", fit.output, "curve file to write")->required();
  fit_cmd->add_flag("--closed", fit.closed, "treat the points as a closed curve");
  fit_cmd->add_option("--slope-left", fit.slope_left, "end derivative at the first point (open curves)")
      ->expected(2);
  fit_cmd->add_option("--slope-right", fit.slope_right, "end derivative at the last point (open curves)")
      ->expected(2);
  fit_cmd->add_option("-N,--nodes", fit.cfg.N, "number of discretization nodes")->capture_default_str();
  fit_cmd->add_option("--iters", fit.cfg.n_iters, "maximum number of iterations")->capture_default_str();
  fit_cmd->add_option("--h-filter", fit.cfg.h_filter, "fraction of the band removed per iteration")
      ->capture_default_str();
  fit_cmd->add_option("--eps", fit.cfg.eps, "requested accuracy")->capture_default_str();
  fit_cmd->add_option("--ncoefs", fit.cfg.n_coefs, "number of coefficients to return")->capture_default_str();
  fit_cmd->add_option("--nbands", fit.cfg.n_bands, "half-bandwidth of the perturbation system")
      ->capture_default_str();
  fit_cmd->add_option("--tangent-norm", fit.tangent_norm, "tangent norm in the theta threshold")
      ->check(CLI::IsMember({"weighted", "pointwise"}))
      ->capture_default_str();
  fit_cmd->add_flag("--no-normalize", fit.no_normalize, "fit the points at their input scale");

  std::string eval_path;
  std::vector<double> eval_params;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a curve file at parameters (input units)");
  eval_cmd->add_option("curve", eval_path, "curve file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("params", eval_params, "parameters in [0, L]")->required();

  std::string render_path, render_out;
  bandfit::SvgOptions svg;
  auto* render_cmd = app.add_subcommand("render", "draw a curve file as SVG");
  render_cmd->add_option("curve", render_path, "curve file")->required()->check(CLI::ExistingFile);
  render_cmd->add_option("-o,--output", render_out, "SVG file to write ('-' for stdout)");
  render_cmd->add_flag("--spectrum", svg.spectrum, "add the theta / s' coefficient plot");
  render_cmd->add_option("--width", svg.width, "image width in pixels")->capture_default_str();
  render_cmd->add_option("--samples", svg.curve_samples, "curve evaluation points")->capture_default_str();

  std::string spectrum_path;
  auto* spectrum_cmd = app.add_subcommand("spectrum", "print coefficient magnitudes of a curve file");
  spectrum_cmd->add_option("curve", spectrum_path, "curve file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*fit_cmd) return run_fit(fit);
    if (*eval_cmd) return run_eval(eval_path, eval_params);
    if (*render_cmd) return run_render(render_path, render_out, svg);
    if (*spectrum_cmd) return run_spectrum(spectrum_path);
  } catch (const bandfit::Error& e) {
    std::cerr << "bandfit: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "bandfit: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
