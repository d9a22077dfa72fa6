#pragma once

// Text formats for point sets and fitted curves.
//
// Point file:
//     # comment
//     open  sx_left sy_left sx_right sy_right      (or: closed)
//     x y
//     ...
//
// Curve file: "key value" header lines, then a `samples n` table of
// (t, x, y) rows and a `coefs n` table of (x, y) coefficient rows. Doubles are
// written with 17 significant digits so write -> read -> write is exact.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "bandfit/bezier_seed.hpp"
#include "bandfit/continuation.hpp"
#include "bandfit/error.hpp"
#include "bandfit/geometry.hpp"

namespace bandfit {

struct Normalized {
  std::vector<Vec2> points;
  double scale = 1.0;  // multiply input coordinates by this
};

/// Uniform scaling that makes the bounding-box width or height equal to 1,
/// whichever is closer to 1 in the |ln d| sense (width on a tie).
inline Normalized normalize_points(std::span<const Vec2> pts) {
  if (pts.empty()) throw Error(ErrorKind::degenerate_input, "no points to normalize");
  Vec2 lo = pts.front(), hi = pts.front();
  for (const Vec2& p : pts) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  const double w = hi.x - lo.x, h = hi.y - lo.y;
  if (!(w > 0.0) && !(h > 0.0)) throw Error(ErrorKind::degenerate_input, "all points coincide");
  auto dist = [](double d) { return d > 0.0 ? std::abs(std::log(d)) : std::numeric_limits<double>::infinity(); };
  const double chosen = dist(h) < dist(w) ? h : w;
  Normalized out;
  out.scale = 1.0 / chosen;
  out.points.reserve(pts.size());
  for (const Vec2& p : pts) out.points.push_back(p * out.scale);
  return out;
}

namespace io_detail {

inline std::string location(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line);
}

inline std::vector<std::string_view> split_fields(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

inline double parse_double(std::string_view field, std::string_view source, std::size_t line) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw Error(ErrorKind::parse, location(source, line) + ": not a number: '" + std::string(field) + "'");
  if (!std::isfinite(v))
    throw Error(ErrorKind::parse, location(source, line) + ": non-finite value '" + std::string(field) + "'");
  return v;
}

inline std::size_t parse_count(std::string_view field, std::string_view source, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw Error(ErrorKind::parse, location(source, line) + ": not a non-negative integer: '" + std::string(field) + "'");
  return v;
}

/// Non-blank, non-comment lines with their 1-based line numbers.
struct Line {
  std::size_t number;
  std::vector<std::string_view> fields;
};

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : source_(std::move(source)) {
    std::string line;
    while (std::getline(in, line)) raw_.push_back(line);
    for (std::size_t i = 0; i < raw_.size(); ++i) {
      std::string_view v = raw_[i];
      if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
      auto fields = split_fields(v);
      if (!fields.empty()) lines_.push_back({i + 1, std::move(fields)});
    }
  }

  bool done() const { return pos_ >= lines_.size(); }
  const Line& next(std::string_view expecting) {
    if (done()) throw Error(ErrorKind::parse, source_ + ": unexpected end of file, expected " + std::string(expecting));
    return lines_[pos_++];
  }
  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::vector<std::string> raw_;
  std::vector<Line> lines_;
  std::size_t pos_ = 0;
};

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse, path + ": cannot open file");
  return in;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace io_detail

/// Parses a point file. When `slopes` is given for an open file it overrides
/// the header's end derivatives.
inline PointSet parse_points(std::istream& in, const std::string& source = "<input>") {
  using namespace io_detail;
  LineReader reader(in, source);
  const Line& header = reader.next("a header line ('open ...' or 'closed')");
  bool closed = false;
  Vec2 left{}, right{};
  if (header.fields[0] == "closed") {
    if (header.fields.size() != 1)
      throw Error(ErrorKind::parse, location(source, header.number) + ": 'closed' takes no arguments");
    closed = true;
  } else if (header.fields[0] == "open") {
    if (header.fields.size() != 5)
      throw Error(ErrorKind::parse,
                  location(source, header.number) + ": 'open' needs 4 slope values: sx_left sy_left sx_right sy_right");
    left = {parse_double(header.fields[1], source, header.number), parse_double(header.fields[2], source, header.number)};
    right = {parse_double(header.fields[3], source, header.number), parse_double(header.fields[4], source, header.number)};
  } else {
    throw Error(ErrorKind::parse, location(source, header.number) + ": header must be 'open ...' or 'closed', got '" +
                                      std::string(header.fields[0]) + "'");
  }
  std::vector<Vec2> pts;
  while (!reader.done()) {
    const Line& l = reader.next("a point");
    if (l.fields.size() != 2)
      throw Error(ErrorKind::parse, location(source, l.number) + ": expected 2 fields 'x y', got " +
                                        std::to_string(l.fields.size()));
    pts.push_back({parse_double(l.fields[0], source, l.number), parse_double(l.fields[1], source, l.number)});
  }
  try {
    return closed ? PointSet::closed(std::move(pts)) : PointSet::open(std::move(pts), left, right);
  } catch (const Error& e) {
    throw Error(ErrorKind::parse, source + ": " + e.what());
  }
}

inline PointSet read_points(const std::string& path) {
  auto in = io_detail::open_input(path);
  return parse_points(in, path);
}

inline void format_points(std::ostream& out, const PointSet& pts) {
  using io_detail::format_double;
  if (pts.is_closed()) {
    out << "closed\n";
  } else {
    const Vec2 l = *pts.slope_left(), r = *pts.slope_right();
    out << "open " << format_double(l.x) << ' ' << format_double(l.y) << ' ' << format_double(r.x) << ' '
        << format_double(r.y) << '\n';
  }
  for (const Vec2& p : pts.points()) out << format_double(p.x) << ' ' << format_double(p.y) << '\n';
}

// ---------------------------------------------------------------------------
// Curve files

inline constexpr int kCurveFormatVersion = 1;

inline void format_curve(std::ostream& out, const FitResult& r) {
  using io_detail::format_double;
  const FitConfig& c = r.config;
  out << "# bandfit curve\n";
  out << "format " << kCurveFormatVersion << '\n';
  out << "basis " << to_string(r.basis) << '\n';
  out << "length " << format_double(r.length) << '\n';
  out << "n_coefs " << r.n_coefs << '\n';
  out << "scale " << format_double(r.scale) << '\n';
  out << "N " << c.N << '\n';
  out << "n_iters " << c.n_iters << '\n';
  out << "h_filter " << format_double(c.h_filter) << '\n';
  out << "eps " << format_double(c.eps) << '\n';
  out << "n_bands " << c.n_bands << '\n';
  out << "tangent_norm " << (c.tangent_norm == TangentNorm::weighted ? "weighted" : "pointwise") << '\n';
  out << "n_stop " << r.n_stop << '\n';
  out << "converged " << (r.converged ? 1 : 0) << '\n';
  out << "e_samp " << format_double(r.e_samp) << '\n';
  out << "delta_theta " << format_double(r.thresholds.theta) << '\n';
  out << "delta_sprime " << format_double(r.thresholds.sprime) << '\n';
  out << "budget_theta " << r.budgets.theta << '\n';
  out << "budget_sprime " << r.budgets.sprime << '\n';
  out << "theta_decay " << r.theta_decay << '\n';
  out << "sprime_decay " << r.sprime_decay << '\n';
  out << "theta_count " << r.theta_count << '\n';
  out << "sprime_count " << r.sprime_count << '\n';
  out << "samples " << r.points.size() << '\n';
  for (std::size_t i = 0; i < r.points.size(); ++i)
    out << format_double(i < r.tpar.size() ? r.tpar[i] : 0.0) << ' ' << format_double(r.points[i].x) << ' '
        << format_double(r.points[i].y) << '\n';
  out << "coefs " << r.x_coefs.size() << '\n';
  for (std::size_t k = 0; k < r.x_coefs.size(); ++k)
    out << format_double(r.x_coefs[k]) << ' ' << format_double(r.y_coefs[k]) << '\n';
}

inline FitResult parse_curve(std::istream& in, const std::string& source = "<input>") {
  using namespace io_detail;
  LineReader reader(in, source);
  const char* keys[] = {"format",      "basis",        "length",       "n_coefs",       "scale",        "N",
                        "n_iters",     "h_filter",     "eps",          "n_bands",       "tangent_norm", "n_stop",
                        "converged",   "e_samp",       "delta_theta",  "delta_sprime",  "budget_theta", "budget_sprime",
                        "theta_decay", "sprime_decay", "theta_count",  "sprime_count"};
  std::map<std::string, std::pair<std::string, std::size_t>, std::less<>> header;
  for (const char* key : keys) {
    const Line& l = reader.next(std::string("key '") + key + "'");
    if (l.fields.size() != 2 || l.fields[0] != key)
      throw Error(ErrorKind::parse, location(source, l.number) + ": expected '" + key + " <value>'");
    header[key] = {std::string(l.fields[1]), l.number};
  }
  auto num = [&](const char* k) { return parse_double(header[k].first, source, header[k].second); };
  auto count = [&](const char* k) { return parse_count(header[k].first, source, header[k].second); };
  auto fail = [&](const char* k, const std::string& why) {
    return Error(ErrorKind::parse, location(source, header[k].second) + ": " + why);
  };

  if (count("format") != static_cast<std::size_t>(kCurveFormatVersion))
    throw fail("format", "unsupported format version " + header["format"].first);
  FitResult r;
  const std::string& basis = header["basis"].first;
  if (basis == "chebyshev") r.basis = Basis::chebyshev;
  else if (basis == "fourier") r.basis = Basis::fourier;
  else throw fail("basis", "unknown basis '" + basis + "'");
  r.length = num("length");
  if (!(r.length > 0.0)) throw fail("length", "length must be positive");
  r.n_coefs = count("n_coefs");
  r.scale = num("scale");
  if (!(r.scale > 0.0)) throw fail("scale", "scale must be positive");
  r.config.N = count("N");
  r.config.n_iters = count("n_iters");
  r.config.h_filter = num("h_filter");
  r.config.eps = num("eps");
  r.config.n_bands = count("n_bands");
  r.config.closed = r.basis == Basis::fourier;
  r.config.n_coefs = r.n_coefs;
  const std::string& tn = header["tangent_norm"].first;
  if (tn == "weighted") r.config.tangent_norm = TangentNorm::weighted;
  else if (tn == "pointwise") r.config.tangent_norm = TangentNorm::pointwise;
  else throw fail("tangent_norm", "unknown tangent_norm '" + tn + "'");
  r.n_stop = count("n_stop");
  const std::size_t conv = count("converged");
  if (conv > 1) throw fail("converged", "converged must be 0 or 1");
  r.converged = conv == 1;
  r.e_samp = num("e_samp");
  r.thresholds = {num("delta_theta"), num("delta_sprime")};
  r.budgets = {count("budget_theta"), count("budget_sprime")};
  r.theta_decay = count("theta_decay");
  r.sprime_decay = count("sprime_decay");
  r.theta_count = count("theta_count");
  r.sprime_count = count("sprime_count");

  auto table = [&](const char* name, std::size_t width) {
    const Line& l = reader.next(std::string("'") + name + " <count>'");
    if (l.fields.size() != 2 || l.fields[0] != name)
      throw Error(ErrorKind::parse, location(source, l.number) + ": expected '" + name + " <count>'");
    const std::size_t n = parse_count(l.fields[1], source, l.number);
    std::vector<std::vector<double>> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Line& row = reader.next(std::string("a row of ") + name);
      if (row.fields.size() != width)
        throw Error(ErrorKind::parse, location(source, row.number) + ": expected " + std::to_string(width) +
                                          " fields, got " + std::to_string(row.fields.size()));
      for (auto f : row.fields) rows[i].push_back(parse_double(f, source, row.number));
    }
    return std::pair{rows, l.number};
  };
  const auto [samples, samples_line] = table("samples", 3);
  for (const auto& row : samples) {
    r.tpar.push_back(row[0]);
    r.points.push_back({row[1], row[2]});
  }
  const auto [coefs, coefs_line] = table("coefs", 2);
  if (coefs.size() != r.n_coefs)
    throw Error(ErrorKind::parse, location(source, coefs_line) + ": coefficient count " + std::to_string(coefs.size()) +
                                      " does not match n_coefs " + std::to_string(r.n_coefs));
  for (const auto& row : coefs) {
    r.x_coefs.push_back(row[0]);
    r.y_coefs.push_back(row[1]);
  }
  if (!reader.done()) {
    const Line& extra = reader.next("end of file");
    throw Error(ErrorKind::parse, location(source, extra.number) + ": trailing content after coefficient table");
  }
  return r;
}

inline void write_curve(const std::string& path, const FitResult& r) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::parse, path + ": cannot open for writing");
  format_curve(out, r);
  if (!out) throw Error(ErrorKind::parse, path + ": write failed");
}

inline FitResult read_curve(const std::string& path) {
  auto in = io_detail::open_input(path);
  return parse_curve(in, path);
}

}  // namespace bandfit
