#pragma once

// O(n) solvers for the structured systems that appear in the fit: the
// tridiagonal and cyclic-tridiagonal control-point systems of the seed
// spline, and the (cyclic) banded Gaussian-perturbation systems.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bandfit/error.hpp"
#include "bandfit/geometry.hpp"

namespace bandfit {

namespace detail {

inline bool negligible_pivot(double pivot, double row_scale) {
  return !std::isfinite(pivot) ||
         std::abs(pivot) <= 64.0 * std::numeric_limits<double>::epsilon() * row_scale;
}

}  // namespace detail

/// Thomas algorithm. `lower[0]` and `upper[n-1]` are ignored. The right-hand
/// side may be any vector-space type (double, Vec2, ...).
template <class V>
std::vector<V> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                 std::span<const double> upper, std::span<const V> rhs) {
  const std::size_t n = diag.size();
  if (n == 0 || lower.size() != n || upper.size() != n || rhs.size() != n)
    throw Error(ErrorKind::size, "tridiagonal bands and rhs must share a nonzero length");

  std::vector<double> c(n);
  std::vector<V> x(rhs.begin(), rhs.end());
  double pivot = diag[0];
  if (detail::negligible_pivot(pivot, std::abs(diag[0]) + std::abs(upper[0])))
    throw Error(ErrorKind::singular, "zero pivot in row 0 of tridiagonal system");
  c[0] = n > 1 ? upper[0] / pivot : 0.0;
  x[0] = x[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = diag[i] - lower[i] * c[i - 1];
    const double scale = std::abs(diag[i]) + std::abs(lower[i]) + (i + 1 < n ? std::abs(upper[i]) : 0.0);
    if (detail::negligible_pivot(pivot, scale))
      throw Error(ErrorKind::singular, "zero pivot in row " + std::to_string(i) + " of tridiagonal system");
    c[i] = i + 1 < n ? upper[i] / pivot : 0.0;
    x[i] = (x[i] - x[i - 1] * lower[i]) / pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= x[i + 1] * c[i];
  return x;
}

/// Cyclic tridiagonal solve by a rank-one Sherman-Morrison correction.
/// `lower[0]` is the corner entry A(0, n-1) and `upper[n-1]` is A(n-1, 0).
template <class V>
std::vector<V> solve_cyclic_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                        std::span<const double> upper, std::span<const V> rhs) {
  const std::size_t n = diag.size();
  if (n < 3 || lower.size() != n || upper.size() != n || rhs.size() != n)
    throw Error(ErrorKind::size, "cyclic tridiagonal system needs n >= 3 and matching bands");

  const double top_right = lower[0];
  const double bottom_left = upper[n - 1];
  const double gamma = diag[0] != 0.0 ? -diag[0] : -1.0;

  std::vector<double> d(diag.begin(), diag.end());
  d[0] -= gamma;
  d[n - 1] -= bottom_left * top_right / gamma;

  std::vector<double> lo(lower.begin(), lower.end()), up(upper.begin(), upper.end());
  lo[0] = 0.0;
  up[n - 1] = 0.0;

  std::vector<V> x = solve_tridiagonal<V>(lo, d, up, rhs);
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = bottom_left;
  std::vector<double> z = solve_tridiagonal<double>(lo, d, up, u);

  const double denom = 1.0 + z[0] + top_right * z[n - 1] / gamma;
  if (detail::negligible_pivot(denom, 1.0 + std::abs(z[0]) + std::abs(top_right * z[n - 1] / gamma)))
    throw Error(ErrorKind::singular, "cyclic tridiagonal system is singular");
  const V fact = (x[0] + x[n - 1] * (top_right / gamma)) / denom;
  for (std::size_t i = 0; i < n; ++i) x[i] -= fact * z[i];
  return x;
}

/// Square banded matrix with equal lower/upper half-bandwidth. Entries outside
/// the band are structurally zero.
class BandedMatrix {
 public:
  BandedMatrix(std::size_t n, std::size_t half_bandwidth)
      : n_(n), b_(std::min(half_bandwidth, n ? n - 1 : 0)), width_(3 * b_ + 1), data_(n * width_, 0.0) {}

  std::size_t size() const { return n_; }
  std::size_t half_bandwidth() const { return b_; }

  bool in_band(std::size_t i, std::size_t j) const { return (i > j ? i - j : j - i) <= b_; }

  double operator()(std::size_t i, std::size_t j) const { return in_band(i, j) ? data_[slot(i, j)] : 0.0; }
  void set(std::size_t i, std::size_t j, double v) {
    if (!in_band(i, j)) throw Error(ErrorKind::domain, "entry outside the band");
    data_[slot(i, j)] = v;
  }

  /// Gaussian elimination with partial pivoting restricted to the band
  /// (fill-in grows the upper bandwidth to 2b). Solves for every column of
  /// `rhs`, given as a list of right-hand-side vectors.
  std::vector<std::vector<double>> solve(std::vector<std::vector<double>> rhs) const {
    for (const auto& r : rhs)
      if (r.size() != n_) throw Error(ErrorKind::size, "banded rhs length mismatch");
    std::vector<double> a = data_;
    auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * width_ + (j + b_ - i)]; };

    double scale = 0.0;
    for (double v : data_) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t last_row = std::min(n_ - 1, k + b_);
      std::size_t p = k;
      for (std::size_t i = k + 1; i <= last_row; ++i)
        if (std::abs(at(i, k)) > std::abs(at(p, k))) p = i;
      if (detail::negligible_pivot(at(p, k), scale))
        throw Error(ErrorKind::singular, "banded system is singular at column " + std::to_string(k));
      const std::size_t last_col = std::min(n_ - 1, k + 2 * b_);
      if (p != k) {
        for (std::size_t j = k; j <= last_col; ++j) std::swap(at(k, j), at(p, j));
        for (auto& r : rhs) std::swap(r[k], r[p]);
      }
      const double pivot = at(k, k);
      for (std::size_t i = k + 1; i <= last_row; ++i) {
        const double m = at(i, k) / pivot;
        if (m == 0.0) continue;
        at(i, k) = 0.0;
        for (std::size_t j = k + 1; j <= last_col; ++j) at(i, j) -= m * at(k, j);
        for (auto& r : rhs) r[i] -= m * r[k];
      }
    }
    for (auto& r : rhs) {
      for (std::size_t k = n_; k-- > 0;) {
        const std::size_t last_col = std::min(n_ - 1, k + 2 * b_);
        double s = r[k];
        for (std::size_t j = k + 1; j <= last_col; ++j) s -= at(k, j) * r[j];
        r[k] = s / at(k, k);
      }
    }
    return rhs;
  }

 private:
  std::size_t slot(std::size_t i, std::size_t j) const { return i * width_ + (j + b_ - i); }

  std::size_t n_;
  std::size_t b_;
  std::size_t width_;
  std::vector<double> data_;
};

/// Cyclic banded matrix: banded in the wrap-around index distance
/// min(|i-j|, n-|i-j|) <= b. Solved with a Woodbury correction on top of the
/// plain banded solver, so the cost stays O(n b^2).
class CyclicBandedMatrix {
 public:
  CyclicBandedMatrix(std::size_t n, std::size_t half_bandwidth) : n_(n), b_(half_bandwidth), entries_(n) {
    if (n_ < 2 * b_ + 2) dense_ = true;
  }

  std::size_t size() const { return n_; }
  std::size_t half_bandwidth() const { return b_; }

  std::size_t cyclic_distance(std::size_t i, std::size_t j) const {
    const std::size_t d = i > j ? i - j : j - i;
    return std::min(d, n_ - d);
  }

  void set(std::size_t i, std::size_t j, double v) {
    if (cyclic_distance(i, j) > b_) throw Error(ErrorKind::domain, "entry outside the cyclic band");
    auto& row = entries_[i];
    for (auto& e : row)
      if (e.first == j) { e.second = v; return; }
    row.emplace_back(j, v);
  }

  double operator()(std::size_t i, std::size_t j) const {
    for (const auto& e : entries_[i])
      if (e.first == j) return e.second;
    return 0.0;
  }

  std::vector<std::vector<double>> solve(std::vector<std::vector<double>> rhs) const {
    if (dense_) {
      // Band wraps onto itself; a banded matrix of full width is dense.
      BandedMatrix full(n_, n_ ? n_ - 1 : 0);
      for (std::size_t i = 0; i < n_; ++i)
        for (const auto& [j, v] : entries_[i]) full.set(i, j, v);
      return full.solve(std::move(rhs));
    }
    // Split A = B + U V^T: B holds the plain band, the corner blocks are
    // written as rank-one terms e_i (a_ij e_j)^T grouped by column j.
    BandedMatrix band(n_, b_);
    std::vector<std::size_t> corner_cols;
    for (std::size_t i = 0; i < n_; ++i)
      for (const auto& [j, v] : entries_[i]) {
        if (band.in_band(i, j)) band.set(i, j, v);
        else if (std::find(corner_cols.begin(), corner_cols.end(), j) == corner_cols.end())
          corner_cols.push_back(j);
      }
    if (corner_cols.empty()) return band.solve(std::move(rhs));

    const std::size_t m = corner_cols.size();
    // U column c holds the out-of-band entries of column corner_cols[c];
    // V^T row c is e_{corner_cols[c]}.
    std::vector<std::vector<double>> cols(m, std::vector<double>(n_, 0.0));
    for (std::size_t i = 0; i < n_; ++i)
      for (const auto& [j, v] : entries_[i]) {
        if (band.in_band(i, j)) continue;
        const auto c = static_cast<std::size_t>(std::find(corner_cols.begin(), corner_cols.end(), j) - corner_cols.begin());
        cols[c][i] = v;
      }
    const std::size_t nr = rhs.size();
    std::vector<std::vector<double>> all = std::move(rhs);
    all.insert(all.end(), cols.begin(), cols.end());
    all = band.solve(std::move(all));
    // Capacitance matrix  I + V^T B^{-1} U  (m x m).
    BandedMatrix cap(m, m ? m - 1 : 0);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < m; ++c)
        cap.set(r, c, (r == c ? 1.0 : 0.0) + all[nr + c][corner_cols[r]]);
    std::vector<std::vector<double>> small(nr, std::vector<double>(m));
    for (std::size_t k = 0; k < nr; ++k)
      for (std::size_t r = 0; r < m; ++r) small[k][r] = all[k][corner_cols[r]];
    small = cap.solve(std::move(small));
    std::vector<std::vector<double>> out(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(nr));
    for (std::size_t k = 0; k < nr; ++k)
      for (std::size_t c = 0; c < m; ++c)
        for (std::size_t i = 0; i < n_; ++i) out[k][i] -= small[k][c] * all[nr + c][i];
    return out;
  }

 private:
  std::size_t n_;
  std::size_t b_;
  bool dense_ = false;
  std::vector<std::vector<std::pair<std::size_t, double>>> entries_;
};

}  // namespace bandfit
