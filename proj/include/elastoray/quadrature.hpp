#pragma once

#include <cmath>
#include <functional>
#include <type_traits>
#include <vector>

#include "core.hpp"

namespace elastoray::quad {

namespace detail {
template <class T>
T zero_like(const T& ref) {
  if constexpr (std::is_arithmetic_v<T> || std::is_same_v<T, cplx>) return T(0.0);
  else return T::Zero(ref.rows(), ref.cols());
}

template <class T, class F>
T simpson_rec(const F& f, double a, double b, const T& fa, const T& fm, const T& fb, const T& whole, double tol,
              int depth, int& evals) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const T flm = f(lm), frm = f(rm);
  evals += 2;
  const T left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const T right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const T diff = left + right - whole;
  using std::abs;
  if (depth <= 0 || abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, evals) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, evals);
}
}  // namespace detail

/// Adaptive Simpson quadrature with Richardson correction. The interval is
/// pre-split into `pieces` panels so that short features are not skipped.
template <class T = double, class F>
T adaptive_simpson(const F& f, double a, double b, double tol = 1e-9, int pieces = 8, int max_depth = 40,
                   int* evaluations = nullptr) {
  T total = T(0.0);
  int evals = 0;
  if (b == a) return total;
  const double w = (b - a) / pieces;
  for (int p = 0; p < pieces; ++p) {
    const double lo = a + p * w, hi = (p + 1 == pieces) ? b : a + (p + 1) * w;
    const T fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
    evals += 3;
    const T whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total += detail::simpson_rec(f, lo, hi, fa, fm, fb, whole, tol / pieces, max_depth, evals);
  }
  if (evaluations) *evaluations = evals;
  return total;
}

/// Running integral of uniformly sampled data (4th order: cubic through four
/// neighbouring samples on every interval). out[0] = 0.
template <class T>
std::vector<T> cumulative(const std::vector<T>& f, double h) {
  const std::size_t n = f.size();
  if (n == 0) return {};
  std::vector<T> out(n, detail::zero_like(f[0]));
  if (n < 2) return out;
  if (n < 4) {
    for (std::size_t k = 1; k < n; ++k) out[k] = out[k - 1] + 0.5 * h * (f[k - 1] + f[k]);
    return out;
  }
  for (std::size_t k = 0; k + 1 < n; ++k) {
    T piece;
    if (k == 0) piece = h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]);
    else if (k + 2 == n) piece = h / 24.0 * (9.0 * f[n - 1] + 19.0 * f[n - 2] - 5.0 * f[n - 3] + f[n - 4]);
    else piece = h / 24.0 * (-f[k - 1] + 13.0 * f[k] + 13.0 * f[k + 1] - f[k + 2]);
    out[k + 1] = out[k] + piece;
  }
  return out;
}

/// Second-order finite-difference derivative of uniformly sampled data
/// (central inside, one-sided three-point at the ends).
template <class T>
std::vector<T> derivative(const std::vector<T>& f, double h) {
  const std::size_t n = f.size();
  if (n == 0) return {};
  std::vector<T> d(n, detail::zero_like(f[0]));
  if (n < 3) {
    if (n == 2) d[0] = d[1] = (f[1] - f[0]) / h;
    return d;
  }
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (f[k + 1] - f[k - 1]) / (2.0 * h);
  return d;
}

}  // namespace elastoray::quad
