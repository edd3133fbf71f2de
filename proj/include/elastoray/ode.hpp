#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "core.hpp"

namespace elastoray::ode {

struct Tolerances {
  double abs = 1e-10;
  double rel = 1e-10;
  double initial_step = 1e-2;
  double max_step = 0.25;
  double min_step = 1e-14;
  long max_steps = 2000000;
};

/// Continuous extension of one accepted Dormand-Prince step (Hairer's
/// 4th-order dense output).
template <int N>
struct DenseStep {
  using State = Eigen::Matrix<double, N, 1>;
  double s0 = 0.0, h = 0.0;
  State r1, r2, r3, r4, r5;

  double s1() const { return s0 + h; }
  State at(double s) const {
    const double th = h != 0.0 ? (s - s0) / h : 0.0;
    const double th1 = 1.0 - th;
    return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
  }
};

namespace dp {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                        a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                        d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                        d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
}  // namespace dp

/// One Dormand-Prince 5(4) step. Returns the 5th-order solution; `err` gets
/// the embedded error estimate and `dense` the continuous extension.
template <int N, class Rhs>
Eigen::Matrix<double, N, 1> dp_step(const Rhs& f, double s, const Eigen::Matrix<double, N, 1>& y,
                                    const Eigen::Matrix<double, N, 1>& k1, double h,
                                    Eigen::Matrix<double, N, 1>& err, DenseStep<N>& dense,
                                    Eigen::Matrix<double, N, 1>& k7) {
  using namespace dp;
  using State = Eigen::Matrix<double, N, 1>;
  const State k2 = f(s + c2 * h, State(y + h * a21 * k1));
  const State k3 = f(s + c3 * h, State(y + h * (a31 * k1 + a32 * k2)));
  const State k4 = f(s + c4 * h, State(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
  const State k5 = f(s + c5 * h, State(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
  const State k6 = f(s + h, State(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
  const State y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
  k7 = f(s + h, y1);
  err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  const State ydiff = y1 - y;
  const State bspl = h * k1 - ydiff;
  dense.s0 = s;
  dense.h = h;
  dense.r1 = y;
  dense.r2 = ydiff;
  dense.r3 = bspl;
  dense.r4 = ydiff - h * k7 - bspl;
  dense.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
  return y1;
}

enum class Stop { EndReached, Callback, StepUnderflow, TooManySteps };

/// Adaptive Dormand-Prince integration of y' = f(s, y) from s0 towards s_end.
/// `on_step` is called with every accepted dense step; returning true stops
/// the integration after that step.
template <int N, class Rhs, class OnStep>
Stop integrate_adaptive(const Rhs& f, double s0, Eigen::Matrix<double, N, 1> y, double s_end,
                        const Tolerances& tol, OnStep&& on_step) {
  using State = Eigen::Matrix<double, N, 1>;
  const double dir = s_end >= s0 ? 1.0 : -1.0;
  double s = s0;
  double h = dir * std::min(tol.initial_step, std::abs(s_end - s0));
  State k1 = f(s, y);
  State err, k7;
  DenseStep<N> dense;
  for (long n = 0; n < tol.max_steps; ++n) {
    if (dir * (s_end - s) <= 0.0) return Stop::EndReached;
    if (dir * (s + h - s_end) > 0.0) h = s_end - s;
    const State y1 = dp_step<N>(f, s, y, k1, h, err, dense, k7);
    double acc = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      const double sc = tol.abs + tol.rel * std::max(std::abs(y(i)), std::abs(y1(i)));
      acc += (err(i) / sc) * (err(i) / sc);
    }
    const double en = std::sqrt(acc / static_cast<double>(y.size()));
    if (!std::isfinite(en)) {
      h *= 0.2;
      if (std::abs(h) < tol.min_step) return Stop::StepUnderflow;
      continue;
    }
    if (en <= 1.0) {
      s += h;
      y = y1;
      k1 = k7;
      if (on_step(dense)) return Stop::Callback;
      const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      h = dir * std::min(std::abs(h) * fac, tol.max_step);
    } else {
      h *= std::clamp(0.9 * std::pow(en, -0.2), 0.2, 1.0);
      if (std::abs(h) < tol.min_step) return Stop::StepUnderflow;
    }
  }
  return Stop::TooManySteps;
}

/// Fixed-step Dormand-Prince (5th order) integration; returns the state at
/// every node s0 + k*h for k = 0..steps.
template <int N, class Rhs>
std::vector<Eigen::Matrix<double, N, 1>> integrate_fixed(const Rhs& f, double s0, Eigen::Matrix<double, N, 1> y,
                                                         double h, int steps) {
  using State = Eigen::Matrix<double, N, 1>;
  std::vector<State> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(y);
  State k1 = f(s0, y), err, k7;
  DenseStep<N> dense;
  for (int k = 0; k < steps; ++k) {
    y = dp_step<N>(f, s0 + k * h, y, k1, h, err, dense, k7);
    k1 = k7;
    out.push_back(y);
  }
  return out;
}

}  // namespace elastoray::ode
