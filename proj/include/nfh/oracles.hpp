#pragma once
// Independent reference routines used to cross-check the main numerical
// paths. Nothing here shares code with the implementation it checks: ball
// averages use brute-force quadrature over a ball (the mean value does not),
// the scalar ODE oracle is an adaptive Dormand-Prince 5(4) integrator (the
// field solvers are fixed-step Picard/RK4), and the spectral oracle is a
// direct O(M) Fourier sum (the convolution path uses FFTs).

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "nfh/common.hpp"
#include "nfh/micro.hpp"

namespace nfh {

// Finite-radius average (1/|B_R|) integral_{B_R} u(y) dy by the rectangle
// rule over a regular grid intersected with the ball.
inline double ball_average(const MicroFunction& u, double radius, int samples_per_unit = 32) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball_average: radius must be positive");
  if (samples_per_unit < 1) throw std::invalid_argument("ball_average: samples_per_unit must be >= 1");
  const double delta = 1.0 / static_cast<double>(samples_per_unit);
  const long long lo = static_cast<long long>(std::ceil(-radius / delta));
  const long long hi = static_cast<long long>(std::floor(radius / delta));
  if (u.dim == 1) {
    const std::size_t n = static_cast<std::size_t>(hi - lo + 1);
    const double sum = pairwise_map_sum(n, [&](std::size_t i) {
      const double y = static_cast<double>(lo + static_cast<long long>(i)) * delta;
      return std::fabs(y) < radius ? eval_micro(u, y) : 0.0;
    });
    return sum * delta / (2.0 * radius);
  }
  const std::size_t n = static_cast<std::size_t>(hi - lo + 1);
  const double sum = pairwise_map_sum(n * n, [&](std::size_t idx) {
    const std::size_t i = idx / n;
    const std::size_t j = idx % n;
    const double y0 = static_cast<double>(lo + static_cast<long long>(i)) * delta;
    const double y1 = static_cast<double>(lo + static_cast<long long>(j)) * delta;
    return (y0 * y0 + y1 * y1 < radius * radius) ? eval_micro(u, y0, y1) : 0.0;
  });
  return sum * delta * delta / (kPi * radius * radius);
}

// Adaptive Dormand-Prince 5(4) for a scalar ODE u' = f(t, u).
// Returns u(t1) with local error controlled to atol + rtol * |u|.
inline double dp45_solve(const std::function<double(double, double)>& f, double u0, double t0, double t1,
                         double rtol = 1e-12, double atol = 1e-14) {
  if (!(t1 > t0)) throw std::invalid_argument("dp45_solve: need t1 > t0");
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                          e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                          e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

  double t = t0;
  double u = u0;
  double h = (t1 - t0) / 100.0;
  double k1 = f(t, u);
  const int max_steps = 2000000;
  for (int step = 0; step < max_steps; ++step) {
    if (t >= t1) return u;
    if (t + h > t1) h = t1 - t;
    const double k2 = f(t + c2 * h, u + h * a21 * k1);
    const double k3 = f(t + c3 * h, u + h * (a31 * k1 + a32 * k2));
    const double k4 = f(t + c4 * h, u + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const double k5 = f(t + c5 * h, u + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const double k6 = f(t + h, u + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const double unew = u + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double k7 = f(t + h, unew);
    const double err = std::fabs(h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7));
    const double tol = atol + rtol * std::max(std::fabs(u), std::fabs(unew));
    if (err <= tol || h <= 1e-14 * (t1 - t0)) {
      t += h;
      u = unew;
      k1 = k7;  // FSAL
    }
    const double scale = (err > 0.0) ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
    h *= std::min(5.0, std::max(0.2, scale));
  }
  throw ConvergenceError("dp45_solve: step budget exhausted");
}

// Direct Fourier sum V_k = sum_j v[j] exp(-2 pi i j k / M). O(M) per call;
// independent of any FFT library.
inline std::complex<double> direct_dft_coeff(std::span<const double> v, long long k) {
  const std::size_t m = v.size();
  const double re = pairwise_map_sum(m, [&](std::size_t j) {
    return v[j] * std::cos(-kTwoPi * static_cast<double>(k) * static_cast<double>(j) / static_cast<double>(m));
  });
  const double im = pairwise_map_sum(m, [&](std::size_t j) {
    return v[j] * std::sin(-kTwoPi * static_cast<double>(k) * static_cast<double>(j) / static_cast<double>(m));
  });
  return {re, im};
}

}  // namespace nfh
