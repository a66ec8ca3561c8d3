#pragma once
// Shared numeric utilities: deterministic pairwise reductions, exact rational
// arithmetic for cell frequencies, and the error types thrown by the library.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nfh {

// Configuration rejected before any numerics ran (violated inequality named
// in the message).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iteration ran out of its budget without meeting its tolerance.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A state left the finite range mid-integration.
struct BlowupError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {
template <class F>
double pairwise_map_sum_impl(std::size_t lo, std::size_t hi, const F& f) {
  if (hi - lo <= 16) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += f(i);
    return s;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_map_sum_impl(lo, mid, f) + pairwise_map_sum_impl(mid, hi, f);
}
}  // namespace detail

// Sum f(0) + ... + f(n-1) with a fixed pairwise association order.
// The result is bit-reproducible for a given n and element values, and the
// error constant grows like log(n) instead of n.
template <class F>
double pairwise_map_sum(std::size_t n, const F& f) {
  if (n == 0) return 0.0;
  return detail::pairwise_map_sum_impl(0, n, f);
}

inline double pairwise_sum(std::span<const double> v) {
  return pairwise_map_sum(v.size(), [&](std::size_t i) { return v[i]; });
}

// Reduced rational p/q with q > 0. Used for cell frequencies so that
// "frequency equals zero" and period lookups are exact instead of
// float-aliased.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n, long long d) : num(n), den(d) { normalize(); }
  explicit Rational(long long n) : num(n), den(1) {}

  void normalize() {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    if (num == 0) den = 1;
  }

  bool is_zero() const { return num == 0; }
  bool is_integer() const { return den == 1; }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return Rational(a.num * b.num, a.den * b.den);
  }
  Rational operator-() const { return Rational(-num, den); }
};

inline bool is_power_of_two(long long v) { return v > 0 && (v & (v - 1)) == 0; }

// value/step rounded to the nearest integer if within tol of one;
// throws otherwise. Used for commensurability checks (2L/eps, T/dt, t/h).
inline long long exact_ratio(double value, double step, double tol, const std::string& what) {
  const double q = value / step;
  const double r = std::nearbyint(q);
  if (!(std::fabs(q - r) <= tol)) {
    throw std::invalid_argument(what + ": " + std::to_string(value) + " is not an integer multiple of " +
                                std::to_string(step));
  }
  return static_cast<long long>(r);
}

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kTwoPi = 2.0 * kPi;

}  // namespace nfh
