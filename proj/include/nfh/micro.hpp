#pragma once
// Microstructure functions on the unit cell, in three variants mirroring the
// concrete algebras-with-mean-value the lab supports:
//   TrigPoly        - real trigonometric polynomials with exact rational
//                     frequencies (periodic if all frequencies are integers,
//                     quasi-periodic otherwise),
//   CellSampled     - periodic samples on a uniform grid over [0,1)^N with
//                     multilinear interpolation,
//   LimitAtInfinity - a value at infinity plus a compactly supported core
//                     (vanishing-at-infinity algebra when the limit is 0).
// The mean value is the per-variant rule: zero-frequency coefficient, cell
// average, or the limit value. The Besicovitch seminorm applies the same rule
// to |u|^p.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "nfh/common.hpp"
#include "nfh/profiles.hpp"

namespace nfh {

// One real term A * cos(2 pi k . y + phase) with rational frequency vector k.
struct TrigTerm {
  std::vector<Rational> freq;
  double amplitude = 0.0;
  double phase = 0.0;
};

struct TrigPoly {
  int dim = 1;
  std::vector<TrigTerm> terms;
};

struct CellSampled {
  int dim = 1;
  int resolution = 8;          // nodes per axis, power of two
  std::vector<double> values;  // row-major, size resolution^dim
};

struct LimitAtInfinity {
  int dim = 1;
  double limit = 0.0;
  std::optional<Profile> core;  // vanishes outside its support ball
};

struct MicroFunction {
  int dim = 1;
  std::variant<TrigPoly, CellSampled, LimitAtInfinity> fn = TrigPoly{};
};

enum class AlgebraKind { periodic, quasiPeriodic, vanishingAtInfinity };

struct AlgebraTag {
  AlgebraKind kind = AlgebraKind::periodic;
  int spectrum_surrogate_dim = 0;
  std::vector<std::vector<Rational>> generators;  // quasi-periodic only
};

// ---- constructors -----------------------------------------------------------

inline void validate_micro(const MicroFunction& u) {
  if (u.dim < 1 || u.dim > 2) throw std::invalid_argument("micro: dim must be 1 or 2");
  if (const auto* t = std::get_if<TrigPoly>(&u.fn)) {
    if (t->dim != u.dim) throw std::invalid_argument("micro: trig dim mismatch");
    for (const auto& term : t->terms) {
      if (static_cast<int>(term.freq.size()) != u.dim)
        throw std::invalid_argument("micro: trig frequency vector has wrong dimension");
    }
  } else if (const auto* c = std::get_if<CellSampled>(&u.fn)) {
    if (c->dim != u.dim) throw std::invalid_argument("micro: cell dim mismatch");
    if (!is_power_of_two(c->resolution) || c->resolution < 8)
      throw std::invalid_argument("micro: cell resolution must be a power of two >= 8");
    std::size_t want = 1;
    for (int a = 0; a < c->dim; ++a) want *= static_cast<std::size_t>(c->resolution);
    if (c->values.size() != want) throw std::invalid_argument("micro: cell value count mismatch");
  } else if (const auto* v = std::get_if<LimitAtInfinity>(&u.fn)) {
    if (v->dim != u.dim) throw std::invalid_argument("micro: limit dim mismatch");
    if (v->core) v->core->validate();
  }
}

inline MicroFunction micro_const(double c, int dim = 1) {
  TrigPoly t;
  t.dim = dim;
  if (c != 0.0) t.terms.push_back({std::vector<Rational>(static_cast<std::size_t>(dim)), c, 0.0});
  return MicroFunction{dim, t};
}

inline MicroFunction micro_trig(int dim, std::vector<TrigTerm> terms) {
  MicroFunction u{dim, TrigPoly{dim, std::move(terms)}};
  validate_micro(u);
  return u;
}

// 1 + amp*cos(2 pi k y): the workhorse periodic example.
inline MicroFunction micro_one_plus_cos(double amp, long long k = 1) {
  return micro_trig(1, {TrigTerm{{Rational(0)}, 1.0, 0.0}, TrigTerm{{Rational(k)}, amp, 0.0}});
}

inline MicroFunction micro_cell(int dim, int resolution, std::vector<double> values) {
  MicroFunction u{dim, CellSampled{dim, resolution, std::move(values)}};
  validate_micro(u);
  return u;
}

inline MicroFunction micro_limit(int dim, double limit, std::optional<Profile> core = std::nullopt) {
  MicroFunction u{dim, LimitAtInfinity{dim, limit, std::move(core)}};
  validate_micro(u);
  return u;
}

// ---- evaluation -------------------------------------------------------------

namespace detail {

inline double wrap_unit(double y) {
  double t = y - std::floor(y);
  if (t >= 1.0) t = 0.0;  // floor rounding at exact integers
  return t;
}

inline double cell_interp(const CellSampled& c, std::span<const double> y) {
  const int res = c.resolution;
  if (c.dim == 1) {
    const double pos = wrap_unit(y[0]) * res;
    std::size_t i0 = static_cast<std::size_t>(pos);
    if (i0 >= static_cast<std::size_t>(res)) i0 = 0;
    const double f = pos - static_cast<double>(i0);
    const std::size_t i1 = (i0 + 1) % static_cast<std::size_t>(res);
    return (1.0 - f) * c.values[i0] + f * c.values[i1];
  }
  const double px = wrap_unit(y[0]) * res;
  const double py = wrap_unit(y[1]) * res;
  std::size_t ix = static_cast<std::size_t>(px);
  std::size_t iy = static_cast<std::size_t>(py);
  if (ix >= static_cast<std::size_t>(res)) ix = 0;
  if (iy >= static_cast<std::size_t>(res)) iy = 0;
  const double fx = px - static_cast<double>(ix);
  const double fy = py - static_cast<double>(iy);
  const std::size_t jx = (ix + 1) % static_cast<std::size_t>(res);
  const std::size_t jy = (iy + 1) % static_cast<std::size_t>(res);
  const std::size_t n = static_cast<std::size_t>(res);
  const double v00 = c.values[ix * n + iy];
  const double v01 = c.values[ix * n + jy];
  const double v10 = c.values[jx * n + iy];
  const double v11 = c.values[jx * n + jy];
  return (1.0 - fx) * ((1.0 - fy) * v00 + fy * v01) + fx * ((1.0 - fy) * v10 + fy * v11);
}

}  // namespace detail

inline double eval_micro(const MicroFunction& u, std::span<const double> y) {
  if (static_cast<int>(y.size()) < u.dim) throw std::invalid_argument("eval_micro: point dim mismatch");
  if (const auto* t = std::get_if<TrigPoly>(&u.fn)) {
    double s = 0.0;
    for (const auto& term : t->terms) {
      double arg = term.phase;
      for (int a = 0; a < t->dim; ++a)
        arg += kTwoPi * term.freq[static_cast<std::size_t>(a)].value() * y[static_cast<std::size_t>(a)];
      s += term.amplitude * std::cos(arg);
    }
    return s;
  }
  if (const auto* c = std::get_if<CellSampled>(&u.fn)) return detail::cell_interp(*c, y);
  const auto& v = std::get<LimitAtInfinity>(u.fn);
  return v.limit + (v.core ? (*v.core)(y) : 0.0);
}

inline double eval_micro(const MicroFunction& u, double y) {
  return eval_micro(u, std::span<const double>(&y, 1));
}

inline double eval_micro(const MicroFunction& u, double y0, double y1) {
  const double p[2] = {y0, y1};
  return eval_micro(u, std::span<const double>(p, 2));
}

// ---- structure queries ------------------------------------------------------

// Per-axis period as an integer (lcm of frequency denominators), or nullopt
// for vanishing-at-infinity functions, which are not periodic.
inline std::optional<std::vector<long long>> micro_period(const MicroFunction& u) {
  if (std::holds_alternative<LimitAtInfinity>(u.fn)) return std::nullopt;
  std::vector<long long> period(static_cast<std::size_t>(u.dim), 1);
  if (const auto* t = std::get_if<TrigPoly>(&u.fn)) {
    for (const auto& term : t->terms)
      for (int a = 0; a < t->dim; ++a)
        period[static_cast<std::size_t>(a)] =
            std::lcm(period[static_cast<std::size_t>(a)], term.freq[static_cast<std::size_t>(a)].den);
  }
  return period;
}

inline bool is_one_periodic(const MicroFunction& u) {
  const auto p = micro_period(u);
  if (!p) return false;
  for (long long v : *p)
    if (v != 1) return false;
  return true;
}

inline bool is_constant_micro(const MicroFunction& u) {
  if (const auto* t = std::get_if<TrigPoly>(&u.fn)) {
    for (const auto& term : t->terms) {
      bool zero_freq = true;
      for (const auto& f : term.freq) zero_freq = zero_freq && f.is_zero();
      if (!zero_freq && term.amplitude != 0.0) return false;
    }
    return true;
  }
  if (const auto* c = std::get_if<CellSampled>(&u.fn)) {
    for (double v : c->values)
      if (v != c->values[0]) return false;
    return true;
  }
  const auto& v = std::get<LimitAtInfinity>(u.fn);
  return !v.core || v.core->amplitude == 0.0;
}

inline AlgebraTag algebra_tag(const MicroFunction& u) {
  AlgebraTag tag;
  if (const auto* t = std::get_if<TrigPoly>(&u.fn)) {
    bool integral = true;
    for (const auto& term : t->terms)
      for (const auto& f : term.freq) integral = integral && f.is_integer();
    if (integral) {
      tag.kind = AlgebraKind::periodic;
      tag.spectrum_surrogate_dim = u.dim;
    } else {
      tag.kind = AlgebraKind::quasiPeriodic;
      for (const auto& term : t->terms) {
        bool zero = true;
        for (const auto& f : term.freq) zero = zero && f.is_zero();
        if (zero) continue;
        if (std::find(tag.generators.begin(), tag.generators.end(), term.freq) == tag.generators.end())
          tag.generators.push_back(term.freq);
      }
      tag.spectrum_surrogate_dim = static_cast<int>(tag.generators.size());
    }
  } else if (std::holds_alternative<CellSampled>(u.fn)) {
    tag.kind = AlgebraKind::periodic;
    tag.spectrum_surrogate_dim = u.dim;
  } else {
    tag.kind = AlgebraKind::vanishingAtInfinity;
    tag.spectrum_surrogate_dim = 0;
  }
  return tag;
}

// Upper bound for sup |u|: sum of |amplitudes| (trig), max node value (cell,
// tight for multilinear interpolation), |limit| + core peak (vanishing).
inline double sup_bound(const MicroFunction& u) {
  if (const auto* t = std::get_if<TrigPoly>(&u.fn)) {
    double s = 0.0;
    for (const auto& term : t->terms) s += std::fabs(term.amplitude);
    return s;
  }
  if (const auto* c = std::get_if<CellSampled>(&u.fn)) {
    double m = 0.0;
    for (double v : c->values) m = std::max(m, std::fabs(v));
    return m;
  }
  const auto& v = std::get<LimitAtInfinity>(u.fn);
  return std::fabs(v.limit) + (v.core ? v.core->sup() : 0.0);
}

// ---- mean value and Besicovitch seminorm ------------------------------------

inline double mean_value(const MicroFunction& u) {
  if (const auto* t = std::get_if<TrigPoly>(&u.fn)) {
    // Coefficient at the zero frequency vector; frequencies compare exactly.
    double s = 0.0;
    for (const auto& term : t->terms) {
      bool zero = true;
      for (const auto& f : term.freq) zero = zero && f.is_zero();
      if (zero) s += term.amplitude * std::cos(term.phase);
    }
    return s;
  }
  if (const auto* c = std::get_if<CellSampled>(&u.fn)) {
    return pairwise_sum(c->values) / static_cast<double>(c->values.size());
  }
  return std::get<LimitAtInfinity>(u.fn).limit;
}

namespace detail {

// Mean of |u|^p over one full period box by the rectangle rule.
inline double periodic_power_mean(const MicroFunction& u, double p, int res_per_unit) {
  const auto period = micro_period(u);
  const int dim = u.dim;
  std::vector<long long> pts(static_cast<std::size_t>(dim));
  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) {
    const long long pa = (*period)[static_cast<std::size_t>(a)];
    if (pa > 64) throw std::invalid_argument("besicovitch: period box too large (denominator > 64)");
    pts[static_cast<std::size_t>(a)] = pa * res_per_unit;
    total *= static_cast<std::size_t>(pts[static_cast<std::size_t>(a)]);
  }
  const double inv = 1.0 / static_cast<double>(total);
  if (dim == 1) {
    const long long n = pts[0];
    const double px = static_cast<double>((*period)[0]);
    return inv * pairwise_map_sum(static_cast<std::size_t>(n), [&](std::size_t i) {
             const double y = px * static_cast<double>(i) / static_cast<double>(n);
             return std::pow(std::fabs(eval_micro(u, y)), p);
           });
  }
  const long long nx = pts[0], ny = pts[1];
  const double px = static_cast<double>((*period)[0]);
  const double py = static_cast<double>((*period)[1]);
  return inv * pairwise_map_sum(static_cast<std::size_t>(nx * ny), [&](std::size_t idx) {
           const std::size_t i = idx / static_cast<std::size_t>(ny);
           const std::size_t j = idx % static_cast<std::size_t>(ny);
           const double y0 = px * static_cast<double>(i) / static_cast<double>(nx);
           const double y1 = py * static_cast<double>(j) / static_cast<double>(ny);
           return std::pow(std::fabs(eval_micro(u, y0, y1)), p);
         });
}

}  // namespace detail

// M(|u|^p)^(1/p) by the same per-variant rule as mean_value applied to |u|^p:
// trig polynomials are resampled over one full period box, cell samples are
// averaged node-wise, and vanishing-at-infinity functions reduce to |limit|.
inline double besicovitch_seminorm(const MicroFunction& u, double p, int res_per_unit = 0) {
  if (!(p >= 1.0)) throw std::invalid_argument("besicovitch: p must be >= 1");
  if (res_per_unit <= 0) res_per_unit = (u.dim == 1) ? 4096 : 192;
  if (std::holds_alternative<TrigPoly>(u.fn))
    return std::pow(detail::periodic_power_mean(u, p, res_per_unit), 1.0 / p);
  if (const auto* c = std::get_if<CellSampled>(&u.fn)) {
    const double m = pairwise_map_sum(c->values.size(), [&](std::size_t i) {
                       return std::pow(std::fabs(c->values[i]), p);
                     }) /
                     static_cast<double>(c->values.size());
    return std::pow(m, 1.0 / p);
  }
  return std::fabs(std::get<LimitAtInfinity>(u.fn).limit);
}

// ---- shift ------------------------------------------------------------------

// shift_micro(u, a)(y) = u(y + a). Stays in the same variant; the mean value
// is invariant (exactly for trig, to rounding for resampled cells).
inline MicroFunction shift_micro(const MicroFunction& u, std::span<const double> a) {
  if (static_cast<int>(a.size()) < u.dim) throw std::invalid_argument("shift_micro: shift dim mismatch");
  MicroFunction out = u;
  if (auto* t = std::get_if<TrigPoly>(&out.fn)) {
    for (auto& term : t->terms) {
      double dot = 0.0;
      for (int ax = 0; ax < t->dim; ++ax)
        dot += term.freq[static_cast<std::size_t>(ax)].value() * a[static_cast<std::size_t>(ax)];
      term.phase += kTwoPi * dot;
    }
    return out;
  }
  if (auto* c = std::get_if<CellSampled>(&out.fn)) {
    const auto& src = std::get<CellSampled>(u.fn);
    const int res = src.resolution;
    if (c->dim == 1) {
      for (int i = 0; i < res; ++i) {
        const double y = static_cast<double>(i) / res + a[0];
        c->values[static_cast<std::size_t>(i)] = detail::cell_interp(src, std::span<const double>(&y, 1));
      }
    } else {
      for (int i = 0; i < res; ++i)
        for (int j = 0; j < res; ++j) {
          const double y[2] = {static_cast<double>(i) / res + a[0], static_cast<double>(j) / res + a[1]};
          c->values[static_cast<std::size_t>(i * res + j)] = detail::cell_interp(src, std::span<const double>(y, 2));
        }
    }
    return out;
  }
  auto& v = std::get<LimitAtInfinity>(out.fn);
  if (v.core) {
    for (int ax = 0; ax < v.dim; ++ax) v.core->center[static_cast<std::size_t>(ax)] -= a[static_cast<std::size_t>(ax)];
  }
  return out;
}

inline MicroFunction shift_micro(const MicroFunction& u, double a) {
  return shift_micro(u, std::span<const double>(&a, 1));
}

}  // namespace nfh
