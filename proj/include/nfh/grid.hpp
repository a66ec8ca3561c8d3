#pragma once
// Uniform grids and sampled fields. The macro grid covers the periodic box
// [-L, L)^N with M nodes per axis (M a power of two); the cell grid covers
// the unit cell [0,1)^N. A TwoScaleField stores u(x_i, y_j) row-major with
// the macro axes outermost. Quadrature is the rectangle rule throughout, and
// every reduction uses the fixed-order pairwise sum so results are
// bit-reproducible.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "nfh/common.hpp"
#include "nfh/micro.hpp"

namespace nfh {

struct MacroGrid {
  int dim = 1;
  double half_width = 8.0;  // L
  int points = 8;           // M per axis

  void validate() const {
    if (dim < 1 || dim > 2) throw std::invalid_argument("grid: dim must be 1 or 2");
    if (!(half_width > 0.0)) throw std::invalid_argument("grid: half_width must be positive");
    if (!is_power_of_two(points) || points < 8)
      throw std::invalid_argument("grid: points per axis must be a power of two >= 8");
  }

  double spacing() const { return 2.0 * half_width / static_cast<double>(points); }

  std::size_t size() const {
    std::size_t s = 1;
    for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(points);
    return s;
  }

  double node(long long i) const { return -half_width + static_cast<double>(i) * spacing(); }

  double cell_measure() const {
    double m = 1.0;
    for (int a = 0; a < dim; ++a) m *= spacing();
    return m;
  }

  friend bool operator==(const MacroGrid& a, const MacroGrid& b) {
    return a.dim == b.dim && a.half_width == b.half_width && a.points == b.points;
  }
};

struct CellGrid {
  int dim = 1;
  int points = 8;  // M_y per axis

  void validate() const {
    if (dim < 1 || dim > 2) throw std::invalid_argument("cell grid: dim must be 1 or 2");
    if (!is_power_of_two(points) || points < 8)
      throw std::invalid_argument("cell grid: points per axis must be a power of two >= 8");
  }

  std::size_t size() const {
    std::size_t s = 1;
    for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(points);
    return s;
  }

  double node(long long j) const { return static_cast<double>(j) / static_cast<double>(points); }

  // Rectangle-rule weight of one node for the unit-cell average.
  double cell_measure() const { return 1.0 / static_cast<double>(size()); }

  friend bool operator==(const CellGrid& a, const CellGrid& b) {
    return a.dim == b.dim && a.points == b.points;
  }
};

struct MacroField {
  MacroGrid grid;
  std::vector<double> values;  // row-major over macro axes

  static MacroField zeros(const MacroGrid& g) {
    g.validate();
    return MacroField{g, std::vector<double>(g.size(), 0.0)};
  }
};

struct TwoScaleField {
  MacroGrid macro;
  CellGrid cell;
  std::vector<double> values;  // index = x_flat * cell.size() + y_flat

  static TwoScaleField zeros(const MacroGrid& g, const CellGrid& c) {
    g.validate();
    c.validate();
    if (g.dim != c.dim) throw std::invalid_argument("two-scale field: macro/cell dim mismatch");
    return TwoScaleField{g, c, std::vector<double>(g.size() * c.size(), 0.0)};
  }
};

// ---- commensurability and exact micro phases --------------------------------

// eps is admissible when 2L/eps is a positive integer, so traces wrap
// consistently on the torus and node phases are exact dyadic rationals.
inline long long commensurate_ratio(const MacroGrid& g, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const double q = 2.0 * g.half_width / eps;
  const double r = std::nearbyint(q);
  if (!(std::fabs(q - r) <= 1e-9 * std::max(1.0, std::fabs(q))) || r < 1.0)
    throw std::invalid_argument("eps not grid-commensurate: 2L/eps = " + std::to_string(q) +
                                " must be a positive integer (eps = " + std::to_string(eps) + ")");
  return static_cast<long long>(r);
}

inline bool is_commensurate(const MacroGrid& g, double eps) {
  if (!(eps > 0.0)) return false;
  const double q = 2.0 * g.half_width / eps;
  const double r = std::nearbyint(q);
  return std::fabs(q - r) <= 1e-9 * std::max(1.0, std::fabs(q)) && r >= 1.0;
}

// Per-axis node phases x_i/eps mod 1, computed in integer arithmetic:
// x_i/eps = (i*Kappa)/M - Kappa/2 with Kappa = 2L/eps, and M a power of two,
// so the returned doubles are exact.
inline std::vector<double> micro_phases(const MacroGrid& g, double eps) {
  const long long kappa = commensurate_ratio(g, eps);
  const long long m = g.points;
  std::vector<double> phases(static_cast<std::size_t>(m));
  const double half = (kappa % 2 != 0) ? 0.5 : 0.0;
  for (long long i = 0; i < m; ++i) {
    const long long r = (i * kappa) % m;
    double v = static_cast<double>(r) / static_cast<double>(m) + half;
    if (v >= 1.0) v -= 1.0;
    phases[static_cast<std::size_t>(i)] = v;
  }
  return phases;
}

// Node values of w(x_i / eps). For 1-periodic w the exact phase table is
// used; other variants (quasi-periodic, vanishing) evaluate at the raw
// scaled coordinate.
inline std::vector<double> micro_trace_values(const MacroGrid& g, const MicroFunction& w, double eps) {
  g.validate();
  if (w.dim != g.dim) throw std::invalid_argument("micro trace: dim mismatch");
  commensurate_ratio(g, eps);
  const long long m = g.points;
  std::vector<double> out(g.size());
  if (is_one_periodic(w)) {
    const auto ph = micro_phases(g, eps);
    if (g.dim == 1) {
      for (long long i = 0; i < m; ++i) out[static_cast<std::size_t>(i)] = eval_micro(w, ph[static_cast<std::size_t>(i)]);
    } else {
      for (long long i = 0; i < m; ++i)
        for (long long j = 0; j < m; ++j)
          out[static_cast<std::size_t>(i * m + j)] =
              eval_micro(w, ph[static_cast<std::size_t>(i)], ph[static_cast<std::size_t>(j)]);
    }
    return out;
  }
  if (g.dim == 1) {
    for (long long i = 0; i < m; ++i) out[static_cast<std::size_t>(i)] = eval_micro(w, g.node(i) / eps);
  } else {
    for (long long i = 0; i < m; ++i)
      for (long long j = 0; j < m; ++j)
        out[static_cast<std::size_t>(i * m + j)] = eval_micro(w, g.node(i) / eps, g.node(j) / eps);
  }
  return out;
}

// ---- sampling ---------------------------------------------------------------

namespace detail {
// Accept either phi(span) or the scalar signatures phi(x) / phi(x, y).
template <class Phi>
double call_phi(const Phi& phi, std::span<const double> x) {
  if constexpr (std::is_invocable_v<const Phi&, std::span<const double>>) {
    return phi(x);
  } else if constexpr (std::is_invocable_v<const Phi&, double, double>) {
    return phi(x[0], x.size() > 1 ? x[1] : 0.0);
  } else {
    return phi(x[0]);
  }
}
}  // namespace detail

// Sample a plain macro function phi(x) on the grid.
template <class Phi>
MacroField sample_macro(const MacroGrid& g, const Phi& phi) {
  g.validate();
  MacroField f = MacroField::zeros(g);
  const long long m = g.points;
  if (g.dim == 1) {
    for (long long i = 0; i < m; ++i) {
      const double x = g.node(i);
      f.values[static_cast<std::size_t>(i)] = detail::call_phi(phi, std::span<const double>(&x, 1));
    }
  } else {
    for (long long i = 0; i < m; ++i)
      for (long long j = 0; j < m; ++j) {
        const double x[2] = {g.node(i), g.node(j)};
        f.values[static_cast<std::size_t>(i * m + j)] = detail::call_phi(phi, std::span<const double>(x, 2));
      }
  }
  return f;
}

// Sample phi(x_i) * w(x_i / eps): the oscillating test data u^eps.
template <class Phi>
MacroField sample_trace(const MacroGrid& g, const Phi& phi, const MicroFunction& w, double eps) {
  MacroField f = sample_macro(g, phi);
  const auto tw = micro_trace_values(g, w, eps);
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] *= tw[i];
  return f;
}

// ---- quadrature and norms ---------------------------------------------------

inline double integrate(const MacroField& f) {
  return f.grid.cell_measure() * pairwise_sum(f.values);
}

inline double integrate(const TwoScaleField& f) {
  return f.macro.cell_measure() * f.cell.cell_measure() * pairwise_sum(f.values);
}

namespace detail {
inline double lp_of(std::span<const double> v, double p, double measure) {
  if (p == 1.0) return measure * pairwise_map_sum(v.size(), [&](std::size_t i) { return std::fabs(v[i]); });
  if (p == 2.0)
    return std::sqrt(measure * pairwise_map_sum(v.size(), [&](std::size_t i) { return v[i] * v[i]; }));
  throw std::invalid_argument("lp_norm: p must be 1 or 2");
}
}  // namespace detail

inline double lp_norm(const MacroField& f, double p) {
  return detail::lp_of(f.values, p, f.grid.cell_measure());
}

inline double lp_norm(const TwoScaleField& f, double p) {
  return detail::lp_of(f.values, p, f.macro.cell_measure() * f.cell.cell_measure());
}

// ---- two-scale access -------------------------------------------------------

// u0(x_{flat}, y) with multilinear periodic interpolation on the cell grid.
inline double two_scale_eval(const TwoScaleField& u0, std::size_t x_flat, std::span<const double> y) {
  const std::size_t cs = u0.cell.size();
  const double* slice = u0.values.data() + x_flat * cs;
  const int res = u0.cell.points;
  if (u0.cell.dim == 1) {
    const double pos = detail::wrap_unit(y[0]) * res;
    std::size_t i0 = static_cast<std::size_t>(pos);
    if (i0 >= static_cast<std::size_t>(res)) i0 = 0;
    const double fr = pos - static_cast<double>(i0);
    const std::size_t i1 = (i0 + 1) % static_cast<std::size_t>(res);
    return (1.0 - fr) * slice[i0] + fr * slice[i1];
  }
  const double px = detail::wrap_unit(y[0]) * res;
  const double py = detail::wrap_unit(y[1]) * res;
  std::size_t ix = static_cast<std::size_t>(px);
  std::size_t iy = static_cast<std::size_t>(py);
  if (ix >= static_cast<std::size_t>(res)) ix = 0;
  if (iy >= static_cast<std::size_t>(res)) iy = 0;
  const double fx = px - static_cast<double>(ix);
  const double fy = py - static_cast<double>(iy);
  const std::size_t jx = (ix + 1) % static_cast<std::size_t>(res);
  const std::size_t jy = (iy + 1) % static_cast<std::size_t>(res);
  const std::size_t n = static_cast<std::size_t>(res);
  return (1.0 - fx) * ((1.0 - fy) * slice[ix * n + iy] + fy * slice[ix * n + jy]) +
         fx * ((1.0 - fy) * slice[jx * n + iy] + fy * slice[jx * n + jy]);
}

inline double two_scale_eval(const TwoScaleField& u0, std::size_t x_flat, double y) {
  return two_scale_eval(u0, x_flat, std::span<const double>(&y, 1));
}

// u0(x_i, x_i/eps mod 1) on u0's own macro grid.
inline MacroField corrector_trace(const TwoScaleField& u0, double eps) {
  MacroField out = MacroField::zeros(u0.macro);
  const auto ph = micro_phases(u0.macro, eps);
  const long long m = u0.macro.points;
  if (u0.macro.dim == 1) {
    for (long long i = 0; i < m; ++i)
      out.values[static_cast<std::size_t>(i)] =
          two_scale_eval(u0, static_cast<std::size_t>(i), ph[static_cast<std::size_t>(i)]);
  } else {
    for (long long i = 0; i < m; ++i)
      for (long long j = 0; j < m; ++j) {
        const double y[2] = {ph[static_cast<std::size_t>(i)], ph[static_cast<std::size_t>(j)]};
        out.values[static_cast<std::size_t>(i * m + j)] =
            two_scale_eval(u0, static_cast<std::size_t>(i * m + j), std::span<const double>(y, 2));
      }
  }
  return out;
}

// y-constant embedding of a macro field (the initial lift u0(x, 0, y) = u0(x)).
inline TwoScaleField lift_y_constant(const MacroField& f, const CellGrid& c) {
  TwoScaleField out = TwoScaleField::zeros(f.grid, c);
  const std::size_t cs = c.size();
  for (std::size_t i = 0; i < f.values.size(); ++i)
    std::fill_n(out.values.begin() + static_cast<std::ptrdiff_t>(i * cs), cs, f.values[i]);
  return out;
}

// ---- field arithmetic (used by the integrators) -----------------------------

inline void require_same_shape(const MacroField& a, const MacroField& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("field shape mismatch");
}

inline void require_same_shape(const TwoScaleField& a, const TwoScaleField& b) {
  if (!(a.macro == b.macro) || !(a.cell == b.cell))
    throw std::invalid_argument("two-scale field shape mismatch");
}

template <class F>
void add_scaled(F& y, double a, const F& x) {
  require_same_shape(y, x);
  for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] += a * x.values[i];
}

inline double l1_norm(const MacroField& f) { return lp_norm(f, 1.0); }
inline double l2_norm(const MacroField& f) { return lp_norm(f, 2.0); }
inline double l1_norm(const TwoScaleField& f) { return lp_norm(f, 1.0); }
inline double l2_norm(const TwoScaleField& f) { return lp_norm(f, 2.0); }

// max_i (|a_i - b_i| summed norms) helper: L1 + L2 of the difference, the
// per-time-slice part of the fixed-point norm.
template <class F>
double diff_l1_plus_l2(const F& a, const F& b) {
  require_same_shape(a, b);
  F d = a;
  add_scaled(d, -1.0, b);
  return l1_norm(d) + l2_norm(d);
}

}  // namespace nfh
