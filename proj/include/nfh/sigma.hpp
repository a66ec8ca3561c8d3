#pragma once
// Two-scale convergence diagnostics. The central object is the pairing
//
//     P_eps(u, psi) = int_Q u(x) phi(x) w(x/eps) dx
//
// of a macro field against an oscillating test function psi = phi (x) w, and
// its candidate limit
//
//     P_0(u0, psi) = int_Q int_Y u0(x, y) phi(x) w(y) dx dy
//
// on the product grid. A sequence converges weakly in the two-scale sense
// when P_eps -> P_0 for every admissible psi; strong convergence adds
// ||u_eps||_p -> ||u0||_p. The checks below instrument these definitions:
// plain pairings, norm-gap (strong) checks, pairings of shifted sequences
// (t/eps kept integral so the shift limit is the shifted two-scale field),
// pairings of convolved sequences against the double convolution of the
// limits, and space-time versions that run the stationary pairing through a
// trapezoid rule over trajectory slices.
//
// Every check returns a PairingReport: the schedule, the pairing per eps,
// the limit value, absolute errors, and a least-squares decay exponent
// fitted on (log eps, log error) with the first (pre-asymptotic) point
// dropped. "Decreasing" allowances: an error sequence counts as decreasing
// when each entry after the first shrinks strictly or the entries involved
// are already at the rounding floor of the pairing scale.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nfh/common.hpp"
#include "nfh/convolve.hpp"
#include "nfh/grid.hpp"
#include "nfh/micro.hpp"
#include "nfh/profiles.hpp"
#include "nfh/solver.hpp"

namespace nfh {

// ---- test functions ---------------------------------------------------------

// chi(t) = sum_k c_k t^k + cos_amp * cos(cos_omega t + cos_phase);
// the default is identically 1.
struct TimeFactor {
  std::vector<double> poly{1.0};
  double cos_amp = 0.0;
  double cos_omega = 0.0;
  double cos_phase = 0.0;

  double operator()(double t) const {
    double v = 0.0;
    double p = 1.0;
    for (double c : poly) {
      v += c * p;
      p *= t;
    }
    if (cos_amp != 0.0) v += cos_amp * std::cos(cos_omega * t + cos_phase);
    return v;
  }
};

struct TestFunction {
  Profile phi;               // compactly supported macro factor
  MicroFunction w = micro_const(1.0);
  TimeFactor chi;            // used by the space-time pairings only

  // The macro factor must vanish near the box boundary so periodic wrap
  // cannot leak support across it.
  void validate(const MacroGrid& g) const {
    phi.validate();
    validate_micro(w);
    if (phi.dim != g.dim || w.dim != g.dim)
      throw ConfigError("test function: dimension mismatch with the grid");
    for (int a = 0; a < g.dim; ++a) {
      const double reach = std::fabs(phi.center[static_cast<std::size_t>(a)]) + phi.support_radius();
      if (!(reach < g.half_width))
        throw ConfigError("test function: macro support [center +- radius] must lie strictly "
                          "inside the box (reach " +
                          std::to_string(reach) + " >= L " + std::to_string(g.half_width) + ")");
    }
  }
};

// The configured test family: every macro profile crossed with the cell
// harmonics {1} and {cos, sin}(2 pi k . y) for 1 <= |k|_inf <= kmax.
struct FamilyParams {
  std::vector<Profile> profiles;
  int kmax = 2;
  int dim = 1;
};

inline std::vector<TestFunction> test_family(const FamilyParams& fp) {
  if (fp.dim < 1 || fp.dim > 2) throw ConfigError("test family: dim must be 1 or 2");
  if (fp.kmax < 0) throw ConfigError("test family: kmax must be >= 0");
  std::vector<MicroFunction> micros;
  micros.push_back(micro_const(1.0, fp.dim));
  if (fp.dim == 1) {
    for (long long k = 1; k <= fp.kmax; ++k) {
      micros.push_back(micro_trig(1, {TrigTerm{{Rational(k)}, 1.0, 0.0}}));
      micros.push_back(micro_trig(1, {TrigTerm{{Rational(k)}, 1.0, -kPi / 2.0}}));  // sin
    }
  } else {
    for (long long k0 = -fp.kmax; k0 <= fp.kmax; ++k0)
      for (long long k1 = -fp.kmax; k1 <= fp.kmax; ++k1) {
        if (k0 < 0 || (k0 == 0 && k1 <= 0)) continue;  // one representative per +-k pair
        micros.push_back(micro_trig(2, {TrigTerm{{Rational(k0), Rational(k1)}, 1.0, 0.0}}));
        micros.push_back(micro_trig(2, {TrigTerm{{Rational(k0), Rational(k1)}, 1.0, -kPi / 2.0}}));
      }
  }
  std::vector<TestFunction> fam;
  for (const Profile& p : fp.profiles)
    for (const MicroFunction& w : micros) fam.push_back(TestFunction{p, w, TimeFactor{}});
  return fam;
}

// ---- reports ----------------------------------------------------------------

struct PairingReport {
  std::vector<double> eps;        // strictly decreasing schedule
  std::vector<double> pairing;    // P_eps per entry
  double limit = 0.0;             // P_0
  std::vector<double> abs_error;  // |P_eps - P_0|
  double fitted_rate = 0.0;       // error ~ eps^rate, first point dropped
  bool pass = false;
};

namespace detail {

inline double pairing_floor(double scale) { return 1e-13 * std::max(1.0, std::fabs(scale)); }

inline bool decreasing_after_first(std::span<const double> err, double floor_abs) {
  for (std::size_t k = 2; k < err.size(); ++k) {
    if (err[k] < err[k - 1]) continue;
    if (err[k] <= floor_abs && err[k - 1] <= floor_abs) continue;  // rounding floor
    return false;
  }
  return err.size() >= 2;
}

inline double fit_decay_rate(std::span<const double> eps, std::span<const double> err) {
  // least squares slope of log(err) against log(eps), dropping the first
  // (pre-asymptotic) schedule entry
  std::vector<double> xs, ys;
  for (std::size_t k = 1; k < eps.size(); ++k) {
    if (err[k] <= 0.0) continue;
    xs.push_back(std::log(eps[k]));
    ys.push_back(std::log(err[k]));
  }
  if (xs.size() < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

inline void require_schedule(std::span<const double> eps, std::size_t fields) {
  if (eps.empty() || eps.size() != fields)
    throw std::invalid_argument("pairing check: schedule and field sequence sizes differ");
  for (std::size_t k = 1; k < eps.size(); ++k)
    if (!(eps[k] < eps[k - 1]))
      throw std::invalid_argument("pairing check: eps schedule must be strictly decreasing");
}

inline PairingReport finish_report(std::vector<double> eps, std::vector<double> pairing,
                                   double limit, bool pass_extra) {
  PairingReport r;
  r.eps = std::move(eps);
  r.pairing = std::move(pairing);
  r.limit = limit;
  for (double p : r.pairing) r.abs_error.push_back(std::fabs(p - limit));
  r.fitted_rate = fit_decay_rate(r.eps, r.abs_error);
  const double floor_abs = pairing_floor(limit);
  r.pass = pass_extra && decreasing_after_first(r.abs_error, floor_abs);
  return r;
}

inline std::vector<double> cell_samples(const MicroFunction& w, const CellGrid& c) {
  if (!is_one_periodic(w))
    throw ConfigError("limit pairing: the micro factor must be 1-periodic (the unit cell is "
                      "the averaging domain)");
  std::vector<double> v(c.size());
  const long long my = c.points;
  if (c.dim == 1) {
    for (long long j = 0; j < my; ++j) v[static_cast<std::size_t>(j)] = eval_micro(w, c.node(j));
  } else {
    for (long long j0 = 0; j0 < my; ++j0)
      for (long long j1 = 0; j1 < my; ++j1)
        v[static_cast<std::size_t>(j0 * my + j1)] = eval_micro(w, c.node(j0), c.node(j1));
  }
  return v;
}

// Periodic circular shift by whole nodes, per macro axis.
inline std::vector<double> shift_values_1d(std::span<const double> v, long long s, long long m) {
  std::vector<double> out(v.size());
  for (long long i = 0; i < m; ++i)
    out[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(((i + s) % m + m) % m)];
  return out;
}

}  // namespace detail

// ---- stationary pairings ----------------------------------------------------

inline double weak_sigma_pairing(const MacroField& u, const TestFunction& psi, double eps) {
  psi.validate(u.grid);
  const MacroField trace = sample_trace(u.grid, psi.phi, psi.w, eps);
  return u.grid.cell_measure() *
         pairwise_map_sum(u.values.size(), [&](std::size_t i) { return u.values[i] * trace.values[i]; });
}

inline double limit_pairing(const TwoScaleField& u0, const TestFunction& psi) {
  psi.validate(u0.macro);
  const MacroField phi = sample_macro(u0.macro, psi.phi);
  const std::vector<double> wv = detail::cell_samples(psi.w, u0.cell);
  const std::size_t ny = u0.cell.size();
  const double measure = u0.macro.cell_measure() * u0.cell.cell_measure();
  return measure * pairwise_map_sum(u0.values.size(), [&](std::size_t idx) {
    return u0.values[idx] * phi.values[idx / ny] * wv[idx % ny];
  });
}

// ---- space-time pairings ----------------------------------------------------

namespace detail {

inline std::vector<double> trapezoid_weights(std::span<const double> times) {
  if (times.size() < 2) throw std::invalid_argument("space-time pairing: need at least 2 slices");
  const double dt = times[1] - times[0];
  for (std::size_t k = 1; k < times.size(); ++k)
    if (std::fabs(times[k] - times[k - 1] - dt) > 1e-12 * std::max(1.0, times.back()))
      throw std::invalid_argument("space-time pairing: trajectory slices must be equi-spaced");
  std::vector<double> w(times.size(), dt);
  w.front() = 0.5 * dt;
  w.back() = 0.5 * dt;
  return w;
}

}  // namespace detail

// Trapezoid over trajectory slices of chi(t) * P_eps(u(t), psi).
inline double spacetime_pairing(const MacroGrid& g, const Trajectory& traj, const TestFunction& psi,
                                double eps) {
  psi.validate(g);
  const std::vector<double> wt = detail::trapezoid_weights(traj.times);
  const MacroField trace = sample_trace(g, psi.phi, psi.w, eps);
  const double measure = g.cell_measure();
  return pairwise_map_sum(traj.times.size(), [&](std::size_t k) {
    const auto& state = traj.states[k];
    if (state.size() != g.size()) throw std::invalid_argument("space-time pairing: slice shape");
    const double slice = measure * pairwise_map_sum(state.size(), [&](std::size_t i) {
      return state[i] * trace.values[i];
    });
    return wt[k] * psi.chi(traj.times[k]) * slice;
  });
}

// Trapezoid over trajectory slices of chi(t) * P_0(u0(t), psi).
inline double spacetime_limit_pairing(const MacroGrid& g, const CellGrid& c, const Trajectory& traj,
                                      const TestFunction& psi) {
  psi.validate(g);
  const std::vector<double> wt = detail::trapezoid_weights(traj.times);
  const MacroField phi = sample_macro(g, psi.phi);
  const std::vector<double> wv = detail::cell_samples(psi.w, c);
  const std::size_t ny = c.size();
  const double measure = g.cell_measure() * c.cell_measure();
  return pairwise_map_sum(traj.times.size(), [&](std::size_t k) {
    const auto& state = traj.states[k];
    if (state.size() != g.size() * ny) throw std::invalid_argument("space-time pairing: slice shape");
    const double slice = measure * pairwise_map_sum(state.size(), [&](std::size_t idx) {
      return state[idx] * phi.values[idx / ny] * wv[idx % ny];
    });
    return wt[k] * psi.chi(traj.times[k]) * slice;
  });
}

// ---- sequence checks --------------------------------------------------------

// Weak pairings of a sequence against one test function.
inline PairingReport weak_sigma_report(std::span<const double> eps, std::span<const MacroField> useq,
                                       const TwoScaleField& u0, const TestFunction& psi,
                                       double pass_fraction = 1e-3) {
  detail::require_schedule(eps, useq.size());
  std::vector<double> pairing;
  for (std::size_t k = 0; k < useq.size(); ++k)
    pairing.push_back(weak_sigma_pairing(useq[k], psi, eps[k]));
  const double limit = limit_pairing(u0, psi);
  const double scale = std::max(std::fabs(limit), 1e-3);
  PairingReport r = detail::finish_report(std::vector<double>(eps.begin(), eps.end()),
                                          std::move(pairing), limit, true);
  r.pass = r.pass && r.abs_error.back() <= pass_fraction * scale;
  return r;
}

struct StrongSigmaResult {
  std::vector<PairingReport> weak;  // one per family member
  PairingReport norm_gap;           // pairing = ||u_eps||_p, limit = ||u0||_p
  bool pass = false;
};

// Weak pairings over the family plus the norm gap | ||u_eps||_p - ||u0||_p |.
inline StrongSigmaResult strong_sigma_check(std::span<const double> eps,
                                            std::span<const MacroField> useq,
                                            const TwoScaleField& u0, double p,
                                            std::span<const TestFunction> family,
                                            double norm_tol = 1e-3) {
  detail::require_schedule(eps, useq.size());
  if (family.empty()) throw std::invalid_argument("strong check: empty test family");
  StrongSigmaResult res;
  bool weak_ok = true;
  for (const TestFunction& psi : family) {
    PairingReport r = weak_sigma_report(eps, useq, u0, psi);
    weak_ok = weak_ok && r.pass;
    res.weak.push_back(std::move(r));
  }
  std::vector<double> norms;
  for (const MacroField& u : useq) norms.push_back(lp_norm(u, p));
  const double nlimit = lp_norm(u0, p);
  res.norm_gap = detail::finish_report(std::vector<double>(eps.begin(), eps.end()),
                                       std::move(norms), nlimit, true);
  res.norm_gap.pass = res.norm_gap.pass && res.norm_gap.abs_error.back() <= norm_tol;
  res.pass = weak_ok && res.norm_gap.pass;
  return res;
}

// Pairings of the shifted sequence v_eps(x) = u_eps(x + t) against the
// shifted limit u0(x + t, y). The schedule must keep t/eps integral (so the
// micro phase returns to itself) and t must be a whole number of grid cells.
inline PairingReport translate_limit_check(std::span<const double> eps,
                                           std::span<const MacroField> useq,
                                           const TwoScaleField& u0, double shift,
                                           const TestFunction& psi, double pass_fraction = 1e-3) {
  detail::require_schedule(eps, useq.size());
  if (u0.macro.dim != 1) throw std::invalid_argument("translate check: 1D only");
  for (double e : eps)
    exact_ratio(shift, e, 1e-9, "translate check: shift/eps must be integral");
  const long long s = exact_ratio(shift, u0.macro.spacing(), 1e-9,
                                  "translate check: shift must be a whole number of grid cells");
  const long long m = u0.macro.points;

  std::vector<double> pairing;
  for (std::size_t k = 0; k < useq.size(); ++k) {
    if (!(useq[k].grid == u0.macro)) throw std::invalid_argument("translate check: grid mismatch");
    MacroField shifted{u0.macro, detail::shift_values_1d(useq[k].values, s, m)};
    pairing.push_back(weak_sigma_pairing(shifted, psi, eps[k]));
  }

  TwoScaleField shifted0 = TwoScaleField::zeros(u0.macro, u0.cell);
  const std::size_t ny = u0.cell.size();
  for (long long i = 0; i < m; ++i) {
    const std::size_t src = static_cast<std::size_t>(((i + s) % m + m) % m);
    for (std::size_t j = 0; j < ny; ++j)
      shifted0.values[static_cast<std::size_t>(i) * ny + j] = u0.values[src * ny + j];
  }
  const double limit = limit_pairing(shifted0, psi);
  const double scale = std::max(std::fabs(limit), 1e-3);
  PairingReport r = detail::finish_report(std::vector<double>(eps.begin(), eps.end()),
                                          std::move(pairing), limit, true);
  r.pass = r.pass && r.abs_error.back() <= pass_fraction * scale;
  return r;
}

// Pairings of u_eps * v_eps against the double convolution of the limits.
// Pass additionally requires the final error to fall to at most
// `final_fraction` of the first.
inline PairingReport convolution_limit_check(std::span<const double> eps,
                                             std::span<const MacroField> useq,
                                             std::span<const MacroField> vseq,
                                             const TwoScaleField& u0, const TwoScaleField& v0,
                                             const TestFunction& psi, double final_fraction = 0.1) {
  detail::require_schedule(eps, useq.size());
  if (vseq.size() != useq.size())
    throw std::invalid_argument("convolution check: sequence sizes differ");
  std::vector<double> pairing;
  ConvPlan plan(useq.empty() ? MacroGrid{} : useq[0].grid);
  for (std::size_t k = 0; k < useq.size(); ++k)
    pairing.push_back(weak_sigma_pairing(plan.convolve(useq[k], vseq[k]), psi, eps[k]));
  const double limit = limit_pairing(double_conv(u0, v0), psi);
  PairingReport r = detail::finish_report(std::vector<double>(eps.begin(), eps.end()),
                                          std::move(pairing), limit, true);
  const double floor_abs = detail::pairing_floor(limit);
  const double first = r.abs_error.front();
  r.pass = r.pass && (r.abs_error.back() <= std::max(final_fraction * first, floor_abs));
  return r;
}

}  // namespace nfh
