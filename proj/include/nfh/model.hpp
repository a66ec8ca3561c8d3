#pragma once
// Connectivity kernels, firing rates, and right-hand-side assembly for the
// heterogeneous equation  du/dt = -u + J^eps * f(./eps, u)  and its two-scale
// homogenized counterpart  du0/dt = -u0 + J ** f(y, u0).
//
// A kernel is a finite sum of separable terms sigma * J_m(x) P_m(x/eps) with
// compactly supported nonnegative macro envelopes J_m and nonnegative micro
// factors P_m. The firing rate is f(y, lambda) = g(y) h(lambda) with g a
// nonnegative micro gain and h either the sigmoid 1/(1 + e^{-beta(lambda -
// theta)}) or, for analytic cross-checks only, the identity map. The
// Lipschitz data k1 = sup(g) * Lip(h) and c1 = ||f(./eps, 0)||_2 drive the
// solver's contraction bookkeeping.

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

namespace nfh {

// ---- kernels ----------------------------------------------------------------

struct KernelTerm {
  Profile macro;        // compactly supported nonnegative envelope J_m
  MicroFunction micro;  // nonnegative oscillating factor P_m
};

struct KernelSpec {
  std::vector<KernelTerm> terms;
  double sigma = 1.0;  // global scale applied to every term

  double support_radius() const {
    double r = 0.0;
    for (const auto& t : terms) {
      double c = 0.0;
      for (int a = 0; a < t.macro.dim; ++a)
        c = std::max(c, std::fabs(t.macro.center[static_cast<std::size_t>(a)]));
      r = std::max(r, c + t.macro.support_radius());
    }
    return r;
  }
};

namespace detail {

// Minimum of a micro function on a dense sampling grid: over one period box
// for (quasi-)periodic data, over the core support plus the tail limit for
// vanishing data. Used only to validate nonnegativity at construction.
inline double dense_micro_min(const MicroFunction& w, int samples_per_axis = 512) {
  if (const auto* v = std::get_if<LimitAtInfinity>(&w.fn)) {
    double m = v->limit;
    if (v->core) {
      const Profile& c = *v->core;
      const int n = samples_per_axis;
      for (int i = 0; i < n; ++i) {
        const double x0 = c.center[0] + c.radius * (2.0 * i / (n - 1.0) - 1.0);
        if (w.dim == 1) {
          m = std::min(m, v->limit + c(x0));
        } else {
          for (int j = 0; j < n; ++j) {
            const double x[2] = {x0, c.center[1] + c.radius * (2.0 * j / (n - 1.0) - 1.0)};
            m = std::min(m, v->limit + c(std::span<const double>(x, 2)));
          }
        }
      }
    }
    return m;
  }
  double period = 1.0;
  if (const auto p = micro_period(w)) {
    period = 1.0;
    for (long long q : *p) period = std::max(period, static_cast<double>(q));
  }
  const int n = samples_per_axis;
  double m = eval_micro(w, 0.0);
  for (int i = 0; i < n; ++i) {
    const double y0 = period * i / static_cast<double>(n);
    if (w.dim == 1) {
      m = std::min(m, eval_micro(w, y0));
    } else {
      for (int j = 0; j < n; ++j) m = std::min(m, eval_micro(w, y0, period * j / static_cast<double>(n)));
    }
  }
  return m;
}

}  // namespace detail

inline MacroField kernel_trace(const KernelSpec& J, double eps, const MacroGrid& g) {
  g.validate();
  if (!(eps > 0.0)) throw std::invalid_argument("kernel trace: eps must be positive");
  MacroField out = MacroField::zeros(g);
  for (const auto& term : J.terms) {
    if (term.macro.dim != g.dim || term.micro.dim != g.dim)
      throw std::invalid_argument("kernel trace: term dimension mismatch");
    const MacroField env = sample_macro(g, term.macro);
    const std::vector<double> osc = micro_trace_values(g, term.micro, eps);
    for (std::size_t i = 0; i < out.values.size(); ++i)
      out.values[i] += J.sigma * env.values[i] * osc[i];
  }
  return out;
}

inline double kernel_mass(const KernelSpec& J, double eps, const MacroGrid& g) {
  return integrate(kernel_trace(J, eps, g));
}

// The two-scale kernel sigma * sum_m J_m(x) P_m(y) on the product grid.
// Homogenized dynamics require every micro factor to be 1-periodic (the unit
// cell is the averaging domain).
inline TwoScaleField kernel_two_scale(const KernelSpec& J, const MacroGrid& g, const CellGrid& c) {
  TwoScaleField out = TwoScaleField::zeros(g, c);
  const std::size_t ny = c.size();
  for (const auto& term : J.terms) {
    if (term.macro.dim != g.dim || term.micro.dim != g.dim)
      throw std::invalid_argument("two-scale kernel: term dimension mismatch");
    if (!is_one_periodic(term.micro))
      throw ConfigError("two-scale kernel: micro factors must be 1-periodic on the unit cell");
    const MacroField env = sample_macro(g, term.macro);
    std::vector<double> cellv(ny);
    const long long my = c.points;
    if (c.dim == 1) {
      for (long long j = 0; j < my; ++j) cellv[static_cast<std::size_t>(j)] = eval_micro(term.micro, c.node(j));
    } else {
      for (long long j0 = 0; j0 < my; ++j0)
        for (long long j1 = 0; j1 < my; ++j1)
          cellv[static_cast<std::size_t>(j0 * my + j1)] = eval_micro(term.micro, c.node(j0), c.node(j1));
    }
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < ny; ++j) out.values[i * ny + j] += J.sigma * env.values[i] * cellv[j];
  }
  return out;
}

// Scale such that the largest kernel mass over the eps schedule equals
// target_mass (default just under the unit-mass requirement).
inline double normalized_sigma(const KernelSpec& J, const MacroGrid& g, std::span<const double> eps_schedule,
                               double target_mass = 1.0 - 1e-6) {
  if (eps_schedule.empty()) throw ConfigError("kernel normalization: empty eps schedule");
  if (!(target_mass > 0.0) || target_mass > 1.0)
    throw ConfigError("kernel normalization: target mass must lie in (0, 1]");
  KernelSpec unit = J;
  unit.sigma = 1.0;
  double worst = 0.0;
  for (double eps : eps_schedule) worst = std::max(worst, kernel_mass(unit, eps, g));
  if (!(worst > 0.0)) throw ConfigError("kernel normalization: kernel has zero mass");
  return target_mass / worst;
}

// Construction-time checks: nonnegative envelopes and micro factors, and
// unit-bounded mass across the configured eps schedule.
inline void validate_kernel(const KernelSpec& J, const MacroGrid& g, std::span<const double> eps_schedule) {
  if (!(J.sigma > 0.0)) throw ConfigError("kernel: sigma must be positive");
  for (const auto& term : J.terms) {
    term.macro.validate();
    validate_micro(term.micro);
    if (term.macro.amplitude < 0.0) throw ConfigError("kernel: macro envelope must be nonnegative");
    if (detail::dense_micro_min(term.micro) < 0.0)
      throw ConfigError("kernel: micro factor must be nonnegative (dense sampling found a negative value)");
  }
  for (double eps : eps_schedule) {
    const double m = kernel_mass(J, eps, g);
    if (m > 1.0 + 1e-12)
      throw ConfigError("kernel: mass " + std::to_string(m) + " exceeds 1 at eps = " + std::to_string(eps));
  }
}

// ---- firing rates -----------------------------------------------------------

enum class FiringKind {
  sigmoid,  // h(lambda) = 1 / (1 + e^{-beta (lambda - theta)})
  linear,   // h(lambda) = lambda; analytic cross-checks only, violates 0 <= h <= 1
};

struct FiringRate {
  MicroFunction g = micro_const(1.0);  // nonnegative micro gain
  FiringKind kind = FiringKind::sigmoid;
  double beta = 2.0;
  double theta = 0.5;

  double h(double lambda) const {
    if (kind == FiringKind::linear) return lambda;
    return 1.0 / (1.0 + std::exp(-beta * (lambda - theta)));
  }

  // Exact Lipschitz constant of h: the sigmoid's derivative peaks at beta/4
  // (attained at lambda = theta); the identity has slope 1.
  double lip_h() const { return kind == FiringKind::linear ? 1.0 : beta / 4.0; }

  double sup_g() const { return sup_bound(g); }

  double k1() const { return sup_g() * lip_h(); }

  // True when f = g h satisfies the standing sign/range hypotheses
  // (0 <= h <= 1, f nonnegative); the linear test mode does not.
  bool range_compliant() const { return kind == FiringKind::sigmoid; }

  void validate() const {
    validate_micro(g);
    if (kind == FiringKind::sigmoid && !(beta > 0.0)) throw ConfigError("firing rate: beta must be positive");
    if (detail::dense_micro_min(g) < 0.0) throw ConfigError("firing rate: gain g must be nonnegative");
    if (!(k1() > 0.0)) throw ConfigError("firing rate: k1 = sup(g) * Lip(h) must be positive");
  }
};

inline MacroField apply_firing(const FiringRate& f, double eps, const MacroField& u) {
  const std::vector<double> gv = micro_trace_values(u.grid, f.g, eps);
  MacroField out = MacroField::zeros(u.grid);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = gv[i] * f.h(u.values[i]);
  return out;
}

inline TwoScaleField apply_firing_two_scale(const FiringRate& f, const TwoScaleField& u0) {
  if (f.g.dim != u0.cell.dim) throw std::invalid_argument("firing: gain dimension mismatch");
  const std::size_t ny = u0.cell.size();
  std::vector<double> gv(ny);
  const long long my = u0.cell.points;
  if (u0.cell.dim == 1) {
    for (long long j = 0; j < my; ++j) gv[static_cast<std::size_t>(j)] = eval_micro(f.g, u0.cell.node(j));
  } else {
    for (long long j0 = 0; j0 < my; ++j0)
      for (long long j1 = 0; j1 < my; ++j1)
        gv[static_cast<std::size_t>(j0 * my + j1)] = eval_micro(f.g, u0.cell.node(j0), u0.cell.node(j1));
  }
  TwoScaleField out = TwoScaleField::zeros(u0.macro, u0.cell);
  for (std::size_t i = 0; i < u0.macro.size(); ++i)
    for (std::size_t j = 0; j < ny; ++j) out.values[i * ny + j] = gv[j] * f.h(u0.values[i * ny + j]);
  return out;
}

// ||f(./eps, 0)||_2 on the configured grid.
inline double c1_norm(const FiringRate& f, double eps, const MacroGrid& g) {
  return l2_norm(apply_firing(f, eps, MacroField::zeros(g)));
}

// ---- right-hand sides -------------------------------------------------------

inline MacroField hetero_rhs(const KernelSpec& J, const FiringRate& f, double eps, const MacroField& u) {
  MacroField out = conv_macro(kernel_trace(J, eps, u.grid), apply_firing(f, eps, u));
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= u.values[i];
  return out;
}

inline TwoScaleField homog_rhs(const KernelSpec& J, const FiringRate& f, const TwoScaleField& u0) {
  TwoScaleField out =
      double_conv(kernel_two_scale(J, u0.macro, u0.cell), apply_firing_two_scale(f, u0));
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= u0.values[i];
  return out;
}

// ---- cached problems for time stepping --------------------------------------

// Right-hand side with the kernel spectrum, the gain trace, and the FFT plan
// computed once. rhs() is the only hot-path entry point; it works on raw
// value arrays so integrators can stream through preallocated buffers.
class HeteroProblem {
 public:
  HeteroProblem(const KernelSpec& J, const FiringRate& f, double eps, const MacroGrid& g)
      : grid_(g),
        firing_(f),
        eps_(eps),
        plan_(g),
        gain_(micro_trace_values(g, f.g, eps)),
        scratch_(g.size()) {
    f.validate();
    const MacroField k = kernel_trace(J, eps, g);
    mass_ = integrate(k);
    kspec_ = plan_.spectrum(k);
    c1_ = c1_norm(f, eps, g);
  }

  const MacroGrid& grid() const { return grid_; }
  double eps() const { return eps_; }
  double k1() const { return firing_.k1(); }
  double c1() const { return c1_; }
  double kernel_mass() const { return mass_; }
  const FiringRate& firing() const { return firing_; }
  std::size_t size() const { return grid_.size(); }
  double node_measure() const { return grid_.cell_measure(); }

  void rhs(std::span<const double> u, std::span<double> out) {
    if (u.size() != scratch_.size() || out.size() != scratch_.size())
      throw std::invalid_argument("rhs: state size mismatch");
    for (std::size_t i = 0; i < u.size(); ++i) scratch_[i] = gain_[i] * firing_.h(u[i]);
    plan_.convolve_spectrum(kspec_, scratch_, out);
    for (std::size_t i = 0; i < u.size(); ++i) out[i] -= u[i];
  }

 private:
  MacroGrid grid_;
  FiringRate firing_;
  double eps_;
  ConvPlan plan_;
  std::vector<double> gain_;
  std::vector<double> scratch_;
  std::vector<std::complex<double>> kspec_;
  double mass_ = 0.0;
  double c1_ = 0.0;
};

class HomogProblem {
 public:
  HomogProblem(const KernelSpec& J, const FiringRate& f, const MacroGrid& g, const CellGrid& c)
      : macro_(g), cell_(c), firing_(f), plan_(g, c), scratch_(g.size() * c.size()) {
    f.validate();
    if (!is_one_periodic(f.g))
      throw ConfigError("homogenized dynamics: gain g must be 1-periodic on the unit cell");
    const TwoScaleField k = kernel_two_scale(J, g, c);
    mass_ = integrate(k);
    kspec_ = plan_.spectrum(k);
    const std::size_t ny = c.size();
    gain_.resize(ny);
    const long long my = c.points;
    if (c.dim == 1) {
      for (long long j = 0; j < my; ++j) gain_[static_cast<std::size_t>(j)] = eval_micro(f.g, c.node(j));
    } else {
      for (long long j0 = 0; j0 < my; ++j0)
        for (long long j1 = 0; j1 < my; ++j1)
          gain_[static_cast<std::size_t>(j0 * my + j1)] = eval_micro(f.g, c.node(j0), c.node(j1));
    }
  }

  const MacroGrid& macro() const { return macro_; }
  const CellGrid& cell() const { return cell_; }
  double k1() const { return firing_.k1(); }
  double kernel_mass() const { return mass_; }
  const FiringRate& firing() const { return firing_; }
  std::size_t size() const { return macro_.size() * cell_.size(); }
  double node_measure() const { return macro_.cell_measure() * cell_.cell_measure(); }

  void rhs(std::span<const double> u, std::span<double> out) {
    if (u.size() != scratch_.size() || out.size() != scratch_.size())
      throw std::invalid_argument("rhs: state size mismatch");
    const std::size_t ny = gain_.size();
    for (std::size_t i = 0; i < u.size(); ++i) scratch_[i] = gain_[i % ny] * firing_.h(u[i]);
    plan_.convolve_spectrum(kspec_, scratch_, out);
    for (std::size_t i = 0; i < u.size(); ++i) out[i] -= u[i];
  }

 private:
  MacroGrid macro_;
  CellGrid cell_;
  FiringRate firing_;
  TwoScaleConvPlan plan_;
  std::vector<double> scratch_;
  std::vector<double> gain_;
  std::vector<std::complex<double>> kspec_;
  double mass_ = 0.0;
};

}  // namespace nfh
