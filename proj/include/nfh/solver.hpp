#pragma once
// Time integration of the nonlocal dynamics du/dt = rhs(u) by two routes:
//
//  * picard_solve — the fixed-point construction behind the existence proof:
//    the horizon is split into subintervals of length rho with
//    2 (k1 + 1) rho < 1; on each one the integral form
//        K(phi)(t) = a + int_0^t rhs(phi(tau)) dtau
//    is iterated from the constant-in-time guess phi = a, with the time
//    integral taken by composite trapezoid on the dt mesh, until successive
//    sweeps differ by less than the fixed-point tolerance in the
//    max-over-time (L1 + L2) norm. Subintervals chain through their endpoint
//    states. Observed sweep-to-sweep contraction ratios are recorded; three
//    consecutive ratios >= 1 abort with a configuration error.
//
//  * rk4_solve — the classical 4-stage one-step method on the same
//    right-hand side, as an independent reference.
//
// Both run on any Problem exposing size(), node_measure(), k1() and
// rhs(state, out); states are raw value arrays so the same code drives the
// heterogeneous macro dynamics and the two-scale homogenized dynamics.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nfh/common.hpp"
#include "nfh/grid.hpp"
#include "nfh/model.hpp"

namespace nfh {

// ---- schedules and reports --------------------------------------------------

struct TimeGrid {
  double horizon = 2.0;  // T
  double step = 1e-3;    // dt
  long long stride = 100;  // record every `stride` steps

  long long steps() const { return exact_ratio(horizon, step, 1e-9, "time grid: horizon/step"); }

  void validate() const {
    if (!(step > 0.0) || !(horizon > 0.0) || step > horizon + 1e-15)
      throw ConfigError("time grid: need 0 < dt <= T");
    const long long s = steps();
    if (stride < 1 || s % stride != 0)
      throw ConfigError("time grid: output stride must divide the step count (steps = " +
                        std::to_string(s) + ", stride = " + std::to_string(stride) + ")");
  }
};

struct PicardConfig {
  double rho = 0.0;      // subinterval length; 0 selects 0.9 / (2 (k1 + 1))
  int max_sweeps = 60;   // fixed-point budget per subinterval
  double tol = 1e-12;    // fixed-point tolerance in the max-over-time L1+L2 norm

  double resolved_rho(double k1) const { return rho > 0.0 ? rho : 0.9 / (2.0 * (k1 + 1.0)); }

  void validate(double k1) const {
    if (!(tol > 0.0)) throw ConfigError("picard: fixed-point tolerance must be positive");
    if (max_sweeps < 1) throw ConfigError("picard: sweep budget must be at least 1");
    const double r = resolved_rho(k1);
    const double margin = 2.0 * (k1 + 1.0) * r;
    if (!(margin < 1.0))
      throw ConfigError("picard: contraction requires 2(k1+1)rho < 1, got 2(k1+1)rho = " +
                        std::to_string(margin) + " with k1 = " + std::to_string(k1) +
                        ", rho = " + std::to_string(r));
  }
};

struct SubintervalStats {
  double t_begin = 0.0;
  double t_end = 0.0;
  int sweeps = 0;
  std::vector<double> ratios;  // diff_j / diff_{j-1} for sweeps j >= 2
};

struct SolveReport {
  std::vector<double> times;  // output times
  std::vector<double> l1;     // per output time
  std::vector<double> l2;
  std::vector<SubintervalStats> subintervals;  // empty for rk4
  double wall_seconds = 0.0;  // informational only; never persisted

  double max_contraction_ratio() const {
    double m = 0.0;
    for (const auto& s : subintervals)
      for (double r : s.ratios) m = std::max(m, r);
    return m;
  }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;  // raw value arrays per output time
};

struct SolveResult {
  Trajectory trajectory;
  SolveReport report;
};

inline MacroField state_field(const MacroGrid& g, const Trajectory& traj, std::size_t k) {
  if (k >= traj.states.size() || traj.states[k].size() != g.size())
    throw std::invalid_argument("trajectory: bad state index or shape");
  return MacroField{g, traj.states[k]};
}

inline TwoScaleField state_field(const MacroGrid& g, const CellGrid& c, const Trajectory& traj,
                                 std::size_t k) {
  if (k >= traj.states.size() || traj.states[k].size() != g.size() * c.size())
    throw std::invalid_argument("trajectory: bad state index or shape");
  return TwoScaleField{g, c, traj.states[k]};
}

// ---- integrators ------------------------------------------------------------

namespace detail {

inline void require_finite(std::span<const double> v, double t) {
  for (double x : v)
    if (!std::isfinite(x))
      throw BlowupError("state left the finite range at t = " + std::to_string(t));
}

struct Recorder {
  SolveResult* r;
  double measure;
  void operator()(double t, std::span<const double> state) const {
    r->trajectory.times.push_back(t);
    r->trajectory.states.emplace_back(state.begin(), state.end());
    r->report.times.push_back(t);
    r->report.l1.push_back(lp_of(state, 1.0, measure));
    r->report.l2.push_back(lp_of(state, 2.0, measure));
  }
};

}  // namespace detail

template <class Problem>
SolveResult picard_solve_problem(Problem& problem, std::vector<double> init, const TimeGrid& tg,
                                 const PicardConfig& pc) {
  const auto t_start = std::chrono::steady_clock::now();
  tg.validate();
  const double k1 = problem.k1();
  pc.validate(k1);
  const std::size_t n = problem.size();
  if (init.size() != n) throw std::invalid_argument("picard: initial state size mismatch");
  detail::require_finite(init, 0.0);

  const double dt = tg.step;
  const long long total_steps = tg.steps();
  const double rho = pc.resolved_rho(k1);
  // Mesh-aligned subinterval length: the largest multiple of dt that fits
  // inside rho (at least one step).
  const long long sub_steps_max =
      std::max<long long>(1, static_cast<long long>(std::floor(rho / dt + 1e-12)));
  const double w = problem.node_measure();

  SolveResult result;
  detail::Recorder record{&result, w};
  record(0.0, init);

  std::vector<double> a = std::move(init);       // left endpoint of the current subinterval
  std::vector<std::vector<double>> phi;          // iterate at subinterval mesh times
  std::vector<double> g_left(n), g_prev(n), g_cur(n), acc(n), delta(n);

  long long done = 0;
  while (done < total_steps) {
    const long long nsteps = std::min(sub_steps_max, total_steps - done);
    phi.assign(static_cast<std::size_t>(nsteps) + 1, a);
    problem.rhs(a, g_left);  // K(phi)(0) never moves, so rhs(a) is fixed per subinterval

    SubintervalStats st;
    st.t_begin = static_cast<double>(done) * dt;
    st.t_end = static_cast<double>(done + nsteps) * dt;
    double prev_diff = -1.0;
    int stalled = 0;
    bool converged = false;

    for (int sweep = 1; sweep <= pc.max_sweeps; ++sweep) {
      st.sweeps = sweep;
      g_cur = g_left;
      std::fill(acc.begin(), acc.end(), 0.0);
      double diff = 0.0;
      for (long long i = 1; i <= nsteps; ++i) {
        auto& state = phi[static_cast<std::size_t>(i)];
        std::swap(g_prev, g_cur);
        problem.rhs(state, g_cur);
        // cumulative trapezoid: acc = int_0^{t_i} rhs(phi) dtau
        for (std::size_t j = 0; j < n; ++j) acc[j] += 0.5 * dt * (g_prev[j] + g_cur[j]);
        for (std::size_t j = 0; j < n; ++j) {
          const double next = a[j] + acc[j];
          delta[j] = next - state[j];
          state[j] = next;
        }
        diff = std::max(diff, detail::lp_of(delta, 1.0, w) + detail::lp_of(delta, 2.0, w));
      }
      if (!std::isfinite(diff))
        throw BlowupError("picard: non-finite sweep update near t = " + std::to_string(st.t_begin));
      if (prev_diff > 0.0) {
        const double ratio = diff / prev_diff;
        st.ratios.push_back(ratio);
        stalled = ratio >= 1.0 ? stalled + 1 : 0;
        if (stalled >= 3)
          throw ConfigError(
              "picard: no contraction over 3 consecutive sweeps; the subinterval length "
              "violates 2(k1+1)rho < 1 in practice (k1 = " +
              std::to_string(k1) + ", rho = " + std::to_string(rho) + ")");
      }
      if (diff < pc.tol) {
        converged = true;
        break;
      }
      prev_diff = diff;
    }
    if (!converged)
      throw ConvergenceError("picard: fixed point not reached in " + std::to_string(pc.max_sweeps) +
                             " sweeps on [" + std::to_string(st.t_begin) + ", " +
                             std::to_string(st.t_end) + "]");

    for (long long i = 1; i <= nsteps; ++i) {
      const long long gidx = done + i;
      if (gidx % tg.stride == 0)
        record(static_cast<double>(gidx) * dt, phi[static_cast<std::size_t>(i)]);
    }
    a = phi[static_cast<std::size_t>(nsteps)];
    result.report.subintervals.push_back(std::move(st));
    done += nsteps;
  }

  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

template <class Problem>
SolveResult rk4_solve_problem(Problem& problem, std::vector<double> init, const TimeGrid& tg) {
  const auto t_start = std::chrono::steady_clock::now();
  tg.validate();
  const std::size_t n = problem.size();
  if (init.size() != n) throw std::invalid_argument("rk4: initial state size mismatch");
  detail::require_finite(init, 0.0);

  const double dt = tg.step;
  const long long total_steps = tg.steps();

  SolveResult result;
  detail::Recorder record{&result, problem.node_measure()};
  record(0.0, init);

  std::vector<double> u = std::move(init);
  std::vector<double> s1(n), s2(n), s3(n), s4(n), tmp(n);
  for (long long step = 0; step < total_steps; ++step) {
    problem.rhs(u, s1);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = u[j] + 0.5 * dt * s1[j];
    problem.rhs(tmp, s2);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = u[j] + 0.5 * dt * s2[j];
    problem.rhs(tmp, s3);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = u[j] + dt * s3[j];
    problem.rhs(tmp, s4);
    for (std::size_t j = 0; j < n; ++j)
      u[j] += dt / 6.0 * (s1[j] + 2.0 * s2[j] + 2.0 * s3[j] + s4[j]);
    const double t = static_cast<double>(step + 1) * dt;
    detail::require_finite(u, t);
    if ((step + 1) % tg.stride == 0) record(t, u);
  }

  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

// ---- equation-level wrappers ------------------------------------------------

inline SolveResult picard_solve(const KernelSpec& J, const FiringRate& f, double eps,
                                const MacroField& u0, const TimeGrid& tg, const PicardConfig& pc) {
  HeteroProblem problem(J, f, eps, u0.grid);
  return picard_solve_problem(problem, u0.values, tg, pc);
}

inline SolveResult rk4_solve(const KernelSpec& J, const FiringRate& f, double eps,
                             const MacroField& u0, const TimeGrid& tg) {
  HeteroProblem problem(J, f, eps, u0.grid);
  return rk4_solve_problem(problem, u0.values, tg);
}

// Homogenized dynamics started from the y-constant lift of a macro state.
inline SolveResult homog_solve(const KernelSpec& J, const FiringRate& f, const MacroField& u0,
                               const TimeGrid& tg, const PicardConfig& pc, const CellGrid& cell) {
  HomogProblem problem(J, f, u0.grid, cell);
  return picard_solve_problem(problem, lift_y_constant(u0, cell).values, tg, pc);
}

inline SolveResult homog_solve_rk4(const KernelSpec& J, const FiringRate& f, const MacroField& u0,
                                   const TimeGrid& tg, const CellGrid& cell) {
  HomogProblem problem(J, f, u0.grid, cell);
  return rk4_solve_problem(problem, lift_y_constant(u0, cell).values, tg);
}

// ---- a priori bound monitoring ----------------------------------------------

struct AprioriReport {
  bool ok = true;
  double threshold = 0.0;          // 2 c1 / k1
  double sup_l1_plus_l2 = 0.0;     // sup over output times of L1 + L2
  double worst_margin = 0.0;       // max of ||u||_2 - bound(t) (<= 0 when ok)
  std::vector<std::size_t> violations;  // output indices where the bound fails
};

// Checks ||u(t)||_2 <= max(2 c1 / k1, e^{1.5 k1 t} ||u(0)||_2) * (1 + 1e-6)
// at every recorded time. Violations are reported, never thrown.
inline AprioriReport apriori_monitor(const Trajectory& traj, double node_measure, double k1,
                                     double c1) {
  if (traj.states.empty()) throw std::invalid_argument("a priori monitor: empty trajectory");
  if (!(k1 > 0.0)) throw std::invalid_argument("a priori monitor: k1 must be positive");
  AprioriReport rep;
  rep.threshold = 2.0 * c1 / k1;
  const double init_l2 = detail::lp_of(traj.states[0], 2.0, node_measure);
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const double t = traj.times[k];
    const double l1 = detail::lp_of(traj.states[k], 1.0, node_measure);
    const double l2 = detail::lp_of(traj.states[k], 2.0, node_measure);
    rep.sup_l1_plus_l2 = std::max(rep.sup_l1_plus_l2, l1 + l2);
    const double bound =
        std::max(rep.threshold, std::exp(1.5 * k1 * t) * init_l2) * (1.0 + 1e-6);
    rep.worst_margin = std::max(rep.worst_margin, l2 - bound);
    if (l2 > bound) {
      rep.ok = false;
      rep.violations.push_back(k);
    }
  }
  return rep;
}

inline AprioriReport apriori_monitor(const Trajectory& traj, const HeteroProblem& p) {
  return apriori_monitor(traj, p.node_measure(), p.k1(), p.c1());
}

}  // namespace nfh
