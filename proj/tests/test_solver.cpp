// Time integration fixtures: pure decay with a closed form, linear firing
// against a Fourier-symbol oracle, sigmoid constant states against an
// adaptive scalar ODE oracle, contraction bookkeeping, order-of-accuracy
// checks, two-scale collapse, and the a priori norm bound.

#include "nfh/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "nfh/oracles.hpp"
#include "test_util.hpp"

namespace nfh {
namespace {

Profile gaussian1d(double amplitude, double width, double radius) {
  Profile p;
  p.kind = ProfileKind::gaussian;
  p.dim = 1;
  p.amplitude = amplitude;
  p.width = width;
  p.radius = radius;
  return p;
}

Profile costaper1d(double amplitude, double radius) {
  Profile p;
  p.kind = ProfileKind::costaper;
  p.dim = 1;
  p.amplitude = amplitude;
  p.radius = radius;
  return p;
}

// Gaussian envelope, no microstructure, scaled to a given discrete mass.
KernelSpec plain_gaussian_kernel(const MacroGrid& g, double mass) {
  KernelSpec J;
  J.terms.push_back({gaussian1d(1.0, 0.5, 3.0), micro_const(1.0)});
  const std::vector<double> sched{1.0};
  J.sigma = normalized_sigma(J, g, sched, mass);
  return J;
}

FiringRate sigmoid_rate(double beta, double theta) {
  FiringRate f;
  f.g = micro_const(1.0);
  f.beta = beta;
  f.theta = theta;
  return f;
}

FiringRate linear_rate() {
  FiringRate f;
  f.g = micro_const(1.0);
  f.kind = FiringKind::linear;
  return f;
}

double sup_err(const Trajectory& traj, const std::vector<std::vector<double>>& ref) {
  EXPECT_EQ(traj.states.size(), ref.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.states.size(); ++k)
    for (std::size_t j = 0; j < traj.states[k].size(); ++j)
      worst = std::max(worst, std::fabs(traj.states[k][j] - ref[k][j]));
  return worst;
}

// ---- fixture 1: zero kernel, pure decay u(t) = e^{-t} u0 --------------------

TEST(PicardSolve, PureDecayMatchesExponential) {
  MacroGrid g{1, 8.0, 128};
  KernelSpec zero;  // no terms: rhs(u) = -u
  FiringRate f = sigmoid_rate(2.0, 0.5);
  MacroField u0 = sample_macro(g, costaper1d(0.5, 1.5));
  TimeGrid tg{1.0, 1e-3, 100};
  SolveResult r = picard_solve(zero, f, 0.25, u0, tg, PicardConfig{});

  std::vector<std::vector<double>> ref;
  for (double t : r.trajectory.times) {
    std::vector<double> s(u0.values);
    for (double& v : s) v *= std::exp(-t);
    ref.push_back(std::move(s));
  }
  EXPECT_LE(sup_err(r.trajectory, ref), 1e-6);
  EXPECT_EQ(r.trajectory.times.size(), 11u);
  EXPECT_DOUBLE_EQ(r.trajectory.times.back(), 1.0);
}

TEST(Rk4Solve, PureDecayMatchesExponential) {
  MacroGrid g{1, 8.0, 128};
  KernelSpec zero;
  FiringRate f = sigmoid_rate(2.0, 0.5);
  MacroField u0 = sample_macro(g, costaper1d(0.5, 1.5));
  TimeGrid tg{1.0, 1e-3, 100};
  SolveResult r = rk4_solve(zero, f, 0.25, u0, tg);
  std::vector<std::vector<double>> ref;
  for (double t : r.trajectory.times) {
    std::vector<double> s(u0.values);
    for (double& v : s) v *= std::exp(-t);
    ref.push_back(std::move(s));
  }
  EXPECT_LE(sup_err(r.trajectory, ref), 1e-8);
}

// ---- fixture 2: linear firing, plane-wave mode, Fourier-symbol oracle -------
//
// With h(u) = u, g == 1, P == 1 the dynamics are linear: a grid plane wave
// cos(xi x) evolves exactly (in the spatially-discrete system) as
// e^{(S(xi) - 1) t} cos(xi x), where S(xi) = h * sum_j k(x_j) e^{-i xi x_j}
// is the discrete kernel symbol. The oracle computes S by a direct Fourier
// sum with the half-box phase applied analytically.

double discrete_symbol(const MacroField& kernel, long long mode) {
  const std::complex<double> raw = direct_dft_coeff(kernel.values, mode);
  const double sign = (mode % 2 == 0) ? 1.0 : -1.0;  // e^{i pi m}: node 0 is x = -L
  const std::complex<double> s = kernel.grid.spacing() * sign * raw;
  EXPECT_LT(std::fabs(s.imag()), 1e-12);
  return s.real();
}

TEST(PicardSolve, LinearPlaneWaveMatchesSymbolOracle) {
  MacroGrid g{1, 8.0, 256};
  KernelSpec J = plain_gaussian_kernel(g, 0.8);
  FiringRate f = linear_rate();
  const long long mode = 3;
  const double xi = kPi * static_cast<double>(mode) / g.half_width;
  MacroField u0 = sample_macro(g, [&](double x) { return std::cos(xi * x); });
  TimeGrid tg{1.0, 5e-4, 200};
  SolveResult r = picard_solve(J, f, 0.25, u0, tg, PicardConfig{});

  const double s = discrete_symbol(kernel_trace(J, 0.25, g), mode);
  std::vector<std::vector<double>> ref;
  for (double t : r.trajectory.times) {
    std::vector<double> st(u0.values);
    for (double& v : st) v *= std::exp((s - 1.0) * t);
    ref.push_back(std::move(st));
  }
  EXPECT_LE(sup_err(r.trajectory, ref), 1e-6);
}

TEST(Rk4Solve, LinearPlaneWaveMatchesSymbolOracle) {
  MacroGrid g{1, 8.0, 256};
  KernelSpec J = plain_gaussian_kernel(g, 0.8);
  FiringRate f = linear_rate();
  const long long mode = 3;
  const double xi = kPi * static_cast<double>(mode) / g.half_width;
  MacroField u0 = sample_macro(g, [&](double x) { return std::cos(xi * x); });
  TimeGrid tg{1.0, 5e-4, 200};
  SolveResult r = rk4_solve(J, f, 0.25, u0, tg);
  const double s = discrete_symbol(kernel_trace(J, 0.25, g), mode);
  std::vector<std::vector<double>> ref;
  for (double t : r.trajectory.times) {
    std::vector<double> st(u0.values);
    for (double& v : st) v *= std::exp((s - 1.0) * t);
    ref.push_back(std::move(st));
  }
  EXPECT_LE(sup_err(r.trajectory, ref), 1e-8);
}

// ---- fixture 3: sigmoid, constant state, scalar adaptive ODE oracle ---------
//
// A spatially constant state stays constant, so u' = -u + a h(u) with a the
// discrete kernel mass.

struct SigmoidConstantFixture {
  MacroGrid g{1, 8.0, 128};
  KernelSpec J;
  FiringRate f = sigmoid_rate(2.0, 0.5);
  double mass = 0.0;

  SigmoidConstantFixture() {
    J = plain_gaussian_kernel(g, 0.8);
    mass = kernel_mass(J, 1.0, g);
  }

  std::vector<std::vector<double>> oracle(const std::vector<double>& times, double c0) const {
    std::vector<std::vector<double>> ref;
    for (double t : times) {
      const double u =
          t == 0.0 ? c0 : dp45_solve([&](double, double v) { return -v + mass * f.h(v); }, c0, 0.0, t);
      ref.emplace_back(g.size(), u);
    }
    return ref;
  }
};

TEST(PicardSolve, SigmoidConstantMatchesScalarOde) {
  SigmoidConstantFixture fx;
  MacroField u0{fx.g, std::vector<double>(fx.g.size(), 0.2)};
  TimeGrid tg{2.0, 2.5e-4, 800};
  SolveResult r = picard_solve(fx.J, fx.f, 1.0, u0, tg, PicardConfig{});
  EXPECT_LE(sup_err(r.trajectory, fx.oracle(r.trajectory.times, 0.2)), 1e-7);
}

TEST(Rk4Solve, SigmoidConstantMatchesScalarOde) {
  SigmoidConstantFixture fx;
  MacroField u0{fx.g, std::vector<double>(fx.g.size(), 0.2)};
  TimeGrid tg{2.0, 2.5e-4, 800};
  SolveResult r = rk4_solve(fx.J, fx.f, 1.0, u0, tg);
  EXPECT_LE(sup_err(r.trajectory, fx.oracle(r.trajectory.times, 0.2)), 1e-9);
}

// ---- cross-integrator agreement and contraction bookkeeping -----------------

TEST(PicardSolve, AgreesWithRk4OnSigmoidKernelFixture) {
  MacroGrid g{1, 8.0, 128};
  KernelSpec J;
  J.terms.push_back({gaussian1d(1.0, 0.5, 3.0), micro_one_plus_cos(0.5)});
  const std::vector<double> sched{0.25, 0.125};
  J.sigma = normalized_sigma(J, g, sched, 0.9);
  FiringRate f;
  f.g = micro_one_plus_cos(0.5);
  f.beta = 2.0;
  f.theta = 0.5;
  MacroField u0 = sample_macro(g, costaper1d(0.5, 1.5));
  TimeGrid tg{1.0, 1e-3, 100};
  SolveResult a = picard_solve(J, f, 0.25, u0, tg, PicardConfig{});
  SolveResult b = rk4_solve(J, f, 0.25, u0, tg);
  double worst = 0.0;
  for (std::size_t k = 0; k < a.trajectory.states.size(); ++k) {
    std::vector<double> d(g.size());
    for (std::size_t j = 0; j < g.size(); ++j)
      d[j] = a.trajectory.states[k][j] - b.trajectory.states[k][j];
    worst = std::max(worst, detail::lp_of(d, 2.0, g.cell_measure()));
  }
  EXPECT_LE(worst, 1e-6);

  // observed contraction: every recorded ratio within the configured margin
  const double k1 = f.k1();
  const double rho = PicardConfig{}.resolved_rho(k1);
  EXPECT_GT(a.report.subintervals.size(), 0u);
  EXPECT_LE(a.report.max_contraction_ratio(), 2.0 * (k1 + 1.0) * rho + 0.05);
  for (const auto& s : a.report.subintervals) {
    EXPECT_GE(s.sweeps, 2);
    EXPECT_LE(s.sweeps, 20);
  }
}

TEST(PicardSolve, RejectsSubintervalViolatingContractionInequality) {
  MacroGrid g{1, 8.0, 64};
  KernelSpec J = plain_gaussian_kernel(g, 0.8);
  FiringRate f = sigmoid_rate(2.0, 0.5);  // k1 = 0.5
  MacroField u0 = MacroField::zeros(g);
  TimeGrid tg{1.0, 1e-2, 10};
  PicardConfig pc;
  pc.rho = 0.4;  // 2 (k1+1) rho = 1.2 >= 1
  try {
    picard_solve(J, f, 0.25, u0, tg, pc);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("2(k1+1)rho"), std::string::npos);
  }
}

TEST(TimeGridValidate, RejectsBadStepAndStride) {
  EXPECT_THROW((TimeGrid{1.0, 3e-4, 1}.validate()), std::invalid_argument);  // T/dt not integral
  EXPECT_THROW((TimeGrid{1.0, 1e-3, 7}.validate()), ConfigError);            // stride !| steps
  EXPECT_THROW((TimeGrid{1.0, -1e-3, 1}.validate()), ConfigError);
  EXPECT_NO_THROW((TimeGrid{1.0, 1e-3, 100}.validate()));
}

// ---- order of accuracy ------------------------------------------------------

TEST(Order, Rk4FourthOrderPicardAtLeastSecondOrder) {
  SigmoidConstantFixture fx;
  MacroField u0{fx.g, std::vector<double>(fx.g.size(), 0.2)};
  auto err_at = [&](double dt, bool rk4) {
    TimeGrid tg{1.0, dt, exact_ratio(1.0, dt, 1e-9, "steps")};
    SolveResult r = rk4 ? rk4_solve(fx.J, fx.f, 1.0, u0, tg)
                        : picard_solve(fx.J, fx.f, 1.0, u0, tg, PicardConfig{});
    return sup_err(r.trajectory, fx.oracle(r.trajectory.times, 0.2));
  };
  const double rk_coarse = err_at(0.02, true);
  const double rk_fine = err_at(0.01, true);
  EXPECT_GE(rk_coarse / rk_fine, 8.0);
  EXPECT_LE(rk_coarse / rk_fine, 40.0);

  const double pi_coarse = err_at(0.02, false);
  const double pi_fine = err_at(0.01, false);
  EXPECT_GE(pi_coarse / pi_fine, 2.0);
}

// ---- nonnegativity ----------------------------------------------------------

TEST(PicardSolve, NonnegativeDataStaysNonnegative) {
  MacroGrid g{1, 8.0, 128};
  KernelSpec J;
  J.terms.push_back({gaussian1d(1.0, 0.5, 3.0), micro_one_plus_cos(0.5)});
  J.sigma = normalized_sigma(J, g, std::vector<double>{0.25}, 0.9);
  FiringRate f;
  f.g = micro_one_plus_cos(0.5);
  f.beta = 2.0;
  f.theta = 0.5;
  MacroField u0 = sample_macro(g, costaper1d(0.5, 1.5));
  TimeGrid tg{1.0, 1e-3, 50};
  SolveResult r = picard_solve(J, f, 0.25, u0, tg, PicardConfig{});
  double lo = 0.0;
  for (const auto& s : r.trajectory.states)
    for (double v : s) lo = std::min(lo, v);
  EXPECT_GE(lo, -1e-10);
}

// ---- homogenized dynamics ---------------------------------------------------

TEST(HomogSolve, YDegenerateCollapseMatchesHeteroTrajectory) {
  MacroGrid g{1, 8.0, 64};
  CellGrid c{1, 8};
  KernelSpec J = plain_gaussian_kernel(g, 0.8);
  FiringRate f = sigmoid_rate(2.0, 0.5);
  MacroField u0 = sample_macro(g, costaper1d(0.5, 1.5));
  TimeGrid tg{1.0, 1e-3, 100};
  SolveResult hom = homog_solve(J, f, u0, tg, PicardConfig{}, c);
  SolveResult het = picard_solve(J, f, 1.0, u0, tg, PicardConfig{});
  double worst = 0.0;
  for (std::size_t k = 0; k < hom.trajectory.states.size(); ++k)
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j)
        worst = std::max(worst, std::fabs(hom.trajectory.states[k][i * c.size() + j] -
                                          het.trajectory.states[k][i]));
  EXPECT_LE(worst, 1e-10);
}

TEST(HomogSolve, ZeroKernelDecaysLiftedState) {
  MacroGrid g{1, 8.0, 64};
  CellGrid c{1, 8};
  KernelSpec zero;
  FiringRate f = sigmoid_rate(2.0, 0.5);
  MacroField u0 = sample_macro(g, costaper1d(0.5, 1.5));
  TimeGrid tg{1.0, 1e-3, 200};
  SolveResult r = homog_solve(zero, f, u0, tg, PicardConfig{}, c);
  double worst = 0.0;
  for (std::size_t k = 0; k < r.trajectory.states.size(); ++k) {
    const double decay = std::exp(-r.trajectory.times[k]);
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j)
        worst = std::max(worst, std::fabs(r.trajectory.states[k][i * c.size() + j] -
                                          decay * u0.values[i]));
  }
  EXPECT_LE(worst, 1e-6);
}

// Independent route: integrate the same two-scale dynamics with RK4 whose
// right-hand side is assembled by the O(n^2) direct quadrature.
TEST(HomogSolve, SmallGridMatchesDirectQuadratureIntegration) {
  MacroGrid g{1, 8.0, 32};
  CellGrid c{1, 16};
  KernelSpec J;
  J.terms.push_back({gaussian1d(1.0, 0.5, 3.0), micro_one_plus_cos(0.5)});
  J.sigma = normalized_sigma(J, g, std::vector<double>{1.0}, 0.9);
  FiringRate f;
  f.g = micro_one_plus_cos(0.5);
  f.beta = 2.0;
  f.theta = 0.5;
  MacroField u0 = sample_macro(g, costaper1d(0.5, 1.5));
  TimeGrid tg{0.5, 1e-2, 10};
  SolveResult fast = homog_solve_rk4(J, f, u0, tg, c);

  const TwoScaleField kernel = kernel_two_scale(J, g, c);
  TwoScaleField state = lift_y_constant(u0, c);
  std::vector<std::vector<double>> ref{state.values};
  const std::size_t n = state.values.size();
  auto rhs = [&](const std::vector<double>& v) {
    TwoScaleField s{g, c, v};
    TwoScaleField out = double_conv_direct(kernel, apply_firing_two_scale(f, s));
    for (std::size_t i = 0; i < n; ++i) out.values[i] -= v[i];
    return out.values;
  };
  std::vector<double> u = state.values;
  const long long steps = tg.steps();
  for (long long step = 0; step < steps; ++step) {
    const std::vector<double> k1 = rhs(u);
    std::vector<double> tmp(n);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * tg.step * k1[i];
    const std::vector<double> k2 = rhs(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * tg.step * k2[i];
    const std::vector<double> k3 = rhs(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + tg.step * k3[i];
    const std::vector<double> k4 = rhs(tmp);
    for (std::size_t i = 0; i < n; ++i)
      u[i] += tg.step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if ((step + 1) % tg.stride == 0) ref.push_back(u);
  }
  EXPECT_LE(sup_err(fast.trajectory, ref), 1e-8);
}

// ---- a priori bound ---------------------------------------------------------

TEST(Apriori, PureDecaySatisfiesBoundWithEquality) {
  MacroGrid g{1, 8.0, 64};
  KernelSpec zero;
  FiringRate f = sigmoid_rate(2.0, 0.5);
  MacroField u0 = sample_macro(g, costaper1d(0.5, 1.5));
  TimeGrid tg{1.0, 1e-3, 100};
  HeteroProblem p(zero, f, 0.25, g);
  SolveResult r = picard_solve_problem(p, u0.values, tg, PicardConfig{});
  AprioriReport rep = apriori_monitor(r.trajectory, p);
  EXPECT_TRUE(rep.ok);
  const double init_l2 = l2_norm(u0);
  for (std::size_t k = 0; k < r.report.times.size(); ++k)
    EXPECT_NEAR(r.report.l2[k], std::exp(-r.report.times[k]) * init_l2, 1e-6);
}

TEST(Apriori, SigmoidFixtureSatisfiesBound) {
  MacroGrid g{1, 8.0, 128};
  KernelSpec J;
  J.terms.push_back({gaussian1d(1.0, 0.5, 3.0), micro_one_plus_cos(0.5)});
  J.sigma = normalized_sigma(J, g, std::vector<double>{0.25}, 0.9);
  FiringRate f;
  f.g = micro_one_plus_cos(0.5);
  f.beta = 2.0;
  f.theta = 0.5;
  MacroField u0 = sample_macro(g, costaper1d(0.5, 1.5));
  TimeGrid tg{2.0, 1e-3, 100};
  HeteroProblem p(J, f, 0.25, g);
  SolveResult r = picard_solve_problem(p, u0.values, tg, PicardConfig{});
  AprioriReport rep = apriori_monitor(r.trajectory, p);
  EXPECT_TRUE(rep.ok) << "worst margin " << rep.worst_margin;
  EXPECT_GT(rep.sup_l1_plus_l2, 0.0);
}

TEST(Apriori, ZeroInitialStateStaysUnderForcedEquilibrium) {
  MacroGrid g{1, 8.0, 128};
  KernelSpec J;
  J.terms.push_back({gaussian1d(1.0, 0.5, 3.0), micro_one_plus_cos(0.5)});
  J.sigma = normalized_sigma(J, g, std::vector<double>{0.25}, 0.9);
  FiringRate f;
  f.g = micro_one_plus_cos(0.5);
  f.beta = 2.0;
  f.theta = 0.5;
  TimeGrid tg{2.0, 1e-3, 200};
  HeteroProblem p(J, f, 0.25, g);
  SolveResult r = picard_solve_problem(p, std::vector<double>(g.size(), 0.0), tg, PicardConfig{});
  AprioriReport rep = apriori_monitor(r.trajectory, p);
  EXPECT_TRUE(rep.ok);
  // forced growth saturates below mass * sup(f): ||u||_2 <= mass * ||1||_2
  EXPECT_LE(rep.sup_l1_plus_l2, (p.kernel_mass() * 1.5) * (16.0 + 4.0) + 1e-6);
}

// ---- blow-up guard ----------------------------------------------------------

TEST(Rk4Solve, NonFiniteStateRaisesBlowupError) {
  MacroGrid g{1, 8.0, 64};
  KernelSpec zero;
  FiringRate f = sigmoid_rate(2.0, 0.5);
  MacroField u0 = MacroField::zeros(g);
  u0.values[0] = std::numeric_limits<double>::infinity();
  TimeGrid tg{1.0, 1e-2, 10};
  EXPECT_THROW(rk4_solve(zero, f, 0.25, u0, tg), BlowupError);
}

}  // namespace
}  // namespace nfh
