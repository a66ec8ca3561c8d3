// Kernel traces/masses, firing rates with their Lipschitz metadata, and
// right-hand-side assembly, cross-checked against direct-quadrature oracles
// and closed-form constant-state algebra.

#include "nfh/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "nfh/convolve.hpp"
#include "nfh/grid.hpp"
#include "test_util.hpp"

namespace nfh {
namespace {

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  EXPECT_EQ(a.size(), b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

Profile indicator1d(double amplitude, double radius) {
  Profile p;
  p.kind = ProfileKind::indicator;
  p.dim = 1;
  p.amplitude = amplitude;
  p.radius = radius;
  return p;
}

KernelSpec indicator_cos_kernel() {
  // sigma = 1/3, J1 = indicator[-1,1], P = 1 + (1/2) cos(2 pi y)
  KernelSpec J;
  J.sigma = 1.0 / 3.0;
  J.terms.push_back({indicator1d(1.0, 1.0), micro_one_plus_cos(0.5)});
  return J;
}

FiringRate plain_sigmoid(double beta, double theta) {
  FiringRate f;
  f.g = micro_const(1.0);
  f.beta = beta;
  f.theta = theta;
  return f;
}

TEST(KernelTrace, ConstantMicroIsEpsIndependent) {
  MacroGrid g{1, 8.0, 512};
  KernelSpec J;
  J.sigma = 0.25;
  J.terms.push_back({indicator1d(2.0, 1.5), micro_const(1.0)});
  MacroField a = kernel_trace(J, 0.25, g);
  MacroField b = kernel_trace(J, 0.0625, g);
  EXPECT_EQ(max_abs_diff(a.values, b.values), 0.0);
  // samples are sigma * J1(x)
  for (int i = 0; i < g.points; ++i) {
    const double x = g.node(i);
    EXPECT_DOUBLE_EQ(a.values[static_cast<std::size_t>(i)], std::fabs(x) <= 1.5 ? 0.5 : 0.0);
  }
}

TEST(KernelTrace, IndicatorTimesOnePlusCosAtOrigin) {
  MacroGrid g{1, 8.0, 512};
  MacroField t = kernel_trace(indicator_cos_kernel(), 0.25, g);
  // x = 0 is node M/2; the micro phase there is 0, so P = 3/2 and the value
  // is (1/3) * 1 * (3/2) = 1/2.
  EXPECT_NEAR(t.values[static_cast<std::size_t>(g.points / 2)], 0.5, 1e-15);
}

TEST(KernelMass, BoundedByOneAndNearTwoThirdsOverSchedule) {
  MacroGrid g{1, 8.0, 512};
  KernelSpec J = indicator_cos_kernel();
  for (double eps : {1.0, 0.5, 0.25}) {
    const double m = kernel_mass(J, eps, g);
    EXPECT_LE(m, 1.0 + 1e-12);
    EXPECT_NEAR(m, 2.0 / 3.0, 0.02) << "eps " << eps;
  }
}

TEST(KernelMass, ZeroKernels) {
  MacroGrid g{1, 8.0, 64};
  KernelSpec empty;
  EXPECT_EQ(kernel_mass(empty, 0.5, g), 0.0);
  KernelSpec zero_amp;
  zero_amp.terms.push_back({indicator1d(0.0, 1.0), micro_one_plus_cos(0.5)});
  EXPECT_EQ(kernel_mass(zero_amp, 0.5, g), 0.0);
}

TEST(KernelMass, ConstantMicroMassIsSigmaTimesEnvelopeIntegral) {
  MacroGrid g{1, 8.0, 256};
  KernelSpec J;
  J.sigma = 0.4;
  J.terms.push_back({indicator1d(1.0, 2.0), micro_const(1.0)});
  const double mass_a = kernel_mass(J, 1.0, g);
  const double mass_b = kernel_mass(J, 0.125, g);
  EXPECT_EQ(mass_a, mass_b);
  EXPECT_NEAR(mass_a, 0.4 * integrate(sample_macro(g, J.terms[0].macro)), 1e-14);
}

TEST(KernelNormalize, TargetMassAttainedAtWorstEps) {
  MacroGrid g{1, 8.0, 512};
  KernelSpec J = indicator_cos_kernel();
  const std::vector<double> schedule{1.0, 0.5, 0.25, 0.125};
  J.sigma = normalized_sigma(J, g, schedule, 0.9);
  double worst = 0.0;
  for (double eps : schedule) worst = std::max(worst, kernel_mass(J, eps, g));
  EXPECT_NEAR(worst, 0.9, 1e-12);
  EXPECT_NO_THROW(validate_kernel(J, g, schedule));
}

TEST(KernelValidate, RejectsNegativeFactorsAndOverUnitMass) {
  MacroGrid g{1, 8.0, 512};
  const std::vector<double> schedule{0.25};

  KernelSpec neg_micro;
  neg_micro.terms.push_back({indicator1d(1.0, 1.0), micro_one_plus_cos(1.5)});  // dips to -1/2
  EXPECT_THROW(validate_kernel(neg_micro, g, schedule), ConfigError);

  KernelSpec neg_macro;
  neg_macro.terms.push_back({indicator1d(-1.0, 1.0), micro_const(1.0)});
  EXPECT_THROW(validate_kernel(neg_macro, g, schedule), ConfigError);

  KernelSpec heavy = indicator_cos_kernel();
  heavy.sigma = 2.0;  // mass about 4/3
  EXPECT_THROW(validate_kernel(heavy, g, schedule), ConfigError);

  KernelSpec ok = indicator_cos_kernel();
  EXPECT_NO_THROW(validate_kernel(ok, g, schedule));
}

TEST(Firing, SigmoidAtRestIsHalf) {
  MacroGrid g{1, 8.0, 64};
  FiringRate f = plain_sigmoid(1.0, 0.0);
  MacroField out = apply_firing(f, 0.25, MacroField::zeros(g));
  for (double v : out.values) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(Firing, SaturationRecoversGainTrace) {
  MacroGrid g{1, 8.0, 256};
  FiringRate f;
  // g(y) = cos^2(2 pi y) = 1/2 + (1/2) cos(4 pi y)
  f.g = micro_trig(1, {TrigTerm{{Rational(0)}, 0.5, 0.0}, TrigTerm{{Rational(2)}, 0.5, 0.0}});
  f.beta = 1.0;
  f.theta = 0.0;
  const double eps = 0.25;
  MacroField big{g, std::vector<double>(g.size(), 50.0)};
  MacroField out = apply_firing(f, eps, big);
  double worst = 0.0;
  for (int i = 0; i < g.points; ++i) {
    const double c = std::cos(kTwoPi * g.node(i) / eps);
    worst = std::max(worst, std::fabs(out.values[static_cast<std::size_t>(i)] - c * c));
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Firing, NormBoundHoldsOnRandomStates) {
  MacroGrid g{1, 8.0, 128};
  FiringRate f;
  f.g = micro_one_plus_cos(0.5);
  f.beta = 2.0;
  f.theta = 0.5;
  const double eps = 0.125;
  const double k1 = f.k1();
  EXPECT_DOUBLE_EQ(k1, 1.5 * 2.0 / 4.0);
  const double c1 = c1_norm(f, eps, g);
  std::mt19937_64 rng(1212);
  for (int trial = 0; trial < 100; ++trial) {
    MacroField u{g, testutil::random_values(rng, g.size(), -2.0, 2.0)};
    const double lhs = l2_norm(apply_firing(f, eps, u));
    EXPECT_LE(lhs, k1 * l2_norm(u) + c1 + 1e-10);
  }
}

TEST(Firing, RestNormMatchesClosedForm) {
  MacroGrid g{1, 8.0, 128};
  FiringRate f = plain_sigmoid(2.0, 0.5);
  // c1 = h(0) * ||1||_2 = h(0) * sqrt(2L) with h(0) = 1/(1+e).
  const double h0 = 1.0 / (1.0 + std::exp(1.0));
  EXPECT_NEAR(c1_norm(f, 0.25, g), h0 * 4.0, 1e-12);
}

TEST(FiringValidate, RejectsNegativeGainAndZeroGain) {
  FiringRate neg;
  neg.g = micro_const(-1.0);
  EXPECT_THROW(neg.validate(), ConfigError);
  FiringRate zero;
  zero.g = micro_const(0.0);
  EXPECT_THROW(zero.validate(), ConfigError);  // k1 = 0
  FiringRate ok = plain_sigmoid(2.0, 0.5);
  EXPECT_NO_THROW(ok.validate());
}

TEST(FiringTwoScale, RestStateAndLipschitzBound) {
  MacroGrid g{1, 8.0, 32};
  CellGrid c{1, 16};
  FiringRate f = plain_sigmoid(1.0, 0.0);
  TwoScaleField zero = TwoScaleField::zeros(g, c);
  TwoScaleField out = apply_firing_two_scale(f, zero);
  for (double v : out.values) EXPECT_DOUBLE_EQ(v, 0.5);

  FiringRate fg;
  fg.g = micro_one_plus_cos(0.5);
  fg.beta = 2.0;
  fg.theta = 0.5;
  const double k1 = fg.k1();
  std::mt19937_64 rng(1313);
  for (int trial = 0; trial < 20; ++trial) {
    TwoScaleField u{g, c, testutil::random_values(rng, g.size() * c.size(), -2.0, 2.0)};
    TwoScaleField v{g, c, testutil::random_values(rng, g.size() * c.size(), -2.0, 2.0)};
    TwoScaleField fu = apply_firing_two_scale(fg, u);
    TwoScaleField fv = apply_firing_two_scale(fg, v);
    for (std::size_t i = 0; i < fu.values.size(); ++i)
      EXPECT_LE(std::fabs(fu.values[i] - fv.values[i]),
                k1 * std::fabs(u.values[i] - v.values[i]) + 1e-12);
  }
}

TEST(HeteroRhs, RestStateGivesHalfKernelMass) {
  MacroGrid g{1, 8.0, 512};
  KernelSpec J = indicator_cos_kernel();
  FiringRate f = plain_sigmoid(1.0, 0.0);
  const double eps = 0.25;
  const double a = kernel_mass(J, eps, g);
  MacroField out = hetero_rhs(J, f, eps, MacroField::zeros(g));
  for (double v : out.values) EXPECT_NEAR(v, 0.5 * a, 1e-12);
}

TEST(HeteroRhs, LinearFiringConstantState) {
  MacroGrid g{1, 8.0, 256};
  KernelSpec J;
  J.sigma = 0.4;
  J.terms.push_back({indicator1d(1.0, 1.0), micro_const(1.0)});
  FiringRate f;
  f.g = micro_const(1.0);
  f.kind = FiringKind::linear;
  const double eps = 0.5;
  const double a = kernel_mass(J, eps, g);
  const double c = 0.7;
  MacroField u{g, std::vector<double>(g.size(), c)};
  MacroField out = hetero_rhs(J, f, eps, u);
  for (double v : out.values) EXPECT_NEAR(v, (a - 1.0) * c, 1e-12);
}

TEST(HeteroRhs, MatchesDirectAssembly) {
  MacroGrid g{1, 8.0, 64};
  KernelSpec J = indicator_cos_kernel();
  FiringRate f;
  f.g = micro_one_plus_cos(0.5);
  f.beta = 2.0;
  f.theta = 0.5;
  const double eps = 0.25;
  std::mt19937_64 rng(1414);
  for (int trial = 0; trial < 10; ++trial) {
    MacroField u{g, testutil::random_values(rng, g.size(), -1.5, 1.5)};
    MacroField fast = hetero_rhs(J, f, eps, u);
    MacroField slow = conv_direct(kernel_trace(J, eps, g), apply_firing(f, eps, u));
    for (std::size_t i = 0; i < g.size(); ++i) slow.values[i] -= u.values[i];
    EXPECT_LE(max_abs_diff(fast.values, slow.values), 1e-11);
  }
}

TEST(HeteroRhs, LipschitzInStateWithConstantKOnePlusOne) {
  MacroGrid g{1, 8.0, 128};
  const std::vector<double> schedule{0.25};
  KernelSpec J = indicator_cos_kernel();
  J.sigma = normalized_sigma(J, g, schedule, 0.9);
  FiringRate f;
  f.g = micro_one_plus_cos(0.5);
  f.beta = 2.0;
  f.theta = 0.5;
  const double k1 = f.k1();
  std::mt19937_64 rng(1515);
  for (int trial = 0; trial < 50; ++trial) {
    MacroField u{g, testutil::random_values(rng, g.size(), -2.0, 2.0)};
    MacroField v{g, testutil::random_values(rng, g.size(), -2.0, 2.0)};
    MacroField ru = hetero_rhs(J, f, 0.25, u);
    MacroField rv = hetero_rhs(J, f, 0.25, v);
    MacroField du = MacroField::zeros(g);
    MacroField dr = MacroField::zeros(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      du.values[i] = u.values[i] - v.values[i];
      dr.values[i] = ru.values[i] - rv.values[i];
    }
    EXPECT_LE(l2_norm(dr), (k1 + 1.0) * l2_norm(du) + 1e-10);
  }
}

TEST(HomogRhs, YDegenerateCollapseMatchesHetero) {
  MacroGrid g{1, 8.0, 128};
  CellGrid c{1, 16};
  KernelSpec J;
  J.sigma = 0.4;
  J.terms.push_back({indicator1d(1.0, 1.0), micro_const(1.0)});
  FiringRate f = plain_sigmoid(2.0, 0.5);
  std::mt19937_64 rng(1616);
  MacroField u{g, testutil::random_values(rng, g.size(), -1.0, 1.0)};
  TwoScaleField u0 = lift_y_constant(u, c);
  TwoScaleField homog = homog_rhs(J, f, u0);
  MacroField hetero = hetero_rhs(J, f, 0.25, u);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j)
      worst = std::max(worst, std::fabs(homog.values[i * c.size() + j] - hetero.values[i]));
  EXPECT_LE(worst, 1e-12);
}

TEST(HomogRhs, MatchesDirectAssembly) {
  MacroGrid g{1, 8.0, 32};
  CellGrid c{1, 16};
  KernelSpec J = indicator_cos_kernel();
  FiringRate f;
  f.g = micro_one_plus_cos(0.5);
  f.beta = 2.0;
  f.theta = 0.5;
  std::mt19937_64 rng(1717);
  for (int trial = 0; trial < 5; ++trial) {
    TwoScaleField u0{g, c, testutil::random_values(rng, g.size() * c.size(), -1.5, 1.5)};
    TwoScaleField fast = homog_rhs(J, f, u0);
    TwoScaleField slow =
        double_conv_direct(kernel_two_scale(J, g, c), apply_firing_two_scale(f, u0));
    for (std::size_t i = 0; i < slow.values.size(); ++i) slow.values[i] -= u0.values[i];
    EXPECT_LE(max_abs_diff(fast.values, slow.values), 1e-10);
  }
}

TEST(HomogRhs, ZeroStateIsKernelConvolvedRestFiring) {
  MacroGrid g{1, 8.0, 32};
  CellGrid c{1, 16};
  KernelSpec J = indicator_cos_kernel();
  FiringRate f;
  f.g = micro_one_plus_cos(0.5);
  f.beta = 2.0;
  f.theta = 0.5;
  TwoScaleField zero = TwoScaleField::zeros(g, c);
  TwoScaleField out = homog_rhs(J, f, zero);
  TwoScaleField oracle =
      double_conv_direct(kernel_two_scale(J, g, c), apply_firing_two_scale(f, zero));
  EXPECT_LE(max_abs_diff(out.values, oracle.values), 1e-10);
}

TEST(Problems, CachedRhsMatchesFreeFunctions) {
  MacroGrid g{1, 8.0, 128};
  CellGrid c{1, 16};
  KernelSpec J = indicator_cos_kernel();
  FiringRate f;
  f.g = micro_one_plus_cos(0.5);
  f.beta = 2.0;
  f.theta = 0.5;
  const double eps = 0.25;
  std::mt19937_64 rng(1818);

  HeteroProblem hp(J, f, eps, g);
  EXPECT_DOUBLE_EQ(hp.k1(), f.k1());
  EXPECT_DOUBLE_EQ(hp.kernel_mass(), kernel_mass(J, eps, g));
  MacroField u{g, testutil::random_values(rng, g.size(), -1.0, 1.0)};
  std::vector<double> out(g.size());
  hp.rhs(u.values, out);
  MacroField ref = hetero_rhs(J, f, eps, u);
  EXPECT_EQ(max_abs_diff(out, ref.values), 0.0);

  HomogProblem qp(J, f, g, c);
  TwoScaleField u0{g, c, testutil::random_values(rng, g.size() * c.size(), -1.0, 1.0)};
  std::vector<double> out0(u0.values.size());
  qp.rhs(u0.values, out0);
  TwoScaleField ref0 = homog_rhs(J, f, u0);
  EXPECT_EQ(max_abs_diff(out0, ref0.values), 0.0);
}

}  // namespace
}  // namespace nfh
