// Kernel regimes, pointwise bounds, functional calculus bounds and vanishing orders.
#include <gtest/gtest.h>

#include "bising/experiments.hpp"

using namespace bising;

TEST(Regime, DispatchIsTotalOverOrderGrid) {
  // T x T: n_i = 1, s_i = 1 + m_i
  for (int m1 = -3; m1 <= 2; ++m1)
    for (int m2 = -3; m2 <= 2; ++m2) {
      RegimeDispatch d = regime_dispatch(1 + m1, 1 + m2);
      EXPECT_GE(d.bullet, 1);
      EXPECT_LE(d.bullet, 6);
      const int s[2] = {1 + m1, 1 + m2};
      for (int i = 0; i < 2; ++i) {
        KernelRegime want = s[i] > 0 ? KernelRegime::power : s[i] == 0 ? KernelRegime::log : KernelRegime::bounded;
        EXPECT_EQ(d.r[i], want);
        if (want == KernelRegime::power) {
          EXPECT_DOUBLE_EQ(d.expected[i], -s[i]);
        }
      }
      // the bullet does not depend on the factor order
      EXPECT_EQ(d.bullet, regime_dispatch(1 + m2, 1 + m1).bullet);
    }
  EXPECT_EQ(regime_dispatch(2, 2).bullet, 1);
  EXPECT_EQ(regime_dispatch(0, 0).bullet, 2);
  EXPECT_EQ(regime_dispatch(-2, -1).bullet, 3);
  EXPECT_EQ(regime_dispatch(1, 0).bullet, 4);
  EXPECT_EQ(regime_dispatch(-1, 0).bullet, 5);
  EXPECT_EQ(regime_dispatch(1, -1).bullet, 6);
}

TEST(Regime, ProbeValueIsHomogeneous) {
  IrrepInfo r = make_irrep(GroupKind::torus, 8), r2 = make_irrep(GroupKind::torus, 16);
  EXPECT_NEAR(probe_value(r2, GroupKind::torus, 1.5) / probe_value(r, GroupKind::torus, 1.5), std::pow(2.0, 1.5), 1e-12);
}

TEST(PointwiseBound, RefusalZeroAndFinite) {
  SpacePtr sp = make_symbol_space(GroupKind::torus, 16, 0, GroupKind::torus, 16, 0);
  // hypothesis |gamma_i| + m_i + n_i < |alpha_i| fails: 0 + 2 + 1 >= 2
  EXPECT_THROW(pointwise_bound_check(multiplier_symbol(sp, 2, 2), {2}, {2}, {0}, {0}, {0}, {0}), ConfigError);
  PointwiseBound z = pointwise_bound_check(zero_symbol(sp, -2, -2), {2}, {2}, {0}, {0}, {0}, {0});
  EXPECT_EQ(z.value, 0.0);
  PointwiseBound p = pointwise_bound_check(multiplier_symbol(sp, -2, -2), {2}, {2}, {0}, {0}, {0}, {0});
  EXPECT_GT(p.value, 0.0);
  EXPECT_TRUE(std::isfinite(p.ratio));
  EXPECT_LT(p.ratio, 1.0);
  PointwiseBound b = pointwise_bound_check(multiplier_symbol(sp, 2, 2), {4}, {4}, {0}, {0}, {0}, {0});
  EXPECT_TRUE(std::isfinite(b.ratio));
}

TEST(Decay, DyadicPiecesReconstructKernel) {
  SpacePtr sp = make_symbol_space(GroupKind::torus, 16, 0, GroupKind::torus, 16, 0);
  EXPECT_LE(dyadic_reconstruction_residual(probe_symbol(sp, 1, 1), 0), 1e-10);
}

TEST(Decay, PowerRegimeSlopes) {
  SpacePtr sp = make_symbol_space(GroupKind::torus, 64, 0, GroupKind::torus, 64, 0);
  DecayReport r = decay_report(probe_symbol(sp, 0, 1), 0);
  EXPECT_EQ(r.regime.r[0], KernelRegime::power);
  EXPECT_NEAR(r.fitted[0], -1.0, 0.15);
  EXPECT_NEAR(r.fitted[1], -2.0, 0.3);
}

TEST(Functional, DomainChecks) {
  SpacePtr sp = make_symbol_space(GroupKind::torus, 8, 0, GroupKind::torus, 8, 0);
  EXPECT_THROW(functional_bound_check(sp, FunctionalProfile::exponential, FunctionalProfile::exponential, {0}, {0}, -2, -2, {1.0}), ConfigError);
  EXPECT_THROW(functional_bound_check(sp, FunctionalProfile::exponential, FunctionalProfile::exponential, {0}, {0}, -2, -2, {0.5}, 1.0), ConfigError);
  EXPECT_THROW(cutoff_scaling_check(multiplier_symbol(sp, 1, 1), 1, 0, {1, 1, 0, 0}, {0.5}), ConfigError);
  EXPECT_THROW(cutoff_scaling_check(zero_symbol(sp, 1, 1), -1, -1, {1, 1, 0, 0}, {0.5}), ConfigError);
}

TEST(Functional, CutoffScalingExponent) {
  SpacePtr sp = make_symbol_space(GroupKind::torus, 32, 0, GroupKind::torus, 32, 0);
  std::vector<double> ts;
  for (int e = 1; e <= 6; ++e) ts.push_back(std::ldexp(1.0, -e));
  CutoffScalingReport r = cutoff_scaling_check(multiplier_symbol(sp, 1, 1), -1, -1, {1, 1, 0, 0}, ts);
  EXPECT_DOUBLE_EQ(r.nominal[0], -1.0);
  EXPECT_NEAR(r.fitted[0], r.nominal[0], 0.3);
  EXPECT_NEAR(r.fitted[1], r.nominal[1], 0.3);
}

TEST(Vanishing, Examples) {
  AtlasPtr t = make_atlas_ptr(build_atlas(GroupKind::torus, 16));
  auto z = [](const GroupElement& g) { return std::exp(cplx(0, g.theta)) - 1.0; };
  VanishingReport a = vanishing_order_check(t, t, [&](auto& x, auto& y) { return z(x) * z(y); }, 1, 1);
  EXPECT_TRUE(a.derivatives_vanish && a.decay_holds);
  EXPECT_NEAR(a.slope[0], 1.0, 0.3);
  EXPECT_NEAR(a.slope[1], 1.0, 0.3);
  VanishingReport b = vanishing_order_check(t, t, [&](auto& x, auto&) { return z(x) * z(x); }, 2, 0);
  EXPECT_TRUE(b.derivatives_vanish && b.decay_holds);
  EXPECT_NEAR(b.slope[0], 2.0, 0.3);
  VanishingReport c = vanishing_order_check(t, t, [](auto&, auto&) { return cplx(1.0); }, 1, 1);
  EXPECT_FALSE(c.derivatives_vanish);
  EXPECT_TRUE(c.equivalent());
}

TEST(Vanishing, Su2Factor) {
  AtlasPtr t = make_atlas_ptr(build_atlas(GroupKind::torus, 8));
  AtlasPtr s = make_atlas_ptr(build_atlas(GroupKind::su2, 4));
  VanishingReport r = vanishing_order_check(t, s, [](auto&, auto& y) { return y.u(0, 0) - 1.0; }, 0, 1);
  EXPECT_TRUE(r.equivalent());
  EXPECT_TRUE(r.derivatives_vanish);
}
