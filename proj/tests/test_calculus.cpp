// Composition and adjoint expansions, asymptotic sums, biellipticity and parametrices.
#include <gtest/gtest.h>

#include "bising/experiments.hpp"

using namespace bising;

namespace {

double rel_max(const BisingularSymbol& a, const BisingularSymbol& b) {
  return max_difference(a, b) / std::max(max_difference(a, zero_symbol(a.space)), 1e-300);
}

double size_of(const BisingularSymbol& s) { return max_difference(s, zero_symbol(s.space)); }

}  // namespace

TEST(Compose, XIndependentCollapses) {
  SpacePtr sp = make_symbol_space(GroupKind::torus, 8, 0, GroupKind::su2, 2, 0);
  BisingularSymbol a = multiplier_symbol(sp, 1, 1), b = make_zoo_symbol(sp, "su2-casimir-mix");
  ExpansionReport rep = compose_expansion(a, b, 3);
  EXPECT_LE(rel_max(rep.terms[0], pointwise_product(a, b)), 1e-12);
  for (size_t j = 1; j < rep.terms.size(); ++j) EXPECT_LE(size_of(rep.terms[j]) / size_of(rep.terms[0]), 1e-12);
  EXPECT_LE(rep.oracle_residual, 1e-12);
}

TEST(Compose, DerivativeTimesFunctionTerminates) {
  SpacePtr sp = make_symbol_space(GroupKind::torus, 12, 2, GroupKind::torus, 4, 0);
  BisingularSymbol a = zero_symbol(sp, 1, 0);
  a.slots[0] = kI * multiplier_coef(*sp, [](const IrrepInfo& r) { return double(r.label); }, [](const IrrepInfo&) { return 1.0; });
  auto g = [](const GroupElement& x, const GroupElement&) { return cplx(std::cos(x.theta) + 0.5 * std::sin(2 * x.theta)); };
  auto dg = [](const GroupElement& x, const GroupElement&) { return cplx(-std::sin(x.theta) + std::cos(2 * x.theta)); };
  BisingularSymbol b = scale_by_field(identity_symbol(sp), sample_field(*sp, g));
  BisingularSymbol expect = add(scale_by_field(a, sample_field(*sp, g)), scale_by_field(identity_symbol(sp), sample_field(*sp, dg)));
  EXPECT_LE(rel_max(expect, exact_composition_symbol(a, b)), 1e-12);
  ExpansionReport rep = compose_expansion(a, b, 2);
  EXPECT_LE(rel_max(expect, add(rep.terms[0], rep.terms[1])), 1e-12);
}

TEST(Compose, ExactOracleIdentities) {
  SpacePtr sp = make_symbol_space(GroupKind::torus, 6, 1, GroupKind::su2, 2, 1);
  BisingularSymbol b = make_zoo_symbol(sp, "coeff-multiplier:1,0");
  EXPECT_LE(rel_max(b, exact_composition_symbol(identity_symbol(sp), b)), 1e-12);
  BisingularSymbol m1 = multiplier_symbol(sp, 1, -1), m2 = multiplier_symbol(sp, 2, 1);
  EXPECT_LE(rel_max(pointwise_product(m1, m2), exact_composition_symbol(m1, m2)), 1e-12);
}

TEST(Compose, RemainderIsDefinitional) {
  SpacePtr sp = make_symbol_space(GroupKind::torus, 10, 1, GroupKind::torus, 10, 1);
  BisingularSymbol a = multiplier_symbol(sp, 1, 1), b = make_zoo_symbol(sp, "coeff-multiplier:1,0");
  ExpansionReport rep = compose_expansion(a, b, 2);
  EXPECT_LE(rep.oracle_residual, 1e-12);
  ASSERT_EQ(rep.remainders.size(), 2u);
  ASSERT_EQ(rep.slopes.size(), 2u);
  // one more term shrinks the remainder
  EXPECT_LT(size_of(rep.remainders[1]), size_of(rep.remainders[0]));
}

TEST(Adjoint, HermitianMultiplierIsFixed) {
  SpacePtr sp = make_symbol_space(GroupKind::torus, 6, 0, GroupKind::su2, 3, 0);
  BisingularSymbol s = multiplier_symbol(sp, 1, 2);
  ExpansionReport rep = adjoint_expansion(s, 3);
  EXPECT_LE(rel_max(s, rep.terms[0]), 1e-12);
  for (size_t j = 1; j < rep.terms.size(); ++j) EXPECT_LE(size_of(rep.terms[j]) / size_of(s), 1e-12);
  EXPECT_LE(rel_max(s, exact_adjoint_symbol(s)), 1e-12);
}

TEST(Adjoint, LeadingTermIsPointwiseAdjoint) {
  SpacePtr sp = make_symbol_space(GroupKind::torus, 8, 1, GroupKind::su2, 3, 1);
  for (auto* id : {"coeff-multiplier:1,1", "su2-casimir-mix"}) {
    BisingularSymbol s = make_zoo_symbol(sp, id);
    if (s.x_independent()) s = scale(s, cplx(0.6, 0.8));
    ExpansionReport rep = adjoint_expansion(s, 1);
    EXPECT_LE(rel_max(pointwise_adjoint(s), rep.primary[0]), 1e-12) << id;
  }
}

TEST(Adjoint, ExactOracleMatchesHilbertAdjoint) {
  SpacePtr sp = make_symbol_space(GroupKind::torus, 6, 1, GroupKind::su2, 2, 1);
  BisingularSymbol s = make_zoo_symbol(sp, "coeff-multiplier:1,1");
  Operator A = quantize(s);
  Operator As = hilbert_adjoint(A, plancherel_weights(*sp));
  // <A f, g> = <f, A* g> with the Plancherel inner product
  VecR w = plancherel_weights(*sp);
  XorShift rng(21);
  VecC f(A.n), g(A.n);
  for (auto& z : f) z = rng.complex_normal();
  for (auto& z : g) z = rng.complex_normal();
  VecC Af = A.dense() * f, Asg = As.dense() * g;
  cplx lhs = 0, rhs = 0;
  for (int i = 0; i < A.n; ++i) {
    lhs += w(i) * Af(i) * std::conj(g(i));
    rhs += w(i) * f(i) * std::conj(Asg(i));
  }
  EXPECT_LE(std::abs(lhs - rhs) / std::abs(lhs), 1e-12);
}

TEST(AsymptoticSum, SingleTermAndSchedule) {
  SpacePtr sp = make_symbol_space(GroupKind::torus, 16, 0, GroupKind::torus, 16, 0);
  BisingularSymbol s0 = multiplier_symbol(sp, 0, 0);
  AsymptoticSum one = asymptotic_sum({s0});
  EXPECT_EQ(max_difference(one.symbol, s0), 0.0);
  std::vector<BisingularSymbol> terms;
  for (int j = 0; j <= 3; ++j) terms.push_back(multiplier_symbol(sp, -j, -j));
  AsymptoticSum sum = asymptotic_sum(terms);
  EXPECT_TRUE(sum.schedule.holds());
  ASSERT_EQ(sum.schedule.t.size(), 4u);
  for (size_t j = 1; j < 4; ++j) EXPECT_LT(sum.schedule.t[j], std::ldexp(1.0, -static_cast<int>(j)));
  EXPECT_THROW(asymptotic_sum({}), ConfigError);
}

TEST(AsymptoticSum, TailsStableUnderCutoffDoubling) {
  double tail[2][3];
  for (int k = 0; k < 2; ++k) {
    int c = 16 << k;
    SpacePtr sp = make_symbol_space(GroupKind::torus, c, 0, GroupKind::torus, c, 0);
    std::vector<BisingularSymbol> terms;
    for (int j = 0; j <= 3; ++j) terms.push_back(multiplier_symbol(sp, -j, -j));
    AsymptoticSum sum = asymptotic_sum(terms);
    ASSERT_EQ(sum.tail.size(), 3u);
    for (int m = 0; m < 3; ++m) tail[k][m] = sum.tail[m];
  }
  for (int m = 0; m < 3; ++m) EXPECT_LE(tail[1][m], 2.0 * tail[0][m] + 1e-12) << m;
}

TEST(Biellipticity, Examples) {
  SpacePtr sp = make_symbol_space(GroupKind::torus, 8, 1, GroupKind::torus, 8, 1);
  BiellipticityReport b = biellipticity_check(multiplier_symbol(sp, 2, 2));
  EXPECT_TRUE(b.pass());
  EXPECT_NEAR(b.inverse_bound, 1.0, 1e-12);

  // multiplier(1,1) minus a rank-one piece that kills the key (1, -1)
  BisingularSymbol m = multiplier_symbol(sp, 1, 1);
  const auto& a1 = *sp->f[0].dual;
  const auto& a2 = *sp->f[1].dual;
  m.slots[0](a1.offset[a1.index_of(1)], a2.offset[a2.index_of(-1)]) = 0.0;
  EXPECT_FALSE(biellipticity_check(m).clause1);
  BiellipticThresholds th;
  th.exceptional = {{1, -1}};
  EXPECT_TRUE(biellipticity_check(m, th).clause1);

  BisingularSymbol z = scale_by_field(multiplier_symbol(sp, 1, 1), sample_field(*sp, [](auto& x, auto&) { return cplx(std::sin(x.theta)); }));
  BiellipticityReport f = biellipticity_check(z);
  EXPECT_FALSE(f.clause1);
  EXPECT_FALSE(f.failure.empty());
}

TEST(Parametrix, BilaplacianIsExactInverse) {
  SpacePtr sp = make_symbol_space(GroupKind::torus, 8, 0, GroupKind::su2, 4, 0);
  BisingularSymbol a = multiplier_symbol(sp, 2, 2);
  ParametrixResult p = parametrix(a, 1);
  EXPECT_LE(rel_max(multiplier_symbol(sp, -2, -2), p.right), 1e-12);
  EXPECT_LE(size_of(p.right_report.remainders[0]), 1e-12);
  EXPECT_LE(size_of(p.left_report.remainders[0]), 1e-12);
}

TEST(Parametrix, RefusesNonBielliptic) {
  SpacePtr sp = make_symbol_space(GroupKind::torus, 6, 1, GroupKind::torus, 6, 1);
  BisingularSymbol z = scale_by_field(multiplier_symbol(sp, 1, 1), sample_field(*sp, [](auto& x, auto&) { return cplx(std::sin(x.theta)); }));
  EXPECT_THROW(parametrix(z, 1), ConfigError);
  EXPECT_THROW(parametrix(multiplier_symbol(sp, 1, 1), 0), ConfigError);
}

TEST(Parametrix, ResidualDecreasesWithN) {
  SpacePtr sp = make_symbol_space(GroupKind::torus, 12, 1, GroupKind::torus, 12, 1);
  BisingularSymbol a = make_zoo_symbol(sp, "coeff-multiplier:2,2");
  ParametrixResult p = parametrix(a, 2);
  ASSERT_EQ(p.right_report.remainders.size(), 2u);
  // the left residual shrinks on the fit region; the right one only gains at high frequency
  EXPECT_LT(detail::fit_region_sup(p.left_report.remainders[1], 0), 0.5 * detail::fit_region_sup(p.left_report.remainders[0], 0));
  EXPECT_TRUE(std::isfinite(p.two_sided_gap));
}
