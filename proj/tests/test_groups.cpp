// Group atlases, Fourier analysis, Sobolev norms and Bessel kernels.
#include <gtest/gtest.h>

#include "bising/harmonic.hpp"

using namespace bising;

namespace {

Eigen::Matrix2cd spin_half(double a, double b, double c) {
  // Rz(a) Ry(b) Rz(c) written out entrywise
  const cplx i(0, 1);
  Eigen::Matrix2cd m;
  m(0, 0) = std::exp(-i * (a + c) / 2.0) * std::cos(b / 2);
  m(0, 1) = -std::exp(-i * (a - c) / 2.0) * std::sin(b / 2);
  m(1, 0) = std::exp(i * (a - c) / 2.0) * std::sin(b / 2);
  m(1, 1) = std::exp(i * (a + c) / 2.0) * std::cos(b / 2);
  return m;
}

}  // namespace

TEST(Irreps, TorusLabelsDimsEigs) {
  auto r = enumerate_irreps(GroupKind::torus, 2);
  ASSERT_EQ(r.size(), 5u);
  std::vector<int> labels;
  for (auto& x : r) {
    labels.push_back(x.label);
    EXPECT_EQ(x.dim, 1);
    EXPECT_DOUBLE_EQ(x.eig, double(x.label) * x.label);
  }
  EXPECT_EQ(labels, (std::vector<int>{0, -1, 1, -2, 2}));
}

TEST(Irreps, Su2LabelsDimsEigs) {
  auto r = enumerate_irreps(GroupKind::su2, 2);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[1].dim, 2);
  EXPECT_DOUBLE_EQ(r[1].eig, 0.75);
  EXPECT_EQ(r[2].dim, 3);
  EXPECT_DOUBLE_EQ(r[2].eig, 2.0);
  EXPECT_EQ(label_string(GroupKind::su2, 1), "1/2");
}

TEST(Irreps, TrivialOnly) {
  auto r = enumerate_irreps(GroupKind::torus, 0);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_DOUBLE_EQ(r[0].weight, 1.0);
  EXPECT_THROW(enumerate_irreps(GroupKind::torus, -1), ConfigError);
}

TEST(Atlas, TorusUniformGrid) {
  GroupAtlas a = build_atlas(GroupKind::torus, 4, 32);
  ASSERT_EQ(a.size(), 32);
  for (double w : a.weights) EXPECT_NEAR(w, 1.0 / 32, 1e-15);
  int r = a.index_of(3);
  for (int x = 0; x < a.size(); ++x) EXPECT_NEAR(std::abs(a.rep(r, x, 0, 0) - std::exp(cplx(0, 3 * a.params[x][0]))), 0, 1e-14);
}

TEST(Atlas, RefusesCoarseGrid) {
  try {
    build_atlas(GroupKind::torus, 4, 10);
    FAIL();
  } catch (const ResolutionError& e) {
    EXPECT_EQ(e.required_minimum, 17);
  }
  EXPECT_THROW(build_atlas(GroupKind::su2, 4, 3), ResolutionError);
}

TEST(Atlas, InvariantsBothGroups) {
  for (auto [k, c] : {std::pair{GroupKind::torus, 8}, std::pair{GroupKind::su2, 4}}) {
    GroupAtlas a = build_atlas(k, c);
    double total = 0;
    for (double w : a.weights) total += w;
    EXPECT_NEAR(total, 1.0, 1e-14);
    EXPECT_LE(schur_residual(a), 1e-10);
    EXPECT_LE(unitarity_residual(a), 1e-12);
    for (int r = 0; r < a.irrep_count(); ++r) {
      int d = a.irreps[r].dim;
      EXPECT_EQ(a.repmat(r, a.identity_node), MatC::Identity(d, d));
    }
  }
}

TEST(Atlas, SpinHalfMatchesClosedForm) {
  GroupAtlas a = build_atlas(GroupKind::su2, 2);
  int r = a.index_of(1);
  for (int x = 0; x < a.size(); x += 7) {
    auto& p = a.params[x];
    EXPECT_LE((a.repmat(r, x) - MatC(spin_half(p[0], p[1], p[2]))).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(Atlas, SpinHalfSchurValue) {
  GroupAtlas a = build_atlas(GroupKind::su2, 1, 6);
  int r = a.index_of(1);
  double s = 0;
  for (int x = 0; x < a.size(); ++x) s += a.weights[x] * std::norm(a.rep(r, x, 0, 0));
  EXPECT_NEAR(s, 0.5, 1e-13);
}

TEST(Atlas, Homomorphism) {
  XorShift rng(7);
  for (int l2 = 0; l2 <= 4; ++l2)
    for (int n = 0; n < 5; ++n) {
      GroupElement x = su2_from_euler(rng.uniform(0, 2 * kPi), rng.uniform(0, kPi), rng.uniform(0, 2 * kPi));
      GroupElement y = su2_from_euler(rng.uniform(0, 2 * kPi), rng.uniform(0, kPi), rng.uniform(0, 2 * kPi));
      MatC lhs = rep_matrix(GroupKind::su2, l2, multiply(x, y));
      MatC rhs = rep_matrix(GroupKind::su2, l2, x) * rep_matrix(GroupKind::su2, l2, y);
      EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Atlas, GeneratorsCommuteAndCasimir) {
  for (int l2 = 0; l2 <= 5; ++l2) {
    MatC x[3];
    for (int k = 0; k < 3; ++k) x[k] = rep_generator(GroupKind::su2, l2, k);
    // [X_1, X_2] = X_3 for X_k = -i sigma_k / 2
    EXPECT_LE((x[0] * x[1] - x[1] * x[0] - x[2]).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((x[1] * x[2] - x[2] * x[1] - x[0]).cwiseAbs().maxCoeff(), 1e-10);
    MatC cas = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    double e = make_irrep(GroupKind::su2, l2).eig;
    EXPECT_LE((cas + e * MatC::Identity(l2 + 1, l2 + 1)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Atlas, FiniteDifferenceFirstOrder) {
  GroupElement x = su2_from_euler(0.3, 1.1, -0.7);
  MatC dx = rep_matrix(GroupKind::su2, 3, x) * rep_generator(GroupKind::su2, 3, 1);
  double prev = 0;
  for (int e = 4; e <= 8; e += 2) {
    double t = std::ldexp(1.0, -e);
    MatC fd = (rep_matrix(GroupKind::su2, 3, multiply(x, exp_direction(GroupKind::su2, 1, t))) - rep_matrix(GroupKind::su2, 3, x)) / t;
    double err = (fd - dx).cwiseAbs().maxCoeff();
    if (prev > 0) {
      EXPECT_NEAR(prev / err, 4.0, 0.2);  // first order: error / 4 per two halvings
    }
    prev = err;
  }
}

TEST(Geodesic, Examples) {
  EXPECT_NEAR(geodesic_distance(torus_element(kPi)), kPi, 1e-15);
  EXPECT_NEAR(geodesic_distance(torus_element(2 * kPi - 0.25)), 0.25, 1e-14);
  GroupElement m = identity_element(GroupKind::su2);
  m.u = -m.u;
  EXPECT_NEAR(geodesic_distance(m), 2 * kPi, 1e-12);
  EXPECT_NEAR(geodesic_distance(identity_element(GroupKind::su2)), 0.0, 1e-15);
}

TEST(DifferenceFamily, TorusValues) {
  GroupAtlas a = build_atlas(GroupKind::torus, 2, 10);
  auto f = difference_family(a, 1);
  ASSERT_EQ(f.funcs.size(), 1u);
  EXPECT_EQ(f.funcs[0][a.identity_node], cplx(0.0));
  EXPECT_NEAR(std::abs(difference_value(GroupKind::torus, f.labels[0], torus_element(kPi)) - cplx(-2.0)), 0, 1e-15);
}

TEST(DifferenceFamily, Su2JointZeroOnlyAtIdentity) {
  GroupAtlas a = build_atlas(GroupKind::su2, 8);
  auto f = difference_family(a, 2);
  ASSERT_EQ(f.funcs.size(), 4u);
  EXPECT_GT(admissibility_margin(a, f), 1e-3);
  for (auto& q : f.funcs) EXPECT_EQ(q[a.identity_node], cplx(0.0));
}

TEST(DifferenceFamily, TorusFactorOfProduct) {
  // q depends on the torus factor only: the zero set on T x SU(2) is {0} x SU(2)
  GroupAtlas t = build_atlas(GroupKind::torus, 3);
  auto f = difference_family(t, 1);
  for (int x = 0; x < t.size(); ++x) {
    bool zero = std::abs(f.funcs[0][x]) == 0.0;
    EXPECT_EQ(zero, x == t.identity_node);
  }
}

class FourierPairs : public ::testing::TestWithParam<std::tuple<GroupKind, int, GroupKind, int>> {};

TEST_P(FourierPairs, RoundTripAndParseval) {
  auto [k1, c1, k2, c2] = GetParam();
  AtlasPtr a1 = make_atlas_ptr(build_atlas(k1, c1)), a2 = make_atlas_ptr(build_atlas(k2, c2));
  XorShift rng(11);
  for (int n = 0; n < 5; ++n) {
    FieldOnG f = random_field(a1, a2, rng);
    FieldOnG g = fourier_inverse(fourier_forward(f));
    EXPECT_LE((g.values - f.values).norm() / f.values.norm(), 1e-10);
    EXPECT_LE(parseval_residual(f), 1e-10);
  }
}

INSTANTIATE_TEST_SUITE_P(Groups, FourierPairs,
                         ::testing::Values(std::make_tuple(GroupKind::torus, 8, GroupKind::torus, 8),
                                           std::make_tuple(GroupKind::torus, 6, GroupKind::su2, 4),
                                           std::make_tuple(GroupKind::su2, 3, GroupKind::su2, 2)));

TEST(Fourier, ZeroFieldParseval) {
  AtlasPtr a = make_atlas_ptr(build_atlas(GroupKind::torus, 4));
  FieldOnG f(a, a);
  EXPECT_EQ(parseval_residual(f), 0.0);
}

TEST(Fourier, SingleCharacter) {
  // f = e^{2 i theta1}: the only nonzero coefficient sits at (2, 0)
  AtlasPtr a = make_atlas_ptr(build_atlas(GroupKind::torus, 4));
  FieldOnG f(a, a);
  for (int i = 0; i < a->size(); ++i)
    for (int j = 0; j < a->size(); ++j) f.values(i, j) = std::exp(cplx(0, 2 * a->params[i][0]));
  Spectrum F = fourier_forward(f);
  EXPECT_NEAR(std::abs(F.coef(a->offset[a->index_of(2)], a->offset[a->index_of(0)]) - 1.0), 0, 1e-13);
  EXPECT_NEAR(F.coef.cwiseAbs().sum(), 1.0, 1e-12);
}

TEST(Sobolev, TrivialModeHasNormOne) {
  AtlasPtr a = make_atlas_ptr(build_atlas(GroupKind::su2, 2));
  FieldOnG f(a, a);
  f.values.setOnes();
  EXPECT_NEAR(sobolev_norm(f, 3, 1), 1.0, 1e-12);
}

TEST(Sobolev, WeightsScaleAsBrackets) {
  // e^{i k theta} has H^{s1,s2} norm <k>^{s1}
  AtlasPtr a = make_atlas_ptr(build_atlas(GroupKind::torus, 5));
  FieldOnG f(a, a);
  for (int i = 0; i < a->size(); ++i) f.values.row(i).setConstant(std::exp(cplx(0, 3 * a->params[i][0])));
  EXPECT_NEAR(sobolev_norm(f, 2, 7), 10.0, 1e-11);
}

TEST(Bessel, SpectralMatchesGammaPath) {
  AtlasPtr a1 = make_atlas_ptr(build_atlas(GroupKind::torus, 8)), a2 = make_atlas_ptr(build_atlas(GroupKind::su2, 4));
  FieldOnG B = bessel_kernel(a1, a2, 2, 2);
  double scale_v = B.values.cwiseAbs().maxCoeff();
  for (int i = 0; i < a1->size(); i += 5)
    for (int j = 0; j < a2->size(); j += 37)
      EXPECT_LE(std::abs(bessel_gamma_value(*a1, *a2, 2, 2, a1->nodes[i], a2->nodes[j]) - B.values(i, j)) / scale_v, 1e-6);
  double l2 = bessel_l2_sq_spectral(*a1, *a2, 2, 2);
  EXPECT_NEAR(B.l2_norm_sq() / l2, 1.0, 1e-10);
  EXPECT_THROW(bessel_kernel(a1, a2, 0, 1), ConfigError);
}

TEST(Bessel, EmbeddingBoundByKernelNorm) {
  // sup |f| <= ||B_{s}||_{L2} ||f||_{H^s} by Cauchy-Schwarz on the spectral side
  AtlasPtr a1 = make_atlas_ptr(build_atlas(GroupKind::torus, 8)), a2 = make_atlas_ptr(build_atlas(GroupKind::torus, 8));
  XorShift rng(3);
  double c = sobolev_embedding_constant(a1, a2, 1.5, 1.5, rng, 20);
  EXPECT_GT(c, 0.0);
  EXPECT_LE(c, std::sqrt(bessel_l2_sq_spectral(*a1, *a2, 1.5, 1.5)) * (1 + 1e-12));
}
