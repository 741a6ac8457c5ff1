/**
 * @file symbol.hpp
 * @brief Bisingular symbols as data: difference and derivative operators, seminorms,
 * cutoff localization and Taylor machinery.
 */
#pragma once

#include "harmonic.hpp"

#include <functional>
#include <map>
#include <mutex>

namespace bising {

/** @brief Multi-index over a factor's difference family or Lie basis. */
using MultiIndex = std::vector<int>;

inline int order_of(const MultiIndex& a) {
  int s = 0;
  for (int v : a) s += v;
  return s;
}

inline double multi_factorial(const MultiIndex& a) {
  double r = 1;
  for (int v : a) r *= factorial(v);
  return r;
}

/** @brief All multi-indices in N^n with |a| <= max_order, by degree then lexicographically descending. */
inline std::vector<MultiIndex> multi_indices_upto(int n, int max_order) {
  std::vector<MultiIndex> out;
  for (int deg = 0; deg <= max_order; ++deg) {
    MultiIndex cur(n, 0);
    std::function<void(int, int)> rec = [&](int pos, int left) {
      if (pos == n - 1) {
        cur[pos] = left;
        out.push_back(cur);
        return;
      }
      for (int v = left; v >= 0; --v) {
        cur[pos] = v;
        rec(pos + 1, left - v);
      }
    };
    if (n == 0) continue;
    rec(0, deg);
  }
  return out;
}

/** @brief Label magnitude used for headroom: |k| on T1, l on SU(2). */
inline double label_radius(GroupKind kind, int label) { return kind == GroupKind::torus ? std::abs(label) : 0.5 * label; }

/**
 * @brief Spectral derivative along basis direction k on an atlas grid:
 * node values -> node values, exact for fields in the atlas band.
 */
inline MatC grid_derivative(const GroupAtlas& a, int k) {
  MatC g = MatC::Zero(a.coeff_dim, a.coeff_dim);
  for (int r = 0; r < a.irrep_count(); ++r) {
    int d = a.irreps[r].dim, o = a.offset[r];
    const MatC& x = a.generators[r][k];
    // (X F)(y) = sum d Tr(xi(y) dxi(X) F)  ->  F_ij <- sum_l dxi(X)_il F_lj
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int l = 0; l < d; ++l) g(o + i * d + j, o + l * d + j) += x(i, l);
  }
  return a.inv * g * a.fwd;
}

/**
 * @brief Taylor-dual operators: coefficients C(alpha, beta) with
 * d^(alpha) = sum_beta C(alpha,beta) X^beta, X^beta = X_1^{b1} X_2^{b2} X_3^{b3},
 * dual to the coordinate monomials u^gamma / gamma!, u(y) = q(y^{-1}).
 */
struct TaylorDual {
  GroupKind kind = GroupKind::torus;
  int max_order = 0;
  std::vector<MultiIndex> idx;
  MatC C;
  int position(const MultiIndex& a) const {
    for (size_t i = 0; i < idx.size(); ++i)
      if (idx[i] == a) return static_cast<int>(i);
    throw ConfigError("multi-index outside the Taylor table");
  }
};

namespace detail {

/** @brief dD^{1/2}(X_k) on SU(2), i on T1, as 2x2 (or 1x1) matrices, and the coordinate entries. */
inline void coordinate_data(GroupKind kind, std::vector<MatC>& A, std::vector<std::array<int, 2>>& entry) {
  A.clear();
  entry.clear();
  if (kind == GroupKind::torus) {
    MatC a(1, 1);
    a(0, 0) = kI;
    A.push_back(a);
    entry.push_back({0, 0});
  } else {
    for (int k = 0; k < 3; ++k) A.push_back(MatC(su2_basis(k)));
    entry = {{{0, 0}}, {{0, 1}}, {{1, 0}}};
  }
}

/** @brief Word derivative X_{w0} ... X_{wr} of u_j(y) = (D(y)^*)_{ab} - delta at e. */
inline cplx word_derivative_u(const std::vector<MatC>& A, const std::array<int, 2>& ab, const std::vector<int>& word) {
  if (word.empty()) return 0.0;
  int d = static_cast<int>(A[0].rows());
  MatC p = MatC::Identity(d, d);
  // D^*(exp tX) = exp(-tA): word derivative is (-A_{wr}) ... (-A_{w0})
  for (int i = static_cast<int>(word.size()) - 1; i >= 0; --i) p = p * (-A[word[i]]);
  return p(ab[0], ab[1]);
}

/** @brief Word derivative at e of a product of coordinate functions (letters distributed over factors). */
inline cplx word_derivative_product(const std::vector<MatC>& A, const std::vector<std::array<int, 2>>& entry,
                                    const std::vector<int>& factors, const std::vector<int>& word) {
  int nf = static_cast<int>(factors.size());
  if (nf == 0) return word.empty() ? cplx(1.0) : cplx(0.0);
  if (static_cast<int>(word.size()) < nf) return 0.0;  // each factor vanishes at e
  std::vector<std::vector<int>> parts(nf);
  cplx total = 0;
  std::function<void(size_t)> rec = [&](size_t pos) {
    if (pos == word.size()) {
      cplx prod = 1;
      for (int f = 0; f < nf; ++f) {
        prod *= word_derivative_u(A, entry[factors[f]], parts[f]);
        if (prod == 0.0) return;
      }
      total += prod;
      return;
    }
    for (int f = 0; f < nf; ++f) {
      parts[f].push_back(word[pos]);
      rec(pos + 1);
      parts[f].pop_back();
    }
  };
  rec(0);
  return total;
}

inline std::vector<int> expand_word(const MultiIndex& b) {
  std::vector<int> w;
  for (size_t k = 0; k < b.size(); ++k)
    for (int r = 0; r < b[k]; ++r) w.push_back(static_cast<int>(k));
  return w;
}

}  // namespace detail

inline TaylorDual make_taylor_dual(GroupKind kind, int max_order) {
  TaylorDual t;
  t.kind = kind;
  t.max_order = max_order;
  int n = lie_dim(kind);
  t.idx = multi_indices_upto(n, max_order);
  std::vector<MatC> A;
  std::vector<std::array<int, 2>> entry;
  detail::coordinate_data(kind, A, entry);
  int m = static_cast<int>(t.idx.size());
  MatC M = MatC::Zero(m, m);  // M(gamma, beta) = X^beta(u^gamma / gamma!)(e)
  for (int g = 0; g < m; ++g) {
    std::vector<int> factors = detail::expand_word(t.idx[g]);
    for (int b = 0; b < m; ++b) {
      if (order_of(t.idx[b]) < order_of(t.idx[g])) continue;
      M(g, b) = detail::word_derivative_product(A, entry, factors, detail::expand_word(t.idx[b])) / multi_factorial(t.idx[g]);
    }
  }
  t.C = M.transpose().inverse();
  return t;
}

/** @brief Monomial X^beta as a grid matrix from per-direction derivative matrices. */
inline MatC grid_monomial(const std::vector<MatC>& D, const MultiIndex& beta) {
  int n = static_cast<int>(D[0].rows());
  MatC p = MatC::Identity(n, n);
  for (size_t k = 0; k < beta.size(); ++k)
    for (int r = 0; r < beta[k]; ++r) p = p * D[k];
  return p;
}

/** @brief Grid matrix of the Taylor-dual operator d^(alpha) from per-direction derivative matrices. */
inline MatC taylor_grid_operator(const TaylorDual& t, const std::vector<MatC>& D, const MultiIndex& alpha) {
  int a = t.position(alpha);
  int n = static_cast<int>(D[0].rows());
  MatC out = MatC::Zero(n, n);
  for (size_t b = 0; b < t.idx.size(); ++b) {
    if (std::abs(t.C(a, b)) < 1e-15) continue;
    out += t.C(a, b) * grid_monomial(D, t.idx[b]);
  }
  return out;
}

/**
 * @brief One factor of a symbol space: the truncated dual (with its kernel-side
 * grid), the sampling grid of the x-variable, difference and derivative matrices.
 */
struct FactorSpace {
  GroupKind kind = GroupKind::torus;
  AtlasPtr dual;   ///< frequencies: irreps up to the cutoff, exact product quadrature
  AtlasPtr xgrid;  ///< x-variable sampling grid of band `band2`
  int band2 = 0;
  DifferenceFamily family;
  std::vector<MatC> diff;   ///< per family function: coefficient-space matrix of f -> (q f)^
  std::vector<MatC> deriv;  ///< per Lie direction: x-grid derivative matrix
  MatC synth;               ///< x-nodes x coefficients: d xi(x)_{ji} for the dual irreps
  double step = 1.0;        ///< label headroom consumed per difference

  int N() const { return dual->coeff_dim; }
  int X() const { return xgrid->size(); }
  double cutoff() const { return dual->cutoff(); }
  /** @brief x-band in label units (k on T1, l on SU(2)). */
  double band() const { return kind == GroupKind::torus ? band2 : 0.5 * band2; }
  int lie() const { return lie_dim(kind); }
  double weight_of_coef(int c) const { return dual->irreps[dual->coef_irrep[c]].weight; }
};

inline FactorSpace make_factor_space(GroupKind kind, int cutoff2, int band2, int factor, int resolution = 0) {
  FactorSpace f;
  f.kind = kind;
  f.dual = make_atlas_ptr(build_atlas(kind, cutoff2, resolution));
  f.xgrid = make_atlas_ptr(build_sampling_grid(kind, band2));
  f.band2 = band2;
  f.family = difference_family(*f.dual, factor);
  for (auto& q : f.family.funcs) {
    VecC qv(q.size());
    for (size_t i = 0; i < q.size(); ++i) qv(i) = q[i];
    MatC Q = f.dual->fwd * qv.asDiagonal() * f.dual->inv;
    // quadrature noise on structurally zero entries
    Q = Q.unaryExpr([](cplx v) { return std::abs(v) < 1e-13 ? cplx(0.0) : v; });
    f.diff.push_back(Q);
  }
  for (int k = 0; k < lie_dim(kind); ++k) f.deriv.push_back(grid_derivative(*f.xgrid, k));
  f.synth.resize(f.X(), f.N());
  for (int x = 0; x < f.X(); ++x) f.synth.row(x) = f.dual->synthesis_row(f.xgrid->nodes[x]).transpose();
  f.step = kind == GroupKind::torus ? 1.0 : 0.5;
  return f;
}

/** @brief Symbol space on G1 x G2: both factors plus cached Taylor-dual grid operators. */
struct SymbolSpace {
  FactorSpace f[2];

  int N1() const { return f[0].N(); }
  int N2() const { return f[1].N(); }
  int X1() const { return f[0].X(); }
  int X2() const { return f[1].X(); }
  int slots() const { return X1() * X2(); }
  const FactorSpace& factor(int i) const { return f[i - 1]; }

  /** @brief Taylor-dual grid operator d^(alpha) on the x-grid of a factor (cached). */
  const MatC& taylor_operator(int factor_index, const MultiIndex& alpha) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_pair(factor_index, alpha);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const FactorSpace& fs = factor(factor_index);
    TaylorDual t = make_taylor_dual(fs.kind, std::max(order_of(alpha), 1));
    return cache_.emplace(key, taylor_grid_operator(t, fs.deriv, alpha)).first->second;
  }

  /**
   * @brief Multiplication operators on the dual coefficient space of a factor, one per
   * x-grid coefficient (the function d zeta(x)_{ji}); exact on a quadrature that
   * integrates triple products.
   */
  const std::vector<SpMatC>& mult(int factor_index) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto& out = mult_[factor_index - 1];
    if (!out.empty()) return out;
    const FactorSpace& fs = factor(factor_index);
    GroupAtlas q = build_quadrature(fs.kind, fs.dual->cutoff2, 2 * fs.dual->cutoff2 + fs.band2);
    const GroupAtlas& xg = *fs.xgrid;
    MatC vals(q.size(), xg.coeff_dim);
    for (int x = 0; x < q.size(); ++x) vals.row(x) = xg.synthesis_row(q.nodes[x]).transpose();
    for (int c = 0; c < xg.coeff_dim; ++c) {
      MatC m = q.fwd * vals.col(c).asDiagonal() * q.inv;
      out.push_back(m.sparseView(1.0, 1e-14));
    }
    return out;
  }

 private:
  mutable std::mutex mu_;
  mutable std::map<std::pair<int, MultiIndex>, MatC> cache_;
  mutable std::vector<SpMatC> mult_[2];
};

using SpacePtr = std::shared_ptr<const SymbolSpace>;

/**
 * @brief Build a symbol space.
 * @param cutoff2_i frequency cutoff of factor i (2l for SU(2))
 * @param band2_i x-band of factor i (2l for SU(2))
 */
inline SpacePtr make_symbol_space(GroupKind k1, int cutoff2_1, int band2_1, GroupKind k2, int cutoff2_2, int band2_2) {
  auto s = std::make_shared<SymbolSpace>();
  s->f[0] = make_factor_space(k1, cutoff2_1, band2_1, 1);
  s->f[1] = make_factor_space(k2, cutoff2_2, band2_2, 2);
  return s;
}

/**
 * @brief Matrix symbol on the product of the x-sampling grids and the truncated dual.
 *
 * Each x slot holds an N1 x N2 coefficient matrix (layout of Spectrum); x-independent
 * symbols keep a single slot. `radius_i` is the label radius up to which entries are
 * exact after the difference operators applied so far.
 */
struct BisingularSymbol {
  SpacePtr space;
  double m1 = 0, m2 = 0;
  double radius1 = 0, radius2 = 0;
  std::vector<MatC> slots;

  bool x_independent() const { return slots.size() == 1; }
  int slot_index(int x1, int x2) const { return x_independent() ? 0 : x1 * space->X2() + x2; }
  const MatC& at(int x1, int x2) const { return slots[slot_index(x1, x2)]; }
  MatC& at(int x1, int x2) { return slots[slot_index(x1, x2)]; }

  /** @brief Block (d1 d2) x (d1 d2) at x slot s and irreps (r1, r2). */
  MatC block(int s, int r1, int r2) const {
    const auto& a1 = *space->f[0].dual;
    const auto& a2 = *space->f[1].dual;
    int d1 = a1.irreps[r1].dim, d2 = a2.irreps[r2].dim, o1 = a1.offset[r1], o2 = a2.offset[r2];
    const MatC& c = slots[x_independent() ? 0 : s];
    MatC m(d1 * d2, d1 * d2);
    for (int i1 = 0; i1 < d1; ++i1)
      for (int i2 = 0; i2 < d2; ++i2)
        for (int j1 = 0; j1 < d1; ++j1)
          for (int j2 = 0; j2 < d2; ++j2) m(i1 * d2 + i2, j1 * d2 + j2) = c(o1 + i1 * d1 + j1, o2 + i2 * d2 + j2);
    return m;
  }

  void set_block(int s, int r1, int r2, const MatC& m) {
    const auto& a1 = *space->f[0].dual;
    const auto& a2 = *space->f[1].dual;
    int d1 = a1.irreps[r1].dim, d2 = a2.irreps[r2].dim, o1 = a1.offset[r1], o2 = a2.offset[r2];
    MatC& c = slots[x_independent() ? 0 : s];
    for (int i1 = 0; i1 < d1; ++i1)
      for (int i2 = 0; i2 < d2; ++i2)
        for (int j1 = 0; j1 < d1; ++j1)
          for (int j2 = 0; j2 < d2; ++j2) c(o1 + i1 * d1 + j1, o2 + i2 * d2 + j2) = m(i1 * d2 + i2, j1 * d2 + j2);
  }

  /** @brief True when every block is 1 x 1 (T x T). */
  bool scalar_blocks() const { return space->f[0].kind == GroupKind::torus && space->f[1].kind == GroupKind::torus; }

  /** @brief Is irrep pair (r1,r2) within the exact radius? */
  bool in_radius(int r1, int r2) const {
    const auto& a1 = *space->f[0].dual;
    const auto& a2 = *space->f[1].dual;
    return label_radius(a1.kind, a1.irreps[r1].label) <= radius1 + 1e-9 &&
           label_radius(a2.kind, a2.irreps[r2].label) <= radius2 + 1e-9;
  }
};

inline BisingularSymbol zero_symbol(const SpacePtr& sp, double m1 = 0, double m2 = 0, bool x_independent = true) {
  BisingularSymbol s;
  s.space = sp;
  s.m1 = m1;
  s.m2 = m2;
  s.radius1 = sp->f[0].cutoff();
  s.radius2 = sp->f[1].cutoff();
  s.slots.assign(x_independent ? 1 : sp->slots(), MatC::Zero(sp->N1(), sp->N2()));
  return s;
}

/**
 * @brief Label headroom lost in factor f when a finite section involving this symbol
 * is applied: multiplication by its x-dependence shifts labels by up to the x-band.
 */
inline double x_loss(const BisingularSymbol& s, int f) { return s.x_independent() ? 0.0 : s.space->factor(f).band(); }

/** @brief Copy with one slot per x node. */
inline BisingularSymbol expand_x(const BisingularSymbol& s) {
  if (!s.x_independent()) return s;
  BisingularSymbol out = s;
  out.slots.assign(s.space->slots(), s.slots[0]);
  return out;
}

/** @brief Coefficient matrix of the x-independent multiplier f1(xi1) f2(xi2) I. */
inline MatC multiplier_coef(const SymbolSpace& sp, const std::function<double(const IrrepInfo&)>& f1,
                            const std::function<double(const IrrepInfo&)>& f2) {
  const auto& a1 = *sp.f[0].dual;
  const auto& a2 = *sp.f[1].dual;
  VecC v1 = VecC::Zero(a1.coeff_dim), v2 = VecC::Zero(a2.coeff_dim);
  for (int c = 0; c < a1.coeff_dim; ++c)
    if (a1.coef_i[c] == a1.coef_j[c]) v1(c) = f1(a1.irreps[a1.coef_irrep[c]]);
  for (int c = 0; c < a2.coeff_dim; ++c)
    if (a2.coef_i[c] == a2.coef_j[c]) v2(c) = f2(a2.irreps[a2.coef_irrep[c]]);
  return v1 * v2.transpose();
}

/** @brief <xi1>^{m1} <xi2>^{m2} I. */
inline BisingularSymbol multiplier_symbol(const SpacePtr& sp, double m1, double m2) {
  BisingularSymbol s = zero_symbol(sp, m1, m2);
  s.slots[0] = multiplier_coef(
      *sp, [&](const IrrepInfo& r) { return std::pow(r.weight, m1); }, [&](const IrrepInfo& r) { return std::pow(r.weight, m2); });
  return s;
}

/** @brief Identity symbol I (order (0,0)). */
inline BisingularSymbol identity_symbol(const SpacePtr& sp) { return multiplier_symbol(sp, 0, 0); }

/** @brief Scalar field c(x1,x2) on the x-grid (values X1 x X2) times a symbol. */
inline BisingularSymbol scale_by_field(const BisingularSymbol& s, const MatC& c) {
  BisingularSymbol out = expand_x(s);
  int X2 = s.space->X2();
  for (int x1 = 0; x1 < s.space->X1(); ++x1)
    for (int x2 = 0; x2 < X2; ++x2) out.slots[x1 * X2 + x2] *= c(x1, x2);
  return out;
}

/** @brief Sample a function of the two factor elements on the x-grid. */
inline MatC sample_field(const SymbolSpace& sp, const std::function<cplx(const GroupElement&, const GroupElement&)>& g) {
  MatC c(sp.X1(), sp.X2());
  for (int x1 = 0; x1 < sp.X1(); ++x1)
    for (int x2 = 0; x2 < sp.X2(); ++x2) c(x1, x2) = g(sp.f[0].xgrid->nodes[x1], sp.f[1].xgrid->nodes[x2]);
  return c;
}

inline void check_space(const BisingularSymbol& a, const BisingularSymbol& b) {
  if (a.space.get() != b.space.get()) throw ConfigError("symbols live on different spaces");
}

inline BisingularSymbol add(const BisingularSymbol& a, const BisingularSymbol& b, cplx cb = 1.0) {
  check_space(a, b);
  BisingularSymbol out = (a.x_independent() && !b.x_independent()) ? expand_x(a) : a;
  for (size_t s = 0; s < out.slots.size(); ++s) out.slots[s] += cb * b.slots[b.x_independent() ? 0 : s];
  out.m1 = std::max(a.m1, b.m1);
  out.m2 = std::max(a.m2, b.m2);
  out.radius1 = std::min(a.radius1, b.radius1);
  out.radius2 = std::min(a.radius2, b.radius2);
  return out;
}

inline BisingularSymbol subtract(const BisingularSymbol& a, const BisingularSymbol& b) { return add(a, b, -1.0); }

inline BisingularSymbol scale(const BisingularSymbol& a, cplx c) {
  BisingularSymbol out = a;
  for (auto& s : out.slots) s *= c;
  return out;
}

/** @brief Apply f to every block (slot s, irreps r1, r2) of one or two symbols, writing the result. */
template <class F>
void for_each_block(const SymbolSpace& sp, F&& f) {
  for (int r1 = 0; r1 < sp.f[0].dual->irrep_count(); ++r1)
    for (int r2 = 0; r2 < sp.f[1].dual->irrep_count(); ++r2) f(r1, r2);
}

/** @brief Pointwise matrix product a(x,xi) b(x,xi); orders add. */
inline BisingularSymbol pointwise_product(const BisingularSymbol& a, const BisingularSymbol& b) {
  check_space(a, b);
  bool xi = a.x_independent() && b.x_independent();
  BisingularSymbol out = zero_symbol(a.space, a.m1 + b.m1, a.m2 + b.m2, xi);
  out.radius1 = std::min(a.radius1, b.radius1);
  out.radius2 = std::min(a.radius2, b.radius2);
  for (size_t s = 0; s < out.slots.size(); ++s) {
    const MatC& ca = a.slots[a.x_independent() ? 0 : s];
    const MatC& cb = b.slots[b.x_independent() ? 0 : s];
    if (a.scalar_blocks()) {
      out.slots[s] = ca.cwiseProduct(cb);
      continue;
    }
    for_each_block(*a.space, [&](int r1, int r2) {
      out.set_block(static_cast<int>(s), r1, r2, a.block(static_cast<int>(s), r1, r2) * b.block(static_cast<int>(s), r1, r2));
    });
  }
  return out;
}

/** @brief Pointwise adjoint sigma(x,xi)^*; orders unchanged. */
inline BisingularSymbol pointwise_adjoint(const BisingularSymbol& a) {
  BisingularSymbol out = a;
  for (size_t s = 0; s < out.slots.size(); ++s) {
    if (a.scalar_blocks()) {
      out.slots[s] = a.slots[s].conjugate();
      continue;
    }
    for_each_block(*a.space, [&](int r1, int r2) { out.set_block(static_cast<int>(s), r1, r2, a.block(static_cast<int>(s), r1, r2).adjoint()); });
  }
  return out;
}

/** @brief Pointwise inverse a(x,xi)^{-1}; orders negate. Throws on singular blocks. */
inline BisingularSymbol pointwise_inverse(const BisingularSymbol& a) {
  BisingularSymbol out = a;
  out.m1 = -a.m1;
  out.m2 = -a.m2;
  for (size_t s = 0; s < out.slots.size(); ++s)
    for_each_block(*a.space, [&](int r1, int r2) {
      MatC b = a.block(static_cast<int>(s), r1, r2);
      Eigen::FullPivLU<MatC> lu(b);
      if (!lu.isInvertible()) throw ConfigError("symbol is singular at a dual key");
      out.set_block(static_cast<int>(s), r1, r2, lu.inverse());
    });
  return out;
}

/** @brief Max entry difference between two symbols over keys within both radii. */
inline double max_difference(const BisingularSymbol& a, const BisingularSymbol& b) {
  check_space(a, b);
  double worst = 0;
  size_t n = std::max(a.slots.size(), b.slots.size());
  BisingularSymbol ra = a;
  ra.radius1 = std::min(a.radius1, b.radius1);
  ra.radius2 = std::min(a.radius2, b.radius2);
  const auto& a1 = *a.space->f[0].dual;
  const auto& a2 = *a.space->f[1].dual;
  for (size_t s = 0; s < n; ++s) {
    const MatC& ca = a.slots[a.x_independent() ? 0 : s];
    const MatC& cb = b.slots[b.x_independent() ? 0 : s];
    for (int c2 = 0; c2 < a2.coeff_dim; ++c2)
      for (int c1 = 0; c1 < a1.coeff_dim; ++c1)
        if (ra.in_radius(a1.coef_irrep[c1], a2.coef_irrep[c2])) worst = std::max(worst, std::abs(ca(c1, c2) - cb(c1, c2)));
  }
  return worst;
}

/** @brief Product of difference matrices for a multi-index over a factor's family. */
inline MatC difference_matrix(const FactorSpace& f, const MultiIndex& alpha) {
  int n = f.N();
  MatC p = MatC::Identity(n, n);
  if (alpha.empty()) return p;
  if (alpha.size() != f.diff.size()) throw ConfigError("multi-index length does not match the difference family");
  for (size_t j = 0; j < alpha.size(); ++j)
    for (int r = 0; r < alpha[j]; ++r) p = f.diff[j] * p;
  return p;
}

/**
 * @brief Delta^{alpha,beta} sigma, kernel-side: multiply the right kernel by
 * q^{alpha}(y1) q^{beta}(y2) and transform back. Orders drop by (|alpha|, |beta|).
 * Throws MarginError when the exact radius would become negative.
 */
inline BisingularSymbol difference_apply(const BisingularSymbol& s, const MultiIndex& alpha, const MultiIndex& beta) {
  const FactorSpace& f1 = s.space->f[0];
  const FactorSpace& f2 = s.space->f[1];
  int n1 = order_of(alpha), n2 = order_of(beta);
  double need1 = n1 * f1.step, need2 = n2 * f2.step;
  if (need1 > s.radius1 + 1e-9) throw MarginError("difference order exceeds the exact band in factor 1", need1);
  if (need2 > s.radius2 + 1e-9) throw MarginError("difference order exceeds the exact band in factor 2", need2);
  BisingularSymbol out = s;
  out.m1 -= n1;
  out.m2 -= n2;
  out.radius1 -= need1;
  out.radius2 -= need2;
  if (n1 == 0 && n2 == 0) return out;
  MatC Q1 = difference_matrix(f1, alpha);
  MatC Q2t = difference_matrix(f2, beta).transpose();
  for (auto& c : out.slots) c = Q1 * c * Q2t;
  return out;
}

/**
 * @brief Tensor-side first difference on a T1 factor: F(k + tau) - F(k), zero
 * outside the cutoff. Agrees with the kernel-side difference for q = e^{i theta} - 1
 * when tau = -1 (label reflection is the orientation constant).
 */
inline BisingularSymbol difference_apply_tensor(const BisingularSymbol& s, int factor, int tau) {
  const FactorSpace& f = s.space->factor(factor);
  if (f.kind != GroupKind::torus) throw ConfigError("tensor-side differences are only available on T1 factors");
  const auto& a = *f.dual;
  int n = a.coeff_dim;
  MatC T = MatC::Zero(n, n);
  for (int c = 0; c < n; ++c) {
    int k = a.irreps[a.coef_irrep[c]].label;
    int src = a.index_of(k + tau);
    if (src >= 0) T(c, a.offset[src]) += 1.0;
    T(c, c) -= 1.0;
  }
  BisingularSymbol out = s;
  if (tau != 0) {
    out.radius1 -= factor == 1 ? std::abs(tau) : 0;
    out.radius2 -= factor == 2 ? std::abs(tau) : 0;
    if (factor == 1)
      out.m1 -= 1;
    else
      out.m2 -= 1;
  }
  for (auto& c : out.slots) c = factor == 1 ? MatC(T * c) : MatC(c * T.transpose());
  return out;
}

/** @brief Apply x-grid matrices P1 (factor 1) and P2 (factor 2) to the x dependence; empty skips. */
inline BisingularSymbol apply_x_operators(const BisingularSymbol& s, const MatC& P1, const MatC& P2) {
  BisingularSymbol in = expand_x(s);
  BisingularSymbol out = in;
  const int X1 = s.space->X1(), X2 = s.space->X2();
  if (P1.size() > 0) {
    for (int x1 = 0; x1 < X1; ++x1)
      for (int x2 = 0; x2 < X2; ++x2) {
        MatC acc = MatC::Zero(s.space->N1(), s.space->N2());
        for (int y = 0; y < X1; ++y)
          if (P1(x1, y) != 0.0) acc += P1(x1, y) * in.slots[y * X2 + x2];
        out.slots[x1 * X2 + x2] = acc;
      }
    in = out;
  }
  if (P2.size() > 0) {
    for (int x1 = 0; x1 < X1; ++x1)
      for (int x2 = 0; x2 < X2; ++x2) {
        MatC acc = MatC::Zero(s.space->N1(), s.space->N2());
        for (int y = 0; y < X2; ++y)
          if (P2(x2, y) != 0.0) acc += P2(x2, y) * in.slots[x1 * X2 + y];
        out.slots[x1 * X2 + x2] = acc;
      }
  }
  return out;
}

/** @brief Left-invariant derivative X^{gamma1} X^{gamma2} in x (spectral on the x-grid). */
inline BisingularSymbol derivative_apply(const BisingularSymbol& s, const MultiIndex& g1, const MultiIndex& g2) {
  int n1 = order_of(g1), n2 = order_of(g2);
  if (n1 == 0 && n2 == 0) return s;
  if (s.x_independent()) return zero_symbol(s.space, s.m1, s.m2);
  MatC P1 = n1 ? grid_monomial(s.space->f[0].deriv, g1) : MatC();
  MatC P2 = n2 ? grid_monomial(s.space->f[1].deriv, g2) : MatC();
  BisingularSymbol out = apply_x_operators(s, P1, P2);
  return out;
}

/** @brief Taylor-dual derivative d^(alpha1, alpha2) in x (multi-indices over the coordinate subfamily). */
inline BisingularSymbol taylor_derivative_apply(const BisingularSymbol& s, const MultiIndex& a1, const MultiIndex& a2) {
  int n1 = order_of(a1), n2 = order_of(a2);
  if (n1 == 0 && n2 == 0) return s;
  if (s.x_independent()) return zero_symbol(s.space, s.m1, s.m2);
  MatC P1 = n1 ? s.space->taylor_operator(1, a1) : MatC();
  MatC P2 = n2 ? s.space->taylor_operator(2, a2) : MatC();
  return apply_x_operators(s, P1, P2);
}

/** @brief Seminorm index: difference orders (a1,a2) and derivative orders (b1,b2). */
struct SeminormKey {
  int a1 = 0, a2 = 0, b1 = 0, b2 = 0;
};

/**
 * @brief Weighted sup of op-norms over x-grid nodes and in-radius keys, weight
 * <xi1>^{-m1+|alpha|} <xi2>^{-m2+|beta|}, for the symbol as stored (no extra Delta).
 */
inline double weighted_sup(const BisingularSymbol& s, double m1, double m2) {
  const auto& a1 = *s.space->f[0].dual;
  const auto& a2 = *s.space->f[1].dual;
  double best = 0;
  for (size_t x = 0; x < s.slots.size(); ++x)
    for_each_block(*s.space, [&](int r1, int r2) {
      if (!s.in_radius(r1, r2)) return;
      double w = std::pow(a1.irreps[r1].weight, -m1) * std::pow(a2.irreps[r2].weight, -m2);
      double nrm = s.scalar_blocks() ? std::abs(s.slots[x](a1.offset[r1], a2.offset[r2])) : op_norm(s.block(static_cast<int>(x), r1, r2));
      best = std::max(best, w * nrm);
    });
  return best;
}

/**
 * @brief Seminorm estimate: max over |alpha|<=a1, |beta|<=a2 (full difference
 * families) and PBW monomials |g1|<=b1, |g2|<=b2 of the weighted sup. A lower
 * bound of the true seminorm (finite grid and truncated dual).
 */
inline double seminorm_estimate(const BisingularSymbol& s, const SeminormKey& key) {
  const FactorSpace& f1 = s.space->f[0];
  const FactorSpace& f2 = s.space->f[1];
  double best = 0;
  auto A1 = multi_indices_upto(static_cast<int>(f1.diff.size()), key.a1);
  auto A2 = multi_indices_upto(static_cast<int>(f2.diff.size()), key.a2);
  auto B1 = multi_indices_upto(f1.lie(), key.b1);
  auto B2 = multi_indices_upto(f2.lie(), key.b2);
  for (auto& g1 : B1)
    for (auto& g2 : B2) {
      BisingularSymbol d = derivative_apply(s, g1, g2);
      for (auto& al : A1)
        for (auto& be : A2) {
          BisingularSymbol dd = difference_apply(d, al, be);
          best = std::max(best, weighted_sup(dd, s.m1 - order_of(al), s.m2 - order_of(be)));
        }
    }
  return best;
}

/** @brief Cutoff profiles: chi (1 on [0,1/2], 0 past 1), psi = 1 - chi, and the dyadic eta family. */
struct CutoffProfile {
  enum class Kind { chi, psi, eta } kind = Kind::chi;
  double lo = 0.5, hi = 1.0;  ///< transition breakpoints

  static double smooth_step(double u) {
    if (u <= 0) return 0;
    if (u >= 1) return 1;
    double a = std::exp(-1.0 / u), b = std::exp(-1.0 / (1.0 - u));
    return a / (a + b);
  }
  double chi(double lambda) const { return 1.0 - smooth_step((std::abs(lambda) - lo) / (hi - lo)); }
  double psi(double lambda) const { return 1.0 - chi(lambda); }
  /** @brief eta_0 = chi, eta_l(lambda) = chi(2^{-l} lambda) - chi(2^{-l+1} lambda). */
  double eta(int l, double lambda) const {
    if (l == 0) return chi(lambda);
    return chi(std::ldexp(lambda, -l)) - chi(std::ldexp(lambda, -l + 1));
  }
  double operator()(double lambda) const { return kind == Kind::psi ? psi(lambda) : chi(lambda); }
};

/** @brief Multiply by profile(t1 E1) profile(t2 E2) (E = Laplace eigenvalue). */
inline BisingularSymbol localize(const BisingularSymbol& s, const CutoffProfile& p, double t1, double t2) {
  BisingularSymbol out = s;
  MatC w = multiplier_coef(
      *s.space, [&](const IrrepInfo& r) { return p(t1 * r.eig); }, [&](const IrrepInfo& r) { return p(t2 * r.eig); });
  // the multiplier is diagonal per block: broadcast its diagonal entries over each block
  const auto& a1 = *s.space->f[0].dual;
  const auto& a2 = *s.space->f[1].dual;
  for (auto& c : out.slots)
    for (int c2 = 0; c2 < a2.coeff_dim; ++c2)
      for (int c1 = 0; c1 < a1.coeff_dim; ++c1) {
        int r1 = a1.coef_irrep[c1], r2 = a2.coef_irrep[c2];
        c(c1, c2) *= w(a1.offset[r1], a2.offset[r2]);
      }
  return out;
}

/** @brief Dyadic localization by eta_{l1}(E1) eta_{l2}(E2). */
inline BisingularSymbol localize_dyadic(const BisingularSymbol& s, const CutoffProfile& p, int l1, int l2) {
  BisingularSymbol out = s;
  const auto& a1 = *s.space->f[0].dual;
  const auto& a2 = *s.space->f[1].dual;
  for (auto& c : out.slots)
    for (int c2 = 0; c2 < a2.coeff_dim; ++c2)
      for (int c1 = 0; c1 < a1.coeff_dim; ++c1)
        c(c1, c2) *= p.eta(l1, a1.irreps[a1.coef_irrep[c1]].eig) * p.eta(l2, a2.irreps[a2.coef_irrep[c2]].eig);
  return out;
}

/** @brief Taylor data of a field at the identity of G1 x G2. */
struct TaylorExpansion {
  std::vector<std::pair<MultiIndex, MultiIndex>> index;
  std::vector<cplx> coefficient;  ///< (1/alpha! beta!) d^(alpha,beta) f(e)
  FieldOnG remainder;
};

/** @brief Taylor expansion in the coordinate monomials q^{alpha,beta}(x^{-1}), |alpha|,|beta| < N. */
inline TaylorExpansion taylor_expand(const FieldOnG& f, int N) {
  if (N < 1) throw ConfigError("Taylor order must be at least 1");
  const GroupAtlas& g1 = *f.atlas1;
  const GroupAtlas& g2 = *f.atlas2;
  std::vector<MatC> D1, D2;
  for (int k = 0; k < lie_dim(g1.kind); ++k) D1.push_back(grid_derivative(g1, k));
  for (int k = 0; k < lie_dim(g2.kind); ++k) D2.push_back(grid_derivative(g2, k));
  TaylorDual t1 = make_taylor_dual(g1.kind, N - 1), t2 = make_taylor_dual(g2.kind, N - 1);
  auto fam1 = difference_family(g1, 1), fam2 = difference_family(g2, 2);
  // u^gamma(x) = prod q_j(x^{-1})^{gamma_j} over the coordinate subfamily
  auto monomial = [](const GroupAtlas& a, const DifferenceFamily& fam, const MultiIndex& g) {
    VecC v = VecC::Ones(a.size());
    for (int x = 0; x < a.size(); ++x) {
      GroupElement xi = inverse(a.nodes[x]);
      for (size_t j = 0; j < g.size(); ++j)
        if (g[j]) v(x) *= std::pow(x == a.identity_node ? cplx(0.0) : difference_value(a.kind, fam.labels[fam.coordinate[j]], xi), g[j]);
    }
    return v;
  };
  TaylorExpansion out;
  out.remainder = f;
  for (auto& al : t1.idx) {
    MatC P1 = taylor_grid_operator(t1, D1, al);
    VecC u1 = monomial(g1, fam1, al);
    MatC h = P1 * f.values;
    for (auto& be : t2.idx) {
      MatC P2 = taylor_grid_operator(t2, D2, be);
      cplx v = (h * P2.transpose())(g1.identity_node, g2.identity_node);
      cplx coef = v / (multi_factorial(al) * multi_factorial(be));
      out.index.push_back({al, be});
      out.coefficient.push_back(coef);
      VecC u2 = monomial(g2, fam2, be);
      out.remainder.values -= coef * u1 * u2.transpose();
    }
  }
  return out;
}

/** @brief Entrywise product of T x T spectra (all blocks 1 x 1). */
inline Spectrum spectrum_product(const Spectrum& F, const Spectrum& G) {
  Spectrum out(F.atlas1, F.atlas2);
  if (F.atlas1->kind == GroupKind::torus && F.atlas2->kind == GroupKind::torus) {
    out.coef = F.coef.cwiseProduct(G.coef);
    return out;
  }
  for (int r1 = 0; r1 < F.atlas1->irrep_count(); ++r1)
    for (int r2 = 0; r2 < F.atlas2->irrep_count(); ++r2) out.set_block(r1, r2, F.block(r1, r2) * G.block(r1, r2));
  return out;
}

/** @brief Kernel-side difference of a spectrum by a family function on one factor. */
inline Spectrum spectrum_difference(const Spectrum& F, int factor, int fn, int power = 1) {
  const GroupAtlas& a = factor == 1 ? *F.atlas1 : *F.atlas2;
  auto fam = difference_family(a, factor);
  VecC q(a.size());
  for (int x = 0; x < a.size(); ++x) q(x) = fam.funcs[fn][x];
  MatC Q = a.fwd * q.asDiagonal() * a.inv;
  Spectrum out = F;
  for (int p = 0; p < power; ++p) out.coef = factor == 1 ? MatC(Q * out.coef) : MatC(out.coef * Q.transpose());
  return out;
}

/**
 * @brief Residual of the torus Leibniz formula
 * Delta^{a,b}(FG) = sum c^a_{p1 q1} c^b_{p2 q2} Delta^{p1,p2}F Delta^{q1,q2}G,
 * c^a_{pq} = sum_i (-1)^{a-i} C(a,i) C(i,p) C(i,q) (for a = 1: c10 = c01 = c11 = 1).
 */
inline double leibniz_residual(const Spectrum& F, const Spectrum& G, int a, int b) {
  if (F.atlas1->kind != GroupKind::torus || F.atlas2->kind != GroupKind::torus)
    throw ConfigError("explicit Leibniz coefficients are only available on T x T");
  auto coef = [](int n, int p, int q) {
    double s = 0;
    for (int i = 0; i <= n; ++i) s += ((n - i) % 2 ? -1.0 : 1.0) * binomial(n, i) * binomial(i, p) * binomial(i, q);
    return s;
  };
  auto diff = [&](const Spectrum& S, int p1, int p2) {
    return spectrum_difference(spectrum_difference(S, 1, 0, p1), 2, 0, p2);
  };
  Spectrum lhs = diff(spectrum_product(F, G), a, b);
  MatC rhs = MatC::Zero(F.coef.rows(), F.coef.cols());
  for (int p1 = 0; p1 <= a; ++p1)
    for (int q1 = 0; q1 <= a; ++q1) {
      double c1 = coef(a, p1, q1);
      if (c1 == 0) continue;
      for (int p2 = 0; p2 <= b; ++p2)
        for (int q2 = 0; q2 <= b; ++q2) {
          double c2 = coef(b, p2, q2);
          if (c2 == 0) continue;
          rhs += c1 * c2 * diff(F, p1, p2).coef.cwiseProduct(diff(G, q1, q2).coef);
        }
    }
  double scale_v = std::max(1.0, lhs.coef.cwiseAbs().maxCoeff());
  return (lhs.coef - rhs).cwiseAbs().maxCoeff() / scale_v;
}

/**
 * @brief Kernel-side identity on one factor: Delta_q(F G) equals the transform of
 * q (g * f), the convolution evaluated by quadrature. Coefficient vectors F, G
 * of the atlas; returns the max relative residual over family functions.
 */
inline double kernel_leibniz_residual(const GroupAtlas& a, const VecC& F, const VecC& G) {
  // per-irrep matrix product in coefficient layout
  auto prod = [&](const VecC& A, const VecC& B) {
    VecC out = VecC::Zero(a.coeff_dim);
    for (int r = 0; r < a.irrep_count(); ++r) {
      int d = a.irreps[r].dim, o = a.offset[r];
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          for (int l = 0; l < d; ++l) out(o + i * d + j) += A(o + i * d + l) * B(o + l * d + j);
    }
    return out;
  };
  VecC g = a.inv * G;
  VecC conv = VecC::Zero(a.size());  // (g * f)(x) = int g(y) f(y^{-1} x) dy
  for (int x = 0; x < a.size(); ++x) {
    cplx acc = 0;
    for (int y = 0; y < a.size(); ++y) {
      GroupElement z = multiply(inverse(a.nodes[y]), a.nodes[x]);
      acc += a.weights[y] * g(y) * (a.synthesis_row(z).transpose() * F)(0);
    }
    conv(x) = acc;
  }
  auto fam = difference_family(a, 1);
  VecC FG = prod(F, G);
  double worst = 0;
  for (auto& qf : fam.funcs) {
    VecC q(a.size());
    for (int x = 0; x < a.size(); ++x) q(x) = qf[x];
    VecC lhs = a.fwd * (q.asDiagonal() * (a.inv * FG));
    VecC rhs = a.fwd * (q.asDiagonal() * conv);
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff() / std::max(1.0, lhs.cwiseAbs().maxCoeff()));
  }
  return worst;
}

}  // namespace bising
