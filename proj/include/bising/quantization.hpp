/**
 * @file quantization.hpp
 * @brief Finite sections of Op(a), symbol extraction, right-convolution kernels and
 * partial (frozen-factor) operators.
 */
#pragma once

#include "symbol.hpp"

namespace bising {

/**
 * @brief Finite section of an operator on the stacked coefficient space of the
 * truncated dual of G1 x G2, global index c1 * N2 + c2. Stored sparse until the
 * fill exceeds `kDenseFill`, then dense.
 */
struct Operator {
  static constexpr double kDenseFill = 0.1;
  int n = 0;
  bool is_dense = false;
  SpMatC sp;
  MatC dn;

  MatC dense() const { return is_dense ? dn : MatC(sp); }
  double fill() const { return is_dense ? 1.0 : double(sp.nonZeros()) / (double(n) * n); }
  void normalize() {
    if (!is_dense && n > 0 && fill() > kDenseFill) {
      dn = MatC(sp);
      sp = SpMatC();
      is_dense = true;
    }
  }
};

inline Operator make_operator(SpMatC m) {
  Operator o;
  o.n = static_cast<int>(m.rows());
  o.sp = std::move(m);
  o.normalize();
  return o;
}

inline Operator make_operator(MatC m) {
  Operator o;
  o.n = static_cast<int>(m.rows());
  o.dn = std::move(m);
  o.is_dense = true;
  return o;
}

inline Operator identity_operator(int n) {
  SpMatC m(n, n);
  m.setIdentity();
  return make_operator(m);
}

inline Operator operator*(const Operator& a, const Operator& b) {
  if (!a.is_dense && !b.is_dense) return make_operator(SpMatC(a.sp * b.sp));
  if (a.is_dense && b.is_dense) return make_operator(MatC(a.dn * b.dn));
  if (a.is_dense) return make_operator(MatC(a.dn * b.sp));
  return make_operator(MatC(a.sp * b.dn));
}

/** @brief a + c b. */
inline Operator op_add(const Operator& a, const Operator& b, cplx c = 1.0) {
  if (!a.is_dense && !b.is_dense) return make_operator(SpMatC(a.sp + c * b.sp));
  return make_operator(MatC(a.dense() + c * b.dense()));
}

/** @brief Plancherel weights d1 d2 per global coefficient index. */
inline VecR plancherel_weights(const SymbolSpace& sp) {
  const auto& a1 = *sp.f[0].dual;
  const auto& a2 = *sp.f[1].dual;
  VecR w(sp.N1() * sp.N2());
  for (int c1 = 0; c1 < a1.coeff_dim; ++c1)
    for (int c2 = 0; c2 < a2.coeff_dim; ++c2)
      w(c1 * sp.N2() + c2) = double(a1.irreps[a1.coef_irrep[c1]].dim) * a2.irreps[a2.coef_irrep[c2]].dim;
  return w;
}

/** @brief L2(G) adjoint in the coefficient basis: D^{-1} A^* D, D = Plancherel weights. */
inline Operator hilbert_adjoint(const Operator& a, const VecR& w) {
  VecR winv = w.cwiseInverse();
  if (a.is_dense) return make_operator(MatC(winv.asDiagonal() * a.dn.adjoint() * w.asDiagonal()));
  SpMatC t = a.sp.adjoint();
  return make_operator(SpMatC(winv.asDiagonal() * t * w.asDiagonal()));
}

/** @brief One x-Fourier mode of a symbol: function index per factor and its coefficient matrix. */
struct XMode {
  int cx1 = 0, cx2 = 0;
  MatC A;
};

/** @brief x-Fourier modes of a symbol on the sampling grids (dropping zero modes). */
inline std::vector<XMode> x_modes(const BisingularSymbol& s) {
  std::vector<XMode> out;
  if (s.x_independent()) {
    out.push_back({0, 0, s.slots[0]});
    return out;
  }
  const auto& g1 = *s.space->f[0].xgrid;
  const auto& g2 = *s.space->f[1].xgrid;
  int X2 = s.space->X2();
  double scale_v = 0;
  for (auto& c : s.slots) scale_v = std::max(scale_v, c.cwiseAbs().maxCoeff());
  // transform along x1 first, then along x2
  std::vector<MatC> half(g1.coeff_dim * X2, MatC::Zero(s.space->N1(), s.space->N2()));
  for (int cx1 = 0; cx1 < g1.coeff_dim; ++cx1)
    for (int x2 = 0; x2 < X2; ++x2) {
      MatC& acc = half[cx1 * X2 + x2];
      for (int x1 = 0; x1 < g1.size(); ++x1) acc += g1.fwd(cx1, x1) * s.slots[x1 * X2 + x2];
    }
  for (int cx1 = 0; cx1 < g1.coeff_dim; ++cx1)
    for (int cx2 = 0; cx2 < g2.coeff_dim; ++cx2) {
      MatC acc = MatC::Zero(s.space->N1(), s.space->N2());
      for (int x2 = 0; x2 < X2; ++x2) acc += g2.fwd(cx2, x2) * half[cx1 * X2 + x2];
      if (acc.cwiseAbs().maxCoeff() <= 1e-15 * std::max(scale_v, 1e-300)) continue;
      out.push_back({cx1, cx2, std::move(acc)});
    }
  return out;
}

/**
 * @brief Finite section of Op(a): sum over x-modes of (Mult1 (x) Mult2) composed with the
 * block-diagonal left multiplication by the mode's coefficient symbol. Exact at truncation.
 */
inline Operator quantize(const BisingularSymbol& s) {
  const SymbolSpace& sp = *s.space;
  const auto& a1 = *sp.f[0].dual;
  const auto& a2 = *sp.f[1].dual;
  const int N1 = sp.N1(), N2 = sp.N2(), N = N1 * N2;
  auto modes = x_modes(s);
  const auto& M1 = sp.mult(1);
  const auto& M2 = sp.mult(2);
  std::vector<cplx> acc(N, 0.0);
  std::vector<char> mark(N, 0);
  std::vector<int> touched;
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int c1 = 0; c1 < N1; ++c1) {
    int r1 = a1.coef_irrep[c1], d1 = a1.irreps[r1].dim, o1 = a1.offset[r1];
    int v1 = a1.coef_i[c1], i1 = a1.coef_j[c1];
    for (int c2 = 0; c2 < N2; ++c2) {
      int r2 = a2.coef_irrep[c2], d2 = a2.irreps[r2].dim, o2 = a2.offset[r2];
      int v2 = a2.coef_i[c2], i2 = a2.coef_j[c2];
      int col = c1 * N2 + c2;
      for (auto& m : modes) {
        const SpMatC& m1 = M1[m.cx1];
        const SpMatC& m2 = M2[m.cx2];
        for (int p1 = 0; p1 < d1; ++p1)
          for (int p2 = 0; p2 < d2; ++p2) {
            cplx val = m.A(o1 + p1 * d1 + v1, o2 + p2 * d2 + v2);
            if (val == 0.0) continue;
            int q1 = o1 + p1 * d1 + i1, q2 = o2 + p2 * d2 + i2;
            for (SpMatC::InnerIterator it1(m1, q1); it1; ++it1)
              for (SpMatC::InnerIterator it2(m2, q2); it2; ++it2) {
                int row = static_cast<int>(it1.row()) * N2 + static_cast<int>(it2.row());
                if (!mark[row]) {
                  mark[row] = 1;
                  touched.push_back(row);
                }
                acc[row] += val * it1.value() * it2.value();
              }
          }
      }
      for (int row : touched) {
        if (acc[row] != 0.0) trip.emplace_back(row, col, acc[row]);
        acc[row] = 0.0;
        mark[row] = 0;
      }
      touched.clear();
    }
  }
  SpMatC out(N, N);
  out.setFromTriplets(trip.begin(), trip.end());
  return make_operator(std::move(out));
}

/** @brief Per-node extraction map E(x)[(xi,l,v),(xi,v,i)] = conj(xi(x)_{il}) / d on one factor. */
inline SpMatC extraction_map(const GroupAtlas& dual, const GroupElement& x) {
  std::vector<Eigen::Triplet<cplx>> t;
  for (int r = 0; r < dual.irrep_count(); ++r) {
    int d = dual.irreps[r].dim, o = dual.offset[r];
    MatC m = rep_matrix(dual.kind, dual.irreps[r].label, x);
    for (int l = 0; l < d; ++l)
      for (int v = 0; v < d; ++v)
        for (int i = 0; i < d; ++i) t.emplace_back(o + l * d + v, o + v * d + i, std::conj(m(i, l)) / double(d));
  }
  SpMatC e(dual.coeff_dim, dual.coeff_dim);
  e.setFromTriplets(t.begin(), t.end());
  return e;
}

/**
 * @brief Symbol of a finite-section operator at the x-grid nodes:
 * sigma(x,xi) = xi(x)^* (A xi)(x), evaluated exactly (no x-band projection).
 * The radius is left at the cutoff; callers that know how many x-dependent factors
 * entered A lower it by the lost headroom (see exact_composition_symbol).
 */
inline BisingularSymbol symbol_of_operator(const Operator& A, const SpacePtr& spp, double m1 = 0, double m2 = 0) {
  const SymbolSpace& sp = *spp;
  const int N1 = sp.N1(), N2 = sp.N2(), X1 = sp.X1(), X2 = sp.X2();
  if (A.n != N1 * N2) throw ConfigError("operator does not match the symbol space");
  BisingularSymbol out = zero_symbol(spp, m1, m2, false);
  std::vector<SpMatC> E1, E2;
  for (int x = 0; x < X1; ++x) E1.push_back(extraction_map(*sp.f[0].dual, sp.f[0].xgrid->nodes[x]));
  for (int x = 0; x < X2; ++x) E2.push_back(extraction_map(*sp.f[1].dual, sp.f[1].xgrid->nodes[x]));
  // synthesis rows of all x-nodes, processed per x1 to bound memory
  for (int x1 = 0; x1 < X1; ++x1) {
    MatC S(X2, N1 * N2);
    for (int x2 = 0; x2 < X2; ++x2)
      for (int c1 = 0; c1 < N1; ++c1)
        S.row(x2).segment(c1 * N2, N2) = sp.f[0].synth(x1, c1) * sp.f[1].synth.row(x2);
    MatC W = A.is_dense ? MatC(S * A.dn) : MatC(S * A.sp);
    for (int x2 = 0; x2 < X2; ++x2) {
      MatC Wm(N1, N2);
      for (int c1 = 0; c1 < N1; ++c1) Wm.row(c1) = W.row(x2).segment(c1 * N2, N2);
      MatC tmp = E1[x1] * Wm;
      out.slots[x1 * X2 + x2] = MatC((E2[x2] * tmp.transpose()).transpose());
    }
  }
  return out;
}

/** @brief Exact composition symbol at truncation: symbol of Op(a) Op(b). */
inline BisingularSymbol exact_composition_symbol(const BisingularSymbol& a, const BisingularSymbol& b) {
  check_space(a, b);
  Operator c = quantize(a) * quantize(b);
  BisingularSymbol s = symbol_of_operator(c, a.space, a.m1 + b.m1, a.m2 + b.m2);
  s.radius1 = std::min(a.radius1, b.radius1) - x_loss(a, 1) - x_loss(b, 1);
  s.radius2 = std::min(a.radius2, b.radius2) - x_loss(a, 2) - x_loss(b, 2);
  return s;
}

/** @brief Exact adjoint symbol at truncation: symbol of the L2 adjoint of Op(a). */
inline BisingularSymbol exact_adjoint_symbol(const BisingularSymbol& a) {
  Operator c = hilbert_adjoint(quantize(a), plancherel_weights(*a.space));
  BisingularSymbol s = symbol_of_operator(c, a.space, a.m1, a.m2);
  s.radius1 = a.radius1 - x_loss(a, 1);
  s.radius2 = a.radius2 - x_loss(a, 2);
  return s;
}

/** @brief Left block multiplication in coefficient layout: (sigma F)(xi) = sigma(xi) F(xi). */
inline MatC block_apply(const GroupAtlas& a1, const GroupAtlas& a2, const MatC& sigma, const MatC& F) {
  if (a1.kind == GroupKind::torus && a2.kind == GroupKind::torus) return sigma.cwiseProduct(F);
  MatC out = MatC::Zero(F.rows(), F.cols());
  for (int c1 = 0; c1 < a1.coeff_dim; ++c1) {
    int r1 = a1.coef_irrep[c1], d1 = a1.irreps[r1].dim, o1 = a1.offset[r1];
    int p1 = a1.coef_i[c1], i1 = a1.coef_j[c1];
    for (int c2 = 0; c2 < a2.coeff_dim; ++c2) {
      int r2 = a2.coef_irrep[c2], d2 = a2.irreps[r2].dim, o2 = a2.offset[r2];
      int p2 = a2.coef_i[c2], i2 = a2.coef_j[c2];
      cplx acc = 0;
      for (int v1 = 0; v1 < d1; ++v1)
        for (int v2 = 0; v2 < d2; ++v2) acc += sigma(o1 + p1 * d1 + v1, o2 + p2 * d2 + v2) * F(o1 + v1 * d1 + i1, o2 + v2 * d2 + i2);
      out(c1, c2) = acc;
    }
  }
  return out;
}

/** @brief Symbol coefficient matrix at arbitrary x (x-Fourier synthesis from the grid). */
inline MatC symbol_at(const BisingularSymbol& s, const std::vector<XMode>& modes, const GroupElement& x1, const GroupElement& x2) {
  if (s.x_independent()) return s.slots[0];
  VecC r1 = s.space->f[0].xgrid->synthesis_row(x1);
  VecC r2 = s.space->f[1].xgrid->synthesis_row(x2);
  MatC out = MatC::Zero(s.space->N1(), s.space->N2());
  for (auto& m : modes) out += (r1(m.cx1) * r2(m.cx2)) * m.A;
  return out;
}

/**
 * @brief Literal quantization formula on a grid: Op(sigma) f(x) =
 * sum d1 d2 Tr((xi1 (x) xi2)(x) sigma(x,xi) f^(xi)).
 */
inline FieldOnG quantize_apply(const BisingularSymbol& s, const FieldOnG& f) {
  const auto& d1 = *s.space->f[0].dual;
  const auto& d2 = *s.space->f[1].dual;
  if (f.atlas1->kind != d1.kind || f.atlas1->cutoff2 != d1.cutoff2 || f.atlas2->kind != d2.kind || f.atlas2->cutoff2 != d2.cutoff2)
    throw ConfigError("field atlas does not match the symbol's truncated dual");
  Spectrum F = fourier_forward(f);
  auto modes = x_modes(s);
  FieldOnG out(f.atlas1, f.atlas2);
  MatC fixed;
  if (s.x_independent()) fixed = block_apply(d1, d2, s.slots[0], F.coef);
  for (int x1 = 0; x1 < f.atlas1->size(); ++x1)
    for (int x2 = 0; x2 < f.atlas2->size(); ++x2) {
      MatC g = s.x_independent() ? fixed : block_apply(d1, d2, symbol_at(s, modes, f.atlas1->nodes[x1], f.atlas2->nodes[x2]), F.coef);
      out.values(x1, x2) = (f.atlas1->inv.row(x1) * g * f.atlas2->inv.row(x2).transpose())(0, 0);
    }
  return out;
}

/** @brief Apply a finite-section operator to a spectrum (coefficient matrix). */
inline MatC operator_apply(const Operator& A, const MatC& F) {
  int N1 = static_cast<int>(F.rows()), N2 = static_cast<int>(F.cols());
  VecC v(N1 * N2);
  for (int c1 = 0; c1 < N1; ++c1)
    for (int c2 = 0; c2 < N2; ++c2) v(c1 * N2 + c2) = F(c1, c2);
  VecC w = A.is_dense ? VecC(A.dn * v) : VecC(A.sp * v);
  MatC out(N1, N2);
  for (int c1 = 0; c1 < N1; ++c1)
    for (int c2 = 0; c2 < N2; ++c2) out(c1, c2) = w(c1 * N2 + c2);
  return out;
}

/** @brief Operator in the grid-value basis of two atlases: (inv1 (x) inv2) A (fwd1 (x) fwd2). */
inline MatC grid_basis_matrix(const Operator& A, const GroupAtlas& g1, const GroupAtlas& g2) {
  int M1 = g1.size(), M2 = g2.size(), N2 = g2.coeff_dim;
  MatC out(M1 * M2, M1 * M2);
  for (int y1 = 0; y1 < M1; ++y1)
    for (int y2 = 0; y2 < M2; ++y2) {
      MatC F = g1.fwd.col(y1) * g2.fwd.col(y2).transpose();
      MatC G = operator_apply(A, F);
      MatC vals = g1.inv * G * g2.inv.transpose();
      for (int x1 = 0; x1 < M1; ++x1)
        for (int x2 = 0; x2 < M2; ++x2) out(x1 * M2 + x2, y1 * M2 + y2) = vals(x1, x2);
    }
  (void)N2;
  return out;
}

/** @brief Full right-convolution kernel at x-slot s on a y-atlas pair: R = inv1 sigma inv2^T. */
inline MatC right_kernel(const BisingularSymbol& s, int slot, const GroupAtlas& y1, const GroupAtlas& y2) {
  return y1.inv * s.slots[s.x_independent() ? 0 : slot] * y2.inv.transpose();
}

/** @brief Symbol coefficients from a full kernel on the dual atlases (orthogonality inversion). */
inline MatC symbol_from_kernel(const MatC& R, const GroupAtlas& y1, const GroupAtlas& y2) { return y1.fwd * R * y2.fwd.transpose(); }

/** @brief Partial kernel R1(x, y1, xi2): rows y1, columns the xi2 coefficients (matrix entries). */
inline MatC partial_kernel_1(const BisingularSymbol& s, int slot, const GroupAtlas& y1) { return y1.inv * s.slots[s.x_independent() ? 0 : slot]; }

/** @brief Partial kernel R2(x, xi1, y2): rows the xi1 coefficients, columns y2. */
inline MatC partial_kernel_2(const BisingularSymbol& s, int slot, const GroupAtlas& y2) {
  return s.slots[s.x_independent() ? 0 : slot] * y2.inv.transpose();
}

/**
 * @brief Frozen partial operator a(x1, x2, D1, xi2) at a fixed x2 slot and xi2 irrep, acting
 * on H_{xi2}-valued functions on G1 (the right H_{xi2} index is a spectator). Index
 * c1 * d2 + p for the coefficient c1 and the H_{xi2} component p.
 * For factor 2 the roles swap: a(x1, x2, xi1, D2) at a fixed x1 slot and xi1 irrep.
 */
inline MatC partial_operator(const BisingularSymbol& s, int factor, int frozen_slot, int frozen_irrep) {
  const SymbolSpace& sp = *s.space;
  const int fa = factor - 1, fo = 2 - factor;
  const FactorSpace& F = sp.f[fa];
  const GroupAtlas& a = *F.dual;
  const GroupAtlas& b = *sp.f[fo].dual;
  const int Na = a.coeff_dim, db = b.irreps[frozen_irrep].dim, ob = b.offset[frozen_irrep];
  const int Xa = F.X();
  // coefficient symbol along the active factor: slots over active x, frozen other x
  auto get = [&](int xa, int ca, int p, int v) -> cplx {
    int x1 = factor == 1 ? xa : frozen_slot, x2 = factor == 1 ? frozen_slot : xa;
    const MatC& c = s.x_independent() ? s.slots[0] : s.at(x1, x2);
    int cb = ob + p * db + v;
    return factor == 1 ? c(ca, cb) : c(cb, ca);
  };
  // x-modes along the active factor
  const GroupAtlas& xg = *F.xgrid;
  int nmodes = s.x_independent() ? 1 : xg.coeff_dim;
  const auto& M = sp.mult(factor);
  int n = Na * db;
  MatC out = MatC::Zero(n, n);
  for (int cx = 0; cx < nmodes; ++cx) {
    // mode coefficient A_cx(ca, p, v)
    MatC Am = MatC::Zero(Na, db * db);
    for (int ca = 0; ca < Na; ++ca)
      for (int p = 0; p < db; ++p)
        for (int v = 0; v < db; ++v) {
          if (s.x_independent()) {
            Am(ca, p * db + v) = get(0, ca, p, v);
            continue;
          }
          cplx acc = 0;
          for (int x = 0; x < Xa; ++x) acc += xg.fwd(cx, x) * get(x, ca, p, v);
          Am(ca, p * db + v) = acc;
        }
    if (Am.cwiseAbs().maxCoeff() == 0.0) continue;
    MatC blk = MatC::Zero(n, n);
    // block: out[(xi,pa,ia), p] = sum_{va, v} a[(pa p),(va v)] in[(xi,va,ia), v]
    for (int r = 0; r < a.irrep_count(); ++r) {
      int d = a.irreps[r].dim, o = a.offset[r];
      for (int pa = 0; pa < d; ++pa)
        for (int va = 0; va < d; ++va)
          for (int ia = 0; ia < d; ++ia)
            for (int p = 0; p < db; ++p)
              for (int v = 0; v < db; ++v)
                blk((o + pa * d + ia) * db + p, (o + va * d + ia) * db + v) += Am(o + pa * d + va, p * db + v);
    }
    MatC mk = MatC::Zero(n, n);
    MatC mm = MatC(M[cx]);
    for (int i = 0; i < Na; ++i)
      for (int j = 0; j < Na; ++j)
        if (mm(i, j) != 0.0)
          for (int p = 0; p < db; ++p) mk(i * db + p, j * db + p) = mm(i, j);
    out += mk * blk;
  }
  return out;
}

/**
 * @brief Write the factor symbol of a partial operator P (layout of partial_operator) into
 * `out` at the frozen slot and irrep, at every active x-grid node.
 */
inline void extract_partial(const MatC& P, BisingularSymbol& out, int factor, int frozen_slot, int frozen_irrep) {
  const SymbolSpace& sp = *out.space;
  const int fa = factor - 1, fo = 2 - factor;
  const FactorSpace& F = sp.f[fa];
  const GroupAtlas& a = *F.dual;
  const GroupAtlas& b = *sp.f[fo].dual;
  const int Na = a.coeff_dim, db = b.irreps[frozen_irrep].dim, ob = b.offset[frozen_irrep];
  for (int xa = 0; xa < F.X(); ++xa) {
    // W[(p), (c, v)] = sum_c' synth(xa, c') P[(c', p), (c, v)]
    MatC W = MatC::Zero(db, Na * db);
    for (int c = 0; c < Na; ++c) {
      cplx sv = F.synth(xa, c);
      if (sv == 0.0) continue;
      for (int p = 0; p < db; ++p) W.row(p) += sv * P.row(c * db + p);
    }
    int x1 = factor == 1 ? xa : frozen_slot, x2 = factor == 1 ? frozen_slot : xa;
    MatC& slot = out.at(x1, x2);
    const GroupElement& node = F.xgrid->nodes[xa];
    for (int r = 0; r < a.irrep_count(); ++r) {
      int d = a.irreps[r].dim, o = a.offset[r];
      MatC m = rep_matrix(a.kind, a.irreps[r].label, node);
      for (int l = 0; l < d; ++l)
        for (int v = 0; v < d; ++v)
          for (int p = 0; p < db; ++p)
            for (int w = 0; w < db; ++w) {
              cplx acc = 0;
              for (int i = 0; i < d; ++i) acc += std::conj(m(i, l)) * W(p, (o + v * d + i) * db + w);
              acc /= double(d);
              int ca = o + l * d + v, cb = ob + p * db + w;
              if (factor == 1)
                slot(ca, cb) = acc;
              else
                slot(cb, ca) = acc;
            }
    }
  }
}

/** @brief Apply a frozen partial operator to a scalar function on the active factor's dual grid. */
inline std::vector<MatC> partial_apply(const BisingularSymbol& s, int factor, int frozen_slot, int frozen_irrep, const VecC& phi) {
  const SymbolSpace& sp = *s.space;
  const GroupAtlas& a = *sp.f[factor - 1].dual;
  const GroupAtlas& b = *sp.f[2 - factor].dual;
  int db = b.irreps[frozen_irrep].dim, Na = a.coeff_dim;
  MatC P = partial_operator(s, factor, frozen_slot, frozen_irrep);
  VecC ph = a.fwd * phi;
  std::vector<MatC> out(a.size(), MatC::Zero(db, db));
  // input phi (x) I: component v of column w is phi^ delta_{vw}
  for (int w = 0; w < db; ++w) {
    VecC in = VecC::Zero(Na * db);
    for (int c = 0; c < Na; ++c) in(c * db + w) = ph(c);
    VecC res = P * in;
    for (int x = 0; x < a.size(); ++x)
      for (int p = 0; p < db; ++p) {
        cplx acc = 0;
        for (int c = 0; c < Na; ++c) acc += a.inv(x, c) * res(c * db + p);
        out[x](p, w) = acc;
      }
  }
  return out;
}

/** @brief Exact partial composition a o_{xi_factor} b at truncation (frozen operators composed, then extracted). */
inline BisingularSymbol partial_compose(const BisingularSymbol& a, const BisingularSymbol& b, int factor) {
  check_space(a, b);
  const SymbolSpace& sp = *a.space;
  BisingularSymbol out = zero_symbol(a.space, a.m1 + b.m1, a.m2 + b.m2, false);
  out.radius1 = std::min(a.radius1, b.radius1);
  out.radius2 = std::min(a.radius2, b.radius2);
  (factor == 1 ? out.radius1 : out.radius2) -= x_loss(a, factor) + x_loss(b, factor);
  const FactorSpace& other = sp.f[2 - factor];
  for (int xs = 0; xs < other.X(); ++xs)
    for (int r = 0; r < other.dual->irrep_count(); ++r) {
      MatC P = partial_operator(a, factor, xs, r) * partial_operator(b, factor, xs, r);
      extract_partial(P, out, factor, xs, r);
    }
  return out;
}

/** @brief Exact partial adjoint sigma^{*factor}: factor-L2 adjoint of the frozen operators, then extracted. */
inline BisingularSymbol partial_adjoint(const BisingularSymbol& s, int factor) {
  const SymbolSpace& sp = *s.space;
  BisingularSymbol out = zero_symbol(s.space, s.m1, s.m2, false);
  out.radius1 = s.radius1;
  out.radius2 = s.radius2;
  (factor == 1 ? out.radius1 : out.radius2) -= x_loss(s, factor);
  const GroupAtlas& a = *sp.f[factor - 1].dual;
  const FactorSpace& other = sp.f[2 - factor];
  for (int xs = 0; xs < other.X(); ++xs)
    for (int r = 0; r < other.dual->irrep_count(); ++r) {
      int db = other.dual->irreps[r].dim;
      VecR w(a.coeff_dim * db);
      for (int c = 0; c < a.coeff_dim; ++c)
        for (int p = 0; p < db; ++p) w(c * db + p) = a.irreps[a.coef_irrep[c]].dim;
      MatC P = partial_operator(s, factor, xs, r);
      MatC Ps = w.cwiseInverse().asDiagonal() * P.adjoint() * w.asDiagonal();
      extract_partial(Ps, out, factor, xs, r);
    }
  return out;
}

/**
 * @brief Symbol of the inverses of the frozen partial operators in one factor (the
 * finite sections are inverted exactly, then extracted). Throws on singular sections.
 */
inline BisingularSymbol partial_inverse(const BisingularSymbol& s, int factor) {
  const SymbolSpace& sp = *s.space;
  BisingularSymbol out = zero_symbol(s.space, -s.m1, -s.m2, false);
  out.radius1 = s.radius1;
  out.radius2 = s.radius2;
  (factor == 1 ? out.radius1 : out.radius2) -= x_loss(s, factor);
  const FactorSpace& other = sp.f[2 - factor];
  for (int xs = 0; xs < other.X(); ++xs)
    for (int r = 0; r < other.dual->irrep_count(); ++r) {
      Eigen::FullPivLU<MatC> lu(partial_operator(s, factor, xs, r));
      if (!lu.isInvertible()) throw ConfigError("frozen partial operator is singular");
      extract_partial(lu.inverse(), out, factor, xs, r);
    }
  return out;
}

}  // namespace bising
