/**
 * @file calculus.hpp
 * @brief Asymptotic calculus: composition and adjoint expansions against exact
 * oracles, asymptotic summation, biellipticity surrogates and parametrices.
 */
#pragma once

#include <array>
#include <limits>
#include <map>
#include <optional>

#include "quantization.hpp"

namespace bising {

// ---------------------------------------------------------------- decay metrics

/** @brief One remainder entry: expansion level N and dyadic shell (l1, l2). */
struct ShellRow {
  int N = 0, l1 = 0, l2 = 0;
  double value = 0;
};

/** @brief Fitted decay exponents per factor (positive = decay) and the number of fit points. */
struct SlopePair {
  double s1 = std::numeric_limits<double>::quiet_NaN(), s2 = std::numeric_limits<double>::quiet_NaN();
  int n1 = 0, n2 = 0;
};

/**
 * @brief Normalized remainder rho(r1, r2) = max_x ||r(x,xi)|| <xi1>^{-M1} <xi2>^{-M2}
 * over in-radius keys; out-of-radius keys are NaN.
 */
inline MatR normalized_profile(const BisingularSymbol& r, double M1, double M2) {
  const auto& a1 = *r.space->f[0].dual;
  const auto& a2 = *r.space->f[1].dual;
  MatR rho = MatR::Constant(a1.irrep_count(), a2.irrep_count(), std::numeric_limits<double>::quiet_NaN());
  for_each_block(*r.space, [&](int r1, int r2) {
    if (!r.in_radius(r1, r2)) return;
    double w = std::pow(a1.irreps[r1].weight, -M1) * std::pow(a2.irreps[r2].weight, -M2);
    double best = 0;
    for (size_t s = 0; s < r.slots.size(); ++s) {
      double nrm = r.scalar_blocks() ? std::abs(r.slots[s](a1.offset[r1], a2.offset[r2])) : op_norm(r.block(static_cast<int>(s), r1, r2));
      best = std::max(best, nrm);
    }
    rho(r1, r2) = w * best;
  });
  return rho;
}

/** @brief Dyadic shell index floor(log2 <xi>). */
inline int shell_of(double weight) { return static_cast<int>(std::floor(std::log2(weight) + 1e-12)); }

/** @brief Shell table of a profile: max over keys in each (l1, l2) shell. */
inline std::vector<ShellRow> shell_table(const SymbolSpace& sp, const MatR& rho, int N) {
  const auto& a1 = *sp.f[0].dual;
  const auto& a2 = *sp.f[1].dual;
  std::map<std::pair<int, int>, double> acc;
  for (int r1 = 0; r1 < rho.rows(); ++r1)
    for (int r2 = 0; r2 < rho.cols(); ++r2) {
      if (std::isnan(rho(r1, r2))) continue;
      auto key = std::make_pair(shell_of(a1.irreps[r1].weight), shell_of(a2.irreps[r2].weight));
      auto it = acc.find(key);
      if (it == acc.end())
        acc[key] = rho(r1, r2);
      else
        it->second = std::max(it->second, rho(r1, r2));
    }
  std::vector<ShellRow> out;
  for (auto& [k, v] : acc) out.push_back({N, k.first, k.second, v});
  return out;
}

/**
 * @brief Fit region of a factor: keys in dyadic shells whose lower edge 2^l is at most
 * a quarter of the cutoff, within the exact radius. When fewer than three distinct
 * weights qualify (small SU(2) cutoffs) every in-radius key is used.
 */
struct FitRegion {
  const FactorSpace* f = nullptr;
  double radius = 0;
  double weight_bound = 0;  ///< exclusive upper bound on <xi>; infinity = radius only

  FitRegion(const FactorSpace& fs, double r) : f(&fs), radius(r) {
    double quarter = fs.cutoff() / 4.0;
    weight_bound = std::numeric_limits<double>::infinity();
    if (quarter >= 1.0) {
      double bound = std::ldexp(1.0, static_cast<int>(std::floor(std::log2(quarter))) + 1);
      std::vector<double> w;
      for (auto& ir : fs.dual->irreps)
        if (ir.weight < bound && label_radius(fs.kind, ir.label) <= r + 1e-9) w.push_back(ir.weight);
      std::sort(w.begin(), w.end());
      if (std::unique(w.begin(), w.end()) - w.begin() >= 3) weight_bound = bound;
    }
  }
  bool contains(int irrep) const {
    const auto& ir = f->dual->irreps[irrep];
    return ir.weight < weight_bound && label_radius(f->kind, ir.label) <= radius + 1e-9;
  }
};

/**
 * @brief Decay exponents of a profile: per factor, the sup over the other factor of
 * rho is fitted against log <xi_i> inside the fit region.
 */
inline SlopePair fit_profile_slopes(const BisingularSymbol& r, const MatR& rho) {
  SlopePair out;
  for (int f = 0; f < 2; ++f) {
    const FactorSpace& fs = r.space->f[f];
    FitRegion region(fs, f == 0 ? r.radius1 : r.radius2);
    std::map<double, double> prof;  // weight -> sup
    int count = f == 0 ? static_cast<int>(rho.rows()) : static_cast<int>(rho.cols());
    for (int i = 0; i < count; ++i) {
      const auto& ir = fs.dual->irreps[i];
      if (!region.contains(i)) continue;
      double best = -1;
      int other = f == 0 ? static_cast<int>(rho.cols()) : static_cast<int>(rho.rows());
      for (int j = 0; j < other; ++j) {
        double v = f == 0 ? rho(i, j) : rho(j, i);
        if (!std::isnan(v)) best = std::max(best, v);
      }
      if (best > 0) prof[ir.weight] = std::max(prof[ir.weight], best);
    }
    std::vector<double> xs, ys;
    for (auto& [w, v] : prof) {
      xs.push_back(std::log(w));
      ys.push_back(std::log(v));
    }
    if (xs.size() >= 2) {
      LineFit lf = fit_line(xs, ys);
      (f == 0 ? out.s1 : out.s2) = -lf.slope;
    }
    (f == 0 ? out.n1 : out.n2) = static_cast<int>(xs.size());
  }
  return out;
}

// ---------------------------------------------------------------- expansions

/** @brief Per-order terms, remainders against the exact oracle, shell tables and slopes. */
struct ExpansionReport {
  std::string kind;
  double m1 = 0, m2 = 0;                      ///< order of the exact symbol
  int N = 0;                                  ///< number of terms
  std::vector<BisingularSymbol> terms;        ///< c_j, order (m1 - j, m2 - j)
  std::vector<BisingularSymbol> primary;      ///< d'_j (diagonal double sum)
  std::vector<BisingularSymbol> remainders;   ///< r_n = exact - sum_{j<n} c_j, n = 1..N
  std::vector<ShellRow> shells;               ///< normalized remainder per (n, l1, l2)
  std::vector<SlopePair> slopes;              ///< per n = 1..N
  double oracle_residual = 0;                 ///< |partial sum + remainder - exact|, definitional
};

namespace detail {

inline int coordinate_count(GroupKind k) { return k == GroupKind::torus ? 1 : 3; }

/** @brief Pad a coordinate multi-index to the full difference family. */
inline MultiIndex embed_coordinate(GroupKind k, const MultiIndex& a) {
  MultiIndex e = a;
  if (k == GroupKind::su2) e.push_back(0);
  return e;
}

/** @brief Coordinate multi-indices of exact order n. */
inline std::vector<MultiIndex> coordinate_indices(GroupKind k, int n) {
  std::vector<MultiIndex> out;
  for (auto& a : multi_indices_upto(coordinate_count(k), n))
    if (order_of(a) == n) out.push_back(a);
  return out;
}

/** @brief Lazily cached pointwise terms (1/a1! a2!) Delta^{a1,a2} X * Y^{(a1,a2)}. */
class TermCache {
 public:
  using Maker = std::function<BisingularSymbol(const MultiIndex&, const MultiIndex&)>;
  explicit TermCache(Maker m) : make_(std::move(m)) {}
  const BisingularSymbol& get(const MultiIndex& a1, const MultiIndex& a2) {
    auto key = std::make_pair(a1, a2);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(key, make_(a1, a2)).first->second;
  }

 private:
  Maker make_;
  std::map<std::pair<MultiIndex, MultiIndex>, BisingularSymbol> cache_;
};

/** @brief Accumulate b into a (a may be empty). */
inline void accumulate(std::optional<BisingularSymbol>& a, const BisingularSymbol& b, cplx c = 1.0) {
  if (!a)
    a = c == cplx(1.0) ? b : scale(b, c);
  else
    a = add(*a, b, c);
}

/**
 * @brief Grouped expansion shared by composition and adjoint. `pointwise(a1,a2)` is the
 * diagonal term and `corrected(f, a)` the exact-in-factor-f term with expansion index a
 * in the other factor (already divided by a!).
 */
inline ExpansionReport grouped_expansion(const SpacePtr& sp, double m1, double m2, int N, TermCache& P,
                                         const std::function<BisingularSymbol(int, const MultiIndex&)>& corrected,
                                         const BisingularSymbol& exact, const std::string& kind) {
  if (N < 1) throw ConfigError("expansion order N must be at least 1");
  const GroupKind k1 = sp->f[0].kind, k2 = sp->f[1].kind;
  ExpansionReport rep;
  rep.kind = kind;
  rep.m1 = m1;
  rep.m2 = m2;
  rep.N = N;
  std::optional<BisingularSymbol> partial;
  for (int j = 0; j < N; ++j) {
    std::optional<BisingularSymbol> d1, c;
    for (auto& a1 : coordinate_indices(k1, j))
      for (auto& a2 : coordinate_indices(k2, j)) accumulate(d1, P.get(a1, a2));
    c = d1;
    // exact in factor 1, expansion of order j in factor 2
    for (auto& a2 : coordinate_indices(k2, j)) {
      accumulate(c, corrected(1, a2));
      for (int i = 0; i <= j; ++i)
        for (auto& a1 : coordinate_indices(k1, i)) accumulate(c, P.get(a1, a2), -1.0);
    }
    for (auto& a1 : coordinate_indices(k1, j)) {
      accumulate(c, corrected(2, a1));
      for (int i = 0; i <= j; ++i)
        for (auto& a2 : coordinate_indices(k2, i)) accumulate(c, P.get(a1, a2), -1.0);
    }
    c->m1 = m1 - j;
    c->m2 = m2 - j;
    d1->m1 = m1 - j;
    d1->m2 = m2 - j;
    rep.primary.push_back(*d1);
    rep.terms.push_back(*c);
    accumulate(partial, *c);
    BisingularSymbol r = subtract(exact, *partial);
    r.m1 = m1 - (j + 1);
    r.m2 = m2 - (j + 1);
    MatR rho = normalized_profile(r, m1, m2);
    auto rows = shell_table(*sp, rho, j + 1);
    rep.shells.insert(rep.shells.end(), rows.begin(), rows.end());
    rep.slopes.push_back(fit_profile_slopes(r, rho));
    if (j + 1 == N) rep.oracle_residual = max_difference(add(*partial, r), exact);
    rep.remainders.push_back(std::move(r));
  }
  return rep;
}

}  // namespace detail

/**
 * @brief Composition expansion of a # b to N terms: c_j = d'_j + d''_j + d'''_j with
 * the diagonal double sum d' and the o_{xi1}/o_{xi2}-corrected terms, compared with
 * the exact truncated composition.
 */
inline ExpansionReport compose_expansion(const BisingularSymbol& a, const BisingularSymbol& b, int N) {
  check_space(a, b);
  const SpacePtr& sp = a.space;
  const GroupKind k1 = sp->f[0].kind, k2 = sp->f[1].kind;
  detail::TermCache P([&](const MultiIndex& a1, const MultiIndex& a2) {
    BisingularSymbol da = difference_apply(a, detail::embed_coordinate(k1, a1), detail::embed_coordinate(k2, a2));
    BisingularSymbol db = taylor_derivative_apply(b, a1, a2);
    return scale(pointwise_product(da, db), 1.0 / (multi_factorial(a1) * multi_factorial(a2)));
  });
  auto corrected = [&](int f, const MultiIndex& al) {
    MultiIndex z1(detail::coordinate_count(k1), 0), z2(detail::coordinate_count(k2), 0);
    const MultiIndex& a1 = f == 1 ? z1 : al;
    const MultiIndex& a2 = f == 1 ? al : z2;
    BisingularSymbol da = difference_apply(a, detail::embed_coordinate(k1, a1), detail::embed_coordinate(k2, a2));
    BisingularSymbol db = taylor_derivative_apply(b, a1, a2);
    return scale(partial_compose(da, db, f), 1.0 / multi_factorial(al));
  };
  BisingularSymbol exact = exact_composition_symbol(a, b);
  return detail::grouped_expansion(sp, a.m1 + b.m1, a.m2 + b.m2, N, P, corrected, exact, "compose");
}

/**
 * @brief Adjoint expansion of sigma^* to N terms, with the exact partial adjoints
 * sigma^{*1}, sigma^{*2} in the corrected terms, compared with the exact adjoint.
 */
inline ExpansionReport adjoint_expansion(const BisingularSymbol& s, int N) {
  const SpacePtr& sp = s.space;
  const GroupKind k1 = sp->f[0].kind, k2 = sp->f[1].kind;
  BisingularSymbol star = pointwise_adjoint(s);
  detail::TermCache P([&](const MultiIndex& a1, const MultiIndex& a2) {
    BisingularSymbol d = difference_apply(star, detail::embed_coordinate(k1, a1), detail::embed_coordinate(k2, a2));
    return scale(taylor_derivative_apply(d, a1, a2), 1.0 / (multi_factorial(a1) * multi_factorial(a2)));
  });
  std::optional<BisingularSymbol> s1, s2;
  auto corrected = [&](int f, const MultiIndex& al) {
    auto& ps = f == 1 ? s1 : s2;
    if (!ps) ps = partial_adjoint(s, f);
    MultiIndex z1(detail::coordinate_count(k1), 0), z2(detail::coordinate_count(k2), 0);
    const MultiIndex& a1 = f == 1 ? z1 : al;
    const MultiIndex& a2 = f == 1 ? al : z2;
    BisingularSymbol d = difference_apply(*ps, detail::embed_coordinate(k1, a1), detail::embed_coordinate(k2, a2));
    return scale(taylor_derivative_apply(d, a1, a2), 1.0 / multi_factorial(al));
  };
  BisingularSymbol exact = exact_adjoint_symbol(s);
  return detail::grouped_expansion(sp, s.m1, s.m2, N, P, corrected, exact, "adjoint");
}

// ---------------------------------------------------------------- asymptotic sums

/** @brief Schedule t_j with the measured constants and the inequality it satisfies. */
struct AsymptoticSchedule {
  std::vector<double> t;          ///< t_j (t_0 recorded, the j = 0 term is not cut)
  std::vector<double> caps;       ///< measured constants C_j
  std::vector<double> lhs;        ///< C_j t_j^{e_j}
  std::vector<double> exponent;   ///< e_j: (m0' - mj')/2 + (m0'' - mj'')/2 (product) or the smaller half-gap (box)
  CutoffProfile psi{CutoffProfile::Kind::psi};
  bool holds() const {
    for (size_t j = 1; j < t.size(); ++j) {
      if (!(t[j] > 0 && t[j] < std::ldexp(1.0, -static_cast<int>(j)))) return false;
      if (t[j] >= t[j - 1]) return false;
      if (lhs[j] > std::ldexp(1.0, -static_cast<int>(j)) * (1 + 1e-12)) return false;
    }
    return true;
  }
};

/**
 * @brief Frequency cut applied to the terms j >= 1. The product cut psi(tE1) psi(tE2)
 * leaves sigma_j (psi psi - 1) on the strips where one frequency is small, which is not
 * of lower order; the box cut 1 - chi(tE1) chi(tE2) differs from 1 on a compact set only.
 */
enum class SumCut { box, product };

/** @brief Tuning for the schedule search. */
struct ScheduleHints {
  double start = 0.75;     ///< first trial t_j = start * 2^{-j}
  int key_cap = 1;         ///< seminorm key (min(j,cap), min(j,cap)) for the constants
  double margin = 1.0;     ///< accept t_j once C_j t_j^{e_j} <= margin * 2^{-j} (margin <= 1)
  SumCut cut = SumCut::box;
};

struct AsymptoticSum {
  BisingularSymbol symbol;
  AsymptoticSchedule schedule;
  std::vector<double> tail;  ///< seminorm of sigma - sum_{j<M} sigma_j at the order of sigma_M, M = 1..len-1
};

/**
 * @brief sigma = sigma_0 + sum_{j>=1} sigma_j (1 - chi(t_j E1) chi(t_j E2)), or the product cut. The constant C_j
 * is the measured seminorm of sigma_j at its own order; t_j is halved from the start
 * value until C_j t_j^{e_j} <= 2^{-j}, keeping t_j strictly decreasing. The tails
 * sigma - sum_{j<M} sigma_j are measured at the order of sigma_M.
 */
inline AsymptoticSum asymptotic_sum(const std::vector<BisingularSymbol>& terms, const ScheduleHints& hints = {},
                                    const SeminormKey& tail_key = {1, 1, 0, 0}) {
  if (terms.empty()) throw ConfigError("asymptotic sum needs at least one term");
  AsymptoticSum out;
  auto& sch = out.schedule;
  const double m0a = terms[0].m1, m0b = terms[0].m2;
  out.symbol = terms[0];
  sch.t.push_back(hints.start);
  sch.caps.push_back(0);
  sch.lhs.push_back(0);
  sch.exponent.push_back(0);
  for (size_t j = 1; j < terms.size(); ++j) {
    const auto& s = terms[j];
    if (s.m1 > terms[j - 1].m1 || s.m2 > terms[j - 1].m2) throw ConfigError("asymptotic sum needs decreasing orders");
    int a = std::min<int>(static_cast<int>(j), hints.key_cap);
    double C = seminorm_estimate(s, {a, a, a, a});
    // the box cut gains decay in one factor at a time
    double e = hints.cut == SumCut::product ? 0.5 * (m0a - s.m1) + 0.5 * (m0b - s.m2)
                                            : 0.5 * std::min(m0a - s.m1, m0b - s.m2);
    if (!(e > 0)) throw ConfigError("asymptotic sum needs orders decreasing in both factors");
    double cap = std::ldexp(1.0, -static_cast<int>(j));
    double t = std::min(hints.start * cap, 0.75 * sch.t.back());
    while (C * std::pow(t, e) > std::min(hints.margin, 1.0) * cap) t *= 0.5;
    sch.t.push_back(t);
    sch.caps.push_back(C);
    sch.lhs.push_back(C * std::pow(t, e));
    sch.exponent.push_back(e);
    BisingularSymbol cut = hints.cut == SumCut::product ? localize(s, sch.psi, t, t)
                                                        : subtract(s, localize(s, CutoffProfile{}, t, t));
    out.symbol = add(out.symbol, cut);
  }
  out.symbol.m1 = m0a;
  out.symbol.m2 = m0b;
  BisingularSymbol partial = terms[0];
  for (size_t M = 1; M < terms.size(); ++M) {
    BisingularSymbol rest = subtract(out.symbol, partial);
    rest.m1 = terms[M].m1;
    rest.m2 = terms[M].m2;
    out.tail.push_back(seminorm_estimate(rest, tail_key));
    partial = add(partial, terms[M]);
  }
  return out;
}

// ---------------------------------------------------------------- biellipticity

/** @brief Thresholds of the truncated biellipticity surrogate. */
struct BiellipticThresholds {
  double inverse_bound = 1e6;    ///< cap on sup <xi1>^{m1} <xi2>^{m2} ||a^{-1}||
  double condition = 1e8;        ///< cap on frozen-operator condition numbers
  double residual = 1e-8;        ///< cap on ||P P^{-1} - I||
  double singular_rel = 1e-12;   ///< relative smallest singular value treated as singular
  std::vector<std::pair<int, int>> exceptional;  ///< (label1, label2) keys exempt from clause (i)
};

struct BiellipticityReport {
  double invertible_keys = 0;    ///< fraction of (x, xi) keys with invertible a(x,xi)
  double inverse_bound = 0;
  double partial_cond_1 = 0, partial_cond_2 = 0;
  double partial_residual = 0;
  bool clause1 = false, clause2 = false, clause3 = false;
  std::string failure;           ///< first failing locus
  bool pass() const { return clause1 && clause2 && clause3; }
};

/**
 * @brief Clause (i): pointwise invertibility outside the exceptional set with the
 * weighted inverse bound; clauses (ii)/(iii): every frozen partial operator has a
 * bounded condition number and its computed inverse composes to the identity.
 */
inline BiellipticityReport biellipticity_check(const BisingularSymbol& a, const BiellipticThresholds& th = {}) {
  BiellipticityReport rep;
  const SymbolSpace& sp = *a.space;
  const auto& a1 = *sp.f[0].dual;
  const auto& a2 = *sp.f[1].dual;
  long total = 0, ok = 0;
  bool first = true;
  for (size_t s = 0; s < a.slots.size(); ++s)
    for_each_block(sp, [&](int r1, int r2) {
      bool exempt = false;
      for (auto& e : th.exceptional)
        if (e.first == a1.irreps[r1].label && e.second == a2.irreps[r2].label) exempt = true;
      ++total;
      MatC b = a.block(static_cast<int>(s), r1, r2);
      Eigen::JacobiSVD<MatC> svd(b);
      const VecR& sv = svd.singularValues();
      bool inv = sv(0) > 0 && sv(sv.size() - 1) > th.singular_rel * sv(0);
      if (inv) {
        ++ok;
        double w = std::pow(a1.irreps[r1].weight, a.m1) * std::pow(a2.irreps[r2].weight, a.m2);
        if (!exempt) rep.inverse_bound = std::max(rep.inverse_bound, w / sv(sv.size() - 1));
      } else if (!exempt && first) {
        first = false;
        rep.failure = "singular symbol at x slot " + std::to_string(s) + ", key (" + label_string(a1.kind, a1.irreps[r1].label) +
                      ", " + label_string(a2.kind, a2.irreps[r2].label) + ")";
      }
    });
  rep.invertible_keys = total ? double(ok) / double(total) : 1.0;
  rep.clause1 = first && rep.inverse_bound <= th.inverse_bound;
  if (first && !rep.clause1) rep.failure = "inverse bound exceeds threshold";
  auto frozen = [&](int factor, double& cond, bool& clause) {
    const FactorSpace& other = sp.f[2 - factor];
    clause = true;
    for (int xs = 0; xs < other.X(); ++xs)
      for (int r = 0; r < other.dual->irrep_count(); ++r) {
        MatC P = partial_operator(a, factor, xs, r);
        Eigen::JacobiSVD<MatC> svd(P);
        const VecR& sv = svd.singularValues();
        double c = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
        cond = std::max(cond, c);
        double res = std::numeric_limits<double>::infinity();
        if (std::isfinite(c)) {
          MatC inv = Eigen::PartialPivLU<MatC>(P).inverse();
          res = (P * inv - MatC::Identity(P.rows(), P.cols())).cwiseAbs().maxCoeff();
        }
        rep.partial_residual = std::max(rep.partial_residual, res);
        if (!(c <= th.condition && res <= th.residual)) {
          if (clause && rep.failure.empty())
            rep.failure = "frozen operator in factor " + std::to_string(factor) + " not invertible at x slot " + std::to_string(xs);
          clause = false;
        }
      }
  };
  frozen(1, rep.partial_cond_1, rep.clause2);
  frozen(2, rep.partial_cond_2, rep.clause3);
  return rep;
}

// ---------------------------------------------------------------- parametrix

/** @brief Right and left parametrix data: partial sums and residual reports per N. */
struct ParametrixResult {
  BisingularSymbol right;        ///< sum_{j<N} b_j
  BisingularSymbol left;         ///< sum_{j<N} s_j # b_0
  BisingularSymbol right_cut;    ///< asymptotic_sum of the b_j with the psi schedule
  ExpansionReport right_report;  ///< remainders: symbol of I - Op(a) B_{<n}
  ExpansionReport left_report;   ///< remainders: symbol of I - B_{<n} Op(a)
  double two_sided_gap = 0;      ///< weighted sup of right - left at order (-N,-N) over the fit region
};

namespace detail {

/** @brief Record a residual symbol of order (-n,-n) into a report (normalized by the identity order). */
inline void record_residual(ExpansionReport& rep, BisingularSymbol r, int n) {
  r.m1 = -n;
  r.m2 = -n;
  MatR rho = normalized_profile(r, 0, 0);
  auto rows = shell_table(*r.space, rho, n);
  rep.shells.insert(rep.shells.end(), rows.begin(), rows.end());
  rep.slopes.push_back(fit_profile_slopes(r, rho));
  rep.remainders.push_back(std::move(r));
}

/** @brief Sup of <xi1>^{-m} <xi2>^{-m} ||s|| over the fit region of both factors. */
inline double fit_region_sup(const BisingularSymbol& s, double m) {
  MatR rho = normalized_profile(s, m, m);
  const SymbolSpace& sp = *s.space;
  FitRegion g1(sp.f[0], s.radius1), g2(sp.f[1], s.radius2);
  double best = 0;
  for (int r1 = 0; r1 < rho.rows(); ++r1)
    for (int r2 = 0; r2 < rho.cols(); ++r2) {
      if (std::isnan(rho(r1, r2))) continue;
      if (!g1.contains(r1) || !g2.contains(r2)) continue;
      best = std::max(best, rho(r1, r2));
    }
  return best;
}

}  // namespace detail

/**
 * @brief Leading parametrix term p1 + p2 - a^{-1}, where p_f inverts the frozen
 * operators of factor f. Its composition with a differs from 1 by a symbol of order (-1,-1).
 */
inline BisingularSymbol bisingular_inverse(const BisingularSymbol& a) {
  BisingularSymbol inv = pointwise_inverse(a);
  if (a.x_independent()) return inv;
  BisingularSymbol b = subtract(add(partial_inverse(a, 1), partial_inverse(a, 2)), inv);
  b.radius1 = a.radius1;
  b.radius2 = a.radius2;
  return b;
}

/**
 * @brief Parametrix by iteration at the operator level: B_0 = Op(a^{-1}),
 * R_1 = I - A B_0, B_j = B_0 R_1^j, so that A sum_{j<n} B_j = I - R_1^n; the left
 * variant uses S_1 = I - B_0 A and B_j = S_1^j B_0. Residual symbols are extracted
 * exactly at truncation; the radius is left at the cutoff and the fit region
 * (a quarter of the cutoff) keeps the edge out of the slopes.
 */
inline ParametrixResult parametrix(const BisingularSymbol& a, int N, const BiellipticThresholds& th = {}) {
  if (N < 1) throw ConfigError("parametrix order N must be at least 1");
  BiellipticityReport bi = biellipticity_check(a, th);
  if (!bi.pass()) throw ConfigError("symbol is not bielliptic: " + bi.failure);
  const SpacePtr& sp = a.space;
  // Leading term built from the inverted frozen operators: p1 + p2 - a^{-1}. With the plain
  // pointwise inverse the residual keeps pieces of order (0,-2) and (-2,0).
  BisingularSymbol b0 = bisingular_inverse(a);
  Operator A = quantize(a), B0 = quantize(b0);
  const int n = A.n;
  Operator I = identity_operator(n);
  Operator R1 = op_add(I, A * B0, -1.0), S1 = op_add(I, B0 * A, -1.0);
  ParametrixResult out;
  out.right_report.kind = "parametrix-right";
  out.left_report.kind = "parametrix-left";
  out.right_report.N = out.left_report.N = N;
  Operator Bsum = B0, Lsum = B0, Rj = R1, Sj = S1;
  std::vector<BisingularSymbol> bj{b0};
  for (int j = 1; j <= N; ++j) {
    detail::record_residual(out.right_report, symbol_of_operator(Rj, sp), j);
    detail::record_residual(out.left_report, symbol_of_operator(Sj, sp), j);
    if (j == N) break;
    Operator Bj = B0 * Rj, Lj = Sj * B0;
    bj.push_back(symbol_of_operator(Bj, sp, -a.m1 - j, -a.m2 - j));
    Bsum = op_add(Bsum, Bj);
    Lsum = op_add(Lsum, Lj);
    Rj = R1 * Rj;
    Sj = Sj * S1;
  }
  out.right = symbol_of_operator(Bsum, sp, -a.m1, -a.m2);
  out.left = symbol_of_operator(Lsum, sp, -a.m1, -a.m2);
  out.right_cut = asymptotic_sum(bj).symbol;
  out.two_sided_gap = detail::fit_region_sup(subtract(out.right, out.left), -N);
  return out;
}

}  // namespace bising
