#pragma once
/**
 * @file kernel_analysis.hpp
 * @brief Right-convolution kernels off the singular set: decay fits in every sign
 * regime of n_i + m_i, pointwise bounds, functional-calculus and cutoff-scaling sweeps,
 * vanishing orders and dyadic reconstruction.
 */

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "calculus.hpp"

namespace bising {

// ---------------------------------------------------------------- regimes

enum class KernelRegime { power, log, bounded };

inline const char* regime_name(KernelRegime r) {
  return r == KernelRegime::power ? "power" : r == KernelRegime::log ? "log" : "bounded";
}

/**
 * @brief Which decay bullet applies for s_i = n_i + m_i, and the expected fit per factor:
 * slope -s_i against ln|y_i| (power), slope 1 against ln|ln|y_i|| (log), nothing (bounded).
 */
struct RegimeDispatch {
  int bullet = 0;  ///< 1 (+,+), 2 (0,0), 3 (-,-), 4 (+,0), 5 (-,0), 6 (+,-), up to factor order
  KernelRegime r[2] = {KernelRegime::bounded, KernelRegime::bounded};
  double expected[2] = {0, 0};
};

inline RegimeDispatch regime_dispatch(double s1, double s2, double tol = 1e-12) {
  auto sign = [&](double s) { return s > tol ? 1 : (s < -tol ? -1 : 0); };
  RegimeDispatch d;
  const double s[2] = {s1, s2};
  for (int i = 0; i < 2; ++i) {
    int g = sign(s[i]);
    d.r[i] = g > 0 ? KernelRegime::power : g == 0 ? KernelRegime::log : KernelRegime::bounded;
    d.expected[i] = g > 0 ? -s[i] : g == 0 ? 1.0 : 0.0;
  }
  int a = sign(s1), b = sign(s2);
  if (a == b) d.bullet = a > 0 ? 1 : a == 0 ? 2 : 3;
  else if (a == 0 || b == 0) d.bullet = (a + b) > 0 ? 4 : 5;
  else d.bullet = 6;
  return d;
}

// ---------------------------------------------------------------- kernel evaluation

/** @brief Rows: elements; columns: coefficients, entry d xi(y)_{ji} (same convention as atlas.inv). */
inline MatC evaluation_matrix(const GroupAtlas& dual, const std::vector<GroupElement>& ys) {
  MatC E(static_cast<int>(ys.size()), dual.coeff_dim);
  for (size_t y = 0; y < ys.size(); ++y)
    for (int r = 0; r < dual.irrep_count(); ++r) {
      int d = dual.irreps[r].dim;
      MatC m = rep_matrix(dual.kind, dual.irreps[r].label, ys[y]);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) E(static_cast<int>(y), dual.offset[r] + i * d + j) = double(d) * m(j, i);
    }
  return E;
}

/**
 * @brief Sample points for kernels, refine times finer than the atlas grid. Torus: uniform
 * angles. SU(2): points along the three one-parameter subgroups of the orthonormal basis.
 */
inline std::vector<GroupElement> kernel_sample_points(const GroupAtlas& dual, int refine) {
  std::vector<GroupElement> ys;
  if (dual.kind == GroupKind::torus) {
    int n = refine * dual.resolution;
    for (int i = 0; i < n; ++i) ys.push_back(torus_element(2 * kPi * i / n));
    return ys;
  }
  int n = refine * dual.resolution;
  for (int k = 0; k < 3; ++k)
    for (int i = 1; i <= n; ++i) ys.push_back(exp_direction(GroupKind::su2, k, 2 * kPi * i / (n + 1)));
  return ys;
}

/** @brief Grid spacing of the atlas, in geodesic units. */
inline double atlas_spacing(const GroupAtlas& a) {
  return a.kind == GroupKind::torus ? 2 * kPi / a.resolution : kPi / a.resolution;
}

/** @brief Zero the coefficients whose labels lie outside the symbol's valid radius. */
inline BisingularSymbol radius_mask(const BisingularSymbol& s) {
  BisingularSymbol out = s;
  const auto& a1 = *s.space->f[0].dual;
  const auto& a2 = *s.space->f[1].dual;
  for (auto& c : out.slots)
    for (int c2 = 0; c2 < a2.coeff_dim; ++c2)
      for (int c1 = 0; c1 < a1.coeff_dim; ++c1) {
        bool in1 = label_radius(a1.kind, a1.irreps[a1.coef_irrep[c1]].label) <= s.radius1 + 1e-12;
        bool in2 = label_radius(a2.kind, a2.irreps[a2.coef_irrep[c2]].label) <= s.radius2 + 1e-12;
        if (!(in1 && in2)) c(c1, c2) = 0;
      }
  return out;
}

/**
 * @brief Squared raised-cosine frequency window cos^4(pi u / 2), u = sqrt(E / E_max). It
 * removes the truncation ringing while keeping most of the band.
 */
inline BisingularSymbol frequency_window(const BisingularSymbol& s) {
  const auto& a1 = *s.space->f[0].dual;
  const auto& a2 = *s.space->f[1].dual;
  double e1 = 1, e2 = 1;
  for (auto& r : a1.irreps) e1 = std::max(e1, r.eig);
  for (auto& r : a2.irreps) e2 = std::max(e2, r.eig);
  auto w = [](double e, double emax) { return std::pow(std::cos(0.5 * kPi * std::sqrt(e / emax)), 4); };
  BisingularSymbol out = s;
  for (auto& c : out.slots)
    for (int c2 = 0; c2 < a2.coeff_dim; ++c2)
      for (int c1 = 0; c1 < a1.coeff_dim; ++c1)
        c(c1, c2) *= w(a1.irreps[a1.coef_irrep[c1]].eig, e1) * w(a2.irreps[a2.coef_irrep[c2]].eig, e2);
  return out;
}

/**
 * @brief Kernel probe of order m on one factor, homogeneous so that the kernel carries no
 * lower-order corrections: |k|^m on the torus and (l + 1/2)^m on SU(2), zero on the trivial
 * torus character. For even m >= 0 these are local (polynomials in the Laplacian), so the
 * torus uses sign(k)|k|^m and SU(2) uses (l + 1/2)^{m-1} <xi>.
 */
inline double probe_value(const IrrepInfo& r, GroupKind kind, double m) {
  double rm = std::round(m);
  bool local = m >= 0 && std::abs(m - rm) < 1e-12 && static_cast<long>(rm) % 2 == 0;
  if (kind == GroupKind::torus) {
    if (r.label == 0) return 0.0;
    double a = std::pow(std::abs(double(r.label)), m);
    return local ? (r.label > 0 ? a : -a) : a;
  }
  double h = 0.5 * r.label + 0.5;
  return local ? std::pow(h, m - 1) * r.weight : std::pow(h, m);
}

inline BisingularSymbol probe_symbol(const SpacePtr& sp, double m1, double m2) {
  BisingularSymbol s = zero_symbol(sp, m1, m2);
  GroupKind k1 = sp->f[0].kind, k2 = sp->f[1].kind;
  s.slots[0] = multiplier_coef(
      *sp, [&](const IrrepInfo& r) { return probe_value(r, k1, m1); }, [&](const IrrepInfo& r) { return probe_value(r, k2, m2); });
  return s;
}

// ---------------------------------------------------------------- decay reports

struct DecaySample {
  double d1 = 0, d2 = 0, abs_k = 0, predicted = 0;
};

struct DecayOptions {
  int refine = 4;               ///< sample grid refinement over the atlas grid
  int bins = 24;                ///< log bins per factor
  double outer = kPi / 4;       ///< outer fit radius
  bool window = true;           ///< smooth frequency window before synthesis
  SeminormKey key{1, 1, 1, 1};  ///< seminorm reported as the constant
};

/** @brief Decay fit of |k_x(y)| against (|y1|, |y2|) in the regime of (n1+m1, n2+m2). */
struct DecayReport {
  std::vector<DecaySample> samples;  ///< tail envelope at the lower edges of the log bins
  RegimeDispatch regime;
  double fitted[2] = {std::nan(""), std::nan("")};
  double band[2] = {std::nan(""), std::nan("")};  ///< two standard errors
  double seminorm = 0;
  double sup_abs = 0;                ///< sup |k| off the singular set
  double decades[2] = {0, 0};
  bool degraded = false;

  /** @brief |fitted - expected| within rel_tol * |expected| for each fitted factor. */
  bool within(double power_tol, double log_tol) const {
    for (int i = 0; i < 2; ++i) {
      if (regime.r[i] == KernelRegime::bounded) continue;
      double tol = regime.r[i] == KernelRegime::power ? power_tol : log_tol;
      if (!(std::abs(fitted[i] - regime.expected[i]) <= tol * std::abs(regime.expected[i]))) return false;
    }
    return true;
  }

  std::string csv() const {
    std::ostringstream o;
    o.precision(12);
    o << "dist1,dist2,abs_k,predicted_bound,ratio\n";
    for (auto& s : samples) o << s.d1 << ',' << s.d2 << ',' << s.abs_k << ',' << s.predicted << ',' << s.abs_k / s.predicted << '\n';
    return o.str();
  }
};

namespace detail {

inline double regime_profile(KernelRegime r, double s, double d) {
  if (r == KernelRegime::power) return std::pow(d, -s);
  if (r == KernelRegime::log) return std::abs(std::log(d));
  return 1.0;
}

inline double regime_regressor(KernelRegime r, double d) {
  return r == KernelRegime::power ? std::log(d) : std::log(std::abs(std::log(d)));
}

}  // namespace detail

/** @brief Kernel values k_x(y1, y2) on the refined sample points at one x slot. */
struct KernelSamples {
  std::vector<double> d1, d2;
  MatC values;
};

inline KernelSamples sample_kernel(const BisingularSymbol& s, int slot, int refine, bool window) {
  const auto& a1 = *s.space->f[0].dual;
  const auto& a2 = *s.space->f[1].dual;
  BisingularSymbol t = radius_mask(s);
  if (window) t = frequency_window(t);
  auto y1 = kernel_sample_points(a1, refine), y2 = kernel_sample_points(a2, refine);
  KernelSamples ks;
  for (auto& g : y1) ks.d1.push_back(geodesic_distance(g));
  for (auto& g : y2) ks.d2.push_back(geodesic_distance(g));
  ks.values = evaluation_matrix(a1, y1) * t.slots[t.x_independent() ? 0 : slot] * evaluation_matrix(a2, y2).transpose();
  return ks;
}

/**
 * @brief Tail envelope sup{|k(y)| : r_i <= |y_i| <= outer} on log-spaced r_i from 2 grid
 * spacings to opts.outer, then a least-squares fit of its logarithm on the regressors of the
 * regime of (n1+m1, n2+m2). The envelope is what a bound of the theorem's form controls.
 */
inline DecayReport decay_report(const BisingularSymbol& s, int slot, const DecayOptions& opts = {}) {
  const auto& a1 = *s.space->f[0].dual;
  const auto& a2 = *s.space->f[1].dual;
  DecayReport rep;
  const double sdim[2] = {lie_dim(a1.kind) + s.m1, lie_dim(a2.kind) + s.m2};
  rep.regime = regime_dispatch(sdim[0], sdim[1]);
  rep.seminorm = seminorm_estimate(s, opts.key);
  KernelSamples ks = sample_kernel(s, slot, opts.refine, opts.window);
  const double inner[2] = {2 * atlas_spacing(a1), 2 * atlas_spacing(a2)};
  for (int i = 0; i < 2; ++i) rep.decades[i] = std::log10(opts.outer / inner[i]);
  rep.degraded = rep.decades[0] < 1 || rep.decades[1] < 1;
  auto bin_of = [&](double d, int f) {
    if (d < inner[f] || d > opts.outer) return -1;
    int b = static_cast<int>(std::floor(opts.bins * std::log(d / inner[f]) / std::log(opts.outer / inner[f])));
    return std::min(b, opts.bins - 1);
  };
  const int B = opts.bins;
  std::vector<DecaySample> env(static_cast<size_t>(B) * B);
  for (size_t i = 0; i < ks.d1.size(); ++i)
    for (size_t j = 0; j < ks.d2.size(); ++j) {
      double d1 = ks.d1[i], d2 = ks.d2[j];
      if (d1 <= 0 || d2 <= 0) continue;
      double v = std::abs(ks.values(static_cast<int>(i), static_cast<int>(j)));
      rep.sup_abs = std::max(rep.sup_abs, v);
      int b1 = bin_of(d1, 0), b2 = bin_of(d2, 1);
      if (b1 < 0 || b2 < 0) continue;
      auto& e = env[static_cast<size_t>(b1) * B + b2];
      if (v > e.abs_k) e = {d1, d2, v, 0};
    }
  // tail envelope M(r1, r2) = sup of |k| over r_i <= |y_i| <= outer, read at the bin lower edges
  for (int b1 = B - 1; b1 >= 0; --b1)
    for (int b2 = B - 1; b2 >= 0; --b2) {
      double& v = env[static_cast<size_t>(b1) * B + b2].abs_k;
      if (b1 + 1 < B) v = std::max(v, env[static_cast<size_t>(b1 + 1) * B + b2].abs_k);
      if (b2 + 1 < B) v = std::max(v, env[static_cast<size_t>(b1) * B + b2 + 1].abs_k);
    }
  auto edge = [&](int b, int f) { return inner[f] * std::pow(opts.outer / inner[f], double(b) / B); };
  std::vector<int> cols;
  for (int f = 0; f < 2; ++f)
    if (rep.regime.r[f] != KernelRegime::bounded) cols.push_back(f);
  std::vector<DecaySample> used;
  for (int b1 = 0; b1 < B; ++b1)
    for (int b2 = 0; b2 < B; ++b2) {
      double v = env[static_cast<size_t>(b1) * B + b2].abs_k;
      if (v > 0) used.push_back({edge(b1, 0), edge(b2, 1), v, 0});
    }
  for (auto& e : used)
    e.predicted = rep.seminorm * detail::regime_profile(rep.regime.r[0], sdim[0], e.d1) *
                  detail::regime_profile(rep.regime.r[1], sdim[1], e.d2);
  rep.samples = used;
  const int n = static_cast<int>(used.size()), p = 1 + static_cast<int>(cols.size());
  if (cols.empty() || n <= p) return rep;
  MatR A(n, p);
  VecR b(n);
  for (int r = 0; r < n; ++r) {
    A(r, 0) = 1.0;
    for (int c = 0; c < static_cast<int>(cols.size()); ++c) {
      int f = cols[c];
      A(r, c + 1) = detail::regime_regressor(rep.regime.r[f], f == 0 ? used[r].d1 : used[r].d2);
    }
    b(r) = std::log(used[r].abs_k);
  }
  VecR coef = A.colPivHouseholderQr().solve(b);
  VecR res = b - A * coef;
  double s2 = res.squaredNorm() / std::max(1, n - p);
  MatR cov = s2 * (A.transpose() * A).inverse();
  for (int c = 0; c < static_cast<int>(cols.size()); ++c) {
    rep.fitted[cols[c]] = coef(c + 1);
    rep.band[cols[c]] = 2 * std::sqrt(std::max(0.0, cov(c + 1, c + 1)));
  }
  return rep;
}

/**
 * @brief Dyadic reconstruction: the kernels of eta_{l1}(E1) eta_{l2}(E2) sigma summed over
 * all shells reproduce the kernel of sigma. Returns the max deviation relative to max |k|.
 */
inline double dyadic_reconstruction_residual(const BisingularSymbol& s, int slot, int refine = 1) {
  const auto& a1 = *s.space->f[0].dual;
  const auto& a2 = *s.space->f[1].dual;
  double emax = 1;
  for (auto& r : a1.irreps) emax = std::max(emax, r.eig);
  for (auto& r : a2.irreps) emax = std::max(emax, r.eig);
  CutoffProfile eta;
  int L = 1;
  while (std::ldexp(eta.lo, L) < emax) ++L;
  BisingularSymbol sum = zero_symbol(s.space, s.m1, s.m2, s.x_independent());
  for (int l1 = 0; l1 <= L; ++l1)
    for (int l2 = 0; l2 <= L; ++l2) sum = add(sum, localize_dyadic(s, eta, l1, l2));
  sum.radius1 = s.radius1;
  sum.radius2 = s.radius2;
  KernelSamples full = sample_kernel(s, slot, refine, false), parts = sample_kernel(sum, slot, refine, false);
  double scale = std::max(full.values.cwiseAbs().maxCoeff(), 1e-300);
  return (full.values - parts.values).cwiseAbs().maxCoeff() / scale;
}

// ---------------------------------------------------------------- pointwise bound

/** @brief Coefficient-space right derivative along basis direction k: F <- dxi(X_k) F per block. */
inline MatC coefficient_derivative(const GroupAtlas& a, int k) {
  MatC g = MatC::Zero(a.coeff_dim, a.coeff_dim);
  for (int r = 0; r < a.irrep_count(); ++r) {
    int d = a.irreps[r].dim, o = a.offset[r];
    const MatC& x = a.generators[r][k];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int l = 0; l < d; ++l) g(o + i * d + j, o + l * d + j) += x(i, l);
  }
  return g;
}

struct PointwiseBound {
  double value = 0;     ///< max |d_x^gamma d_z^theta (q^alpha k_x)(z)| over x slots and samples
  double seminorm = 0;  ///< seminorm with key (|alpha1|, |alpha2|, |gamma1|, |gamma2|)
  double ratio = 0;
};

/**
 * @brief Pointwise kernel bound: q^alpha k_x is the kernel of Delta^alpha sigma, x-derivatives
 * act on the symbol and right z-derivatives multiply the blocks by dxi(X). Refuses unless
 * |gamma_i| + m_i + n_i < |alpha_i| for both factors.
 */
inline PointwiseBound pointwise_bound_check(const BisingularSymbol& s, const MultiIndex& alpha1, const MultiIndex& alpha2,
                                            const MultiIndex& gamma1, const MultiIndex& gamma2, const MultiIndex& theta1,
                                            const MultiIndex& theta2, int refine = 2) {
  const auto& a1 = *s.space->f[0].dual;
  const auto& a2 = *s.space->f[1].dual;
  const int A[2] = {order_of(alpha1), order_of(alpha2)}, G[2] = {order_of(gamma1), order_of(gamma2)};
  const double m[2] = {s.m1, s.m2};
  const int n[2] = {lie_dim(a1.kind), lie_dim(a2.kind)};
  for (int i = 0; i < 2; ++i)
    if (!(G[i] + m[i] + n[i] < A[i]))
      throw ConfigError("pointwise bound needs |gamma_i| + m_i + n_i < |alpha_i| in factor " + std::to_string(i + 1));
  PointwiseBound out;
  out.seminorm = seminorm_estimate(s, {A[0], A[1], G[0], G[1]});
  BisingularSymbol d = difference_apply(derivative_apply(s, gamma1, gamma2), alpha1, alpha2);
  for (size_t k = 0; k < theta1.size(); ++k)
    for (int p = 0; p < theta1[k]; ++p) {
      MatC g = coefficient_derivative(a1, static_cast<int>(k));
      for (auto& c : d.slots) c = g * c;
    }
  for (size_t k = 0; k < theta2.size(); ++k)
    for (int p = 0; p < theta2[k]; ++p) {
      MatC g = coefficient_derivative(a2, static_cast<int>(k));
      for (auto& c : d.slots) c = c * g.transpose();
    }
  for (size_t sl = 0; sl < d.slots.size(); ++sl) {
    KernelSamples ks = sample_kernel(d, static_cast<int>(sl), refine, false);
    out.value = std::max(out.value, ks.values.cwiseAbs().maxCoeff());
  }
  out.ratio = out.seminorm > 0 ? out.value / out.seminorm : 0.0;
  return out;
}

// ---------------------------------------------------------------- functional calculus

/** @brief Profiles f(lambda) for the functional-calculus sweep. */
enum class FunctionalProfile { exponential, resolvent, bump };

inline const char* profile_name(FunctionalProfile p) {
  return p == FunctionalProfile::exponential ? "exp" : p == FunctionalProfile::resolvent ? "resolvent" : "bump";
}

inline double profile_value(FunctionalProfile p, double lambda) {
  switch (p) {
    case FunctionalProfile::exponential: return std::exp(-lambda);
    case FunctionalProfile::resolvent: return 1.0 / (1.0 + lambda);
    case FunctionalProfile::bump: return CutoffProfile{}.chi(lambda);
  }
  return 0.0;
}

/** @brief Only the resolvent decays like a power of lambda, so only it has a <xi>-exponent. */
inline bool profile_is_power(FunctionalProfile p) { return p == FunctionalProfile::resolvent; }

struct FunctionalBoundReport {
  std::vector<double> t;
  std::vector<double> q1, q2;              ///< sup-quantities while sweeping t1 (t2 fixed) and t2 (t1 fixed)
  double t_exponent[2] = {0, 0};           ///< fitted, nominal m_i / 2
  double xi_exponent[2] = {std::nan(""), std::nan("")};  ///< fitted, nominal m_i - |alpha_i|
  double nominal_t[2] = {0, 0}, nominal_xi[2] = {0, 0};
  bool xi_fitted[2] = {false, false};

  bool within(double tol) const {
    for (int i = 0; i < 2; ++i) {
      if (!(std::abs(t_exponent[i] - nominal_t[i]) <= tol)) return false;
      if (xi_fitted[i] && !(std::abs(xi_exponent[i] - nominal_xi[i]) <= tol)) return false;
    }
    return true;
  }
};

/**
 * @brief Sweep of Delta^{alpha,beta} f1(t1 E1) f2(t2 E2). The t-exponent is fitted from
 * Q(t) = sup_xi <xi1>^{-(m1-|alpha|)} <xi2>^{-(m2-|beta|)} ||.|| (~ t^{m/2}); the
 * <xi>-exponent from the profile at t = t_fixed restricted to keys with t E >= 4.
 */
inline FunctionalBoundReport functional_bound_check(const SpacePtr& sp, FunctionalProfile f1, FunctionalProfile f2,
                                                    const MultiIndex& alpha, const MultiIndex& beta, double m1, double m2,
                                                    const std::vector<double>& ts, double t_fixed = 0.5) {
  for (double t : ts)
    if (!(t > 0 && t < 1)) throw ConfigError("functional bound sweep needs t in (0,1)");
  if (!(t_fixed > 0 && t_fixed < 1)) throw ConfigError("functional bound sweep needs t in (0,1)");
  FunctionalBoundReport rep;
  rep.t = ts;
  const double A = order_of(alpha), B = order_of(beta);
  rep.nominal_t[0] = m1 / 2;
  rep.nominal_t[1] = m2 / 2;
  rep.nominal_xi[0] = m1 - A;
  rep.nominal_xi[1] = m2 - B;
  auto build = [&](double t1, double t2) {
    BisingularSymbol s = zero_symbol(sp, m1, m2);
    s.slots[0] = multiplier_coef(
        *sp, [&](const IrrepInfo& r) { return profile_value(f1, t1 * r.eig); }, [&](const IrrepInfo& r) { return profile_value(f2, t2 * r.eig); });
    return radius_mask(difference_apply(s, alpha, beta));
  };
  auto q_of = [&](const BisingularSymbol& d) { return weighted_sup(d, m1 - A, m2 - B); };
  std::vector<double> lt, l1, l2;
  for (double t : ts) {
    double v1 = q_of(build(t, t_fixed)), v2 = q_of(build(t_fixed, t));
    rep.q1.push_back(v1);
    rep.q2.push_back(v2);
    lt.push_back(std::log(t));
    l1.push_back(std::log(v1));
    l2.push_back(std::log(v2));
  }
  rep.t_exponent[0] = fit_line(lt, l1).slope;
  rep.t_exponent[1] = fit_line(lt, l2).slope;
  // <xi>-exponent per factor: profile max over the other factor, normalized there
  BisingularSymbol d = build(t_fixed, t_fixed);
  const auto& a1 = *sp->f[0].dual;
  const auto& a2 = *sp->f[1].dual;
  const FunctionalProfile fp[2] = {f1, f2};
  for (int f = 0; f < 2; ++f) {
    if (!profile_is_power(fp[f])) continue;
    const GroupAtlas& act = f == 0 ? a1 : a2;
    const GroupAtlas& oth = f == 0 ? a2 : a1;
    const double mo = f == 0 ? m2 - B : m1 - A;
    const double rad = f == 0 ? d.radius1 : d.radius2, rado = f == 0 ? d.radius2 : d.radius1;
    std::vector<double> lw, lv;
    for (int r = 0; r < act.irrep_count(); ++r) {
      const auto& ir = act.irreps[r];
      if (t_fixed * ir.eig < 4 || label_radius(act.kind, ir.label) > rad + 1e-12) continue;
      double best = 0;
      for (int ro = 0; ro < oth.irrep_count(); ++ro) {
        if (label_radius(oth.kind, oth.irreps[ro].label) > rado + 1e-12) continue;
        MatC blk = f == 0 ? d.block(0, r, ro) : d.block(0, ro, r);
        best = std::max(best, op_norm(blk) * std::pow(oth.irreps[ro].weight, -mo));
      }
      if (best > 0) {
        lw.push_back(std::log(ir.weight));
        lv.push_back(std::log(best));
      }
    }
    if (lw.size() >= 3) {
      rep.xi_exponent[f] = fit_line(lw, lv).slope;
      rep.xi_fitted[f] = true;
    }
  }
  return rep;
}

// ---------------------------------------------------------------- cutoff scaling

struct CutoffScalingReport {
  std::vector<double> t, ratio1, ratio2;
  double fitted[2] = {0, 0};
  double nominal[2] = {0, 0};  ///< (m'_i - m_i) / 2 for m'_i < m_i
  bool within(double tol) const {
    return std::abs(fitted[0] - nominal[0]) <= tol && std::abs(fitted[1] - nominal[1]) <= tol;
  }
};

/**
 * @brief ||sigma chi(t1 E1) chi(t2 E2)||_{S^{m'}} / ||sigma||_{S^m} over a t sweep, one
 * factor at a time (the other t fixed). The compactly supported cut makes the ratio grow
 * like t^{(m'-m)/2} when m' < m.
 */
inline CutoffScalingReport cutoff_scaling_check(const BisingularSymbol& s, double mp1, double mp2, const SeminormKey& key,
                                                const std::vector<double>& ts, double t_fixed = 0.5) {
  if (!(mp1 < s.m1 && mp2 < s.m2)) throw ConfigError("cutoff scaling sweep needs m' < m in both factors");
  CutoffScalingReport rep;
  rep.t = ts;
  rep.nominal[0] = 0.5 * (mp1 - s.m1);
  rep.nominal[1] = 0.5 * (mp2 - s.m2);
  const double base = seminorm_estimate(s, key);
  if (!(base > 0)) throw ConfigError("cutoff scaling sweep needs a nonzero symbol");
  CutoffProfile chi;
  auto ratio = [&](double t1, double t2) {
    BisingularSymbol c = localize(s, chi, t1, t2);
    c.m1 = mp1;
    c.m2 = mp2;
    return seminorm_estimate(c, key) / base;
  };
  std::vector<double> lt, l1, l2;
  for (double t : ts) {
    rep.ratio1.push_back(ratio(t, t_fixed));
    rep.ratio2.push_back(ratio(t_fixed, t));
    lt.push_back(std::log(t));
    l1.push_back(std::log(rep.ratio1.back()));
    l2.push_back(std::log(rep.ratio2.back()));
  }
  rep.fitted[0] = fit_line(lt, l1).slope;
  rep.fitted[1] = fit_line(lt, l2).slope;
  return rep;
}

// ---------------------------------------------------------------- vanishing order

struct VanishingReport {
  double max_low_derivative = 0;  ///< max over the slices of |d^a q|, |a| < a_i
  bool derivatives_vanish = false;
  double slope[2] = {0, 0};       ///< fitted exponent of max |q| against the distance per factor
  bool decay_holds = false;       ///< slope_i >= a_i - 0.3 where a_i > 0
  bool equivalent() const { return derivatives_vanish == decay_holds; }
};

/**
 * @brief Vanishing order of q at the identity, factor by factor: spectral derivatives of
 * order < a_1 in x1 on {e1} x G2 and of order < a_2 in x2 on G1 x {e2}, against the decay
 * |q| <= C |x1|^{a1} |x2|^{a2} fitted on shrinking balls. q must lie in the atlas band.
 */
inline VanishingReport vanishing_order_check(const AtlasPtr& g1, const AtlasPtr& g2,
                                             const std::function<cplx(const GroupElement&, const GroupElement&)>& q, int a1,
                                             int a2, double tol = 1e-9) {
  VanishingReport rep;
  MatC vals(g1->size(), g2->size());
  for (int i = 0; i < g1->size(); ++i)
    for (int j = 0; j < g2->size(); ++j) vals(i, j) = q(g1->nodes[i], g2->nodes[j]);
  std::vector<MatC> D1, D2;
  for (int k = 0; k < lie_dim(g1->kind); ++k) D1.push_back(grid_derivative(*g1, k));
  for (int k = 0; k < lie_dim(g2->kind); ++k) D2.push_back(grid_derivative(*g2, k));
  double scale = std::max(1.0, vals.cwiseAbs().maxCoeff());
  // derivatives of order < a_1 in x1 along {e1} x G2, and of order < a_2 in x2 along G1 x {e2}
  for (int o1 = 0; o1 < a1; ++o1)
    for (auto& w : multi_indices_upto(lie_dim(g1->kind), o1)) {
      if (order_of(w) != o1) continue;
      MatC v = vals;
      for (size_t k = 0; k < w.size(); ++k)
        for (int p = 0; p < w[k]; ++p) v = D1[k] * v;
      rep.max_low_derivative = std::max(rep.max_low_derivative, v.row(g1->identity_node).cwiseAbs().maxCoeff());
    }
  for (int o2 = 0; o2 < a2; ++o2)
    for (auto& w : multi_indices_upto(lie_dim(g2->kind), o2)) {
      if (order_of(w) != o2) continue;
      MatC v = vals;
      for (size_t k = 0; k < w.size(); ++k)
        for (int p = 0; p < w[k]; ++p) v = v * D2[k].transpose();
      rep.max_low_derivative = std::max(rep.max_low_derivative, v.col(g2->identity_node).cwiseAbs().maxCoeff());
    }
  rep.derivatives_vanish = rep.max_low_derivative <= tol * scale;
  // decay: radial samples toward e in one factor, max over the directions and the other factor's grid
  const int a[2] = {a1, a2};
  bool ok = true;
  for (int f = 0; f < 2; ++f) {
    const GroupAtlas& act = f == 0 ? *g1 : *g2;
    const GroupAtlas& oth = f == 0 ? *g2 : *g1;
    std::vector<double> lr, lq;
    for (int e = 2; e <= 12; ++e) {
      double r = std::ldexp(1.0, -e), best = 0;
      for (int k = 0; k < lie_dim(act.kind); ++k) {
        GroupElement y = exp_direction(act.kind, k, r);
        for (int j = 0; j < oth.size(); ++j)
          best = std::max(best, std::abs(f == 0 ? q(y, oth.nodes[j]) : q(oth.nodes[j], y)));
      }
      lr.push_back(std::log(geodesic_distance(exp_direction(act.kind, 0, r))));
      lq.push_back(std::log(std::max(best, 1e-300)));
    }
    rep.slope[f] = fit_line(lr, lq).slope;
    if (a[f] > 0 && !(rep.slope[f] >= a[f] - 0.3)) ok = false;
  }
  rep.decay_holds = ok;
  return rep;
}

}  // namespace bising
