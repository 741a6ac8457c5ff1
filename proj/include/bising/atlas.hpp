/**
 * @file atlas.hpp
 * @brief Truncated unitary duals, quadrature grids and tabulated representations of T1 and SU(2).
 */
#pragma once

#include "core.hpp"

#include <array>
#include <memory>
#include <numeric>

namespace bising {

enum class GroupKind { torus, su2 };

inline const char* kind_name(GroupKind k) { return k == GroupKind::torus ? "torus" : "su2"; }

inline GroupKind parse_kind(const std::string& s) {
  if (s == "torus" || s == "T1" || s == "t1") return GroupKind::torus;
  if (s == "su2" || s == "SU2") return GroupKind::su2;
  throw ConfigError("unsupported group kind '" + s + "'");
}

/** @brief Lie-algebra dimension of a factor. */
inline int lie_dim(GroupKind k) { return k == GroupKind::torus ? 1 : 3; }

/** @brief One irreducible representation. SU(2) labels hold 2l. */
struct IrrepInfo {
  int label = 0;
  int dim = 1;
  double eig = 0.0;
  double weight = 1.0;
};

inline IrrepInfo make_irrep(GroupKind kind, int label) {
  IrrepInfo r;
  r.label = label;
  if (kind == GroupKind::torus) {
    r.dim = 1;
    r.eig = static_cast<double>(label) * label;
  } else {
    double l = 0.5 * label;
    r.dim = label + 1;
    r.eig = l * (l + 1.0);
  }
  r.weight = std::sqrt(1.0 + r.eig);
  return r;
}

/** @brief Human-readable label: k for T1, l (possibly "3/2") for SU(2). */
inline std::string label_string(GroupKind kind, int label) {
  if (kind == GroupKind::torus || label % 2 == 0)
    return std::to_string(kind == GroupKind::torus ? label : label / 2);
  return std::to_string(label) + "/2";
}

/**
 * @brief Irreps with label up to the cutoff, ordered by eigenvalue then label.
 * @param cutoff2 twice the cutoff for SU(2) (max 2l); the cutoff k for T1.
 */
inline std::vector<IrrepInfo> enumerate_irreps(GroupKind kind, int cutoff2) {
  if (cutoff2 < 0) throw ConfigError("cutoff must be nonnegative");
  std::vector<IrrepInfo> out;
  if (kind == GroupKind::torus) {
    for (int k = -cutoff2; k <= cutoff2; ++k) out.push_back(make_irrep(kind, k));
  } else {
    for (int l2 = 0; l2 <= cutoff2; ++l2) out.push_back(make_irrep(kind, l2));
  }
  std::stable_sort(out.begin(), out.end(), [](const IrrepInfo& a, const IrrepInfo& b) {
    if (a.eig != b.eig) return a.eig < b.eig;
    return a.label < b.label;
  });
  return out;
}

/** @brief A group element: an angle on T1 or a 2x2 unitary on SU(2). */
struct GroupElement {
  GroupKind kind = GroupKind::torus;
  double theta = 0.0;
  Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
};

inline GroupElement torus_element(double theta) {
  GroupElement g;
  g.kind = GroupKind::torus;
  g.theta = theta;
  return g;
}

/** @brief z-y-z Euler angles: Rz(alpha) Ry(beta) Rz(gamma) in the spin-1/2 representation. */
inline GroupElement su2_from_euler(double alpha, double beta, double gamma) {
  GroupElement g;
  g.kind = GroupKind::su2;
  Eigen::Matrix2cd rz1, ry, rz2;
  rz1 << std::exp(-kI * alpha / 2.0), 0, 0, std::exp(kI * alpha / 2.0);
  ry << std::cos(beta / 2), -std::sin(beta / 2), std::sin(beta / 2), std::cos(beta / 2);
  rz2 << std::exp(-kI * gamma / 2.0), 0, 0, std::exp(kI * gamma / 2.0);
  g.u = rz1 * ry * rz2;
  return g;
}

inline GroupElement identity_element(GroupKind kind) {
  GroupElement g;
  g.kind = kind;
  return g;
}

inline GroupElement multiply(const GroupElement& a, const GroupElement& b) {
  GroupElement g;
  g.kind = a.kind;
  if (a.kind == GroupKind::torus)
    g.theta = a.theta + b.theta;
  else
    g.u = a.u * b.u;
  return g;
}

inline GroupElement inverse(const GroupElement& a) {
  GroupElement g;
  g.kind = a.kind;
  if (a.kind == GroupKind::torus)
    g.theta = -a.theta;
  else
    g.u = a.u.adjoint();
  return g;
}

/** @brief Orthonormal su(2) basis X_k = -i sigma_k / 2. */
inline Eigen::Matrix2cd su2_basis(int k) {
  Eigen::Matrix2cd s;
  if (k == 0)
    s << 0, 1, 1, 0;
  else if (k == 1)
    s << 0, -kI, kI, 0;
  else
    s << 1, 0, 0, -1;
  return -0.5 * kI * s;
}

/** @brief exp(tX) for a basis direction. */
inline GroupElement exp_direction(GroupKind kind, int k, double t) {
  if (kind == GroupKind::torus) return torus_element(t);
  GroupElement g;
  g.kind = GroupKind::su2;
  // X = -i t sigma/2 with sigma^2 = I
  Eigen::Matrix2cd x = su2_basis(k) * t;
  g.u = std::cos(t / 2) * Eigen::Matrix2cd::Identity() + (2.0 * std::sin(t / 2) / t) * x;
  if (t == 0.0) g.u = Eigen::Matrix2cd::Identity();
  return g;
}

/** @brief Distance to the identity: min(|theta|, 2pi-|theta|) on T1, rotation angle on SU(2). */
inline double geodesic_distance(const GroupElement& g) {
  if (g.kind == GroupKind::torus) {
    double t = std::fmod(std::abs(g.theta), 2 * kPi);
    return std::min(t, 2 * kPi - t);
  }
  double c = 0.5 * (g.u(0, 0) + g.u(1, 1)).real();
  c = std::clamp(c, -1.0, 1.0);
  return 2.0 * std::acos(c);
}

namespace detail {

/**
 * @brief Symmetric power of a 2x2 matrix on degree-n polynomials.
 *
 * Basis index i = n - a for the monomial z1^a z2^(n-a) / sqrt(a!(n-a)!), so that
 * index 0 is m = +l. The map is (rho(U)p)(z) = p(U^T z), a homomorphism that
 * reproduces U itself for n = 1.
 */
inline MatC symmetric_power(const Eigen::Matrix2cd& u, int n) {
  MatC d = MatC::Zero(n + 1, n + 1);
  std::vector<double> fact(n + 1);
  for (int i = 0; i <= n; ++i) fact[i] = factorial(i);
  // powers of the entries
  auto powc = [](cplx z, int p) {
    cplx r = 1.0;
    for (int i = 0; i < p; ++i) r *= z;
    return r;
  };
  for (int a = 0; a <= n; ++a) {
    int c = n - a;
    double norm_in = std::sqrt(fact[a] * fact[c]);
    for (int s = 0; s <= a; ++s) {
      cplx ps = binomial(a, s) * powc(u(0, 0), s) * powc(u(1, 0), a - s);
      for (int t = 0; t <= c; ++t) {
        cplx pt = binomial(c, t) * powc(u(0, 1), t) * powc(u(1, 1), c - t);
        int b = s + t;
        double norm_out = std::sqrt(fact[b] * fact[n - b]);
        d(n - b, n - a) += ps * pt * norm_out / norm_in;
      }
    }
  }
  return d;
}

/** @brief Derived symmetric power of a 2x2 matrix X, same basis as symmetric_power. */
inline MatC symmetric_power_derived(const Eigen::Matrix2cd& x, int n) {
  MatC d = MatC::Zero(n + 1, n + 1);
  auto norm = [&](int a) { return std::sqrt(factorial(a) * factorial(n - a)); };
  for (int a = 0; a <= n; ++a) {
    int c = n - a;
    auto add = [&](int b, cplx v) { d(n - b, n - a) += v * norm(b) / norm(a); };
    add(a, double(a) * x(0, 0) + double(c) * x(1, 1));
    if (a > 0) add(a - 1, double(a) * x(1, 0));
    if (c > 0) add(a + 1, double(c) * x(0, 1));
  }
  return d;
}

/** @brief Gauss-Lobatto-Legendre nodes and weights on [-1,1] (n >= 2), ascending. */
inline void gauss_lobatto(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  int N = n - 1;
  auto legendre = [](int deg, double t, double& p, double& dp) {
    double p0 = 1.0, p1 = t;
    if (deg == 0) {
      p = 1.0;
      dp = 0.0;
      return;
    }
    for (int k = 2; k <= deg; ++k) {
      double p2 = ((2.0 * k - 1) * t * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    p = p1;
    dp = (std::abs(t) < 1.0) ? deg * (t * p1 - p0) / (t * t - 1.0) : 0.5 * deg * (deg + 1) * std::pow(t, deg + 1);
  };
  for (int i = 0; i <= N; ++i) {
    // Chebyshev-Gauss-Lobatto initial guess, Newton on (1-t^2) P_N'(t)
    double t = -std::cos(kPi * i / N);
    if (i > 0 && i < N) {
      for (int it = 0; it < 100; ++it) {
        double p, dp;
        legendre(N, t, p, dp);
        // q(t) = (1-t^2) P_N'(t); q'(t) = -N(N+1) P_N(t)
        double q = (1 - t * t) * dp;
        double dq = -N * (N + 1.0) * p;
        double step = q / dq;
        t -= step;
        if (std::abs(step) < 1e-16) break;
      }
    }
    double p, dp;
    legendre(N, t, p, dp);
    x[i] = t;
    w[i] = 2.0 / (N * (N + 1.0) * p * p);
  }
  x[0] = -1.0;
  x[N] = 1.0;
}

}  // namespace detail

/** @brief Representation matrix of an irrep (label) at an arbitrary element. */
inline MatC rep_matrix(GroupKind kind, int label, const GroupElement& g) {
  if (kind == GroupKind::torus) {
    MatC m(1, 1);
    m(0, 0) = std::exp(kI * (double(label) * g.theta));
    return m;
  }
  return detail::symmetric_power(g.u, label);
}

/** @brief Derived representation d xi(X_k) for basis direction k. */
inline MatC rep_generator(GroupKind kind, int label, int k) {
  if (kind == GroupKind::torus) {
    MatC m(1, 1);
    m(0, 0) = kI * double(label);
    return m;
  }
  return detail::symmetric_power_derived(su2_basis(k), label);
}

/**
 * @brief Immutable quadrature atlas of one group factor.
 *
 * Coefficient space: the stacked entries F(xi)_{ij} of all irreps, irrep offset
 * plus i*d + j. `fwd` maps node values to coefficients, `inv` maps back.
 */
class GroupAtlas {
 public:
  GroupKind kind = GroupKind::torus;
  int cutoff2 = 0;  ///< max label (2l for SU(2))
  int resolution = 0;
  std::vector<IrrepInfo> irreps;
  std::vector<std::array<double, 3>> params;  ///< theta or (alpha,beta,gamma)
  std::vector<GroupElement> nodes;
  std::vector<double> weights;
  std::vector<std::vector<cplx>> repmats;          ///< [irrep][node*d*d + i*d + j]
  std::vector<std::vector<MatC>> generators;       ///< [irrep][basis]
  std::vector<int> offset;                          ///< coefficient offset per irrep
  std::vector<int> coef_irrep, coef_i, coef_j;      ///< coefficient index -> (irrep, i, j)
  int coeff_dim = 0;
  int identity_node = 0;
  MatC fwd;  ///< coeff_dim x nodes: w(x) conj(xi(x)_{ji})
  MatC inv;  ///< nodes x coeff_dim: d xi(x)_{ji}

  int size() const { return static_cast<int>(nodes.size()); }
  int irrep_count() const { return static_cast<int>(irreps.size()); }
  double cutoff() const { return kind == GroupKind::torus ? cutoff2 : 0.5 * cutoff2; }

  /** @brief Index of an irrep label, or -1. */
  int index_of(int label) const {
    for (int i = 0; i < irrep_count(); ++i)
      if (irreps[i].label == label) return i;
    return -1;
  }

  cplx rep(int irrep, int node, int i, int j) const {
    int d = irreps[irrep].dim;
    return repmats[irrep][(static_cast<size_t>(node) * d + i) * d + j];
  }

  MatC repmat(int irrep, int node) const {
    int d = irreps[irrep].dim;
    MatC m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = rep(irrep, node, i, j);
    return m;
  }

  /** @brief Row of `inv` for an arbitrary element (evaluates all irreps there). */
  VecC synthesis_row(const GroupElement& g) const {
    VecC row(coeff_dim);
    for (int r = 0; r < irrep_count(); ++r) {
      int d = irreps[r].dim;
      MatC m = rep_matrix(kind, irreps[r].label, g);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) row(offset[r] + i * d + j) = double(d) * m(j, i);
    }
    return row;
  }
};

namespace detail {

inline void finish_atlas(GroupAtlas& a) {
  int n = a.size();
  a.offset.resize(a.irreps.size());
  int off = 0;
  for (size_t r = 0; r < a.irreps.size(); ++r) {
    a.offset[r] = off;
    off += a.irreps[r].dim * a.irreps[r].dim;
  }
  a.coeff_dim = off;
  for (size_t r = 0; r < a.irreps.size(); ++r) {
    int d = a.irreps[r].dim;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        a.coef_irrep.push_back(static_cast<int>(r));
        a.coef_i.push_back(i);
        a.coef_j.push_back(j);
      }
  }
  a.repmats.resize(a.irreps.size());
  a.generators.resize(a.irreps.size());
  for (size_t r = 0; r < a.irreps.size(); ++r) {
    int d = a.irreps[r].dim;
    auto& tab = a.repmats[r];
    tab.assign(static_cast<size_t>(n) * d * d, 0.0);
    for (int x = 0; x < n; ++x) {
      if (x == a.identity_node) {
        for (int i = 0; i < d; ++i) tab[(static_cast<size_t>(x) * d + i) * d + i] = 1.0;
        continue;
      }
      MatC m = rep_matrix(a.kind, a.irreps[r].label, a.nodes[x]);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) tab[(static_cast<size_t>(x) * d + i) * d + j] = m(i, j);
    }
    for (int k = 0; k < lie_dim(a.kind); ++k) a.generators[r].push_back(rep_generator(a.kind, a.irreps[r].label, k));
  }
  a.fwd.resize(a.coeff_dim, n);
  a.inv.resize(n, a.coeff_dim);
  for (size_t r = 0; r < a.irreps.size(); ++r) {
    int d = a.irreps[r].dim;
    for (int x = 0; x < n; ++x)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          cplx v = a.rep(static_cast<int>(r), x, j, i);
          a.fwd(a.offset[r] + i * d + j, x) = a.weights[x] * std::conj(v);
          a.inv(x, a.offset[r] + i * d + j) = double(d) * v;
        }
  }
}

inline GroupAtlas make_torus(int cutoff, int m) {
  GroupAtlas a;
  a.kind = GroupKind::torus;
  a.cutoff2 = cutoff;
  a.resolution = m;
  a.irreps = enumerate_irreps(GroupKind::torus, cutoff);
  for (int j = 0; j < m; ++j) {
    double th = 2 * kPi * j / m;
    a.params.push_back({th, 0, 0});
    a.nodes.push_back(torus_element(th));
    a.weights.push_back(1.0 / m);
  }
  a.identity_node = 0;
  finish_atlas(a);
  return a;
}

inline GroupAtlas make_su2(int cutoff2, int nbeta, int nalpha) {
  GroupAtlas a;
  a.kind = GroupKind::su2;
  a.cutoff2 = cutoff2;
  a.resolution = nbeta;
  a.irreps = enumerate_irreps(GroupKind::su2, cutoff2);
  int ngamma = 2 * nalpha;
  std::vector<double> t, wt;
  gauss_lobatto(nbeta, t, wt);
  // identity first: beta = 0 is t = 1, the last Lobatto node
  int id = -1;
  for (int ib = nbeta - 1; ib >= 0; --ib) {
    double beta = (ib == nbeta - 1) ? 0.0 : (ib == 0 ? kPi : std::acos(t[ib]));
    for (int ia = 0; ia < nalpha; ++ia)
      for (int ig = 0; ig < ngamma; ++ig) {
        double al = 2 * kPi * ia / nalpha;
        double ga = 4 * kPi * ig / ngamma;
        a.params.push_back({al, beta, ga});
        a.nodes.push_back(su2_from_euler(al, beta, ga));
        a.weights.push_back(0.5 * wt[ib] / nalpha / ngamma);
        if (id < 0 && ib == nbeta - 1 && ia == 0 && ig == 0) id = static_cast<int>(a.nodes.size()) - 1;
      }
  }
  a.identity_node = id;
  a.nodes[id].u = Eigen::Matrix2cd::Identity();
  finish_atlas(a);
  return a;
}

}  // namespace detail

/** @brief Minimal resolution meeting the product-exactness rule for build_atlas. */
inline int minimal_resolution(GroupKind kind, int cutoff2) {
  if (kind == GroupKind::torus) return 4 * cutoff2 + 1;
  // cos(beta) node count >= 2*(2*cutoff)+1 with cutoff = l = cutoff2/2
  return std::max(2, 2 * cutoff2 + 1);
}

/**
 * @brief Build a factor atlas.
 * @param cutoff2 max label (k for T1, 2l for SU(2))
 * @param resolution node count (T1) or cos(beta) node count (SU(2)); 0 selects the minimum
 */
inline GroupAtlas build_atlas(GroupKind kind, int cutoff2, int resolution = 0) {
  if (cutoff2 < 0) throw ConfigError("cutoff must be nonnegative");
  int need = minimal_resolution(kind, cutoff2);
  if (resolution == 0) resolution = need;
  if (resolution < need) throw ResolutionError("grid resolution below exactness threshold", need);
  if (kind == GroupKind::torus) return detail::make_torus(cutoff2, resolution);
  int nalpha = std::max(cutoff2 + 1, (resolution + 1) / 2);
  return detail::make_su2(cutoff2, resolution, nalpha);
}

/**
 * @brief Smallest grid on which band-limited fields with labels up to `band2`
 * transform exactly (products of two coefficients are not required to be exact).
 * Used for the x-variable of symbols.
 */
inline GroupAtlas build_sampling_grid(GroupKind kind, int band2) {
  if (band2 < 0) throw ConfigError("band must be nonnegative");
  if (kind == GroupKind::torus) return detail::make_torus(band2, 2 * band2 + 1);
  // Lobatto degree 2n-3 >= 2l  ->  n >= l + 3/2
  int nbeta = std::max(2, (band2 + 3 + 1) / 2);
  return detail::make_su2(band2, nbeta, band2 + 1);
}

/**
 * @brief Atlas whose quadrature integrates products with total label up to
 * `degree2` exactly (in the same units as cutoff2), for the irreps up to cutoff2.
 */
inline GroupAtlas build_quadrature(GroupKind kind, int cutoff2, int degree2) {
  degree2 = std::max(degree2, 2 * cutoff2);
  if (kind == GroupKind::torus) return detail::make_torus(cutoff2, degree2 + 1);
  // degree in cos(beta) is at most degree2/2; Lobatto exact to 2n-3
  int nbeta = std::max(2, (degree2 / 2 + 3 + 1) / 2 + 1);
  int nalpha = degree2 / 2 + 1;
  return detail::make_su2(cutoff2, nbeta, nalpha);
}

/** @brief A difference family on one factor: q = tau_{ij} - delta_{ij} on the grid. */
struct DifferenceFamily {
  int factor = 1;
  GroupKind kind = GroupKind::torus;
  std::vector<std::array<int, 3>> labels;  ///< (tau label, i, j)
  std::vector<std::vector<cplx>> funcs;    ///< values on the atlas grid
  std::vector<int> coordinate;             ///< indices used for Taylor expansions
};

/** @brief Value of difference function (tau,i,j) at an element. */
inline cplx difference_value(GroupKind kind, const std::array<int, 3>& lab, const GroupElement& g) {
  MatC m = rep_matrix(kind, lab[0], g);
  return m(lab[1], lab[2]) - (lab[1] == lab[2] ? 1.0 : 0.0);
}

inline DifferenceFamily difference_family(const GroupAtlas& a, int factor) {
  DifferenceFamily f;
  f.factor = factor;
  f.kind = a.kind;
  if (a.kind == GroupKind::torus) {
    f.labels.push_back({1, 0, 0});
    f.coordinate = {0};
  } else {
    f.labels = {{1, 0, 0}, {1, 0, 1}, {1, 1, 0}, {1, 1, 1}};
    // q11, q12, q21 have linearly independent differentials at the identity
    f.coordinate = {0, 1, 2};
  }
  for (auto& lab : f.labels) {
    std::vector<cplx> v(a.size());
    for (int x = 0; x < a.size(); ++x) v[x] = x == a.identity_node ? cplx(0.0) : difference_value(a.kind, lab, a.nodes[x]);
    f.funcs.push_back(std::move(v));
  }
  return f;
}

/**
 * @brief Strong admissibility on the grid: returns the smallest joint magnitude
 * sqrt(sum |q|^2) over non-identity nodes (positive iff the zero set is the identity).
 */
inline double admissibility_margin(const GroupAtlas& a, const DifferenceFamily& f) {
  double best = 1e300;
  for (int x = 0; x < a.size(); ++x) {
    if (x == a.identity_node) continue;
    if (geodesic_distance(a.nodes[x]) < 1e-6) continue;  // repeated identity parameterizations
    double s = 0;
    for (auto& q : f.funcs) s += std::norm(q[x]);
    best = std::min(best, std::sqrt(s));
  }
  return best;
}

/**
 * @brief Coordinate dual basis: columns are the Lie-algebra vectors Y_k (in the
 * orthonormal basis) with dq_j(e)(Y_k) = delta_jk for the coordinate subfamily.
 */
inline MatC coordinate_dual_basis(GroupKind kind) {
  int n = lie_dim(kind);
  MatC m(n, n);  // m(j,i) = dq_j(e)(X_i)
  if (kind == GroupKind::torus) {
    m(0, 0) = kI;
  } else {
    const int idx[3][2] = {{0, 0}, {0, 1}, {1, 0}};
    for (int i = 0; i < 3; ++i) {
      Eigen::Matrix2cd x = su2_basis(i);
      for (int j = 0; j < 3; ++j) m(j, i) = x(idx[j][0], idx[j][1]);
    }
  }
  return m.inverse();
}

/** @brief Schur orthogonality residual of the stored quadrature (max abs deviation). */
inline double schur_residual(const GroupAtlas& a) {
  // Gram matrix of all matrix coefficients: fwd * inv should be the identity
  MatC g = a.fwd * a.inv;
  return (g - MatC::Identity(a.coeff_dim, a.coeff_dim)).cwiseAbs().maxCoeff();
}

/** @brief Max unitarity defect ||U U^* - I|| over all stored matrices. */
inline double unitarity_residual(const GroupAtlas& a) {
  double worst = 0;
  for (int r = 0; r < a.irrep_count(); ++r) {
    int d = a.irreps[r].dim;
    for (int x = 0; x < a.size(); ++x) {
      MatC m = a.repmat(r, x);
      worst = std::max(worst, (m * m.adjoint() - MatC::Identity(d, d)).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

/** @brief Weighted sum defect |sum w - 1|. */
inline double weight_residual(const GroupAtlas& a) {
  double s = 0;
  for (double w : a.weights) s += w;
  return std::abs(s - 1.0);
}

/** @brief Short content hash of an atlas (FNV-1a over labels, params and weights). */
inline std::string atlas_fingerprint(const GroupAtlas& a) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const void* p, size_t n) {
    const unsigned char* c = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 1099511628211ULL;
    }
  };
  int k = static_cast<int>(a.kind);
  mix(&k, sizeof k);
  mix(&a.cutoff2, sizeof a.cutoff2);
  for (auto& p : a.params) mix(p.data(), sizeof(double) * 3);
  for (double w : a.weights) mix(&w, sizeof w);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace bising
