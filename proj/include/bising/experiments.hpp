/**
 * @file experiments.hpp
 * @brief Experiment runner: strict JSON configs, the symbol zoo, verification suites,
 * CSV tables and the run manifest.
 */
#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "io.hpp"
#include "kernel_analysis.hpp"

namespace bising {

// ---------------------------------------------------------------- configuration

/** @brief One group factor: cutoff in label units (k on T1, l on SU(2)), grid resolution, x-band. */
struct GroupConfig {
  GroupKind kind = GroupKind::torus;
  double cutoff = 16;
  int grid = 0;        ///< atlas resolution; 0 selects the minimal exact one
  double band = -1;    ///< x-band in label units; negative selects the experiment default

  int cutoff2() const { return kind == GroupKind::torus ? static_cast<int>(cutoff) : static_cast<int>(std::lround(2 * cutoff)); }
};

/** @brief Profiles and orders of the functional-calculus sweep. */
struct FunctionalConfig {
  std::string f1 = "exp", f2 = "exp";
  int alpha = 0, beta = 0;
  double m1 = -2, m2 = -2;
  double t_fixed = 0.5;
  int octaves = 6;
};

struct ExperimentConfig {
  GroupConfig group1, group2;
  std::string symbol = "multiplier:1,1";
  std::string second;               ///< second zoo symbol (composition)
  std::string experiment = "atlas-check";
  int N = 1;
  int seeds = 1;
  std::string output = "bising_run";
  double s1 = 2, s2 = 2;            ///< Sobolev / Bessel orders
  FunctionalConfig functional;
  std::map<std::string, double> tolerances;  ///< overrides, echoed in the manifest
  json echo;                        ///< the document as read
};

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> k{"atlas-check", "fourier",          "sobolev",         "bessel",
                                          "leibniz",     "compose",          "adjoint",         "parametrix",
                                          "kernel-decay", "functional-bound", "vanishing-order", "asym-sum"};
  return k;
}

/** @brief Default tolerances per experiment; the keys are the only overridable ones. */
inline std::map<std::string, double> default_tolerances(const std::string& experiment) {
  if (experiment == "atlas-check") return {{"schur", 1e-10}, {"unitarity", 1e-12}};
  if (experiment == "fourier") return {{"roundtrip", 1e-10}, {"parseval", 1e-10}};
  if (experiment == "sobolev") return {{"embedding_spread", 0.10}};
  if (experiment == "bessel") return {{"gamma_path", 1e-6}, {"l2_parseval", 1e-10}};
  if (experiment == "leibniz") return {{"torus", 1e-12}, {"kernel", 1e-10}};
  if (experiment == "compose") return {{"slope_below", 0.5}, {"slope_above", 1.5}, {"oracle", 1e-12}};
  if (experiment == "adjoint") return {{"slope_below", 0.5}, {"leading", 1e-12}, {"oracle", 1e-12}};
  if (experiment == "parametrix") return {{"exact_residual", 1e-12}, {"gain_per_order", 0.5}};
  if (experiment == "kernel-decay") return {{"power", 0.15}, {"log", 0.25}, {"bounded_drift", 0.10}, {"x_uniform", 0.2}, {"dyadic", 1e-10}};
  if (experiment == "functional-bound") return {{"exponent", 0.3}};
  if (experiment == "vanishing-order") return {{"derivative", 1e-9}};
  if (experiment == "asym-sum") return {{"doubling_ratio", 2.0}};
  return {};
}

namespace detail {

/** @brief Strict object reader: every key must be consumed, errors carry the field path. */
class StrictObject {
 public:
  StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_ + ": expected an object");
  }
  bool has(const std::string& k) const { return j_.contains(k); }
  const json& at(const std::string& k) {
    seen_.insert(k);
    return j_.at(k);
  }
  std::string path(const std::string& k) const { return path_ + "." + k; }
  template <class T>
  void get(const std::string& k, T& out) {
    if (!has(k)) return;
    const json& v = at(k);
    try {
      out = v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path(k) + ": wrong type");
    }
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(path(it.key()) + ": unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline GroupConfig parse_group(const json& j, const std::string& path) {
  StrictObject o(j, path);
  GroupConfig g;
  std::string kind = "torus";
  o.get("kind", kind);
  try {
    g.kind = parse_kind(kind);
  } catch (const ConfigError&) {
    throw ConfigError(o.path("kind") + ": unknown group kind '" + kind + "'");
  }
  o.get("cutoff", g.cutoff);
  o.get("grid", g.grid);
  o.get("band", g.band);
  o.finish();
  if (g.cutoff < 1) throw ConfigError(o.path("cutoff") + ": cutoff must be at least 1");
  if (g.kind == GroupKind::torus && g.cutoff != std::floor(g.cutoff)) throw ConfigError(o.path("cutoff") + ": torus cutoff must be an integer");
  if (g.kind == GroupKind::su2 && 2 * g.cutoff != std::floor(2 * g.cutoff))
    throw ConfigError(o.path("cutoff") + ": SU(2) cutoff must be a multiple of 1/2");
  if (g.grid < 0) throw ConfigError(o.path("grid") + ": grid must be nonnegative");
  return g;
}

}  // namespace detail

/** @brief Split a zoo id "name:p1,p2" into the name and numeric parameters. */
inline std::pair<std::string, std::vector<double>> split_zoo_id(const std::string& id) {
  auto colon = id.find(':');
  std::string name = id.substr(0, colon);
  std::vector<double> params;
  if (colon != std::string::npos) {
    std::stringstream ss(id.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        size_t used = 0;
        params.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ConfigError("zoo id '" + id + "': bad parameter '" + tok + "'");
      }
    }
  }
  return {name, params};
}

struct ZooEntry {
  std::string name;
  int params = 0;
  bool x_dependent = false;
  std::string description;
};

inline const std::vector<ZooEntry>& zoo_entries() {
  static const std::vector<ZooEntry> z{
      {"bilaplacian", 0, false, "<xi1>^2 <xi2>^2 I, order (2,2)"},
      {"multiplier", 2, false, "<xi1>^m1 <xi2>^m2 I, order (m1,m2)"},
      {"coeff-multiplier", 2, true, "(2 + phi1(x1) phi2(x2)) <xi1>^m1 <xi2>^m2 I; phi = cos(theta) on T1, Re u_11 on SU(2)"},
      {"finite-rank", 0, false, "I on the keys with label radius <= 1 in both factors, zero elsewhere; order (0,0)"},
      {"su2-casimir-mix", 0, false, "<xi1>^2 <xi2>^2 I + i dxi1(X_3) (x) dxi2(X_3), order (2,2)"},
      {"kernel-probe", 2, false, "homogeneous multiplier of order (m1,m2) used by the kernel decay fits"},
  };
  return z;
}

inline const ZooEntry& zoo_entry(const std::string& id) {
  auto [name, params] = split_zoo_id(id);
  for (auto& e : zoo_entries())
    if (e.name == name) {
      if (static_cast<int>(params.size()) != e.params)
        throw ConfigError("zoo id '" + id + "': expected " + std::to_string(e.params) + " parameters");
      return e;
    }
  throw ConfigError("unknown zoo id '" + id + "'");
}

/** @brief The scalar field 2 + phi1(x1) phi2(x2) of the coefficient multiplier. */
inline cplx zoo_coefficient(const GroupElement& g1, const GroupElement& g2) {
  auto phi = [](const GroupElement& g) { return g.kind == GroupKind::torus ? std::cos(g.theta) : g.u(0, 0).real(); };
  return 2.0 + phi(g1) * phi(g2);
}

/** @brief Build a zoo symbol on a space. */
inline BisingularSymbol make_zoo_symbol(const SpacePtr& sp, const std::string& id) {
  const ZooEntry& e = zoo_entry(id);
  auto params = split_zoo_id(id).second;
  if (e.name == "bilaplacian") return multiplier_symbol(sp, 2, 2);
  if (e.name == "multiplier") return multiplier_symbol(sp, params[0], params[1]);
  if (e.name == "kernel-probe") return probe_symbol(sp, params[0], params[1]);
  if (e.name == "coeff-multiplier") {
    if (sp->f[0].band2 < 1 || sp->f[1].band2 < 1) throw ConfigError("zoo id '" + id + "' needs an x-band of at least 1 (1/2 on SU(2))");
    return scale_by_field(multiplier_symbol(sp, params[0], params[1]), sample_field(*sp, zoo_coefficient));
  }
  if (e.name == "finite-rank") {
    BisingularSymbol s = zero_symbol(sp, 0, 0);
    s.slots[0] = multiplier_coef(
        *sp, [&](const IrrepInfo& r) { return label_radius(sp->f[0].kind, r.label) <= 1 ? 1.0 : 0.0; },
        [&](const IrrepInfo& r) { return label_radius(sp->f[1].kind, r.label) <= 1 ? 1.0 : 0.0; });
    return s;
  }
  // su2-casimir-mix
  BisingularSymbol s = multiplier_symbol(sp, 2, 2);
  const auto& a1 = *sp->f[0].dual;
  const auto& a2 = *sp->f[1].dual;
  int k1 = lie_dim(a1.kind) - 1, k2 = lie_dim(a2.kind) - 1;
  for_each_block(*sp, [&](int r1, int r2) {
    const MatC& x1 = a1.generators[r1][k1];
    const MatC& x2 = a2.generators[r2][k2];
    MatC mix(x1.rows() * x2.rows(), x1.cols() * x2.cols());
    for (int i = 0; i < x1.rows(); ++i)
      for (int j = 0; j < x1.cols(); ++j) mix.block(i * x2.rows(), j * x2.cols(), x2.rows(), x2.cols()) = kI * x1(i, j) * x2;
    s.set_block(0, r1, r2, s.block(0, r1, r2) + mix);
  });
  return s;
}

/** @brief Default x-band (label units) of a factor for an experiment and symbol. */
inline double default_band(const GroupConfig& g, const ExperimentConfig& c) {
  if (g.band >= 0) return g.band;
  bool xdep = zoo_entry(c.symbol).x_dependent || (!c.second.empty() && zoo_entry(c.second).x_dependent);
  if (!xdep) return 0;
  // the inverse of an x-dependent symbol is not band-limited: keep more x-modes
  if (c.experiment == "parametrix") return g.kind == GroupKind::torus ? 6 : 1;
  return g.kind == GroupKind::torus ? 1 : 0.5;
}

inline ExperimentConfig parse_config(const json& j) {
  detail::StrictObject o(j, "$");
  ExperimentConfig c;
  c.echo = j;
  if (!o.has("group1") || !o.has("group2")) throw ConfigError("$: group1 and group2 are required");
  c.group1 = detail::parse_group(o.at("group1"), "$.group1");
  c.group2 = detail::parse_group(o.at("group2"), "$.group2");
  if (o.has("symbol")) {
    const json& s = o.at("symbol");
    if (s.is_string()) {
      c.symbol = s.get<std::string>();
    } else {
      detail::StrictObject so(s, "$.symbol");
      so.get("id", c.symbol);
      so.get("second", c.second);
      so.finish();
    }
  }
  o.get("experiment", c.experiment);
  o.get("N", c.N);
  o.get("seeds", c.seeds);
  o.get("output", c.output);
  if (o.has("s")) {
    const json& s = o.at("s");
    if (!s.is_array() || s.size() != 2) throw ConfigError("$.s: expected [s1, s2]");
    c.s1 = s[0].get<double>();
    c.s2 = s[1].get<double>();
  }
  if (o.has("functional")) {
    detail::StrictObject fo(o.at("functional"), "$.functional");
    fo.get("f1", c.functional.f1);
    fo.get("f2", c.functional.f2);
    fo.get("alpha", c.functional.alpha);
    fo.get("beta", c.functional.beta);
    fo.get("m1", c.functional.m1);
    fo.get("m2", c.functional.m2);
    fo.get("t_fixed", c.functional.t_fixed);
    fo.get("octaves", c.functional.octaves);
    fo.finish();
  }
  if (std::find(experiment_kinds().begin(), experiment_kinds().end(), c.experiment) == experiment_kinds().end())
    throw ConfigError("$.experiment: unknown experiment '" + c.experiment + "'");
  auto defaults = default_tolerances(c.experiment);
  if (o.has("tolerances")) {
    const json& t = o.at("tolerances");
    if (!t.is_object()) throw ConfigError("$.tolerances: expected an object");
    for (auto it = t.begin(); it != t.end(); ++it) {
      if (!defaults.count(it.key())) throw ConfigError("$.tolerances." + it.key() + ": unknown tolerance for " + c.experiment);
      if (!it->is_number()) throw ConfigError("$.tolerances." + it.key() + ": expected a number");
      c.tolerances[it.key()] = it->get<double>();
    }
  }
  o.finish();
  try {
    zoo_entry(c.symbol);
    if (!c.second.empty()) zoo_entry(c.second);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("$.symbol: ") + e.what());
  }
  if (c.N < 1) throw ConfigError("$.N: must be at least 1");
  if (c.seeds < 1) throw ConfigError("$.seeds: must be at least 1");
  if (c.functional.octaves < 2) throw ConfigError("$.functional.octaves: must be at least 2");
  return c;
}

// ---------------------------------------------------------------- results

struct Check {
  std::string name;
  double value = 0;
  double tolerance = 0;
  std::string relation;  ///< "<=", ">=", "in"
  double upper = 0;      ///< upper end for "in"
  bool pass = false;
};

/** @brief A CSV table with a fixed header; cells are formatted deterministically. */
struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  static std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
  }
  template <class... T>
  void add(const T&... cells) {
    std::vector<std::string> r;
    (r.push_back(cell(cells)), ...);
    rows.push_back(std::move(r));
  }
  std::string csv() const {
    std::ostringstream o;
    for (size_t i = 0; i < header.size(); ++i) o << (i ? "," : "") << header[i];
    o << '\n';
    for (auto& r : rows) {
      for (size_t i = 0; i < r.size(); ++i) o << (i ? "," : "") << r[i];
      o << '\n';
    }
    return o.str();
  }

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(bool b) { return b ? "1" : "0"; }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(size_t v) { return std::to_string(v); }
  static std::string cell(double v) { return num(v); }
};

struct SuiteResult {
  std::vector<Check> checks;
  std::vector<Table> tables;
  std::vector<std::pair<std::string, json>> documents;  ///< name -> JSON artifact
  std::map<std::string, std::string> fingerprints;

  bool pass() const {
    for (auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  void at_most(const std::string& n, double v, double tol) { checks.push_back({n, v, tol, "<=", 0, v <= tol}); }
  void at_least(const std::string& n, double v, double tol) { checks.push_back({n, v, tol, ">=", 0, v >= tol}); }
  void between(const std::string& n, double v, double lo, double hi) { checks.push_back({n, v, lo, "in", hi, v >= lo && v <= hi}); }
  void holds(const std::string& n, bool b) { checks.push_back({n, b ? 1.0 : 0.0, 1, ">=", 0, b}); }
};

// ---------------------------------------------------------------- suites

namespace detail {

inline double tol(const ExperimentConfig& c, const std::string& key) {
  auto it = c.tolerances.find(key);
  if (it != c.tolerances.end()) return it->second;
  return default_tolerances(c.experiment).at(key);
}

inline AtlasPtr group_atlas(const GroupConfig& g) { return make_atlas_ptr(build_atlas(g.kind, g.cutoff2(), g.grid)); }

inline SpacePtr config_space(const ExperimentConfig& c, double cutoff_scale = 1.0) {
  auto band2 = [&](const GroupConfig& g) {
    double b = default_band(g, c);
    return g.kind == GroupKind::torus ? static_cast<int>(b) : static_cast<int>(std::lround(2 * b));
  };
  auto s = std::make_shared<SymbolSpace>();
  GroupConfig g1 = c.group1, g2 = c.group2;
  g1.cutoff *= cutoff_scale;
  g2.cutoff *= cutoff_scale;
  s->f[0] = make_factor_space(g1.kind, g1.cutoff2(), band2(g1), 1, cutoff_scale == 1.0 ? g1.grid : 0);
  s->f[1] = make_factor_space(g2.kind, g2.cutoff2(), band2(g2), 2, cutoff_scale == 1.0 ? g2.grid : 0);
  return s;
}

inline void fingerprint(SuiteResult& r, const GroupAtlas& a1, const GroupAtlas& a2) {
  r.fingerprints["group1"] = atlas_fingerprint(a1);
  r.fingerprints["group2"] = atlas_fingerprint(a2);
}

inline void add_slopes_table(Table& t, const ExpansionReport& rep) {
  for (size_t n = 0; n < rep.slopes.size(); ++n) t.add(static_cast<int>(n + 1), rep.slopes[n].s1, rep.slopes[n].s2, rep.slopes[n].n1, rep.slopes[n].n2);
}

inline Table shell_table_csv(const std::string& name, const ExpansionReport& rep) {
  Table t{name, {"N", "l1", "l2", "remainder"}, {}};
  for (auto& e : rep.shells) t.add(e.N, e.l1, e.l2, e.value);
  return t;
}

inline SuiteResult suite_atlas(const ExperimentConfig& c) {
  SuiteResult r;
  Table t{"atlas", {"factor", "kind", "cutoff2", "resolution", "nodes", "schur", "unitarity"}, {}};
  AtlasPtr a[2] = {group_atlas(c.group1), group_atlas(c.group2)};
  for (int f = 0; f < 2; ++f) {
    double s = schur_residual(*a[f]), u = unitarity_residual(*a[f]);
    t.add(f + 1, kind_name(a[f]->kind), a[f]->cutoff2, a[f]->resolution, a[f]->size(), s, u);
    r.at_most("schur_" + std::to_string(f + 1), s, tol(c, "schur"));
    r.at_most("unitarity_" + std::to_string(f + 1), u, tol(c, "unitarity"));
  }
  r.tables.push_back(t);
  r.documents.push_back({"atlas1", atlas_to_json(*a[0])});
  fingerprint(r, *a[0], *a[1]);
  return r;
}

inline SuiteResult suite_fourier(const ExperimentConfig& c) {
  SuiteResult r;
  AtlasPtr a1 = group_atlas(c.group1), a2 = group_atlas(c.group2);
  Table t{"fourier", {"seed", "roundtrip", "parseval"}, {}};
  double worst_rt = 0, worst_p = 0;
  for (int seed = 1; seed <= c.seeds; ++seed) {
    XorShift rng(static_cast<std::uint64_t>(seed));
    FieldOnG f = random_field(a1, a2, rng);
    FieldOnG g = fourier_inverse(fourier_forward(f));
    double rt = (g.values - f.values).norm() / f.values.norm();
    double p = parseval_residual(f);
    worst_rt = std::max(worst_rt, rt);
    worst_p = std::max(worst_p, p);
    t.add(seed, rt, p);
  }
  r.at_most("roundtrip", worst_rt, tol(c, "roundtrip"));
  r.at_most("parseval", worst_p, tol(c, "parseval"));
  r.tables.push_back(t);
  fingerprint(r, *a1, *a2);
  return r;
}

inline SuiteResult suite_sobolev(const ExperimentConfig& c) {
  SuiteResult r;
  AtlasPtr a1 = group_atlas(c.group1), a2 = group_atlas(c.group2);
  if (!(c.s1 > 0.5 * lie_dim(a1->kind) && c.s2 > 0.5 * lie_dim(a2->kind)))
    throw ConfigError("$.s: the embedding needs s_i > n_i / 2");
  Table t{"sobolev", {"seed", "constant"}, {}};
  std::vector<double> cs;
  for (int seed = 1; seed <= std::max(c.seeds, 2); ++seed) {
    XorShift rng(static_cast<std::uint64_t>(seed));
    cs.push_back(sobolev_embedding_constant(a1, a2, c.s1, c.s2, rng, 50));
    t.add(seed, cs.back());
  }
  double mean = 0;
  for (double v : cs) mean += v / cs.size();
  double spread = 0;
  for (double v : cs) spread = std::max(spread, std::abs(v / mean - 1));
  r.at_most("embedding_spread", spread, tol(c, "embedding_spread"));
  r.tables.push_back(t);
  fingerprint(r, *a1, *a2);
  return r;
}

inline SuiteResult suite_bessel(const ExperimentConfig& c) {
  SuiteResult r;
  AtlasPtr a1 = group_atlas(c.group1), a2 = group_atlas(c.group2);
  FieldOnG B = bessel_kernel(a1, a2, c.s1, c.s2);
  double scale_v = B.values.cwiseAbs().maxCoeff();
  Table t{"bessel", {"node1", "node2", "spectral", "gamma_path", "abs_diff"}, {}};
  // about 16 x 16 probe nodes, always including the identity
  int st1 = std::max(1, a1->size() / 16), st2 = std::max(1, a2->size() / 16);
  double worst = 0;
  for (int i = 0; i < a1->size(); i += st1)
    for (int k = 0; k < a2->size(); k += st2) {
      cplx g = bessel_gamma_value(*a1, *a2, c.s1, c.s2, a1->nodes[i], a2->nodes[k]);
      double d = std::abs(g - B.values(i, k));
      worst = std::max(worst, d / scale_v);
      t.add(i, k, B.values(i, k).real(), g.real(), d);
    }
  double l2 = bessel_l2_sq_spectral(*a1, *a2, c.s1, c.s2);
  r.at_most("gamma_path", worst, tol(c, "gamma_path"));
  r.at_most("l2_parseval", std::abs(B.l2_norm_sq() - l2) / l2, tol(c, "l2_parseval"));
  r.tables.push_back(t);
  fingerprint(r, *a1, *a2);
  return r;
}

inline SuiteResult suite_leibniz(const ExperimentConfig& c) {
  SuiteResult r;
  AtlasPtr a1 = group_atlas(c.group1), a2 = group_atlas(c.group2);
  Table t{"leibniz", {"seed", "identity", "residual"}, {}};
  if (a1->kind == GroupKind::torus && a2->kind == GroupKind::torus) {
    double worst = 0;
    const int orders[4][2] = {{1, 0}, {0, 1}, {1, 1}, {2, 1}};
    for (int seed = 1; seed <= c.seeds; ++seed) {
      XorShift rng(static_cast<std::uint64_t>(seed));
      Spectrum F = random_spectrum(a1, a2, rng), G = random_spectrum(a1, a2, rng);
      for (auto& o : orders) {
        double v = leibniz_residual(F, G, o[0], o[1]);
        worst = std::max(worst, v);
        t.add(seed, "torus-" + std::to_string(o[0]) + std::to_string(o[1]), v);
      }
    }
    r.at_most("torus", worst, tol(c, "torus"));
  }
  // definitional kernel-side identity on each SU(2) factor
  for (int f = 0; f < 2; ++f) {
    const AtlasPtr& a = f == 0 ? a1 : a2;
    if (a->kind != GroupKind::su2) continue;
    double worst = 0;
    for (int seed = 1; seed <= c.seeds; ++seed) {
      XorShift rng(static_cast<std::uint64_t>(1000 + seed));
      VecC F(a->coeff_dim), G(a->coeff_dim);
      for (int i = 0; i < a->coeff_dim; ++i) F(i) = rng.complex_normal();
      for (int i = 0; i < a->coeff_dim; ++i) G(i) = rng.complex_normal();
      double v = kernel_leibniz_residual(*a, F, G);
      worst = std::max(worst, v);
      t.add(seed, "kernel-" + std::to_string(f + 1), v);
    }
    r.at_most("kernel_" + std::to_string(f + 1), worst, tol(c, "kernel"));
  }
  if (r.checks.empty()) throw ConfigError("leibniz experiment needs T x T or an SU(2) factor");
  r.tables.push_back(t);
  fingerprint(r, *a1, *a2);
  return r;
}

inline SuiteResult suite_compose(const ExperimentConfig& c) {
  SuiteResult r;
  SpacePtr sp = config_space(c);
  std::string second = c.second.empty() ? "coeff-multiplier:1,0" : c.second;
  BisingularSymbol a = make_zoo_symbol(sp, c.symbol), b = make_zoo_symbol(sp, second);
  ExpansionReport rep = compose_expansion(a, b, c.N);
  Table s{"slopes", {"N", "slope1", "slope2", "points1", "points2"}, {}};
  add_slopes_table(s, rep);
  for (int n = 1; n <= c.N; ++n) {
    const SlopePair& p = rep.slopes[n - 1];
    r.between("slope1_N" + std::to_string(n), p.s1, n - tol(c, "slope_below"), n + tol(c, "slope_above"));
    r.between("slope2_N" + std::to_string(n), p.s2, n - tol(c, "slope_below"), n + tol(c, "slope_above"));
  }
  r.at_most("oracle", rep.oracle_residual, tol(c, "oracle"));
  r.tables.push_back(s);
  r.tables.push_back(shell_table_csv("shells", rep));
  r.documents.push_back({"expreport", expansion_report_json(rep)});
  fingerprint(r, *sp->f[0].dual, *sp->f[1].dual);
  return r;
}

inline SuiteResult suite_adjoint(const ExperimentConfig& c) {
  SuiteResult r;
  SpacePtr sp = config_space(c);
  BisingularSymbol s = make_zoo_symbol(sp, c.symbol);
  ExpansionReport rep = adjoint_expansion(s, c.N);
  Table t{"slopes", {"N", "slope1", "slope2", "points1", "points2"}, {}};
  add_slopes_table(t, rep);
  // the j = 0 diagonal term is the pointwise adjoint
  r.at_most("leading", max_difference(rep.primary[0], pointwise_adjoint(s)), tol(c, "leading"));
  for (int n = 1; n <= c.N; ++n) {
    const SlopePair& p = rep.slopes[n - 1];
    r.at_least("slope1_N" + std::to_string(n), p.s1, n - tol(c, "slope_below"));
    r.at_least("slope2_N" + std::to_string(n), p.s2, n - tol(c, "slope_below"));
  }
  r.at_most("oracle", rep.oracle_residual, tol(c, "oracle"));
  r.tables.push_back(t);
  r.tables.push_back(shell_table_csv("shells", rep));
  r.documents.push_back({"expreport", expansion_report_json(rep)});
  fingerprint(r, *sp->f[0].dual, *sp->f[1].dual);
  return r;
}

/** @brief Max |entry| of a residual symbol over its in-radius keys. */
inline double residual_max(const BisingularSymbol& s) { return max_difference(s, zero_symbol(s.space, s.m1, s.m2)); }

inline SuiteResult suite_parametrix(const ExperimentConfig& c) {
  SuiteResult r;
  SpacePtr sp = config_space(c);
  BisingularSymbol a = make_zoo_symbol(sp, c.symbol);
  ParametrixResult p = parametrix(a, c.N);
  Table t{"slopes", {"side", "N", "slope1", "slope2", "residual_max"}, {}};
  for (int n = 1; n <= c.N; ++n) {
    t.add("right", n, p.right_report.slopes[n - 1].s1, p.right_report.slopes[n - 1].s2, residual_max(p.right_report.remainders[n - 1]));
    t.add("left", n, p.left_report.slopes[n - 1].s1, p.left_report.slopes[n - 1].s2, residual_max(p.left_report.remainders[n - 1]));
  }
  if (a.x_independent()) {
    r.at_most("right_residual_N1", residual_max(p.right_report.remainders[0]), tol(c, "exact_residual"));
    r.at_most("left_residual_N1", residual_max(p.left_report.remainders[0]), tol(c, "exact_residual"));
  } else if (c.N >= 2) {
    // shell-slope gain per unit N, averaged over 1..N
    for (int f = 0; f < 2; ++f) {
      auto sl = [&](const ExpansionReport& e, int n) { return f == 0 ? e.slopes[n - 1].s1 : e.slopes[n - 1].s2; };
      double gr = (sl(p.right_report, c.N) - sl(p.right_report, 1)) / (c.N - 1);
      double gl = (sl(p.left_report, c.N) - sl(p.left_report, 1)) / (c.N - 1);
      r.at_least("right_gain" + std::to_string(f + 1), gr, tol(c, "gain_per_order"));
      r.at_least("left_gain" + std::to_string(f + 1), gl, tol(c, "gain_per_order"));
    }
  }
  r.tables.push_back(t);
  r.tables.push_back(shell_table_csv("right_shells", p.right_report));
  r.tables.push_back(shell_table_csv("left_shells", p.left_report));
  r.documents.push_back({"expreport_right", expansion_report_json(p.right_report)});
  r.documents.push_back({"expreport_left", expansion_report_json(p.left_report)});
  fingerprint(r, *sp->f[0].dual, *sp->f[1].dual);
  return r;
}

inline SuiteResult suite_kernel_decay(const ExperimentConfig& c) {
  SuiteResult r;
  SpacePtr sp = config_space(c);
  BisingularSymbol s = make_zoo_symbol(sp, c.symbol);
  DecayReport rep = decay_report(s, 0);
  Table d{"decay", {"dist1", "dist2", "abs_k", "predicted_bound", "ratio"}, {}};
  for (auto& e : rep.samples) d.add(e.d1, e.d2, e.abs_k, e.predicted, e.abs_k / e.predicted);
  Table f{"fit", {"factor", "regime", "bullet", "fitted", "band", "expected", "decades", "sup_abs", "seminorm"}, {}};
  for (int i = 0; i < 2; ++i) {
    f.add(i + 1, regime_name(rep.regime.r[i]), rep.regime.bullet, rep.fitted[i], rep.band[i], rep.regime.expected[i], rep.decades[i], rep.sup_abs,
          rep.seminorm);
    if (rep.regime.r[i] == KernelRegime::bounded) continue;
    double tl = rep.regime.r[i] == KernelRegime::power ? tol(c, "power") : tol(c, "log");
    r.at_most("relative_error" + std::to_string(i + 1), std::abs(rep.fitted[i] - rep.regime.expected[i]) / std::abs(rep.regime.expected[i]), tl);
  }
  r.holds("scale_range", !rep.degraded);
  if (rep.regime.r[0] == KernelRegime::bounded && rep.regime.r[1] == KernelRegime::bounded) {
    SpacePtr sp2 = config_space(c, 2.0);
    DecayReport big = decay_report(make_zoo_symbol(sp2, c.symbol), 0);
    r.at_most("bounded_drift", std::abs(big.sup_abs - rep.sup_abs) / rep.sup_abs, tol(c, "bounded_drift"));
    f.add(0, "doubled", rep.regime.bullet, std::nan(""), std::nan(""), 0.0, big.decades[0], big.sup_abs, big.seminorm);
  }
  if (!s.x_independent()) {
    double spread = 0;
    int n = static_cast<int>(s.slots.size());
    for (int k = 1; k < std::min(n, 5); ++k) {
      DecayReport o = decay_report(s, k * n / 5);
      for (int i = 0; i < 2; ++i)
        if (rep.regime.r[i] != KernelRegime::bounded) spread = std::max(spread, std::abs(o.fitted[i] - rep.fitted[i]));
    }
    r.at_most("x_uniform", spread, tol(c, "x_uniform"));
  }
  r.at_most("dyadic", dyadic_reconstruction_residual(s, 0), tol(c, "dyadic"));
  r.tables.push_back(d);
  r.tables.push_back(f);
  fingerprint(r, *sp->f[0].dual, *sp->f[1].dual);
  return r;
}

inline FunctionalProfile parse_profile(const std::string& s) {
  if (s == "exp") return FunctionalProfile::exponential;
  if (s == "resolvent") return FunctionalProfile::resolvent;
  if (s == "bump") return FunctionalProfile::bump;
  throw ConfigError("$.functional: unknown profile '" + s + "' (exp, resolvent, bump)");
}

inline SuiteResult suite_functional(const ExperimentConfig& c) {
  SuiteResult r;
  SpacePtr sp = config_space(c);
  const FunctionalConfig& fc = c.functional;
  std::vector<double> ts;
  for (int e = 1; e <= fc.octaves; ++e) ts.push_back(std::ldexp(1.0, -e));
  MultiIndex al(sp->f[0].diff.size(), 0), be(sp->f[1].diff.size(), 0);
  al[0] = fc.alpha;
  be[0] = fc.beta;
  FunctionalBoundReport fb = functional_bound_check(sp, parse_profile(fc.f1), parse_profile(fc.f2), al, be, fc.m1, fc.m2, ts, fc.t_fixed);
  const double e = tol(c, "exponent");
  for (int i = 0; i < 2; ++i) {
    r.at_most("t_exponent" + std::to_string(i + 1), std::abs(fb.t_exponent[i] - fb.nominal_t[i]), e);
    if (fb.xi_fitted[i]) r.at_most("xi_exponent" + std::to_string(i + 1), std::abs(fb.xi_exponent[i] - fb.nominal_xi[i]), e);
  }
  BisingularSymbol s = make_zoo_symbol(sp, c.symbol);
  CutoffScalingReport cs = cutoff_scaling_check(s, s.m1 - 2, s.m2 - 2, {1, 1, 0, 0}, ts, fc.t_fixed);
  for (int i = 0; i < 2; ++i)
    r.at_most("cutoff_scaling" + std::to_string(i + 1), std::abs(cs.fitted[i] - cs.nominal[i]), e);
  Table t{"sweep", {"t", "functional1", "functional2", "cutoff_ratio1", "cutoff_ratio2"}, {}};
  for (size_t k = 0; k < ts.size(); ++k) t.add(ts[k], fb.q1[k], fb.q2[k], cs.ratio1[k], cs.ratio2[k]);
  Table x{"exponents", {"quantity", "factor", "fitted", "nominal"}, {}};
  for (int i = 0; i < 2; ++i) {
    x.add("t", i + 1, fb.t_exponent[i], fb.nominal_t[i]);
    if (fb.xi_fitted[i]) x.add("xi", i + 1, fb.xi_exponent[i], fb.nominal_xi[i]);
    x.add("cutoff", i + 1, cs.fitted[i], cs.nominal[i]);
  }
  r.tables.push_back(t);
  r.tables.push_back(x);
  fingerprint(r, *sp->f[0].dual, *sp->f[1].dual);
  return r;
}

inline SuiteResult suite_vanishing(const ExperimentConfig& c) {
  SuiteResult r;
  AtlasPtr g1 = group_atlas(c.group1), g2 = group_atlas(c.group2);
  // first-order zero at the identity: e^{i theta} - 1 on T1, u_11 - 1 on SU(2)
  auto z = [](const GroupElement& g) { return g.kind == GroupKind::torus ? std::exp(cplx(0, g.theta)) - 1.0 : g.u(0, 0) - 1.0; };
  struct Example {
    std::string name;
    std::function<cplx(const GroupElement&, const GroupElement&)> q;
    int a1, a2;
    bool expect;
  };
  std::vector<Example> ex{{"product-of-zeros", [&](auto& x, auto& y) { return z(x) * z(y); }, 1, 1, true},
                          {"square-in-x1", [&](auto& x, auto&) { return z(x) * z(x); }, 2, 0, true},
                          {"constant", [](auto&, auto&) { return cplx(1.0); }, 1, 1, false}};
  Table t{"vanishing", {"example", "a1", "a2", "max_low_derivative", "slope1", "slope2", "derivatives_vanish", "decay_holds"}, {}};
  for (auto& e : ex) {
    VanishingReport v = vanishing_order_check(g1, g2, e.q, e.a1, e.a2, tol(c, "derivative"));
    t.add(e.name, e.a1, e.a2, v.max_low_derivative, v.slope[0], v.slope[1], v.derivatives_vanish, v.decay_holds);
    r.holds(e.name + "_equivalent", v.equivalent());
    r.holds(e.name + "_expected", v.derivatives_vanish == e.expect);
  }
  r.tables.push_back(t);
  fingerprint(r, *g1, *g2);
  return r;
}

/** @brief Terms sigma_j = <xi1>^{-j} <xi2>^{-j} (symbol) for j = 0..3. */
inline std::vector<BisingularSymbol> asym_terms(const SpacePtr& sp, const std::string& id) {
  BisingularSymbol s = make_zoo_symbol(sp, id);
  std::vector<BisingularSymbol> terms;
  for (int j = 0; j <= 3; ++j) {
    BisingularSymbol t = pointwise_product(multiplier_symbol(sp, -j, -j), s);
    terms.push_back(t);
  }
  return terms;
}

inline SuiteResult suite_asym(const ExperimentConfig& c) {
  SuiteResult r;
  Table t{"tails", {"cutoff_scale", "M", "tail", "schedule_gap"}, {}};
  Table sch{"schedule", {"cutoff_scale", "j", "t", "constant", "lhs", "exponent"}, {}};
  double tails[2][3] = {}, gaps[2] = {};
  bool holds = true;
  for (int k = 0; k < 2; ++k) {
    double scale_c = k == 0 ? 1.0 : 2.0;
    SpacePtr sp = config_space(c, scale_c);
    auto terms = asym_terms(sp, c.symbol);
    AsymptoticSum a = asymptotic_sum(terms);
    ScheduleHints tight;
    tight.margin = 0.25;
    AsymptoticSum b = asymptotic_sum(terms, tight);
    holds = holds && a.schedule.holds() && b.schedule.holds();
    BisingularSymbol gap = subtract(a.symbol, b.symbol);
    gap.m1 = terms.back().m1;
    gap.m2 = terms.back().m2;
    gaps[k] = seminorm_estimate(gap, {1, 1, 0, 0});
    for (int M = 1; M <= 3; ++M) {
      tails[k][M - 1] = a.tail[M - 1];
      t.add(scale_c, M, a.tail[M - 1], M == 3 ? gaps[k] : std::nan(""));
    }
    for (size_t j = 0; j < a.schedule.t.size(); ++j)
      sch.add(scale_c, static_cast<int>(j), a.schedule.t[j], a.schedule.caps[j], a.schedule.lhs[j], a.schedule.exponent[j]);
  }
  r.holds("schedule_inequalities", holds);
  const double q = tol(c, "doubling_ratio");
  auto ratio = [](double x, double y) { return std::max(x, y) / std::max(std::min(x, y), 1e-300); };
  for (int M = 1; M <= 3; ++M) r.at_most("tail_doubling_M" + std::to_string(M), ratio(tails[0][M - 1], tails[1][M - 1]), q);
  r.at_most("schedule_gap_doubling", ratio(gaps[0], gaps[1]), q);
  r.tables.push_back(t);
  r.tables.push_back(sch);
  SpacePtr sp = config_space(c);
  fingerprint(r, *sp->f[0].dual, *sp->f[1].dual);
  return r;
}

}  // namespace detail

/** @brief Execute the suite named by the config (no files written). */
inline SuiteResult run_suite(const ExperimentConfig& c) {
  const std::string& e = c.experiment;
  if (e == "atlas-check") return detail::suite_atlas(c);
  if (e == "fourier") return detail::suite_fourier(c);
  if (e == "sobolev") return detail::suite_sobolev(c);
  if (e == "bessel") return detail::suite_bessel(c);
  if (e == "leibniz") return detail::suite_leibniz(c);
  if (e == "compose") return detail::suite_compose(c);
  if (e == "adjoint") return detail::suite_adjoint(c);
  if (e == "parametrix") return detail::suite_parametrix(c);
  if (e == "kernel-decay") return detail::suite_kernel_decay(c);
  if (e == "functional-bound") return detail::suite_functional(c);
  if (e == "vanishing-order") return detail::suite_vanishing(c);
  if (e == "asym-sum") return detail::suite_asym(c);
  throw ConfigError("$.experiment: unknown experiment '" + e + "'");
}

// ---------------------------------------------------------------- run / sweep

inline json check_json(const Check& k) {
  json j{{"name", k.name}, {"value", std::isnan(k.value) ? json(nullptr) : json(k.value)}, {"relation", k.relation}, {"pass", k.pass}};
  if (k.relation == "in")
    j["range"] = {k.tolerance, k.upper};
  else
    j["tolerance"] = k.tolerance;
  return j;
}

struct RunOutcome {
  SuiteResult result;
  json manifest;
  std::vector<std::string> files;
  int exit_code() const { return result.pass() ? 0 : 1; }
};

inline void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << body;
}

/** @brief Run, write `<output>_<table>.csv`, JSON artifacts and `<output>_manifest.json`. */
inline RunOutcome run(const ExperimentConfig& c, bool write = true) {
  auto t0 = std::chrono::steady_clock::now();
  RunOutcome o;
  o.result = run_suite(c);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json checks = json::array();
  for (auto& k : o.result.checks) checks.push_back(check_json(k));
  std::map<std::string, double> tols = default_tolerances(c.experiment);
  for (auto& [k, v] : c.tolerances) tols[k] = v;
  std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  o.manifest = {{"format", "manifest-v1"},
                {"config", c.echo},
                {"experiment", c.experiment},
                {"tolerances", tols},
                {"fingerprints", o.result.fingerprints},
                {"checks", checks},
                {"pass", o.result.pass()},
                {"wall_seconds", secs},
                {"finished", stamp}};
  if (write) {
    for (auto& t : o.result.tables) {
      std::string p = c.output + "_" + t.name + ".csv";
      write_text(p, t.csv());
      o.files.push_back(p);
    }
    for (auto& [name, doc] : o.result.documents) {
      std::string p = c.output + "_" + name + ".json";
      write_text(p, doc.dump(1) + "\n");
      o.files.push_back(p);
    }
    o.manifest["files"] = o.files;
    std::string p = c.output + "_manifest.json";
    write_text(p, o.manifest.dump(2) + "\n");
    o.files.push_back(p);
  }
  return o;
}

/** @brief Copy of a config with one axis set to a value. Axes: cutoff, N, t, s. */
inline ExperimentConfig with_axis(ExperimentConfig c, const std::string& axis, double v) {
  if (axis == "cutoff") {
    c.group1.cutoff = v;
    c.group2.cutoff = v;
    c.group1.grid = c.group2.grid = 0;
  } else if (axis == "N") {
    c.N = static_cast<int>(v);
  } else if (axis == "t") {
    c.functional.t_fixed = v;
  } else if (axis == "s") {
    c.s1 = c.s2 = v;
  } else {
    throw ConfigError("sweep axis must be one of cutoff, N, t, s");
  }
  return c;
}

/** @brief Repeat a run over axis values and aggregate all checks in one table. */
inline Table sweep(const ExperimentConfig& base, const std::string& axis, const std::vector<double>& values, bool& all_pass) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  Table t{"sweep", {"axis", "value", "check", "measured", "relation", "tolerance", "upper", "pass"}, {}};
  all_pass = true;
  for (double v : values) {
    ExperimentConfig c = with_axis(base, axis, v);
    if (c.N < 1) throw ConfigError("sweep: N must be at least 1");
    c.output = base.output + "_" + axis + Table::num(v);
    RunOutcome o = run(c);
    all_pass = all_pass && o.result.pass();
    for (auto& k : o.result.checks) t.add(axis, v, k.name, k.value, k.relation, k.tolerance, k.relation == "in" ? k.upper : std::nan(""), k.pass);
  }
  return t;
}

}  // namespace bising
