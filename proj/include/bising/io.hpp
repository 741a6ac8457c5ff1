/**
 * @file io.hpp
 * @brief JSON documents: atlas-v1, spectrum-v1, symbol-v1, densop-v1, expreport-v1.
 * Complex numbers are [re, im] pairs; matrices are row-major lists of pairs.
 */
#pragma once

#include <json.hpp>

#include "calculus.hpp"

namespace bising {

using json = nlohmann::json;

namespace detail {

inline json complex_json(cplx v) { return json::array({v.real(), v.imag()}); }

inline cplx complex_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("complex value must be an [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json matrix_json(const MatC& m) {
  json out = json::array();
  for (int i = 0; i < m.rows(); ++i)
    for (int k = 0; k < m.cols(); ++k) out.push_back(complex_json(m(i, k)));
  return out;
}

inline MatC matrix_from(const json& j, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows * cols) throw ConfigError("matrix entry count mismatch");
  MatC m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < cols; ++k) m(i, k) = complex_from(j[i * cols + k]);
  return m;
}

inline void expect_format(const json& j, const char* fmt) {
  if (!j.contains("format") || j["format"] != fmt) throw ConfigError(std::string("expected document format ") + fmt);
}

inline json group_json(const GroupAtlas& a) {
  return {{"kind", kind_name(a.kind)}, {"cutoff2", a.cutoff2}, {"resolution", a.resolution}, {"fingerprint", atlas_fingerprint(a)}};
}

/** @brief Check a group descriptor against an atlas. */
inline void expect_group(const json& g, const GroupAtlas& a) {
  if (parse_kind(g.at("kind").get<std::string>()) != a.kind || g.at("cutoff2").get<int>() != a.cutoff2)
    throw ConfigError("document group does not match the atlas");
}

}  // namespace detail

// ---------------------------------------------------------------- atlas-v1

/** @brief Atlas export: irreps, nodes with Euler parameters and weights, representation matrices. */
inline json atlas_to_json(const GroupAtlas& a) {
  json j = detail::group_json(a);
  j["format"] = "atlas-v1";
  json irreps = json::array();
  for (auto& r : a.irreps)
    irreps.push_back({{"label", label_string(a.kind, r.label)}, {"label2", r.label}, {"dim", r.dim}, {"eig", r.eig}, {"weight", r.weight}});
  j["irreps"] = irreps;
  json nodes = json::array();
  for (int x = 0; x < a.size(); ++x) {
    json params = a.kind == GroupKind::torus ? json::array({a.params[x][0]})
                                             : json::array({a.params[x][0], a.params[x][1], a.params[x][2]});
    json reps = json::array();
    for (int r = 0; r < a.irrep_count(); ++r) reps.push_back(detail::matrix_json(a.repmat(r, x)));
    nodes.push_back({{"params", params}, {"weight", a.weights[x]}, {"rep", reps}});
  }
  j["nodes"] = nodes;
  j["identity_node"] = a.identity_node;
  return j;
}

/**
 * @brief Atlas import: rebuilds the atlas from (kind, cutoff2, resolution) and checks
 * every stored weight and representation matrix against it within `tol`.
 */
inline GroupAtlas atlas_from_json(const json& j, double tol = 1e-12) {
  detail::expect_format(j, "atlas-v1");
  GroupAtlas a = build_atlas(parse_kind(j.at("kind").get<std::string>()), j.at("cutoff2").get<int>(), j.at("resolution").get<int>());
  const json& nodes = j.at("nodes");
  if (static_cast<int>(nodes.size()) != a.size()) throw ConfigError("atlas node count mismatch");
  for (int x = 0; x < a.size(); ++x) {
    if (std::abs(nodes[x].at("weight").get<double>() - a.weights[x]) > tol) throw ConfigError("atlas weight mismatch");
    const json& reps = nodes[x].at("rep");
    for (int r = 0; r < a.irrep_count(); ++r) {
      int d = a.irreps[r].dim;
      if ((detail::matrix_from(reps.at(r), d, d) - a.repmat(r, x)).cwiseAbs().maxCoeff() > tol)
        throw ConfigError("atlas representation matrix mismatch");
    }
  }
  return a;
}

// ---------------------------------------------------------------- spectrum-v1 / symbol-v1

namespace detail {

inline json blocks_json(const GroupAtlas& a1, const GroupAtlas& a2, const std::function<MatC(int, int)>& block) {
  json out = json::array();
  for (int r1 = 0; r1 < a1.irrep_count(); ++r1)
    for (int r2 = 0; r2 < a2.irrep_count(); ++r2) {
      MatC m = block(r1, r2);
      if (m.cwiseAbs().maxCoeff() == 0) continue;
      out.push_back({{"xi1", a1.irreps[r1].label}, {"xi2", a2.irreps[r2].label}, {"dim", m.rows()}, {"matrix", matrix_json(m)}});
    }
  return out;
}

inline void blocks_from(const json& blocks, const GroupAtlas& a1, const GroupAtlas& a2, const std::function<void(int, int, const MatC&)>& set) {
  for (auto& b : blocks) {
    int r1 = a1.index_of(b.at("xi1").get<int>()), r2 = a2.index_of(b.at("xi2").get<int>());
    if (r1 < 0 || r2 < 0) throw ConfigError("spectral key outside the truncated dual");
    int d = a1.irreps[r1].dim * a2.irreps[r2].dim;
    set(r1, r2, matrix_from(b.at("matrix"), d, d));
  }
}

}  // namespace detail

/** @brief Spectrum export: nonzero blocks keyed by labels (2l on SU(2)). */
inline json spectrum_to_json(const Spectrum& F) {
  json j{{"format", "spectrum-v1"}, {"group1", detail::group_json(*F.atlas1)}, {"group2", detail::group_json(*F.atlas2)}};
  j["blocks"] = detail::blocks_json(*F.atlas1, *F.atlas2, [&](int r1, int r2) { return F.block(r1, r2); });
  return j;
}

inline Spectrum spectrum_from_json(const json& j, AtlasPtr a1, AtlasPtr a2) {
  detail::expect_format(j, "spectrum-v1");
  detail::expect_group(j.at("group1"), *a1);
  detail::expect_group(j.at("group2"), *a2);
  Spectrum F(a1, a2);
  detail::blocks_from(j.at("blocks"), *a1, *a2, [&](int r1, int r2, const MatC& m) { F.set_block(r1, r2, m); });
  return F;
}

/** @brief Symbol export: orders, radii, x-band and one block list per x slot. */
inline json symbol_to_json(const BisingularSymbol& s) {
  const SymbolSpace& sp = *s.space;
  json j{{"format", "symbol-v1"},
         {"group1", detail::group_json(*sp.f[0].dual)},
         {"group2", detail::group_json(*sp.f[1].dual)},
         {"band2", {sp.f[0].band2, sp.f[1].band2}},
         {"m1", s.m1},
         {"m2", s.m2},
         {"radius", {s.radius1, s.radius2}},
         {"x_independent", s.x_independent()}};
  json slots = json::array();
  for (size_t x = 0; x < s.slots.size(); ++x)
    slots.push_back(detail::blocks_json(*sp.f[0].dual, *sp.f[1].dual, [&](int r1, int r2) { return s.block(static_cast<int>(x), r1, r2); }));
  j["x_slots"] = slots;
  return j;
}

inline BisingularSymbol symbol_from_json(const json& j, const SpacePtr& sp) {
  detail::expect_format(j, "symbol-v1");
  detail::expect_group(j.at("group1"), *sp->f[0].dual);
  detail::expect_group(j.at("group2"), *sp->f[1].dual);
  if (j.at("band2")[0].get<int>() != sp->f[0].band2 || j.at("band2")[1].get<int>() != sp->f[1].band2)
    throw ConfigError("symbol x-band does not match the space");
  bool xi = j.at("x_independent").get<bool>();
  BisingularSymbol s = zero_symbol(sp, j.at("m1").get<double>(), j.at("m2").get<double>(), xi);
  s.radius1 = j.at("radius")[0].get<double>();
  s.radius2 = j.at("radius")[1].get<double>();
  const json& slots = j.at("x_slots");
  if (slots.size() != s.slots.size()) throw ConfigError("symbol x slot count mismatch");
  for (size_t x = 0; x < s.slots.size(); ++x)
    detail::blocks_from(slots[x], *sp->f[0].dual, *sp->f[1].dual,
                        [&](int r1, int r2, const MatC& m) { s.set_block(static_cast<int>(x), r1, r2, m); });
  return s;
}

// ---------------------------------------------------------------- densop-v1

/** @brief Dense operator dump on the stacked coefficient basis c1 * N2 + c2. */
inline json operator_to_json(const Operator& A, const SymbolSpace& sp) {
  json basis{{"group1", detail::group_json(*sp.f[0].dual)},
             {"group2", detail::group_json(*sp.f[1].dual)},
             {"index", "c1 * N2 + c2, c = irrep offset + i * d + j"},
             {"N1", sp.N1()},
             {"N2", sp.N2()}};
  return {{"format", "densop-v1"}, {"n", A.n}, {"basis", basis}, {"matrix", detail::matrix_json(A.dense())}};
}

inline Operator operator_from_json(const json& j, const SymbolSpace& sp) {
  detail::expect_format(j, "densop-v1");
  detail::expect_group(j.at("basis").at("group1"), *sp.f[0].dual);
  detail::expect_group(j.at("basis").at("group2"), *sp.f[1].dual);
  int n = j.at("n").get<int>();
  if (n != sp.N1() * sp.N2()) throw ConfigError("operator size does not match the space");
  return make_operator(detail::matrix_from(j.at("matrix"), n, n));
}

// ---------------------------------------------------------------- expreport-v1

inline json expansion_report_json(const ExpansionReport& r) {
  json entries = json::array(), slopes = json::array();
  for (auto& e : r.shells) entries.push_back({{"N", e.N}, {"l1", e.l1}, {"l2", e.l2}, {"remainder", e.value}});
  for (size_t n = 0; n < r.slopes.size(); ++n) {
    auto num = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
    slopes.push_back({{"N", n + 1}, {"slope1", num(r.slopes[n].s1)}, {"slope2", num(r.slopes[n].s2)}, {"points1", r.slopes[n].n1}, {"points2", r.slopes[n].n2}});
  }
  return {{"format", "expreport-v1"}, {"kind", r.kind}, {"m1", r.m1}, {"m2", r.m2}, {"N", r.N},
          {"entries", entries}, {"slopes", slopes}, {"oracle_residual", r.oracle_residual}};
}

}  // namespace bising
