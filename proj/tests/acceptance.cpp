/**
 * @file acceptance.cpp
 * @brief Acceptance run: one PASS/FAIL line per criterion with the measured values.
 * The process exits 0 once every criterion has been evaluated; the lines carry the verdicts.
 */
#include <chrono>
#include <iostream>
#include <sstream>

#include "bising/experiments.hpp"

using namespace bising;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  void need(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [x]");
  }
};

std::string fmt(double v) { return Table::num(v); }

int failures = 0;

template <class F>
void criterion(int id, const std::string& title, double budget_s, F&& body) {
  auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    body(v);
  } catch (const std::exception& e) {
    v.need(false, std::string("exception: ") + e.what());
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0) v.need(secs <= budget_s, "runtime " + fmt(secs) + " s <= " + fmt(budget_s) + " s");
  if (!v.pass) ++failures;
  std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << title << "): " << v.detail.str() << std::endl;
}

ExperimentConfig config(GroupKind k1, double c1, GroupKind k2, double c2, const std::string& experiment) {
  ExperimentConfig c;
  c.group1.kind = k1;
  c.group1.cutoff = c1;
  c.group2.kind = k2;
  c.group2.cutoff = c2;
  c.experiment = experiment;
  return c;
}

const Check& find(const SuiteResult& r, const std::string& name) {
  for (auto& k : r.checks)
    if (k.name == name) return k;
  throw std::runtime_error("missing check " + name);
}

double rel_max(const BisingularSymbol& a, const BisingularSymbol& b) {
  double s = std::max(max_difference(a, zero_symbol(a.space, a.m1, a.m2)), 1e-300);
  return max_difference(a, b) / s;
}

}  // namespace

int main() {
  criterion(1, "atlas validity", 10, [](Verdict& v) {
    GroupAtlas t = build_atlas(GroupKind::torus, 16), s = build_atlas(GroupKind::su2, 6);
    v.need(schur_residual(t) <= 1e-10, "T1 schur " + fmt(schur_residual(t)));
    v.need(unitarity_residual(t) <= 1e-12, "T1 unitarity " + fmt(unitarity_residual(t)));
    v.need(schur_residual(s) <= 1e-10, "SU(2) schur " + fmt(schur_residual(s)));
    v.need(unitarity_residual(s) <= 1e-12, "SU(2) unitarity " + fmt(unitarity_residual(s)));
  });

  criterion(2, "Fourier round-trip and Parseval", 60, [](Verdict& v) {
    const std::tuple<GroupKind, double, GroupKind, double, const char*> pairs[3] = {
        {GroupKind::torus, 16, GroupKind::torus, 16, "TxT"},
        {GroupKind::torus, 16, GroupKind::su2, 3, "TxSU(2)"},
        {GroupKind::su2, 2, GroupKind::su2, 2, "SU(2)xSU(2)"}};
    for (auto& [k1, c1, k2, c2, name] : pairs) {
      ExperimentConfig c = config(k1, c1, k2, c2, "fourier");
      c.seeds = 100;
      SuiteResult r = run_suite(c);
      v.need(r.pass(), std::string(name) + " roundtrip " + fmt(find(r, "roundtrip").value) + " parseval " + fmt(find(r, "parseval").value));
    }
  });

  criterion(3, "Leibniz-like formula", 0, [](Verdict& v) {
    ExperimentConfig c = config(GroupKind::torus, 16, GroupKind::torus, 16, "leibniz");
    c.seeds = 20;
    SuiteResult r = run_suite(c);
    v.need(r.pass(), "torus residual " + fmt(find(r, "torus").value));
    ExperimentConfig k = config(GroupKind::su2, 2, GroupKind::torus, 4, "leibniz");
    k.seeds = 3;
    SuiteResult rk = run_suite(k);
    v.need(find(rk, "kernel_1").pass, "SU(2) kernel identity " + fmt(find(rk, "kernel_1").value));
  });

  criterion(4, "quantize/extract round-trip", 0, [](Verdict& v) {
    const std::tuple<GroupKind, int, int, GroupKind, int, int, const char*> spaces[2] = {
        {GroupKind::torus, 16, 1, GroupKind::torus, 16, 1, "TxT"}, {GroupKind::torus, 8, 1, GroupKind::su2, 3, 1, "TxSU(2)"}};
    for (auto& [k1, c1, b1, k2, c2, b2, name] : spaces) {
      SpacePtr sp = make_symbol_space(k1, c1, b1, k2, c2, b2);
      double worst = 0;
      for (auto& id : {"bilaplacian", "multiplier:1,-1", "coeff-multiplier:1,0", "finite-rank", "su2-casimir-mix", "kernel-probe:1,1"}) {
        BisingularSymbol s = make_zoo_symbol(sp, id);
        BisingularSymbol back = symbol_of_operator(quantize(s), sp, s.m1, s.m2);
        // keys within the x-band of the cutoff see the truncation
        back.radius1 -= x_loss(s, 1);
        back.radius2 -= x_loss(s, 2);
        worst = std::max(worst, rel_max(s, back));
      }
      v.need(worst <= 1e-10, std::string(name) + " zoo max relative " + fmt(worst));
    }
  });

  criterion(5, "composition expansion", 300, [](Verdict& v) {
    {
      SpacePtr sp = make_symbol_space(GroupKind::torus, 16, 0, GroupKind::su2, 4, 0);
      BisingularSymbol a = multiplier_symbol(sp, 1, 1), b = make_zoo_symbol(sp, "su2-casimir-mix");
      ExpansionReport rep = compose_expansion(a, b, 3);
      double lead = rel_max(rep.terms[0], pointwise_product(a, b)), rest = 0;
      for (size_t j = 1; j < rep.terms.size(); ++j)
        rest = std::max(rest, max_difference(rep.terms[j], zero_symbol(sp)) / std::max(max_difference(rep.terms[0], zero_symbol(sp)), 1e-300));
      v.need(lead <= 1e-12 && rest <= 1e-12, "(a) collapse " + fmt(lead) + ", higher terms " + fmt(rest));
    }
    {
      SpacePtr sp = make_symbol_space(GroupKind::torus, 16, 2, GroupKind::torus, 4, 0);
      BisingularSymbol a = zero_symbol(sp, 1, 0);
      a.slots[0] = kI * multiplier_coef(*sp, [](const IrrepInfo& r) { return double(r.label); }, [](const IrrepInfo&) { return 1.0; });
      auto g = [](const GroupElement& x, const GroupElement&) { return cplx(std::cos(x.theta) + 0.5 * std::sin(2 * x.theta)); };
      auto dg = [](const GroupElement& x, const GroupElement&) { return cplx(-std::sin(x.theta) + std::cos(2 * x.theta)); };
      BisingularSymbol b = scale_by_field(identity_symbol(sp), sample_field(*sp, g));
      BisingularSymbol expect = add(scale_by_field(a, sample_field(*sp, g)), scale_by_field(identity_symbol(sp), sample_field(*sp, dg)));
      BisingularSymbol exact = exact_composition_symbol(a, b);
      ExpansionReport rep = compose_expansion(a, b, 2);
      double e1 = rel_max(expect, exact), e2 = rel_max(expect, add(rep.terms[0], rep.terms[1]));
      v.need(e1 <= 1e-12 && e2 <= 1e-12, "(b) i k1 g + g' exact " + fmt(e1) + ", two terms " + fmt(e2));
    }
    const std::tuple<GroupKind, double, const char*> geo[2] = {{GroupKind::torus, 24, "TxT 24"}, {GroupKind::su2, 3, "TxSU(2) (16,3)"}};
    for (auto& [k2, c2, name] : geo) {
      ExperimentConfig c = config(GroupKind::torus, k2 == GroupKind::torus ? 24 : 16, k2, c2, "compose");
      c.symbol = "multiplier:1,1";
      c.second = "coeff-multiplier:1,0";
      c.N = 3;
      SuiteResult r = run_suite(c);
      std::string s;
      for (int n = 1; n <= 3; ++n) {
        auto& k1 = find(r, "slope1_N" + std::to_string(n));
        auto& k2c = find(r, "slope2_N" + std::to_string(n));
        s += " N" + std::to_string(n) + " (" + fmt(k1.value) + ", " + fmt(k2c.value) + ")";
      }
      v.need(r.pass(), std::string("(c) ") + name + " slopes" + s + " in [N-0.5, N+1.5]");
    }
  });

  criterion(6, "adjoint expansion", 0, [](Verdict& v) {
    const std::tuple<double, GroupKind, double, const char*> geo[2] = {{24, GroupKind::torus, 24, "TxT 24"}, {16, GroupKind::su2, 3, "TxSU(2) (16,3)"}};
    for (auto& [c1, k2, c2, name] : geo) {
      ExperimentConfig c = config(GroupKind::torus, c1, k2, c2, "adjoint");
      c.symbol = "coeff-multiplier:1,1";
      c.N = 3;
      SuiteResult r = run_suite(c);
      std::string s;
      for (int n = 1; n <= 3; ++n)
        s += " N" + std::to_string(n) + " (" + fmt(find(r, "slope1_N" + std::to_string(n)).value) + ", " +
             fmt(find(r, "slope2_N" + std::to_string(n)).value) + ")";
      v.need(r.pass(), std::string(name) + " leading " + fmt(find(r, "leading").value) + ", oracle " + fmt(find(r, "oracle").value) + ", slopes" + s);
    }
  });

  criterion(7, "parametrix", 300, [](Verdict& v) {
    ExperimentConfig b = config(GroupKind::torus, 16, GroupKind::torus, 16, "parametrix");
    b.symbol = "bilaplacian";
    SuiteResult rb = run_suite(b);
    v.need(rb.pass(), "bilaplacian residual " + fmt(find(rb, "right_residual_N1").value) + " / " + fmt(find(rb, "left_residual_N1").value));
    ExperimentConfig c = config(GroupKind::torus, 16, GroupKind::torus, 16, "parametrix");
    c.symbol = "coeff-multiplier:2,2";
    c.N = 3;
    SuiteResult r = run_suite(c);
    v.need(find(r, "right_gain1").pass && find(r, "right_gain2").pass,
           "right slope gain per unit N " + fmt(find(r, "right_gain1").value) + ", " + fmt(find(r, "right_gain2").value) + " >= 0.5");
    v.need(find(r, "left_gain1").pass && find(r, "left_gain2").pass,
           "left slope gain per unit N " + fmt(find(r, "left_gain1").value) + ", " + fmt(find(r, "left_gain2").value) + " >= 0.5");
  });

  criterion(8, "kernel decay", 180, [](Verdict& v) {
    for (auto& id : {"kernel-probe:1,1", "kernel-probe:0,1", "kernel-probe:2,0", "kernel-probe:-1,-1", "kernel-probe:-3,-3"}) {
      ExperimentConfig c = config(GroupKind::torus, 64, GroupKind::torus, 64, "kernel-decay");
      c.symbol = id;
      SuiteResult r = run_suite(c);
      std::string s = std::string(id).substr(13);
      for (auto& k : r.checks)
        if (k.name != "dyadic" && k.name != "scale_range") s += " " + k.name + " " + fmt(k.value);
      v.need(r.pass(), "(" + s + ")");
    }
  });

  criterion(9, "cutoff scaling and functional bound", 0, [](Verdict& v) {
    ExperimentConfig c = config(GroupKind::torus, 64, GroupKind::torus, 64, "functional-bound");
    c.symbol = "multiplier:1,1";
    SuiteResult r = run_suite(c);
    std::string s;
    for (auto& k : r.checks) s += " " + k.name + " " + fmt(k.value);
    v.need(r.pass(), "exp profile, deviations:" + s);
    c.functional.f1 = "resolvent";
    c.functional.alpha = 1;
    SuiteResult rr = run_suite(c);
    s.clear();
    for (auto& k : rr.checks) s += " " + k.name + " " + fmt(k.value);
    v.need(rr.pass(), "resolvent with alpha = 1, deviations:" + s);
  });

  criterion(10, "Bessel kernel and Sobolev embedding", 0, [](Verdict& v) {
    ExperimentConfig c = config(GroupKind::torus, 16, GroupKind::su2, 4, "bessel");
    SuiteResult r = run_suite(c);
    v.need(r.pass(), "gamma path " + fmt(find(r, "gamma_path").value) + ", L2 " + fmt(find(r, "l2_parseval").value));
    c.experiment = "sobolev";
    c.seeds = 5;
    SuiteResult e = run_suite(c);
    v.need(e.pass(), "embedding spread " + fmt(find(e, "embedding_spread").value));
  });

  criterion(11, "asymptotic summation", 0, [](Verdict& v) {
    ExperimentConfig c = config(GroupKind::torus, 32, GroupKind::torus, 32, "asym-sum");
    c.symbol = "multiplier:0,0";
    SuiteResult r = run_suite(c);
    std::string s;
    for (auto& k : r.checks) s += " " + k.name + " " + fmt(k.value);
    v.need(r.pass(), s.substr(1));
  });

  criterion(12, "determinism", 0, [](Verdict& v) {
    ExperimentConfig f = config(GroupKind::torus, 8, GroupKind::su2, 1.5, "fourier");
    f.seeds = 10;
    ExperimentConfig k = config(GroupKind::torus, 12, GroupKind::torus, 12, "compose");
    k.symbol = "multiplier:1,1";
    k.second = "coeff-multiplier:1,0";
    k.N = 2;
    for (auto* c : {&f, &k}) {
      SuiteResult a = run_suite(*c), b = run_suite(*c);
      bool same = a.tables.size() == b.tables.size();
      for (size_t i = 0; same && i < a.tables.size(); ++i) same = a.tables[i].csv() == b.tables[i].csv();
      v.need(same, c->experiment + " CSV bodies identical");
    }
  });

  std::cout << "criteria passed: " << 12 - failures << "/12" << std::endl;
  return 0;
}
