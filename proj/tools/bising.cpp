/**
 * @file bising.cpp
 * @brief Command line: run, sweep, zoo --list, atlas.
 */
#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "bising/experiments.hpp"

using namespace bising;

namespace {

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

std::vector<double> parse_values(const std::string& s) {
  std::vector<double> v;
  if (s.empty()) return v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      v.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("bad sweep value '" + tok + "'");
    }
  }
  return v;
}

void print_checks(const SuiteResult& r) {
  for (auto& k : r.checks) {
    std::cout << (k.pass ? "PASS " : "FAIL ") << k.name << " = " << Table::num(k.value) << ' ' << k.relation << ' '
              << Table::num(k.tolerance);
    if (k.relation == "in") std::cout << ".." << Table::num(k.upper);
    std::cout << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bisingular pseudodifferential calculus on products of T1 and SU(2)"};
  app.require_subcommand(1);

  std::string run_config;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment config");
  run_cmd->add_option("config", run_config, "JSON config")->required();

  std::string sweep_config, axis, values;
  auto* sweep_cmd = app.add_subcommand("sweep", "Repeat a config over an axis");
  sweep_cmd->add_option("config", sweep_config, "JSON config")->required();
  sweep_cmd->add_option("--axis", axis, "cutoff, N, t or s")->required();
  sweep_cmd->add_option("--values", values, "comma-separated values")->required();

  bool list = false;
  auto* zoo_cmd = app.add_subcommand("zoo", "Symbol zoo");
  zoo_cmd->add_flag("--list", list, "List zoo identifiers");

  std::string kind = "torus", out;
  double cutoff = 1;
  int grid = 0;
  auto* atlas_cmd = app.add_subcommand("atlas", "Export an atlas (atlas-v1)");
  atlas_cmd->add_option("--kind", kind, "torus or su2");
  atlas_cmd->add_option("--cutoff", cutoff, "cutoff in label units (l on SU(2))");
  atlas_cmd->add_option("--grid", grid, "resolution (0 = minimal)");
  atlas_cmd->add_option("--out", out, "output path (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);
  Eigen::setNbThreads(worker_count());

  try {
    if (*run_cmd) {
      ExperimentConfig c = load_config(run_config);
      RunOutcome o = run(c);
      print_checks(o.result);
      for (auto& f : o.files) std::cout << "wrote " << f << '\n';
      return o.exit_code();
    }
    if (*sweep_cmd) {
      ExperimentConfig c = load_config(sweep_config);
      bool pass = false;
      Table t = sweep(c, axis, parse_values(values), pass);
      std::string p = c.output + "_sweep_" + axis + ".csv";
      write_text(p, t.csv());
      std::cout << t.csv() << "wrote " << p << '\n';
      return pass ? 0 : 1;
    }
    if (*zoo_cmd) {
      for (auto& e : zoo_entries()) {
        std::string id = e.name;
        if (e.params == 2) id += ":m1,m2";
        std::cout << id << "\t" << e.description << '\n';
      }
      return 0;
    }
    if (*atlas_cmd) {
      GroupConfig g;
      g.kind = parse_kind(kind);
      g.cutoff = cutoff;
      g.grid = grid;
      GroupAtlas a = build_atlas(g.kind, g.cutoff2(), g.grid);
      json j = atlas_to_json(a);
      j["coordinate_dual_basis"] = json::array();
      MatC cb = coordinate_dual_basis(a.kind);
      for (int i = 0; i < cb.rows(); ++i) {
        json row = json::array();
        for (int k = 0; k < cb.cols(); ++k) row.push_back(cb(i, k).real());
        j["coordinate_dual_basis"].push_back(row);
      }
      if (out.empty())
        std::cout << j.dump(1) << '\n';
      else
        write_text(out, j.dump(1) + "\n");
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const ResolutionError& e) {
    std::cerr << "resolution error: " << e.what() << '\n';
    return 3;
  } catch (const MarginError& e) {
    std::cerr << "margin error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
