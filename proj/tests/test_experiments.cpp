// Config parsing, experiment runs, sweeps and determinism.
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "bising/experiments.hpp"

using namespace bising;

namespace {

json base_config() {
  return json::parse(R"({"group1": {"kind": "torus", "cutoff": 6}, "group2": {"kind": "su2", "cutoff": 1.5},
                         "experiment": "fourier", "seeds": 2})");
}

std::string parse_error(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST(Config, ParsesDefaultsAndExtras) {
  json j = base_config();
  j["symbol"] = {{"id", "multiplier:1,1"}, {"second", "coeff-multiplier:1,0"}};
  j["s"] = {1.5, 2.5};
  j["tolerances"] = {{"roundtrip", 1e-9}};
  ExperimentConfig c = parse_config(j);
  EXPECT_EQ(c.group2.kind, GroupKind::su2);
  EXPECT_EQ(c.group2.cutoff2(), 3);
  EXPECT_EQ(c.second, "coeff-multiplier:1,0");
  EXPECT_DOUBLE_EQ(c.s2, 2.5);
  EXPECT_DOUBLE_EQ(c.tolerances.at("roundtrip"), 1e-9);
  EXPECT_EQ(c.N, 1);
}

TEST(Config, RejectsUnknownFieldsWithPath) {
  json j = base_config();
  j["group1"]["colour"] = "red";
  EXPECT_NE(parse_error(j).find("$.group1.colour"), std::string::npos);
  j = base_config();
  j["extra"] = 1;
  EXPECT_NE(parse_error(j).find("$.extra"), std::string::npos);
  j = base_config();
  j["tolerances"] = {{"no_such_tolerance", 1.0}};
  EXPECT_NE(parse_error(j).find("no_such_tolerance"), std::string::npos);
}

TEST(Config, RejectsBadValues) {
  json j = base_config();
  j["symbol"] = "no-such-symbol";
  EXPECT_NE(parse_error(j).find("unknown zoo id"), std::string::npos);
  j = base_config();
  j["experiment"] = "teleport";
  EXPECT_NE(parse_error(j).find("unknown experiment"), std::string::npos);
  j = base_config();
  j["N"] = 0;
  EXPECT_FALSE(parse_error(j).empty());
  j = base_config();
  j["group2"]["cutoff"] = 1.25;  // SU(2) labels are half-integers
  EXPECT_FALSE(parse_error(j).empty());
  j = base_config();
  j["group1"]["cutoff"] = 2.5;  // torus labels are integers
  EXPECT_FALSE(parse_error(j).empty());
  j = base_config();
  j.erase("group2");
  EXPECT_FALSE(parse_error(j).empty());
}

TEST(Zoo, IdsAndParameters) {
  EXPECT_EQ(split_zoo_id("multiplier:1,-2").second, (std::vector<double>{1, -2}));
  EXPECT_THROW(zoo_entry("multiplier"), ConfigError);
  EXPECT_NO_THROW(zoo_entry("bilaplacian"));
  EXPECT_EQ(experiment_kinds().size(), 12u);
}

TEST(Run, FourierWritesCsvAndManifest) {
  auto dir = std::filesystem::temp_directory_path() / "bising_test_run";
  std::filesystem::create_directories(dir);
  ExperimentConfig c = parse_config(base_config());
  c.output = (dir / "fourier").string();
  RunOutcome o = run(c);
  EXPECT_EQ(o.exit_code(), 0);
  EXPECT_TRUE(std::filesystem::exists(c.output + "_manifest.json"));
  json m = json::parse(read_file(c.output + "_manifest.json"));
  EXPECT_EQ(m["format"], "manifest-v1");
  EXPECT_TRUE(m["pass"].get<bool>());
  for (auto& f : o.files) EXPECT_TRUE(std::filesystem::exists(f)) << f;
  std::filesystem::remove_all(dir);
}

TEST(Run, DeterministicTables) {
  ExperimentConfig c = parse_config(base_config());
  SuiteResult a = run_suite(c), b = run_suite(c);
  ASSERT_EQ(a.tables.size(), b.tables.size());
  for (size_t i = 0; i < a.tables.size(); ++i) EXPECT_EQ(a.tables[i].csv(), b.tables[i].csv());
  ASSERT_EQ(a.checks.size(), b.checks.size());
  for (size_t i = 0; i < a.checks.size(); ++i) EXPECT_EQ(a.checks[i].value, b.checks[i].value);
}

TEST(Run, ComposeProducesExpansionReport) {
  json j = base_config();
  j["experiment"] = "compose";
  j["symbol"] = {{"id", "multiplier:1,1"}, {"second", "coeff-multiplier:1,0"}};
  j["N"] = 2;
  SuiteResult r = run_suite(parse_config(j));
  bool found = false;
  for (auto& [name, doc] : r.documents)
    if (doc.contains("format") && doc["format"] == "expreport-v1") {
      found = true;
      EXPECT_EQ(doc["slopes"].size(), 2u);
    }
  EXPECT_TRUE(found);
}

TEST(Sweep, EmptyValuesAndCutoffAxis) {
  ExperimentConfig c = parse_config(base_config());
  bool ok = false;
  EXPECT_THROW(sweep(c, "cutoff", {}, ok), ConfigError);
  EXPECT_THROW(with_axis(c, "colour", 1), ConfigError);
  Table t = sweep(c, "cutoff", {2, 4}, ok);
  EXPECT_TRUE(ok);
  EXPECT_FALSE(t.rows.empty());
  EXPECT_EQ(t.rows.front()[1], "2");
  EXPECT_EQ(t.rows.back()[1], "4");
}
