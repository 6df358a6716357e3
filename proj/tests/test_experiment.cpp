#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <string>

#include "json.hpp"

#include "cfl/config.hpp"
#include "cfl/experiment.hpp"
#include "cfl/golden.hpp"
#include "cfl/output.hpp"

using namespace cfl;
namespace fs = std::filesystem;

namespace {

std::map<std::string, std::string> base_compare_kv() {
  return {{"experiment", "compare"}, {"omega2", "1.3"}, {"beta", "1"},   {"n_max", "6"},
          {"gamma", "1e-3"},         {"eta", "0.2"},    {"jobs", "1"}};
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

}  // namespace

TEST_CASE("key = value parsing: comments, blanks, duplicates") {
  const std::string text =
      "# leading comment\n"
      "omega2 = 1.3\n"
      "\n"
      "  beta = 2.0   # trailing note\n";
  const auto kv = parse_kv_text(text);
  REQUIRE(kv.size() == 2);
  REQUIRE(kv.at("omega2") == "1.3");
  REQUIRE(kv.at("beta") == "2.0");

  REQUIRE_THROWS_AS(parse_kv_text("a = 1\na = 2\n"), config_error);
  REQUIRE_THROWS_AS(parse_kv_text("just some words\n"), config_error);
  REQUIRE_THROWS_AS(config_from_kv({{"no_such_key", "1"}}), config_error);
  REQUIRE_THROWS_AS(config_from_kv({{"beta", "fast"}}), config_error);
}

TEST_CASE("configuration validation rejects unusable inputs") {
  auto check_throws = [](std::map<std::string, std::string> kv) {
    ExperimentConfig c = config_from_kv(kv);
    REQUIRE_THROWS_AS(validate_config(c), config_error);
  };
  auto kv = base_compare_kv();
  kv["eta"] = "0";
  check_throws(kv);

  kv = base_compare_kv();
  kv["experiment"] = "sweep-detuning";
  kv["detuning_points"] = "40";
  check_throws(kv);

  kv = base_compare_kv();
  kv["routes"] = "spectral,telepathy";
  check_throws(kv);

  kv = base_compare_kv();
  kv["experiment"] = "guess";
  check_throws(kv);

  kv = base_compare_kv();
  kv["coupling"] = "both";
  check_throws(kv);
}

TEST_CASE("route comparison table: order, agreement, determinism") {
  const ExperimentConfig c = config_from_kv(base_compare_kv());
  const ExperimentResult r = run_experiment(c);

  REQUIRE(r.table.columns ==
          std::vector<std::string>{"route", "delta_e", "rel_gap_vs_spectral"});
  REQUIRE(r.table.rows.size() == 3);
  REQUIRE(std::get<std::string>(r.table.rows[0][0]) == "spectral");
  REQUIRE(std::get<std::string>(r.table.rows[1][0]) == "kubo_freq");
  REQUIRE(std::get<std::string>(r.table.rows[2][0]) == "kubo_time");

  const double de = std::get<double>(r.table.rows[0][1]);
  REQUIRE(de > 0.0);
  REQUIRE(std::get<double>(r.table.rows[1][2]) <= 1e-10);  // freq vs spectral
  REQUIRE(std::get<double>(r.table.rows[2][2]) <= 1e-3);   // sampled work integral

  const std::string csv = csv_string(r.table);
  REQUIRE(csv_string(run_experiment(c).table) == csv);  // rerun, byte identical

  ExperimentConfig cj = c;
  cj.jobs = 4;
  REQUIRE(csv_string(run_experiment(cj).table) == csv);  // worker count invisible
}

TEST_CASE("temperature sweep is monotone and vanishes at zero temperature") {
  auto kv = base_compare_kv();
  kv["experiment"] = "sweep-temperature";
  kv["omega2"] = "1.05";
  kv["eta"] = "0.05";
  kv["beta_list"] = "0.8,1.0,2.0,inf";
  kv.erase("n_max");  // let each temperature pick its own basis size
  const ExperimentResult r = run_experiment(config_from_kv(kv));

  REQUIRE(r.table.columns == std::vector<std::string>{"beta", "delta_e"});
  REQUIRE(r.table.rows.size() == 4);
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const double de = std::get<double>(r.table.rows[i][1]);
    REQUIRE(de > 0.0);
    REQUIRE(de < prev);
    prev = de;
  }
  REQUIRE(std::isinf(std::get<double>(r.table.rows[3][0])));
  REQUIRE(std::get<double>(r.table.rows[3][1]) == 0.0);
}

TEST_CASE("csv writing round-trips through the reader") {
  Table t;
  t.provenance = "demo 0.0.0 key=value";
  t.columns = {"name", "value"};
  t.rows.push_back({std::string("plain"), 1.5});
  t.rows.push_back({std::string("comma, inside"), -2.0});
  t.rows.push_back({std::string("quote \" and\nnewline"), 3.0});

  const ParsedCsv parsed = parse_csv(csv_string(t));
  REQUIRE(parsed.comments.size() == 1);
  REQUIRE(parsed.comments[0] == "# demo 0.0.0 key=value");
  REQUIRE(parsed.records.size() == 4);  // header + 3 rows
  REQUIRE(parsed.records[0] == std::vector<std::string>{"name", "value"});
  REQUIRE(parsed.records[2][0] == "comma, inside");
  REQUIRE(parsed.records[3][0] == "quote \" and\nnewline");
  REQUIRE(parsed.records[1][1] == format_float(1.5));

  REQUIRE_THROWS_AS(parse_csv("a,\"unterminated\n"), io_error);
}

TEST_CASE("json table and sidecar are machine readable") {
  const ExperimentConfig c = config_from_kv(base_compare_kv());
  const ExperimentResult r = run_experiment(c);

  const nlohmann::json jt = nlohmann::json::parse(json_string(r.table));
  REQUIRE(jt.at("provenance").get<std::string>() == r.table.provenance);
  REQUIRE(jt.at("columns").size() == 3);
  REQUIRE(jt.at("rows").size() == 3);
  REQUIRE(jt.at("rows")[0][0].get<std::string>() == "spectral");

  const nlohmann::json js = nlohmann::json::parse(
      meta_sidecar_string(c.experiment, config_echo(c), r.table, r.diagnostics, 0.25));
  REQUIRE(js.at("tool").get<std::string>() == "cfl");
  REQUIRE(js.at("experiment").get<std::string>() == "compare");
  REQUIRE(js.at("config").at("omega2").is_string());
  REQUIRE(js.at("row_count").get<int>() == 3);
  REQUIRE(js.at("wall_time_seconds").get<double>() == 0.25);
}

TEST_CASE("golden comparison catches drift and incomplete tolerance specs") {
  const fs::path root = fs::temp_directory_path() / "cfl_golden_test";
  fs::remove_all(root);
  fs::create_directories(root / "case1");

  const std::string config_text =
      "experiment = compare\nomega2 = 1.3\nbeta = 1\nn_max = 6\ngamma = 1e-3\neta = 0.2\n"
      "jobs = 1\n";
  write_file(root / "case1" / "config", config_text);
  const ExperimentResult r = run_experiment(config_from_kv(parse_kv_text(config_text)));
  write_file(root / "case1" / "expected.csv", csv_string(r.table));
  write_file(root / "case1" / "tolerances",
             "route = exact\ndelta_e = rel 1e-12\nrel_gap_vs_spectral = rel 1e-6 abs 1e-9\n");

  const GoldenReport ok = golden_check(root.string());
  REQUIRE(ok.passed);
  REQUIRE(ok.goldens.size() == 1);
  REQUIRE(ok.goldens[0].name == "case1");

  // perturb one number beyond its tolerance
  std::string drifted = csv_string(r.table);
  const std::string needle = format_float(std::get<double>(r.table.rows[0][1]));
  drifted.replace(drifted.find(needle), needle.size(),
                  format_float(std::get<double>(r.table.rows[0][1]) * 1.001));
  write_file(root / "case1" / "expected.csv", drifted);
  const GoldenReport bad = golden_check(root.string());
  REQUIRE_FALSE(bad.passed);
  REQUIRE(bad.goldens[0].message.find("delta_e") != std::string::npos);

  write_file(root / "case1" / "expected.csv", csv_string(r.table));
  write_file(root / "case1" / "tolerances", "route = exact\ndelta_e = rel 1e-12\n");
  REQUIRE_THROWS_AS(golden_check(root.string()), config_error);  // fail closed

  fs::remove(root / "case1" / "tolerances");
  REQUIRE_THROWS_AS(golden_check(root.string()), io_error);

  fs::remove_all(root);
  REQUIRE_THROWS_AS(golden_check(root.string()), io_error);
}
