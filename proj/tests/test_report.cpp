// Config parsing and deterministic serialization.
#include "tcnot/report.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

using namespace tcnot;
using namespace tcnot::report;

TEST_CASE("doubles print with 17 significant digits and round-trip") {
  CHECK(format_g17(0.1) == "0.10000000000000001");
  CHECK(format_g17(1.0) == "1");
  CHECK(format_g17(0.5) == "0.5");
  CHECK(format_g17(-0.0) == "-0");

  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double x = std::ldexp(uni(rng), k % 600 - 300);
    const std::string s = format_g17(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }

  CHECK_THROWS_AS(format_g17(std::numeric_limits<double>::quiet_NaN()),
                  std::logic_error);
  CHECK_THROWS_AS(format_g17(std::numeric_limits<double>::infinity()),
                  std::logic_error);
}

TEST_CASE("JSON documents: order, formatting, and escaping") {
  Json o = Json::object();
  o.set("b", Json::integer(2));
  o.set("a", Json::number(0.1));
  CHECK(o.dump() == "{\n  \"b\": 2,\n  \"a\": 0.10000000000000001\n}\n");

  // Insertion order is preserved; duplicate keys are programming errors.
  CHECK_THROWS_AS(o.set("b", Json::null()), std::logic_error);

  Json arr = Json::array();
  arr.push(Json::integer(1)).push(Json::number(2.5)).push(Json::boolean(true));
  CHECK(arr.dump() == "[1, 2.5, true]\n");

  Json nested = Json::array();
  nested.push(Json::object().set("k", Json::null()));
  CHECK(nested.dump() == "[\n  {\n    \"k\": null\n  }\n]\n");

  CHECK(Json::array().dump() == "[]\n");
  CHECK(Json::object().dump() == "{}\n");
  CHECK(Json::null().dump() == "null\n");
  CHECK(Json::uinteger(18446744073709551615ull).dump() ==
        "18446744073709551615\n");

  CHECK(Json::string("say \"hi\"\\\n\x01").dump() ==
        "\"say \\\"hi\\\"\\\\\\n\\u0001\"\n");

  CHECK_THROWS_AS(Json::number(std::numeric_limits<double>::infinity()),
                  std::logic_error);
  CHECK_THROWS_AS(Json::array().set("k", Json::null()), std::logic_error);
  CHECK_THROWS_AS(Json::object().push(Json::null()), std::logic_error);
}

TEST_CASE("CSV writer: width checks and minimal quoting") {
  Csv csv({"name", "value"});
  csv.row({"plain", "1.5"});
  csv.row({"with,comma", "say \"hi\""});
  csv.row({"line\nbreak", ""});
  CHECK(csv.str() ==
        "name,value\n"
        "plain,1.5\n"
        "\"with,comma\",\"say \"\"hi\"\"\"\n"
        "\"line\nbreak\",\n");

  CHECK_THROWS_AS(csv.row({"only-one-cell"}), std::invalid_argument);
  CHECK_THROWS_AS(Csv({}), std::invalid_argument);
}

TEST_CASE("config parsing: full document") {
  const std::string text = R"({
    "shots": 500,
    "seed": 42,
    "out": "results",
    "truncation": 10,
    "timestamp": "2026-08-17T00:00:00Z",
    "noise": {
      "g": 0.3, "g2": 0.5,
      "visibility": 0.95, "v_bsm13": 0.9,
      "input_error": 0.05, "n_pairs_max": 2
    },
    "sweep": {
      "g_values": [0.0, 0.5],
      "v_values": [1.0],
      "input_error_values": [0.0],
      "n_pairs_max": 2,
      "threads": 3
    }
  })";
  const RunConfig c = RunConfig::from_json_text(text);
  CHECK(c.shots == 500);
  CHECK(c.seed == 42);
  CHECK(c.out_dir == "results");
  CHECK(c.truncation == 10);
  REQUIRE(c.timestamp.has_value());
  CHECK(*c.timestamp == "2026-08-17T00:00:00Z");

  // Shorthand g/visibility fill every site; per-site keys override.
  const noise::NoiseParams p = c.noise.params(c.truncation);
  CHECK(p.g1 == 0.3);
  CHECK(p.g2 == 0.5);
  CHECK(p.g3 == 0.3);
  CHECK(p.v_pdbs == 0.95);
  CHECK(p.v_bsm13 == 0.9);
  CHECK(p.v_bsm25 == 0.95);
  CHECK(p.input_error == 0.05);
  CHECK(p.n_pairs_max == 2);
  CHECK(p.n_max == 10);

  const noise::SweepGrid grid = c.sweep.grid(c.truncation);
  CHECK((grid.g_values == std::vector<double>{0.0, 0.5}));
  CHECK((grid.v_values == std::vector<double>{1.0}));
  CHECK(grid.n_pairs_max == 2);
  CHECK(grid.n_max == 10);
  CHECK(c.sweep.threads == 3);

  // Defaults when keys are absent.
  const RunConfig d = RunConfig::from_json_text("{}");
  CHECK(d.shots == 10000);
  CHECK(d.seed == 12345);
  CHECK(d.out_dir == "out");
  CHECK(d.truncation == 8);
  CHECK_FALSE(d.timestamp.has_value());
}

TEST_CASE("config parsing: vocabulary is strict at every level") {
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"shotz": 5})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"noise": {"gg": 1}})"),
                  ConfigError);
  CHECK_THROWS_AS(
      RunConfig::from_json_text(R"({"sweep": {"grid": [1]}})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json_text("[]"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json_text("{nope"), ConfigError);

  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"shots": "many"})"),
                  ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"shots": 0})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"seed": -1})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"seed": 1.5})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"timestamp": 5})"),
                  ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"noise": []})"), ConfigError);
  CHECK_THROWS_AS(
      RunConfig::from_json_text(R"({"noise": {"g": "low"}})"), ConfigError);
  CHECK_THROWS_AS(
      RunConfig::from_json_text(R"({"sweep": {"g_values": [0.1, "x"]}})"),
      ConfigError);

  // Out-of-range physics parameters surface as config errors too.
  const RunConfig bad_v =
      RunConfig::from_json_text(R"({"noise": {"visibility": 1.5}})");
  CHECK_THROWS_AS((void)bad_v.noise.params(8), ConfigError);
  const RunConfig bad_trunc = RunConfig::from_json_text("{}");
  CHECK_THROWS_AS((void)bad_trunc.noise.params(5), ConfigError);

  CHECK_THROWS_AS(RunConfig::from_file("/nonexistent/path/config.json"),
                  ConfigError);
}

TEST_CASE("sweep config defaults to the bundled grid") {
  const SweepConfig sc;
  const noise::SweepGrid grid = sc.grid(8);
  const noise::SweepGrid std_grid = noise::SweepGrid::standard();
  CHECK(grid.g_values == std_grid.g_values);
  CHECK(grid.v_values == std_grid.v_values);
  CHECK(grid.input_error_values == std_grid.input_error_values);
  CHECK(grid.n_max == 8);
}

TEST_CASE("result envelope: schema, seed echo, byte determinism") {
  RunConfig cfg;
  cfg.command = "demo";
  cfg.seed = 777;
  const Json env = envelope(cfg, Json::object().set("x", Json::number(1.5)));
  const std::string text = env.dump();
  CHECK(text.find("\"schema_version\": 1") != std::string::npos);
  CHECK(text.find("\"command\": \"demo\"") != std::string::npos);
  CHECK(text.find("\"seed\": 777") != std::string::npos);
  CHECK(text.find("\"timestamp\": null") != std::string::npos);
  CHECK(text.find("\"payload\"") != std::string::npos);

  // Identical config and payload give identical bytes.
  RunConfig cfg2;
  cfg2.command = "demo";
  cfg2.seed = 777;
  const Json env2 =
      envelope(cfg2, Json::object().set("x", Json::number(1.5)));
  CHECK(env2.dump() == text);
}

TEST_CASE("text files are written with parent directories") {
  namespace fs = std::filesystem;
  const fs::path base =
      fs::temp_directory_path() / "tcnot_report_test" / "nested" / "deep";
  const fs::path file = base / "data.txt";
  std::error_code ec;
  fs::remove_all(fs::temp_directory_path() / "tcnot_report_test", ec);

  write_text_file(file.string(), "line one\nline two\n");
  std::ifstream in(file, std::ios::binary);
  REQUIRE(in.good());
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  CHECK(content == "line one\nline two\n");

  // A path whose parent is an existing regular file cannot be created.
  CHECK_THROWS_AS(
      write_text_file((file / "impossible.txt").string(), "nope"),
      std::runtime_error);
  fs::remove_all(fs::temp_directory_path() / "tcnot_report_test", ec);
}
