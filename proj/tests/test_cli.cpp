#include "doctest.h"

#include "crofton/cli.hpp"

#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace crofton;

namespace {
constexpr double kPi = std::numbers::pi;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "crofton");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> comments;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::out_of_range(name);
  }
  double number(std::size_t row, const std::string& name) const { return std::stod(rows.at(row).at(column(name))); }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

Table parse_csv(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line);
    } else if (t.header.empty()) {
      t.header = split(line);
    } else {
      t.rows.push_back(split(line));
    }
  }
  return t;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("crofton_test_" + name);
}
}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("forward of a constant density") {
    const Result r = run_cli({"forward", "--family", "constant", "--c", "0.7", "--grid_band_limit", "2"});
    REQUIRE(r.code == 0);
    const Table t = parse_csv(r.out);
    CHECK(t.header == std::vector<std::string>{"x", "y", "z", "omega_x", "omega_y", "omega_z", "H"});
    CHECK(t.rows.size() == 3 * 6);
    for (std::size_t i = 0; i < t.rows.size(); ++i) CHECK(std::abs(t.number(i, "H") - 1.4 * kPi) < 1e-12);
    CHECK_FALSE(t.comments.empty());
  }

  TEST_CASE("empty point list gives a header only") {
    const Result r = run_cli({"forward", "--points", "[]"});
    CHECK(r.code == 0);
    const Table t = parse_csv(r.out);
    CHECK(t.header.size() == 7);
    CHECK(t.rows.empty());
  }

  TEST_CASE("bad configuration exits 2 and names the key") {
    Result r = run_cli({"forward", "--band_limit", "-3"});
    CHECK(r.code == 2);
    CHECK(r.err.find("band_limit") != std::string::npos);

    r = run_cli({"forward", "--family", "cubic"});
    CHECK(r.code == 2);
    CHECK(r.err.find("family") != std::string::npos);

    const auto path = temp_path("bad.json");
    std::ofstream(path) << R"({"band_limt": 4})";
    r = run_cli({"forward", "--config", path.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("band_limt") != std::string::npos);

    r = run_cli({"forward", "--no_such_flag", "1"});
    CHECK(r.code == 2);
    r = run_cli({});
    CHECK(r.code == 2);
  }

  TEST_CASE("config file and flag override") {
    const auto path = temp_path("good.json");
    std::ofstream(path) << R"({"family": "constant", "c": 0.5, "grid_band_limit": 1, "format": "json"})";
    const Result r = run_cli({"forward", "--config", path.string(), "--c", "2"});
    REQUIRE(r.code == 0);
    const nlohmann::json j = nlohmann::json::parse(r.out);
    CHECK(j["command"] == "forward");
    CHECK(j["config"]["c"] == 2.0);
    CHECK(j["rows"].size() == 8);
    CHECK(std::abs(j["rows"][0]["H"].get<double>() - 4 * kPi) < 1e-12);
  }

  TEST_CASE("zonoid of a constant metric") {
    const Result r = run_cli({"zonoid", "--family", "constant", "--c", "0.7", "--band_limit", "6"});
    REQUIRE(r.code == 0);
    const Table t = parse_csv(r.out);
    std::size_t coefficients = 0;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      if (t.rows[i][t.column("section")] != "coefficient") {
        CHECK(t.number(i, "residual") < 1e-10);
        continue;
      }
      ++coefficients;
      const double v = t.number(i, "value");
      if (t.rows[i][t.column("n")] == "0") {
        CHECK(v == doctest::Approx(0.7 * std::sqrt(4 * kPi)));
      } else {
        CHECK(std::abs(v) < 1e-12);
      }
    }
    CHECK(coefficients == 49);
  }

  TEST_CASE("odd contamination is reported") {
    const Result r = run_cli({"zonoid", "--odd_contamination", "0.1", "--band_limit", "4"});
    CHECK(r.code == 1);
    const Table t = parse_csv(r.out);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][t.column("error")] == "odd_part_too_large");
    CHECK(t.number(0, "odd_energy") > 1e-6);
  }

  TEST_CASE("reconstruct a constant density") {
    const Result r = run_cli({"reconstruct", "--family", "constant", "--c", "0.7", "--planes",
                              "[[0.2, 0, 0, 1], [-0.1, 1, 1, 0]]"});
    REQUIRE(r.code == 0);
    const Table t = parse_csv(r.out);
    REQUIRE(t.rows.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(t.number(i, "rel_error") < 1e-6);
      CHECK(t.number(i, "h_true") == 0.7);
      CHECK(t.number(i, "p") >= 0.0);
    }
  }

  TEST_CASE("output file") {
    const auto path = temp_path("forward.csv");
    std::filesystem::remove(path);
    const Result r = run_cli({"forward", "--grid_band_limit", "1", "--output", path.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream in(path);
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(parse_csv(text).rows.size() == 8);
  }

  TEST_CASE("sampled metric round trip") {
    const auto path = temp_path("samples.csv");
    const Result f = run_cli({"forward", "--family", "translation-invariant", "--grid_band_limit", "8", "--points",
                              "[[0.1, 0.2, 0.3]]", "--output", path.string()});
    REQUIRE(f.code == 0);
    const Result direct = run_cli({"zonoid", "--family", "translation-invariant", "--band_limit", "8", "--point",
                                   "[0.1, 0.2, 0.3]"});
    const Result sampled = run_cli({"zonoid", "--metric_input", path.string(), "--band_limit", "8", "--point",
                                    "[0.1, 0.2, 0.3]"});
    REQUIRE(direct.code == 0);
    REQUIRE(sampled.code == 0);
    const Table a = parse_csv(direct.out);
    const Table b = parse_csv(sampled.out);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i)
      CHECK(std::abs(a.number(i, "value") - b.number(i, "value")) < 1e-12);

    const Result missing = run_cli({"zonoid", "--metric_input", path.string(), "--band_limit", "8"});
    CHECK(missing.code == 1);
    CHECK(missing.err.find("missing") != std::string::npos);
  }

  TEST_CASE("verify") {
    Result r = run_cli({"verify", "--suite", "zonoid"});
    CHECK(r.code == 0);
    CHECK(r.err.find("zonoid") != std::string::npos);
    r = run_cli({"verify", "--suite", "everything"});
    CHECK(r.code == 2);
    CHECK(r.err.find("suite") != std::string::npos);
  }

  TEST_CASE("printed normalization fails the reconstruction suite") {
    const Result r = run_cli({"verify", "--suite", "reconstruction", "--c_norm", "1", "--plane_count", "2",
                              "--format", "json"});
    CHECK(r.code == 1);
    const nlohmann::json j = nlohmann::json::parse(r.out);
    bool found = false;
    for (const auto& c : j["checks"]) {
      if (c["name"] == "calibration_anchor") {
        found = true;
        CHECK(c["passed"] == false);
      }
    }
    CHECK(found);
  }

  TEST_CASE("calibrate") {
    const Result r = run_cli({"calibrate", "--c", "0.7"});
    REQUIRE(r.code == 0);
    const Table t = parse_csv(r.out);
    REQUIRE(t.rows.size() >= 1);
    CHECK(std::abs(t.number(0, "fitted_c_norm") - 1 / (2 * kPi)) < 1e-6);
  }

  TEST_CASE("number formatting and quoting") {
    CHECK(std::stod(cli::format_number(0.1)) == 0.1);
    CHECK(cli::format_number(2.0) == "2");
    CHECK(cli::csv_field("plain") == "plain");
    CHECK(cli::csv_field("a,b") == "\"a,b\"");
    CHECK(cli::csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(split(cli::csv_field("x,\"y\"")) == std::vector<std::string>{"x,\"y\""});
  }

  TEST_CASE("config json round trip") {
    const cli::RunConfig a;
    const nlohmann::json j = a.to_json();
    for (const std::string& k : cli::config_keys()) CHECK(j.contains(k));
    const cli::RunConfig b = cli::RunConfig::from_json(j);
    CHECK(b.to_json() == j);
    CHECK_THROWS_AS(cli::RunConfig::from_json(nlohmann::json{{"n_phi", "many"}}), cli::ConfigError);
  }
}
