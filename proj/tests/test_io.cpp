#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nemarb/io.hpp"

using namespace nemarb;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("nemarb_io_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
  static int& counter() { static int c = 0; return c; }
  fs::path file(const std::string& name, const std::string& content) const {
    const fs::path p = path / name;
    std::ofstream(p) << content;
    return p;
  }
};

}  // namespace

TEST_CASE("config parsing") {
  TempDir dir;
  const auto conf = dir.file("c.conf", example_config());
  const RunConfig cfg = parse_config(conf.string());
  // battery block lands in kWh
  CHECK_THAT(cfg.battery.b_max, Catch::Matchers::WithinAbs(3.0, 1e-12));
  CHECK_THAT(cfg.battery.b0, Catch::Matchers::WithinAbs(0.5, 1e-12));
  CHECK_THAT(cfg.battery.delta_min, Catch::Matchers::WithinAbs(-1.0, 1e-12));
  CHECK_THAT(cfg.price_scale, Catch::Matchers::WithinAbs(0.01, 1e-12));

  const auto bad = dir.file("bad.conf", "battery.b_max 3\n");
  CHECK_THROWS_AS(parse_config(bad.string()), IngestError);
  const auto unknown = dir.file("unk.conf", "battery.capacity = 3\n");
  CHECK_THROWS_AS(parse_config(unknown.string()), IngestError);
  const auto invalid = dir.file("inv.conf", "battery.b0 = 9\n");  // above b_max
  CHECK_THROWS_AS(parse_config(invalid.string()), std::invalid_argument);
}

TEST_CASE("ingestion of the net-load form") {
  TempDir dir;
  const auto csv = dir.file("in.csv",
                            "step,h,p_b,p_s,z\n"
                            "1,1,0.2,0.1,1.5\n"
                            "2,0.5,0.3,0.2,-0.4\n");
  RunConfig cfg;
  cfg.battery = {0.0, 2.0, 1.0, -1.0, 1.0, 0.9, 0.9};
  const IngestResult r = ingest_csv(csv.string(), cfg);
  CHECK(r.instance.n() == 2);
  CHECK(r.instance.hours(1) == 0.5);
  CHECK(r.instance.z(1) == -0.4);
  CHECK_FALSE(r.demand.has_value());
  CHECK(validate(r.instance).empty());
}

TEST_CASE("ingestion of the demand/renewables form") {
  TempDir dir;
  const auto csv = dir.file("in.csv",
                            "step,h,p_b,p_s,d,r\n"
                            "1,1,0.2,0.1,0.5,0.1\n"
                            "2,1,0.2,0.1,0.4,1.2\n");
  RunConfig cfg;
  cfg.battery = {0.0, 2.0, 1.0, -1.0, 1.0, 0.9, 0.9};
  const IngestResult r = ingest_csv(csv.string(), cfg);
  REQUIRE(r.demand.has_value());
  REQUIRE(r.renewables.has_value());
  // midday surplus ingests as negative net load
  CHECK_THAT(r.instance.z(1), Catch::Matchers::WithinAbs(-0.8, 1e-12));
}

TEST_CASE("ingestion failures carry line numbers") {
  TempDir dir;
  RunConfig cfg;

  SECTION("wrong header") {
    const auto p = dir.file("a.csv", "step,h,price,z\n1,1,0.2,0\n");
    try {
      ingest_csv(p.string(), cfg);
      FAIL("expected IngestError");
    } catch (const IngestError& e) {
      CHECK(e.line == 1);
    }
  }
  SECTION("non-consecutive steps") {
    const auto p = dir.file("b.csv", "step,h,p_b,p_s,z\n1,1,0.2,0.1,0\n3,1,0.2,0.1,0\n");
    try {
      ingest_csv(p.string(), cfg);
      FAIL("expected IngestError");
    } catch (const IngestError& e) {
      CHECK(e.line == 3);
    }
  }
  SECTION("unparseable number") {
    const auto p = dir.file("c.csv", "step,h,p_b,p_s,z\n1,1,oops,0.1,0\n");
    try {
      ingest_csv(p.string(), cfg);
      FAIL("expected IngestError");
    } catch (const IngestError& e) {
      CHECK(e.line == 2);
    }
  }
  SECTION("missing file") {
    CHECK_THROWS_AS(ingest_csv((dir.path / "nope.csv").string(), cfg), IngestError);
  }
  SECTION("sell above buy is a validation finding, not an ingest error") {
    const auto p = dir.file("d.csv", "step,h,p_b,p_s,z\n1,1,0.2,0.5,0\n");
    const IngestResult r = ingest_csv(p.string(), cfg);
    const auto v = validate(r.instance);
    REQUIRE_FALSE(v.empty());
    CHECK(v.front().step == 0);
  }
}

TEST_CASE("the built-in example solves to the known gain") {
  TempDir dir;
  const auto conf = dir.file("e.conf", example_config());
  const auto csv = dir.file("e.csv", example_csv());
  const RunConfig cfg = parse_config(conf.string());
  const IngestResult r = ingest_csv(csv.string(), cfg);
  REQUIRE(validate(r.instance).empty());
  const Solution sol = solve(r.instance);
  // 14.89 cents expressed in the scaled currency unit
  CHECK_THAT(sol.arbitrage_gain, Catch::Matchers::WithinAbs(0.148888888888889, 1e-9));
}

TEST_CASE("emitted numbers survive a text round trip") {
  TempDir dir;
  const auto conf = dir.file("e.conf", example_config());
  const auto csv = dir.file("e.csv", example_csv());
  const RunConfig cfg = parse_config(conf.string());
  const Solution sol = solve(ingest_csv(csv.string(), cfg).instance);

  std::ostringstream os;
  write_schedule_csv(os, sol);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);  // header
  size_t i = 0;
  while (std::getline(is, line)) {
    std::stringstream row(line);
    std::string field;
    std::getline(row, field, ',');  // step
    std::getline(row, field, ',');
    CHECK(std::stod(field) == sol.x[i]);
    std::getline(row, field, ',');
    CHECK(std::stod(field) == sol.s[i]);
    std::getline(row, field, ',');
    CHECK(std::stod(field) == sol.b[i]);
    std::getline(row, field, ',');
    CHECK(std::stod(field) == sol.mu_per_step[i]);
    ++i;
  }
  CHECK(i == sol.x.size());
}

TEST_CASE("solution json carries the schedule") {
  TempDir dir;
  const RunConfig cfg = parse_config(dir.file("e.conf", example_config()).string());
  const auto csv = dir.file("e.csv", example_csv());
  const Solution sol = solve(ingest_csv(csv.string(), cfg).instance);
  const nlohmann::json j = solution_to_json(sol);
  CHECK(j["arbitrage_gain"].get<double>() == sol.arbitrage_gain);
  CHECK(j["sub_horizons"].size() == sol.sub_horizons.size());
  CHECK(j["b"].size() == sol.b.size());
}
