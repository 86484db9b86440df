#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nemarb/io.hpp"
#include "nemarb/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() /
          ("nemarb_cli_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter()++));
    fs::create_directories(dir);
  }
  ~Workspace() { std::error_code ec; fs::remove_all(dir, ec); }
  static int& counter() { static int c = 0; return c; }

  int run(const std::string& args) const {
    const std::string cmd = std::string(NEMARB_CLI_PATH) + " " + args +
                            " > " + (dir / "stdout.txt").string() +
                            " 2> " + (dir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  }
  std::string slurp(const std::string& name) const {
    std::ifstream in(dir / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  void write(const std::string& name, const std::string& content) const {
    std::ofstream(dir / name) << content;
  }
};

}  // namespace

TEST_CASE("example then solve reproduces the known gain") {
  Workspace ws;
  REQUIRE(ws.run("example --output " + ws.dir.string()) == 0);
  REQUIRE(fs::exists(ws.dir / "example.csv"));
  REQUIRE(fs::exists(ws.dir / "example.conf"));

  REQUIRE(ws.run("solve --config " + (ws.dir / "example.conf").string() +
                 " --input " + (ws.dir / "example.csv").string() +
                 " --output " + ws.dir.string()) == 0);
  const json sol = json::parse(ws.slurp("solution.json"));
  CHECK(std::abs(sol["arbitrage_gain"].get<double>() - 0.1488888888888889) < 1e-9);
  REQUIRE(sol["sub_horizons"].size() == 2);
  CHECK(std::abs(sol["sub_horizons"][0]["mu"].get<double>() - 0.011111111111111) < 1e-9);
  CHECK(std::abs(sol["sub_horizons"][1]["mu"].get<double>() - 0.045) < 1e-9);

  SECTION("schedule values round-trip bit-exactly") {
    nemarb::RunConfig cfg = nemarb::parse_config((ws.dir / "example.conf").string());
    const nemarb::Solution direct =
        nemarb::solve(nemarb::ingest_csv((ws.dir / "example.csv").string(), cfg).instance);
    std::istringstream is(ws.slurp("schedule.csv"));
    std::string line;
    std::getline(is, line);
    size_t i = 0;
    while (std::getline(is, line)) {
      std::stringstream row(line);
      std::string field;
      for (int skip = 0; skip < 3; ++skip) std::getline(row, field, ',');
      std::getline(row, field, ',');
      CHECK(std::stod(field) == direct.b[i]);
      ++i;
    }
    CHECK(i == direct.b.size());
  }
}

TEST_CASE("oracle check passes on the example") {
  Workspace ws;
  REQUIRE(ws.run("example --output " + ws.dir.string()) == 0);
  REQUIRE(ws.run("oracle-check --config " + (ws.dir / "example.conf").string() +
                 " --input " + (ws.dir / "example.csv").string() +
                 " --output " + ws.dir.string()) == 0);
  const json rep = json::parse(ws.slurp("oracle_check.json"));
  CHECK(rep["pass"].get<bool>());
}

TEST_CASE("exit codes distinguish validation from io failures") {
  Workspace ws;
  SECTION("empty input file is an io error") {
    ws.write("empty.csv", "");
    CHECK(ws.run("solve --input " + (ws.dir / "empty.csv").string() +
                 " --output " + ws.dir.string()) == 2);
  }
  SECTION("missing input file is an io error") {
    CHECK(ws.run("solve --input " + (ws.dir / "absent.csv").string() +
                 " --output " + ws.dir.string()) == 2);
  }
  SECTION("sell above buy is a validation error") {
    ws.write("bad.csv", "step,h,p_b,p_s,z\n1,1,0.2,0.5,0\n");
    CHECK(ws.run("solve --input " + (ws.dir / "bad.csv").string() +
                 " --output " + ws.dir.string()) == 1);
  }
}

TEST_CASE("sub-horizon statistics subcommand") {
  Workspace ws;
  REQUIRE(ws.run("example --output " + ws.dir.string()) == 0);
  REQUIRE(ws.run("subhorizons --config " + (ws.dir / "example.conf").string() +
                 " --input " + (ws.dir / "example.csv").string() +
                 " --output " + ws.dir.string()) == 0);
  const json st = json::parse(ws.slurp("subhorizons.json"));
  CHECK(st["count"].get<int>() == 2);
  CHECK(std::abs(st["t_mean"].get<double>() - 5.0) < 1e-12);
}

TEST_CASE("sweep subcommands emit csv tables") {
  Workspace ws;
  std::ostringstream csv;
  csv << "step,h,p_b,p_s,d,r\n";
  for (int i = 1; i <= 24; ++i)
    csv << i << ",1," << (0.1 + 0.05 * ((i * 7) % 5)) << ","
        << 0.5 * (0.1 + 0.05 * ((i * 7) % 5)) << "," << (0.4 + 0.02 * (i % 6)) << ","
        << (i > 8 && i < 18 ? 0.9 : 0.0) << "\n";
  ws.write("dr.csv", csv.str());

  REQUIRE(ws.run("kappa-sweep --steps 3 --input " + (ws.dir / "dr.csv").string() +
                 " --output " + ws.dir.string()) == 0);
  const std::string kappa = ws.slurp("kappa_sweep.csv");
  CHECK(kappa.rfind("kappa,value_of_solar,value_of_storage", 0) == 0);
  CHECK(std::count(kappa.begin(), kappa.end(), '\n') == 4);

  REQUIRE(ws.run("perturb-sweep --trials 5 --sigmas 0 --sigmas 0.01 --input " +
                 (ws.dir / "dr.csv").string() + " --output " + ws.dir.string()) == 0);
  const std::string perturb = ws.slurp("perturb_sweep.csv");
  CHECK(perturb.rfind("variance,mean_gain", 0) == 0);

  SECTION("kappa sweep needs the split-load form") {
    ws.write("z.csv", "step,h,p_b,p_s,z\n1,1,0.2,0.1,0\n");
    CHECK(ws.run("kappa-sweep --input " + (ws.dir / "z.csv").string() +
                 " --output " + ws.dir.string()) == 1);
  }
}

TEST_CASE("mpc subcommand runs on a multi-day series") {
  Workspace ws;
  std::ostringstream csv;
  csv << "step,h,p_b,p_s,z\n";
  const int days = 5;
  for (int i = 0; i < days * 24; ++i) {
    const double pb = 0.1 + 0.08 * std::sin(0.26 * (i % 24));
    const double z = 0.5 + 0.4 * std::sin(0.3 + 0.26 * (i % 24));
    csv << (i + 1) << ",1," << pb << "," << 0.5 * pb << "," << z << "\n";
  }
  ws.write("days.csv", csv.str());
  ws.write("mpc.conf",
           "battery.b_min = 0\nbattery.b_max = 2\nbattery.b0 = 1\n"
           "battery.delta_min = -0.5\nbattery.delta_max = 0.5\n"
           "battery.eta_ch = 0.95\nbattery.eta_dis = 0.95\n"
           "mpc.window_steps = 24\nmpc.days_window = 3\nmpc.steps_per_day = 24\n"
           "mpc.alpha1 = 0.27185\nmpc.alpha2 = 0.1478\nmpc.alpha3 = 0.08036\n"
           "mpc.beta1 = 0.27185\nmpc.beta2 = 0.1478\nmpc.beta3 = 0.08036\n");
  REQUIRE(ws.run("mpc --config " + (ws.dir / "mpc.conf").string() + " --input " +
                 (ws.dir / "days.csv").string() + " --output " + ws.dir.string()) == 0);
  const json rep = json::parse(ws.slurp("mpc.json"));
  CHECK(rep["controlled_steps"].get<int>() == days * 24 - (3 * 24 + 3));
  CHECK(rep["realized_gain"].get<double>() <= rep["ideal_gain"].get<double>() + 1e-9);
  CHECK(fs::exists(ws.dir / "mpc_realized.csv"));
}
