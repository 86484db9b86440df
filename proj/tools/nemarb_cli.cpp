// Command-line front end: ingest CSV instances, run the solver, the oracle
// comparison, the rolling-horizon controller and the sweep experiments.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nemarb/nemarb.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct CommonArgs {
  std::string config_path;
  std::string input_path;
  std::string output_dir = ".";
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key = value configuration file");
  cmd->add_option("--input", args.input_path, "instance CSV");
  cmd->add_option("--output", args.output_dir, "output directory");
}

nemarb::RunConfig load_config(const CommonArgs& args) {
  nemarb::RunConfig cfg;
  if (!args.config_path.empty()) cfg = nemarb::parse_config(args.config_path);
  if (!args.input_path.empty()) cfg.input_path = args.input_path;
  if (!args.output_dir.empty()) cfg.output_dir = args.output_dir;
  return cfg;
}

nemarb::IngestResult load_instance(const nemarb::RunConfig& cfg) {
  if (cfg.input_path.empty())
    throw nemarb::IngestError(0, "no input file given (use --input)");
  auto result = nemarb::ingest_csv(cfg.input_path, cfg);
  const auto violations = nemarb::validate(result.instance);
  if (!violations.empty()) {
    std::string what = violations.front().message;
    if (violations.front().step >= 0)
      what += " (row " + std::to_string(violations.front().step + 1) + ")";
    throw std::invalid_argument(what);
  }
  return result;
}

std::ofstream open_output(const nemarb::RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.output_dir);
  const fs::path path = fs::path(cfg.output_dir) / name;
  std::ofstream out(path);
  if (!out) throw nemarb::IngestError(0, "cannot write " + path.string());
  return out;
}

int cmd_solve(const CommonArgs& args) {
  const auto cfg = load_config(args);
  const auto ingest = load_instance(cfg);
  const nemarb::Solution sol =
      nemarb::solve(ingest.instance, nullptr, cfg.iteration_cap);

  open_output(cfg, "solution.json") << nemarb::solution_to_json(sol).dump(2) << '\n';
  auto csv = open_output(cfg, "schedule.csv");
  nemarb::write_schedule_csv(csv, sol);
  std::cout << "arbitrage_gain " << nemarb::format_full(sol.arbitrage_gain) << '\n';
  return kExitOk;
}

int cmd_oracle_check(const CommonArgs& args) {
  const auto cfg = load_config(args);
  const auto ingest = load_instance(cfg);
  nemarb::DpConfig dp_cfg;
  dp_cfg.grid_points = cfg.dp_grid_points;
  dp_cfg.tolerance = cfg.dp_tolerance;
  const nemarb::CompareReport report = nemarb::compare(ingest.instance, dp_cfg);

  json j = {{"solver_cost", report.solver_cost},
            {"dp_cost", report.dp_cost},
            {"gap", report.gap},
            {"pass", report.pass}};
  open_output(cfg, "oracle_check.json") << j.dump(2) << '\n';
  std::cout << j.dump() << '\n';
  return report.pass ? kExitOk : kExitValidation;
}

int cmd_mpc(const CommonArgs& args) {
  const auto cfg = load_config(args);
  const auto ingest = load_instance(cfg);
  const nemarb::ArbitrageInstance& full = ingest.instance;

  const int seed_len = cfg.arma.days_window * cfg.arma.steps_per_day + 3;
  if (full.n() <= seed_len)
    throw std::invalid_argument(
        "mpc needs more rows than the forecaster seed (days_window days + 3 steps)");

  std::vector<double> seed(full.load.z.begin(), full.load.z.begin() + seed_len);
  nemarb::ArbitrageInstance controlled;
  controlled.grid.n_steps = full.n() - seed_len;
  controlled.grid.step_hours.assign(full.grid.step_hours.begin() + seed_len,
                                    full.grid.step_hours.end());
  for (double h : controlled.grid.step_hours) controlled.grid.total_hours += h;
  controlled.tariff.buy.assign(full.tariff.buy.begin() + seed_len, full.tariff.buy.end());
  controlled.tariff.sell.assign(full.tariff.sell.begin() + seed_len,
                                full.tariff.sell.end());
  controlled.load.z.assign(full.load.z.begin() + seed_len, full.load.z.end());
  controlled.battery = full.battery;

  nemarb::ArmaForecaster forecaster(seed, cfg.arma);
  nemarb::MpcConfig mpc_cfg{cfg.mpc_window};
  const nemarb::MpcRun run = nemarb::run_mpc(controlled, forecaster, mpc_cfg);

  json j = {{"realized_gain", run.realized_gain},
            {"ideal_gain", run.ideal_gain},
            {"loss_of_opportunity", run.loss_of_opportunity},
            {"controlled_steps", controlled.n()}};
  open_output(cfg, "mpc.json") << j.dump(2) << '\n';
  auto csv = open_output(cfg, "mpc_realized.csv");
  nemarb::write_mpc_csv(csv, run);
  std::cout << j.dump() << '\n';
  return kExitOk;
}

int cmd_subhorizons(const CommonArgs& args) {
  const auto cfg = load_config(args);
  const auto ingest = load_instance(cfg);
  const nemarb::Solution sol = nemarb::solve(ingest.instance);
  const nemarb::SubHorizonStats st = nemarb::subhorizon_stats(sol, ingest.instance.grid);
  json j = {{"t_mean", st.t_mean},
            {"t_p99", st.t_p99},
            {"t_worst", st.t_worst},
            {"count", st.count}};
  open_output(cfg, "subhorizons.json") << j.dump(2) << '\n';
  std::cout << j.dump() << '\n';
  return kExitOk;
}

int cmd_kappa_sweep(const CommonArgs& args, int steps) {
  const auto cfg = load_config(args);
  const auto ingest = load_instance(cfg);
  if (!ingest.demand || !ingest.renewables)
    throw std::invalid_argument("kappa-sweep needs the d,r column form of the input");
  std::vector<double> grid;
  for (int k = 0; k < steps; ++k)
    grid.push_back(steps == 1 ? 1.0 : static_cast<double>(k) / (steps - 1));
  const auto rows =
      nemarb::kappa_sweep(*ingest.demand, *ingest.renewables, ingest.instance, grid);
  auto csv = open_output(cfg, "kappa_sweep.csv");
  nemarb::write_kappa_csv(csv, rows);
  std::cout << "rows " << rows.size() << '\n';
  return kExitOk;
}

int cmd_perturb_sweep(const CommonArgs& args, const std::string& mode_name,
                      int trials, std::vector<double> sigmas, uint64_t seed) {
  const auto cfg = load_config(args);
  const auto ingest = load_instance(cfg);
  const auto mode = mode_name == "volatility" ? nemarb::PerturbMode::volatility
                                              : nemarb::PerturbMode::forecast_error;
  if (sigmas.empty()) {
    double mean = 0.0;
    for (double p : ingest.instance.tariff.buy) mean += p;
    mean /= ingest.instance.n();
    for (double f : {0.0, 0.05, 0.1, 0.2, 0.4}) sigmas.push_back(f * mean);
  }
  const auto rows =
      nemarb::perturbation_sweep(ingest.instance, mode, sigmas, trials, seed);
  auto csv = open_output(cfg, "perturb_sweep.csv");
  nemarb::write_perturb_csv(csv, rows, mode);
  std::cout << "rows " << rows.size() << '\n';
  return kExitOk;
}

int cmd_example(const CommonArgs& args) {
  nemarb::RunConfig cfg;
  cfg.output_dir = args.output_dir;
  open_output(cfg, "example.csv") << nemarb::example_csv();
  open_output(cfg, "example.conf") << nemarb::example_config();
  std::cout << "wrote example.csv and example.conf to " << cfg.output_dir << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"battery arbitrage under net metering"};
  app.require_subcommand(1);

  CommonArgs solve_args, oracle_args, mpc_args, sub_args, kappa_args, perturb_args,
      example_args;

  auto* solve_cmd = app.add_subcommand("solve", "optimal schedule for an instance");
  add_common(solve_cmd, solve_args);

  auto* oracle_cmd =
      app.add_subcommand("oracle-check", "compare the solver against the grid oracle");
  add_common(oracle_cmd, oracle_args);

  auto* mpc_cmd =
      app.add_subcommand("mpc", "rolling-horizon run with the residual forecaster");
  add_common(mpc_cmd, mpc_args);

  auto* sub_cmd = app.add_subcommand("subhorizons", "sub-horizon length statistics");
  add_common(sub_cmd, sub_args);

  int kappa_steps = 11;
  auto* kappa_cmd =
      app.add_subcommand("kappa-sweep", "value of solar and storage versus kappa");
  add_common(kappa_cmd, kappa_args);
  kappa_cmd->add_option("--steps", kappa_steps, "kappa grid size over [0,1]");

  std::string perturb_mode = "volatility";
  int perturb_trials = 1000;
  std::vector<double> perturb_sigmas;
  uint64_t perturb_seed = 20240601;
  auto* perturb_cmd = app.add_subcommand("perturb-sweep", "price-noise Monte-Carlo sweep");
  add_common(perturb_cmd, perturb_args);
  perturb_cmd->add_option("--mode", perturb_mode, "volatility or forecast-error")
      ->check(CLI::IsMember({"volatility", "forecast-error"}));
  perturb_cmd->add_option("--trials", perturb_trials, "trials per noise level");
  perturb_cmd->add_option("--sigmas", perturb_sigmas, "noise standard deviations");
  perturb_cmd->add_option("--seed", perturb_seed, "RNG seed");

  auto* example_cmd =
      app.add_subcommand("example", "write the built-in 10-hour instance");
  add_common(example_cmd, example_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) return cmd_solve(solve_args);
    if (oracle_cmd->parsed()) return cmd_oracle_check(oracle_args);
    if (mpc_cmd->parsed()) return cmd_mpc(mpc_args);
    if (sub_cmd->parsed()) return cmd_subhorizons(sub_args);
    if (kappa_cmd->parsed()) return cmd_kappa_sweep(kappa_args, kappa_steps);
    if (perturb_cmd->parsed())
      return cmd_perturb_sweep(perturb_args, perturb_mode, perturb_trials,
                               perturb_sigmas, perturb_seed);
    if (example_cmd->parsed()) return cmd_example(example_args);
  } catch (const nemarb::IngestError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const nemarb::insufficient_history& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}
