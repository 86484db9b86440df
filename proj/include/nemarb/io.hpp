#pragma once

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nemarb/analytics.hpp"
#include "nemarb/mpc.hpp"
#include "nemarb/solver.hpp"

namespace nemarb {

// IO-layer failure (missing file, bad header, parse error). line is 1-based;
// 0 when the failure is not tied to a line.
struct IngestError : std::runtime_error {
  int line;
  IngestError(int line_number, const std::string& what)
      : std::runtime_error(line_number > 0
                               ? "line " + std::to_string(line_number) + ": " + what
                               : what),
        line(line_number) {}
};

struct RunConfig {
  Battery battery{0.1, 3.0, 0.5, -1.0, 1.0, 0.9, 0.9};  // kWh/kW after scaling
  double energy_scale = 1.0;  // multiplies input energies into kWh
  double price_scale = 1.0;   // multiplies input prices into currency/kWh

  double dp_tolerance = -1.0;  // < 0: the oracle default bound
  int dp_grid_points = 2001;
  int iteration_cap = 0;  // 0: solver default (8N)

  int mpc_window = 24;
  ArmaParams arma;

  std::string input_path;
  std::string output_dir = ".";
};

namespace detail {

inline std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  size_t e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& s, int line) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IngestError(line, "cannot parse number '" + s + "'");
  }
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace detail

// Flat `key = value` document; '#' starts a comment. Unknown keys are
// rejected so typos surface. Keys are listed in the README.
inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError(0, "cannot open config file " + path);
  RunConfig cfg;
  std::map<std::string, double*> numeric = {
      {"battery.b_min", &cfg.battery.b_min},
      {"battery.b_max", &cfg.battery.b_max},
      {"battery.b0", &cfg.battery.b0},
      {"battery.delta_min", &cfg.battery.delta_min},
      {"battery.delta_max", &cfg.battery.delta_max},
      {"battery.eta_ch", &cfg.battery.eta_ch},
      {"battery.eta_dis", &cfg.battery.eta_dis},
      {"units.energy_scale", &cfg.energy_scale},
      {"units.price_scale", &cfg.price_scale},
      {"solver.dp_tolerance", &cfg.dp_tolerance},
      {"mpc.alpha1", &cfg.arma.alpha[0]},
      {"mpc.alpha2", &cfg.arma.alpha[1]},
      {"mpc.alpha3", &cfg.arma.alpha[2]},
      {"mpc.beta1", &cfg.arma.beta[0]},
      {"mpc.beta2", &cfg.arma.beta[1]},
      {"mpc.beta3", &cfg.arma.beta[2]},
  };
  std::map<std::string, int*> integral = {
      {"solver.dp_grid_points", &cfg.dp_grid_points},
      {"solver.iteration_cap", &cfg.iteration_cap},
      {"mpc.window_steps", &cfg.mpc_window},
      {"mpc.days_window", &cfg.arma.days_window},
      {"mpc.steps_per_day", &cfg.arma.steps_per_day},
  };

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw IngestError(line_no, "expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (auto it = numeric.find(key); it != numeric.end()) {
      *it->second = detail::parse_double(value, line_no);
    } else if (auto it2 = integral.find(key); it2 != integral.end()) {
      *it2->second = static_cast<int>(detail::parse_double(value, line_no));
    } else if (key == "io.input") {
      cfg.input_path = value;
    } else if (key == "io.output") {
      cfg.output_dir = value;
    } else {
      throw IngestError(line_no, "unknown key '" + key + "'");
    }
  }
  // Unit scaling applies to the battery block too: config values are in
  // input units.
  cfg.battery.b_min *= cfg.energy_scale;
  cfg.battery.b_max *= cfg.energy_scale;
  cfg.battery.b0 *= cfg.energy_scale;
  cfg.battery.delta_min *= cfg.energy_scale;
  cfg.battery.delta_max *= cfg.energy_scale;
  const auto violations = battery_violations(cfg.battery);
  if (!violations.empty())
    throw std::invalid_argument("invalid config: " + violations.front().message);
  return cfg;
}

struct IngestResult {
  ArbitrageInstance instance;
  // Present when the file carried separate demand/renewables columns.
  std::optional<std::vector<double>> demand;
  std::optional<std::vector<double>> renewables;
};

// Accepts `step,h,p_b,p_s,z` or `step,h,p_b,p_s,d,r` (z = d - r). Header
// required, rows sorted by step, unit scaling applied.
inline IngestResult ingest_csv(const std::string& path, const RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw IngestError(0, "cannot open input file " + path);

  std::string line;
  if (!std::getline(in, line)) throw IngestError(0, "empty input file " + path);
  const auto header = detail::split_csv(line);
  bool split_load = false;
  if (header == std::vector<std::string>{"step", "h", "p_b", "p_s", "z"}) {
    split_load = false;
  } else if (header == std::vector<std::string>{"step", "h", "p_b", "p_s", "d", "r"}) {
    split_load = true;
  } else {
    throw IngestError(1, "header must be step,h,p_b,p_s,z or step,h,p_b,p_s,d,r");
  }

  IngestResult out;
  if (split_load) {
    out.demand.emplace();
    out.renewables.emplace();
  }
  ArbitrageInstance& inst = out.instance;
  inst.battery = cfg.battery;

  int line_no = 1;
  long last_step = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv(line);
    if (static_cast<int>(fields.size()) != (split_load ? 6 : 5))
      throw IngestError(line_no, "expected " + std::to_string(split_load ? 6 : 5) +
                                     " columns, got " + std::to_string(fields.size()));
    const long step = static_cast<long>(detail::parse_double(fields[0], line_no));
    if (step != last_step + 1)
      throw IngestError(line_no, "steps must be consecutive from 1; got " +
                                     std::to_string(step));
    last_step = step;
    inst.grid.step_hours.push_back(detail::parse_double(fields[1], line_no));
    inst.tariff.buy.push_back(cfg.price_scale * detail::parse_double(fields[2], line_no));
    inst.tariff.sell.push_back(cfg.price_scale * detail::parse_double(fields[3], line_no));
    if (split_load) {
      const double d = cfg.energy_scale * detail::parse_double(fields[4], line_no);
      const double r = cfg.energy_scale * detail::parse_double(fields[5], line_no);
      out.demand->push_back(d);
      out.renewables->push_back(r);
      inst.load.z.push_back(d - r);
    } else {
      inst.load.z.push_back(cfg.energy_scale * detail::parse_double(fields[4], line_no));
    }
  }
  inst.grid.n_steps = static_cast<int>(inst.grid.step_hours.size());
  for (double h : inst.grid.step_hours) inst.grid.total_hours += h;
  if (inst.grid.n_steps == 0) throw IngestError(0, "input has no data rows");
  return out;
}

// --- emission ---------------------------------------------------------

// All numbers are emitted with 17 significant digits so values survive a
// text round trip bit-exactly.
inline std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline nlohmann::json solution_to_json(const Solution& sol) {
  nlohmann::json j;
  j["total_cost"] = sol.total_cost;
  j["arbitrage_gain"] = sol.arbitrage_gain;
  j["x"] = sol.x;
  j["s"] = sol.s;
  j["b"] = sol.b;
  j["mu"] = sol.mu_per_step;
  j["sub_horizons"] = nlohmann::json::array();
  for (const SubHorizon& sh : sol.sub_horizons) {
    const char* terminal = sh.terminal == SubHorizon::Terminal::floor     ? "b_min"
                           : sh.terminal == SubHorizon::Terminal::ceiling ? "b_max"
                                                                          : "free";
    j["sub_horizons"].push_back({{"index", sh.index},
                                 {"first_step", sh.first_step + 1},
                                 {"last_step", sh.last_step + 1},
                                 {"mu", sh.mu},
                                 {"terminal", terminal},
                                 {"terminal_value", sh.terminal_value}});
  }
  return j;
}

inline void write_schedule_csv(std::ostream& os, const Solution& sol) {
  os << "step,x,s,b,mu,sub_horizon\n";
  size_t k = 0;
  for (int i = 0; i < static_cast<int>(sol.x.size()); ++i) {
    while (k + 1 < sol.sub_horizons.size() && sol.sub_horizons[k].last_step < i) ++k;
    os << (i + 1) << ',' << format_full(sol.x[static_cast<size_t>(i)]) << ','
       << format_full(sol.s[static_cast<size_t>(i)]) << ','
       << format_full(sol.b[static_cast<size_t>(i)]) << ','
       << format_full(sol.mu_per_step[static_cast<size_t>(i)]) << ','
       << sol.sub_horizons[k].index << '\n';
  }
}

inline void write_kappa_csv(std::ostream& os, const std::vector<KappaRow>& rows) {
  os << "kappa,value_of_solar,value_of_storage\n";
  for (const KappaRow& r : rows)
    os << format_full(r.kappa) << ',' << format_full(r.value_of_solar) << ','
       << format_full(r.value_of_storage) << '\n';
}

inline void write_perturb_csv(std::ostream& os, const std::vector<PerturbRow>& rows,
                              PerturbMode mode) {
  os << "variance," << (mode == PerturbMode::volatility ? "mean_gain" : "mean_loss")
     << '\n';
  for (const PerturbRow& r : rows)
    os << format_full(r.variance) << ',' << format_full(r.mean_value) << '\n';
}

inline void write_mpc_csv(std::ostream& os, const MpcRun& run) {
  os << "step,x,b\n";
  for (size_t i = 0; i < run.realized_actions.size(); ++i)
    os << (i + 1) << ',' << format_full(run.realized_actions[i]) << ','
       << format_full(run.realized_levels[i]) << '\n';
}

// The built-in 10-hour example: prices in cents/kWh, battery block in Wh.
inline const char* example_csv() {
  return "step,h,p_b,p_s,z\n"
         "1,1,1,1,0\n"
         "2,1,0.9,0.9,0\n"
         "3,1,1.5,1.5,0\n"
         "4,1,0.8,0.8,0\n"
         "5,1,0.6,0.6,0\n"
         "6,1,5,5,0\n"
         "7,1,4.9,4.9,0\n"
         "8,1,6,6,0\n"
         "9,1,5,5,0\n"
         "10,1,8,8,0\n";
}

inline const char* example_config() {
  return "# built-in example: energies in Wh, prices in cents/kWh\n"
         "battery.b_min = 100\n"
         "battery.b_max = 3000\n"
         "battery.b0 = 500\n"
         "battery.delta_min = -1000\n"
         "battery.delta_max = 1000\n"
         "battery.eta_ch = 0.9\n"
         "battery.eta_dis = 0.9\n"
         "units.energy_scale = 0.001\n"
         "units.price_scale = 0.01\n";
}

}  // namespace nemarb
