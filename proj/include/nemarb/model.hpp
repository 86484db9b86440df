#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "nemarb/common.hpp"

namespace nemarb {

// Discrete time grid: n_steps steps of step_hours[i] hours each.
struct TimeGrid {
  int n_steps = 0;
  std::vector<double> step_hours;  // hours
  double total_hours = 0.0;

  static TimeGrid uniform(int n, double hours_per_step = 1.0) {
    TimeGrid g;
    g.n_steps = n;
    g.step_hours.assign(static_cast<size_t>(n), hours_per_step);
    g.total_hours = n * hours_per_step;
    return g;
  }
};

// Buy/sell price pair per step, currency/kWh. sell <= buy keeps the step
// cost convex.
struct Tariff {
  std::vector<double> buy;
  std::vector<double> sell;

  // Ratio sell/buy; defined as 1 when buy == 0 (the tariff invariant then
  // forces sell == 0).
  double kappa(int i) const {
    if (buy[static_cast<size_t>(i)] <= 0.0) return 1.0;
    return sell[static_cast<size_t>(i)] / buy[static_cast<size_t>(i)];
  }

  static Tariff flat(int n, double buy_price, double sell_price) {
    Tariff t;
    t.buy.assign(static_cast<size_t>(n), buy_price);
    t.sell.assign(static_cast<size_t>(n), sell_price);
    return t;
  }
};

struct Battery {
  double b_min = 0.0;     // kWh
  double b_max = 0.0;     // kWh
  double b0 = 0.0;        // kWh, level before step 0
  double delta_min = 0.0; // kW, <= 0
  double delta_max = 0.0; // kW, >= 0
  double eta_ch = 1.0;    // (0, 1]
  double eta_dis = 1.0;   // (0, 1]
};

// Net consumption without storage, z_i = d_i - r_i, kWh per step. Negative
// means surplus generation.
struct NetLoadSeries {
  std::vector<double> z;
};

struct ArbitrageInstance {
  TimeGrid grid;
  Tariff tariff;
  NetLoadSeries load;
  Battery battery;

  int n() const { return grid.n_steps; }
  double hours(int i) const { return grid.step_hours[static_cast<size_t>(i)]; }
  double z(int i) const { return load.z[static_cast<size_t>(i)]; }
  double buy(int i) const { return tariff.buy[static_cast<size_t>(i)]; }
  double sell(int i) const { return tariff.sell[static_cast<size_t>(i)]; }

  // Per-step bounds on the battery-side energy delta x (kWh).
  double x_min(int i) const { return battery.delta_min * hours(i); }
  double x_max(int i) const { return battery.delta_max * hours(i); }
  // Per-step bounds on the meter-side energy s (kWh).
  double s_min(int i) const { return battery.eta_dis * x_min(i); }
  double s_max(int i) const { return x_max(i) / battery.eta_ch; }

  void check_index(int i) const {
    if (i < 0 || i >= n()) throw std::out_of_range("step index out of range");
  }
};

// Meter-side energy for a battery-side delta x:
// s = (1/eta_ch) max(0,x) - eta_dis max(0,-x). Strictly increasing, s(0)=0.
inline double storage_output(double x, const Battery& b) {
  return x >= 0.0 ? x / b.eta_ch : b.eta_dis * x;
}

// Inverse map; storage_input(storage_output(x)) == x.
inline double storage_input(double s, const Battery& b) {
  return s >= 0.0 ? b.eta_ch * s : s / b.eta_dis;
}

// Net-metering cost of step i for battery delta x:
// max(0, z+f(x)) * buy - max(0, -(z+f(x))) * sell.
inline double step_cost(int i, double x, const ArbitrageInstance& inst) {
  inst.check_index(i);
  const double consumption = inst.z(i) + storage_output(x, inst.battery);
  return consumption >= 0.0 ? consumption * inst.buy(i)
                            : consumption * inst.sell(i);
}

// Cost of the whole horizon for a given action vector.
inline double total_cost(const std::vector<double>& x,
                         const ArbitrageInstance& inst) {
  double c = 0.0;
  for (int i = 0; i < inst.n(); ++i) c += step_cost(i, x[static_cast<size_t>(i)], inst);
  return c;
}

// Cost of doing nothing; the baseline for arbitrage gains.
inline double no_storage_cost(const ArbitrageInstance& inst) {
  double c = 0.0;
  for (int i = 0; i < inst.n(); ++i) c += step_cost(i, 0.0, inst);
  return c;
}

struct Violation {
  int step = -1;  // -1 for non-indexed checks
  std::string message;
};

inline std::vector<Violation> battery_violations(const Battery& b) {
  std::vector<Violation> out;
  const auto bad = [&](std::string msg) { out.push_back({-1, std::move(msg)}); };
  if (b.b_min > b.b_max + kTol) bad("capacity floor above ceiling");
  if (b.b0 < b.b_min - kTol) bad("initial charge below floor");
  if (b.b0 > b.b_max + kTol) bad("initial charge above ceiling");
  if (b.delta_min > kTol) bad("delta_min must be <= 0");
  if (b.delta_max < -kTol) bad("delta_max must be >= 0");
  if (!(b.eta_ch > 0.0) || b.eta_ch > 1.0 + 1e-12) bad("eta_ch outside (0,1]");
  if (!(b.eta_dis > 0.0) || b.eta_dis > 1.0 + 1e-12) bad("eta_dis outside (0,1]");
  return out;
}

// Every violated invariant, with step index where applicable. An instance
// with no violations is always feasible (the all-zeros action is admissible).
inline std::vector<Violation> validate(const ArbitrageInstance& inst) {
  std::vector<Violation> out;
  const auto bad = [&](int step, std::string msg) {
    out.push_back({step, std::move(msg)});
  };

  const int n = inst.grid.n_steps;
  if (n < 1) bad(-1, "time grid has no steps");
  if (static_cast<int>(inst.grid.step_hours.size()) != n)
    bad(-1, "step_hours length mismatch");
  double sum = 0.0;
  for (int i = 0; i < static_cast<int>(inst.grid.step_hours.size()); ++i) {
    const double h = inst.grid.step_hours[static_cast<size_t>(i)];
    if (!(h > 0.0) || !std::isfinite(h)) bad(i, "non-positive step duration");
    sum += h;
  }
  const double scale = std::max(1.0, std::abs(sum));
  if (std::abs(inst.grid.total_hours - sum) > 1e-9 * scale)
    bad(-1, "total_hours does not match sum of step_hours");

  if (static_cast<int>(inst.tariff.buy.size()) != n ||
      static_cast<int>(inst.tariff.sell.size()) != n)
    bad(-1, "tariff length mismatch");
  for (int i = 0; i < std::min<int>(n, static_cast<int>(inst.tariff.buy.size())); ++i) {
    const double pb = inst.tariff.buy[static_cast<size_t>(i)];
    const double ps = inst.tariff.sell[static_cast<size_t>(i)];
    if (!std::isfinite(pb) || pb < -kTol) bad(i, "negative buy price");
    if (!std::isfinite(ps) || ps < -kTol) bad(i, "negative sell price");
    if (ps > pb + kTol)
      bad(i, "kappa > 1 at step " + std::to_string(i));
  }

  for (Violation& v : battery_violations(inst.battery)) out.push_back(std::move(v));

  if (static_cast<int>(inst.load.z.size()) != n) bad(-1, "net load length mismatch");
  for (int i = 0; i < static_cast<int>(inst.load.z.size()); ++i)
    if (!std::isfinite(inst.load.z[static_cast<size_t>(i)])) bad(i, "non-finite net load");

  return out;
}

inline bool is_valid(const ArbitrageInstance& inst) { return validate(inst).empty(); }

inline void require_valid(const ArbitrageInstance& inst) {
  const auto v = validate(inst);
  if (!v.empty()) throw std::invalid_argument("invalid instance: " + v.front().message);
}

// Samples of (x, step_cost) over [x_min, x_max]: n_samples uniform points
// plus the two cost kinks (x = 0 and the point where the meter reading
// crosses zero) whenever they fall inside the range. Sorted by x.
inline std::vector<std::pair<double, double>> cost_curve(
    int i, const ArbitrageInstance& inst, int n_samples) {
  inst.check_index(i);
  if (n_samples < 3) throw std::invalid_argument("cost_curve needs n_samples >= 3");
  const double lo = inst.x_min(i), hi = inst.x_max(i);
  std::vector<double> xs;
  xs.reserve(static_cast<size_t>(n_samples) + 2);
  for (int k = 0; k < n_samples; ++k) {
    const double t = n_samples == 1 ? 0.0 : static_cast<double>(k) / (n_samples - 1);
    xs.push_back(lo + t * (hi - lo));
  }
  for (double kink : {0.0, storage_input(-inst.z(i), inst.battery)})
    if (kink > lo + kTol && kink < hi - kTol) xs.push_back(kink);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end(),
                       [](double a, double b) { return std::abs(a - b) <= kTol; }),
           xs.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(xs.size());
  for (double x : xs) out.emplace_back(x, step_cost(i, x, inst));
  return out;
}

}  // namespace nemarb
