#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "nemarb/solver.hpp"

namespace nemarb {

struct SubHorizonStats {
  double t_mean = 0.0;   // hours
  double t_p99 = 0.0;    // hours, nearest-rank percentile
  double t_worst = 0.0;  // hours
  int count = 0;
};

inline SubHorizonStats subhorizon_stats(const Solution& sol, const TimeGrid& grid) {
  SubHorizonStats st;
  std::vector<double> lengths;
  lengths.reserve(sol.sub_horizons.size());
  for (const SubHorizon& sh : sol.sub_horizons) {
    double hours = 0.0;
    for (int i = sh.first_step; i <= sh.last_step; ++i)
      hours += grid.step_hours[static_cast<size_t>(i)];
    lengths.push_back(hours);
  }
  st.count = static_cast<int>(lengths.size());
  if (lengths.empty()) return st;
  std::sort(lengths.begin(), lengths.end());
  double sum = 0.0;
  for (double v : lengths) sum += v;
  st.t_mean = sum / st.count;
  const int rank = std::max<int>(1, static_cast<int>(std::ceil(0.99 * st.count)));
  st.t_p99 = lengths[static_cast<size_t>(rank - 1)];
  st.t_worst = lengths.back();
  return st;
}

struct ValueDecomposition {
  double value_of_solar = 0.0;
  double value_of_storage = 0.0;
};

namespace detail {

inline ArbitrageInstance with_load(const ArbitrageInstance& base,
                                   std::vector<double> z) {
  ArbitrageInstance inst = base;
  inst.load.z = std::move(z);
  return inst;
}

// A battery that cannot move: value-of-* baselines.
inline ArbitrageInstance without_battery(const ArbitrageInstance& base) {
  ArbitrageInstance inst = base;
  inst.battery.delta_min = 0.0;
  inst.battery.delta_max = 0.0;
  return inst;
}

}  // namespace detail

// value_of_solar   = cost(demand only)          - cost(net load, no battery)
// value_of_storage = cost(net load, no battery) - cost(net load, optimal battery)
inline ValueDecomposition value_decomposition(const std::vector<double>& demand,
                                              const std::vector<double>& renewables,
                                              const ArbitrageInstance& base) {
  if (demand.size() != renewables.size() ||
      static_cast<int>(demand.size()) != base.n())
    throw std::invalid_argument("demand/renewables length mismatch");
  std::vector<double> net(demand.size());
  for (size_t i = 0; i < demand.size(); ++i) net[i] = demand[i] - renewables[i];

  const double cost_demand_only =
      no_storage_cost(detail::with_load(base, demand));
  const double cost_net_no_batt = no_storage_cost(detail::with_load(base, net));
  const double cost_net_battery = solve(detail::with_load(base, net)).total_cost;

  ValueDecomposition v;
  v.value_of_solar = cost_demand_only - cost_net_no_batt;
  v.value_of_storage = cost_net_no_batt - cost_net_battery;
  return v;
}

struct KappaRow {
  double kappa = 0.0;
  double value_of_solar = 0.0;
  double value_of_storage = 0.0;
};

// Rescales sell = kappa * buy per grid point and re-solves.
inline std::vector<KappaRow> kappa_sweep(const std::vector<double>& demand,
                                         const std::vector<double>& renewables,
                                         const ArbitrageInstance& base,
                                         const std::vector<double>& kappa_grid) {
  std::vector<KappaRow> rows;
  rows.reserve(kappa_grid.size());
  for (double kappa : kappa_grid) {
    if (kappa < -kTol || kappa > 1.0 + kTol)
      throw std::invalid_argument("kappa outside [0, 1]");
    ArbitrageInstance inst = base;
    for (size_t i = 0; i < inst.tariff.buy.size(); ++i)
      inst.tariff.sell[i] = kappa * inst.tariff.buy[i];
    const ValueDecomposition v = value_decomposition(demand, renewables, inst);
    rows.push_back({kappa, v.value_of_solar, v.value_of_storage});
  }
  std::sort(rows.begin(), rows.end(),
            [](const KappaRow& a, const KappaRow& b) { return a.kappa < b.kappa; });
  return rows;
}

enum class PerturbMode {
  volatility,     // noise scales the realized price spread; reports mean gain
  forecast_error, // noise corrupts the prices fed to the solver; reports mean loss
};

struct PerturbRow {
  double variance = 0.0;
  double mean_value = 0.0;  // mean gain (volatility) or mean loss (forecast_error)
};

// Monte-Carlo sweep over noise levels. Gaussian zero-mean per-step noise on
// prices, clipped so prices stay nonnegative and sell <= buy.
inline std::vector<PerturbRow> perturbation_sweep(const ArbitrageInstance& base,
                                                  PerturbMode mode,
                                                  const std::vector<double>& sigmas,
                                                  int n_trials, uint64_t seed) {
  require_valid(base);
  if (n_trials < 1) throw std::invalid_argument("n_trials must be >= 1");

  const double ideal = mode == PerturbMode::forecast_error
                           ? solve(base).arbitrage_gain
                           : 0.0;
  std::vector<PerturbRow> rows;
  rows.reserve(sigmas.size());

  for (double sigma : sigmas) {
    std::mt19937_64 rng(seed);  // same stream per level: paired samples
    std::normal_distribution<double> noise(0.0, 1.0);
    double accum = 0.0;
    for (int t = 0; t < n_trials; ++t) {
      ArbitrageInstance perturbed = base;
      for (int i = 0; i < base.n(); ++i) {
        const double e = sigma * noise(rng);
        double& pb = perturbed.tariff.buy[static_cast<size_t>(i)];
        double& ps = perturbed.tariff.sell[static_cast<size_t>(i)];
        pb = std::max(0.0, pb + e);
        ps = std::min(std::max(0.0, ps + e), pb);
      }
      if (mode == PerturbMode::volatility) {
        accum += solve(perturbed).arbitrage_gain;
      } else {
        const Solution plan = solve(perturbed);
        const double realized = no_storage_cost(base) - total_cost(plan.x, base);
        accum += ideal > kTol ? (ideal - realized) / ideal : 0.0;
      }
    }
    rows.push_back({sigma * sigma, accum / n_trials});
  }
  std::sort(rows.begin(), rows.end(), [](const PerturbRow& a, const PerturbRow& b) {
    return a.variance < b.variance;
  });
  return rows;
}

}  // namespace nemarb
