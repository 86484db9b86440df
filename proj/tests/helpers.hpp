#pragma once

#include <random>
#include <vector>

#include "nemarb/model.hpp"

namespace nemarb::testing {

// The 10-hour intermediate-ramp example: equal buy/sell prices in cents/kWh,
// energies in kWh.
inline ArbitrageInstance intermediate_ramp_example() {
  ArbitrageInstance inst;
  const std::vector<double> prices = {1.0, 0.9, 1.5, 0.8, 0.6, 5.0, 4.9, 6.0, 5.0, 8.0};
  inst.grid = TimeGrid::uniform(10, 1.0);
  inst.tariff.buy = prices;
  inst.tariff.sell = prices;
  inst.load.z.assign(10, 0.0);
  inst.battery = {0.1, 3.0, 0.5, -1.0, 1.0, 0.9, 0.9};
  return inst;
}

inline ArbitrageInstance basic_instance(int n, double buy, double sell,
                                        double z_value = 0.0) {
  ArbitrageInstance inst;
  inst.grid = TimeGrid::uniform(n, 1.0);
  inst.tariff = Tariff::flat(n, buy, sell);
  inst.load.z.assign(static_cast<size_t>(n), z_value);
  inst.battery = {0.0, 2.0, 1.0, -1.0, 1.0, 0.9, 0.9};
  return inst;
}

// Random feasible instance in the ranges the oracle-equivalence suite uses.
inline ArbitrageInstance random_instance(std::mt19937_64& rng, int n_min = 3,
                                         int n_max = 48) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> nd(n_min, n_max);
  const int n = nd(rng);

  ArbitrageInstance inst;
  inst.grid = TimeGrid::uniform(n, 1.0);
  inst.tariff.buy.resize(static_cast<size_t>(n));
  inst.tariff.sell.resize(static_cast<size_t>(n));
  inst.load.z.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double pb = 0.01 + 0.49 * u01(rng);
    const double kappa = u01(rng);
    inst.tariff.buy[static_cast<size_t>(i)] = pb;
    inst.tariff.sell[static_cast<size_t>(i)] = kappa * pb;
    inst.load.z[static_cast<size_t>(i)] = -2.0 + 4.0 * u01(rng);
  }
  Battery& b = inst.battery;
  b.b_min = 0.0;
  b.b_max = 0.5 + 4.5 * u01(rng);
  b.b0 = b.b_min + (b.b_max - b.b_min) * u01(rng);
  b.delta_max = 0.1 + 1.9 * u01(rng);
  b.delta_min = -(0.1 + 1.9 * u01(rng));
  b.eta_ch = 0.7 + 0.3 * u01(rng);
  b.eta_dis = 0.7 + 0.3 * u01(rng);
  return inst;
}

}  // namespace nemarb::testing
