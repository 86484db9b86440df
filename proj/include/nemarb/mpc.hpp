#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "nemarb/forecast.hpp"
#include "nemarb/solver.hpp"

namespace nemarb {

// Net-load predictor driven step by step by the controller.
class Forecaster {
 public:
  virtual ~Forecaster() = default;
  // Predicted z for steps [from, to] of the controlled series. Called before
  // the value at `from` is realized.
  virtual std::vector<double> forecast(int from, int to) = 0;
  // Realized value of the step just executed.
  virtual void observe(double z) = 0;
};

// Oracle predictor; turns the controller into the offline problem re-solved
// step by step.
class PerfectForecaster : public Forecaster {
 public:
  explicit PerfectForecaster(std::vector<double> truth) : truth_(std::move(truth)) {}
  std::vector<double> forecast(int from, int to) override {
    return {truth_.begin() + from, truth_.begin() + to + 1};
  }
  void observe(double) override {}

 private:
  std::vector<double> truth_;
};

// Residual-model predictor. The seed history establishes the daily mean
// before the controlled series begins.
class ArmaForecaster : public Forecaster {
 public:
  ArmaForecaster(std::vector<double> seed_history, ArmaParams params)
      : state_(std::move(seed_history), params.days_window, params.steps_per_day),
        params_(params),
        offset_(state_.size()) {}

  std::vector<double> forecast(int from, int to) override {
    return forecast_horizon(state_, params_, offset_ + from, offset_ + to);
  }
  void observe(double z) override { state_.update_history(z); }

 private:
  ForecastState state_;
  ArmaParams params_;
  int offset_;
};

struct MpcConfig {
  int window_steps = 24;  // horizon windows end on multiples of this
};

struct MpcRun {
  std::vector<double> realized_actions;  // committed x per step
  std::vector<double> realized_levels;   // battery level after each step
  double realized_gain = 0.0;            // V_r, against realized prices/loads
  double ideal_gain = 0.0;               // V_a*, full-information optimum
  double loss_of_opportunity = 0.0;      // (V_a* - V_r) / V_a* when V_a* > 0
};

// Full-information arbitrage gain of an instance.
inline double ideal_gain(const ArbitrageInstance& inst) {
  return solve(inst).arbitrage_gain;
}

// Rolling-horizon controller: at each step, forecast the net load to the end
// of the current window (prices are given day-ahead), solve, commit only the
// first action, advance the battery, feed the realized value back. Gains are
// always accounted against realized prices and loads.
inline MpcRun run_mpc(const ArbitrageInstance& truth, Forecaster& forecaster,
                      const MpcConfig& cfg = {}) {
  require_valid(truth);
  if (cfg.window_steps < 1) throw std::invalid_argument("window_steps must be positive");
  const int n = truth.n();

  MpcRun run;
  run.realized_actions.reserve(static_cast<size_t>(n));
  run.realized_levels.reserve(static_cast<size_t>(n));

  double level = truth.battery.b0;
  for (int i = 0; i < n; ++i) {
    const int horizon_end =
        std::min(n - 1, (i / cfg.window_steps + 1) * cfg.window_steps - 1);
    const std::vector<double> zhat = forecaster.forecast(i, horizon_end);

    ArbitrageInstance window;
    const auto b = static_cast<size_t>(i);
    const auto e = static_cast<size_t>(horizon_end) + 1;
    window.grid.n_steps = horizon_end - i + 1;
    window.grid.step_hours.assign(truth.grid.step_hours.begin() + b,
                                  truth.grid.step_hours.begin() + e);
    for (double h : window.grid.step_hours) window.grid.total_hours += h;
    window.tariff.buy.assign(truth.tariff.buy.begin() + b, truth.tariff.buy.begin() + e);
    window.tariff.sell.assign(truth.tariff.sell.begin() + b, truth.tariff.sell.begin() + e);
    window.load.z = zhat;
    window.battery = truth.battery;
    window.battery.b0 = level;

    const Solution plan = solve(window);
    const double x = plan.x.front();
    level += x;
    run.realized_actions.push_back(x);
    run.realized_levels.push_back(level);
    forecaster.observe(truth.z(i));
  }

  run.realized_gain = no_storage_cost(truth) - total_cost(run.realized_actions, truth);
  run.ideal_gain = ideal_gain(truth);
  run.loss_of_opportunity =
      run.ideal_gain > kTol ? (run.ideal_gain - run.realized_gain) / run.ideal_gain
                            : 0.0;
  return run;
}

}  // namespace nemarb
