#pragma once

#include <cmath>
#include <vector>

#include "nemarb/common.hpp"

namespace nemarb {

// Fixed-order residual model: three step-lag coefficients (alpha) and three
// day-lag coefficients (beta) on the deviations from the rolling daily mean.
struct ArmaParams {
  double alpha[3] = {0.0, 0.0, 0.0};
  double beta[3] = {0.0, 0.0, 0.0};
  int days_window = 3;    // D, days in the rolling mean
  int steps_per_day = 24; // N of the daily cycle
};

// Realized net-load history plus the derived daily-mean profile and
// residuals. Indices are absolute positions in the ongoing series.
class ForecastState {
 public:
  ForecastState(std::vector<double> seed_history, int days_window,
                int steps_per_day)
      : history_(std::move(seed_history)),
        days_window_(days_window),
        steps_per_day_(steps_per_day) {
    if (days_window_ < 1 || steps_per_day_ < 1)
      throw std::invalid_argument("days_window and steps_per_day must be positive");
  }

  int size() const { return static_cast<int>(history_.size()); }
  int days_window() const { return days_window_; }
  int steps_per_day() const { return steps_per_day_; }
  double z(int k) const { return history_[static_cast<size_t>(k)]; }

  // Steps of history a residual at index k requires: D same-slot day lags.
  int min_index() const { return days_window_ * steps_per_day_; }
  bool has_residual(int k) const { return k >= min_index() && k < size(); }

  // Rolling daily mean at absolute index k (k may point one day past the
  // realized history; all lags k - p*N are then still realized).
  double mean_at(int k) const {
    if (k < min_index())
      throw insufficient_history("daily mean needs days_window full days");
    double sum = 0.0;
    for (int p = 1; p <= days_window_; ++p)
      sum += history_[static_cast<size_t>(k - p * steps_per_day_)];
    return sum / days_window_;
  }

  // Realized deviation from the mean, X_k = z_k - mean_k.
  double residual_at(int k) const {
    if (!has_residual(k))
      throw insufficient_history("residual index outside realized history");
    return history_[static_cast<size_t>(k)] - mean_at(k);
  }

  // Mean profile for the current day frame, one entry per slot.
  std::vector<double> mean_profile() const {
    if (size() < min_index())
      throw insufficient_history("mean profile needs days_window full days");
    std::vector<double> out(static_cast<size_t>(steps_per_day_));
    const int day_start = (size() / steps_per_day_) * steps_per_day_;
    for (int s = 0; s < steps_per_day_; ++s) {
      double sum = 0.0;
      for (int p = 1; p <= days_window_; ++p)
        sum += history_[static_cast<size_t>(day_start - p * steps_per_day_ + s)];
      out[static_cast<size_t>(s)] = sum / days_window_;
    }
    return out;
  }

  // Appends a realized value and computes its residual. Rejects while the
  // history is shorter than the mean window.
  void update_history(double z_k) {
    if (size() < min_index())
      throw insufficient_history("update_history before days_window full days");
    history_.push_back(z_k);
  }

 private:
  std::vector<double> history_;
  int days_window_;
  int steps_per_day_;
};

// Forecast z over absolute steps [from_step, to_step]. from_step must be the
// first unrealized index. Residual lags before from_step use realized values;
// later ones substitute the forecasts produced earlier in the same pass. The
// same substitution applies to day-lagged deviations when the horizon crosses
// into territory where they are unrealized.
inline std::vector<double> forecast_horizon(const ForecastState& state,
                                            const ArmaParams& params,
                                            int from_step, int to_step) {
  if (params.days_window != state.days_window() ||
      params.steps_per_day != state.steps_per_day())
    throw std::invalid_argument("params do not match the forecast state");
  if (from_step != state.size())
    throw std::invalid_argument("forecast must start at the first unrealized step");
  const int need = state.min_index() + 3;
  if (from_step < need)
    throw insufficient_history("forecast needs days_window days plus 3 steps");
  if (to_step < from_step) return {};

  const int n_day = params.steps_per_day;
  std::vector<double> xhat(static_cast<size_t>(to_step - from_step + 1));
  std::vector<double> zhat(xhat.size());

  // Deviation at lag index j: realized when j < from_step, else the forecast
  // from this pass.
  const auto deviation = [&](int j) {
    if (j < from_step) return state.residual_at(j);
    return xhat[static_cast<size_t>(j - from_step)];
  };
  // Mean at index j, substituting forecast values for unrealized day lags.
  const auto mean = [&](int j) {
    double sum = 0.0;
    for (int p = 1; p <= params.days_window; ++p) {
      const int lag = j - p * n_day;
      sum += lag < from_step ? state.z(lag) : zhat[static_cast<size_t>(lag - from_step)];
    }
    return sum / params.days_window;
  };

  for (int i = from_step; i <= to_step; ++i) {
    double value = 0.0;
    for (int m = 0; m < 3; ++m) value += params.alpha[m] * deviation(i - 1 - m);
    for (int q = 0; q < 3; ++q) {
      const int lag = i - (q + 1) * n_day;
      double day_dev = 0.0;  // deviations older than the mean window read as 0
      if (lag >= from_step)
        day_dev = xhat[static_cast<size_t>(lag - from_step)];
      else if (lag >= state.min_index())
        day_dev = state.residual_at(lag);
      value += params.beta[q] * day_dev;
    }
    xhat[static_cast<size_t>(i - from_step)] = value;
    zhat[static_cast<size_t>(i - from_step)] = mean(i) + value;
  }
  return zhat;
}

}  // namespace nemarb
