#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "nemarb/model.hpp"

namespace nemarb {

// Brute-force reference optimum via value iteration on a discretized battery
// level grid. Ground truth for optimality claims; deliberately independent of
// the threshold solver.
struct DpConfig {
  int grid_points = 2001;   // battery-level discretization M
  double tolerance = -1.0;  // acceptance slack; < 0 selects the default bound
  // When set, only final levels within half a grid spacing of this value are
  // admitted (the free terminal otherwise).
  std::optional<double> terminal_level;

  // Default slack: 2 N db max(buy) / min(eta), db the grid spacing. Bounds
  // the cost excess a grid-restricted trajectory can accumulate. Floored at
  // the global comparison tolerance so degenerate grids still admit
  // summation-order rounding.
  static double default_tolerance(const ArbitrageInstance& inst, int grid_points) {
    const double range = inst.battery.b_max - inst.battery.b_min;
    const double db = grid_points > 1 ? range / (grid_points - 1) : 0.0;
    double pmax = 0.0;
    for (double p : inst.tariff.buy) pmax = std::max(pmax, p);
    const double eta = std::min(inst.battery.eta_ch, inst.battery.eta_dis);
    return std::max(2.0 * inst.n() * db * pmax / eta, kTol);
  }

  double resolved_tolerance(const ArbitrageInstance& inst) const {
    return tolerance >= 0.0 ? tolerance : default_tolerance(inst, grid_points);
  }
};

struct DpResult {
  double total_cost = 0.0;
  std::vector<double> trajectory;  // grid levels b_1..b_N; empty when too large
};

namespace detail {

// Minimize value(k) over the integer window [lo, hi]; value must be unimodal
// (convex). Returns the arg min.
template <typename F>
int unimodal_argmin(int lo, int hi, F&& value) {
  while (hi - lo > 2) {
    const int m1 = lo + (hi - lo) / 3;
    const int m2 = hi - (hi - lo) / 3;
    const double v1 = value(m1), v2 = value(m2);
    if (v1 < v2) {
      hi = m2 - 1;
    } else if (v2 < v1) {
      lo = m1 + 1;
    } else {
      lo = m1;
      hi = m2;
    }
  }
  int best = lo;
  double best_v = value(lo);
  for (int k = lo + 1; k <= hi; ++k) {
    const double v = value(k);
    if (v < best_v) {
      best_v = v;
      best = k;
    }
  }
  return best;
}

}  // namespace detail

// Backward value iteration over levels {b_min + k db} plus the exact initial
// level b0 as an extra state. Transition cost uses the exact continuous x
// between levels, so only the state discretization contributes error. The
// stage objective is convex in the target level (convex stage cost plus a
// convex value function), which the inner search exploits; set
// exhaustive_scan to disable that and scan every transition.
inline DpResult dp_solve(const ArbitrageInstance& inst, const DpConfig& cfg,
                         bool exhaustive_scan = false) {
  require_valid(inst);
  const int n = inst.n();
  const Battery& bat = inst.battery;
  const double range = bat.b_max - bat.b_min;
  const int m = range <= kTol ? 1 : std::max(2, cfg.grid_points);
  const double db = m > 1 ? range / (m - 1) : 0.0;

  // Level set: m grid points, then b0 as index m.
  std::vector<double> levels(static_cast<size_t>(m) + 1);
  for (int k = 0; k < m; ++k) levels[static_cast<size_t>(k)] = bat.b_min + k * db;
  levels[static_cast<size_t>(m)] = bat.b0;

  const size_t n_states = levels.size();
  const bool keep_stages =
      static_cast<double>(n) * static_cast<double>(n_states) <= 5e7;

  std::vector<std::vector<double>> stage_values;  // stage_values[i] = V_{i}
  if (keep_stages) stage_values.assign(static_cast<size_t>(n) + 1, {});

  std::vector<double> value_next(n_states, 0.0);  // terminal value is zero
  std::vector<double> value_cur(n_states, 0.0);
  if (cfg.terminal_level) {
    const double half = db > 0.0 ? 0.5 * db : kTol;
    for (size_t j = 0; j < n_states; ++j)
      if (std::abs(levels[j] - *cfg.terminal_level) > half + kTol)
        value_next[j] = std::numeric_limits<double>::infinity();
  }
  if (keep_stages) stage_values[static_cast<size_t>(n)] = value_next;

  const auto window = [&](double src, int i, int& klo, int& khi) {
    const double lo = src + inst.x_min(i);
    const double hi = src + inst.x_max(i);
    klo = m > 1 ? static_cast<int>(std::ceil((lo - bat.b_min) / db - 1e-12)) : 0;
    khi = m > 1 ? static_cast<int>(std::floor((hi - bat.b_min) / db + 1e-12)) : 0;
    klo = std::max(klo, 0);
    khi = std::min(khi, m - 1);
    if (m == 1) {
      const bool ok = bat.b_min >= lo - 1e-12 && bat.b_min <= hi + 1e-12;
      klo = ok ? 0 : 1;
      khi = ok ? 0 : 0;
    }
  };

  // A pinned terminal seeds infinities that persist through every stage's
  // value function, so the unimodal search cannot be trusted anywhere.
  const bool scan = exhaustive_scan || cfg.terminal_level.has_value();
  for (int i = n - 1; i >= 0; --i) {
    for (size_t j = 0; j < n_states; ++j) {
      const double src = levels[j];
      const auto transition = [&](int k) {
        return step_cost(i, levels[static_cast<size_t>(k)] - src, inst) +
               value_next[static_cast<size_t>(k)];
      };
      int klo, khi;
      window(src, i, klo, khi);
      double best = std::numeric_limits<double>::infinity();
      if (klo <= khi) {
        if (scan) {
          for (int k = klo; k <= khi; ++k) best = std::min(best, transition(k));
        } else {
          best = transition(detail::unimodal_argmin(klo, khi, transition));
        }
      }
      // b0 itself is always a candidate target when reachable; x = 0 keeps
      // zero-ramp batteries feasible off-grid.
      const double x_stay = bat.b0 - src;
      if (x_stay >= inst.x_min(i) - 1e-12 && x_stay <= inst.x_max(i) + 1e-12)
        best = std::min(best, step_cost(i, x_stay, inst) + value_next[n_states - 1]);
      value_cur[j] = best;
    }
    value_next.swap(value_cur);
    if (keep_stages) stage_values[static_cast<size_t>(i)] = value_next;
  }

  DpResult out;
  out.total_cost = value_next[n_states - 1];  // start state is b0

  if (keep_stages) {
    out.trajectory.reserve(static_cast<size_t>(n));
    double src = bat.b0;
    for (int i = 0; i < n; ++i) {
      const auto& v_next = stage_values[static_cast<size_t>(i) + 1];
      int klo, khi;
      window(src, i, klo, khi);
      double best = std::numeric_limits<double>::infinity();
      double best_level = src;
      for (int k = klo; k <= khi; ++k) {
        const double v = step_cost(i, levels[static_cast<size_t>(k)] - src, inst) +
                         v_next[static_cast<size_t>(k)];
        if (v < best) {
          best = v;
          best_level = levels[static_cast<size_t>(k)];
        }
      }
      const double x_stay = bat.b0 - src;
      if (x_stay >= inst.x_min(i) - 1e-12 && x_stay <= inst.x_max(i) + 1e-12) {
        const double v = step_cost(i, x_stay, inst) + v_next[n_states - 1];
        if (v < best) {
          best = v;
          best_level = bat.b0;
        }
      }
      out.trajectory.push_back(best_level);
      src = best_level;
    }
  }
  return out;
}

struct CompareReport {
  double solver_cost = 0.0;
  double dp_cost = 0.0;
  double gap = 0.0;  // solver_cost - dp_cost
  bool pass = false;
};

// The solver must never exceed the grid optimum (the strict direction), and
// the grid optimum may exceed the solver only by the discretization slack.
inline CompareReport make_compare_report(double solver_cost, double dp_cost,
                                         double tolerance) {
  CompareReport r;
  r.solver_cost = solver_cost;
  r.dp_cost = dp_cost;
  r.gap = solver_cost - dp_cost;
  r.pass = solver_cost <= dp_cost + 1e-9 && dp_cost <= solver_cost + tolerance;
  return r;
}

}  // namespace nemarb
