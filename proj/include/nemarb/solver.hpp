#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "nemarb/interval.hpp"
#include "nemarb/model.hpp"
#include "nemarb/oracle.hpp"
#include "nemarb/thresholds.hpp"

namespace nemarb {

// Forward-pass violation conditions that terminate envelope propagation.
enum class ViolationKind { none, c1, c2, c3 };

inline const char* to_string(ViolationKind v) {
  switch (v) {
    case ViolationKind::c1: return "C1";
    case ViolationKind::c2: return "C2";
    case ViolationKind::c3: return "C3";
    default: return "none";
  }
}

// Maximal run of steps sharing one multiplier value. Ends with the battery
// pinned at a bound, except possibly the last sub-horizon of the horizon.
struct SubHorizon {
  enum class Terminal { floor, ceiling, free_level };
  int index = 0;       // 1-based K
  int first_step = 0;  // 0-based, inclusive
  int last_step = 0;   // 0-based, inclusive
  double mu = 0.0;
  Terminal terminal = Terminal::free_level;
  double terminal_value = 0.0;  // solved battery level at last_step
};

struct Solution {
  std::vector<double> x;            // battery-side deltas, kWh
  std::vector<double> s;            // meter-side energies, kWh
  std::vector<double> b;            // levels after each step, kWh
  std::vector<double> mu_per_step;  // accumulated multiplier, currency/kWh
  std::vector<SubHorizon> sub_horizons;
  double total_cost = 0.0;
  double arbitrage_gain = 0.0;  // no-storage cost minus total_cost
};

// Tuning diagnostics, one record per sub-horizon.
struct SolveStats {
  struct PerSubHorizon {
    int mu_updates = 0;
    std::vector<double> visited_mu;  // accepted values, in visit order
    long propagated_steps = 0;
    int probe_end = -1;  // furthest step the tuning inspected (0-based)
  };
  std::vector<PerSubHorizon> sub_horizons;
  long total_mu_updates = 0;
};

struct EnvelopeResult {
  // Reachable battery-level sets for steps start_step..last covered, already
  // intersected with [b_min, b_max]. On C1/C2 the violating step is excluded;
  // on C3 the envelope extends through the final step.
  std::vector<Interval> levels;
  int start_step = 0;
  int break_step = -1;  // step where the violation fired; -1 for a clean pass
  ViolationKind violation = ViolationKind::none;

  const Interval& at(int step) const {
    return levels[static_cast<size_t>(step - start_step)];
  }
};

namespace detail {

inline std::vector<ThresholdSet> threshold_cache(const ArbitrageInstance& inst) {
  std::vector<ThresholdSet> out;
  out.reserve(static_cast<size_t>(inst.n()));
  for (int i = 0; i < inst.n(); ++i) out.push_back(thresholds(i, inst));
  return out;
}

}  // namespace detail

// Forward envelope propagation at fixed mu. Walks b-envelope(i) =
// b-envelope(i-1) + x-envelope(i) and stops at the first violation:
//   C1  the whole interval falls below b_min,
//   C2  the whole interval rises above b_max,
//   C3  the final step is reached with mu > 0 and b_min unreachable.
// Between steps the interval is clipped to [b_min, b_max]: only reachable
// levels may seed the next step, and the backward pass intersects with the
// capacity box anyway.
inline EnvelopeResult propagate_envelope(double mu, int start_step,
                                         Interval start_level,
                                         const ArbitrageInstance& inst,
                                         const std::vector<ThresholdSet>& cache) {
  const Battery& bat = inst.battery;
  EnvelopeResult res;
  res.start_step = start_step;
  res.levels.reserve(static_cast<size_t>(std::min(inst.n() - start_step, 64)));

  Interval current = start_level;
  for (int i = start_step; i < inst.n(); ++i) {
    const Interval x_env = x_action_set(cache[static_cast<size_t>(i)], mu, i, inst);
    const Interval raw = current + x_env;
    if (raw.hi < bat.b_min - kTol) {
      res.break_step = i;
      res.violation = ViolationKind::c1;
      return res;
    }
    if (raw.lo > bat.b_max + kTol) {
      res.break_step = i;
      res.violation = ViolationKind::c2;
      return res;
    }
    current = {std::max(raw.lo, bat.b_min), std::min(raw.hi, bat.b_max)};
    res.levels.push_back(current);
    if (i == inst.n() - 1 && mu > kTol && !current.contains(bat.b_min)) {
      res.break_step = i;
      res.violation = ViolationKind::c3;
      return res;
    }
  }
  return res;
}

inline EnvelopeResult propagate_envelope(double mu, int start_step,
                                         Interval start_level,
                                         const ArbitrageInstance& inst) {
  const auto cache = detail::threshold_cache(inst);
  return propagate_envelope(mu, start_step, start_level, inst, cache);
}

// Smallest threshold price strictly above mu among steps [first, last].
inline std::optional<double> next_mu_up(double mu, int first, int last,
                                        const ArbitrageInstance& inst,
                                        const std::vector<ThresholdSet>& cache) {
  std::optional<double> best;
  for (int i = std::max(0, first); i <= std::min(last, inst.n() - 1); ++i) {
    const ThresholdSet& t = cache[static_cast<size_t>(i)];
    for (double p : {t.mu1, t.mu2, t.mu3, t.mu4})
      if (p > mu + kTol && (!best || p < *best)) best = p;
  }
  return best;
}

// Largest threshold price strictly below mu among steps [first, last].
inline std::optional<double> next_mu_down(double mu, int first, int last,
                                          const ArbitrageInstance& inst,
                                          const std::vector<ThresholdSet>& cache) {
  std::optional<double> best;
  for (int i = std::max(0, first); i <= std::min(last, inst.n() - 1); ++i) {
    const ThresholdSet& t = cache[static_cast<size_t>(i)];
    for (double p : {t.mu1, t.mu2, t.mu3, t.mu4})
      if (p < mu - kTol && (!best || p > *best)) best = p;
  }
  return best;
}

inline std::optional<double> next_mu_up(double mu, int first, int last,
                                        const ArbitrageInstance& inst) {
  return next_mu_up(mu, first, last, inst, detail::threshold_cache(inst));
}

inline std::optional<double> next_mu_down(double mu, int first, int last,
                                          const ArbitrageInstance& inst) {
  return next_mu_down(mu, first, last, inst, detail::threshold_cache(inst));
}

// Backward resolution of one sub-horizon [first, last] with the terminal
// level fixed. Each feasible set
//   F_i = (b*_{i+1} - x-envelope_{i+1}) ^ b-envelope(i) ^ [b_min, b_max]
// is guaranteed non-empty; the maximum is chosen for determinism. Writes
// b[first..last] and x[first..last]; x_first is taken against start_level.
inline void backward_step(double mu, int first, int last, double start_level,
                          double terminal_b, const EnvelopeResult& env,
                          const ArbitrageInstance& inst,
                          const std::vector<ThresholdSet>& cache,
                          std::vector<double>& b, std::vector<double>& x) {
  const Battery& bat = inst.battery;
  b[static_cast<size_t>(last)] = terminal_b;
  for (int i = last - 1; i >= first; --i) {
    const Interval x_next = x_action_set(cache[static_cast<size_t>(i + 1)], mu, i + 1, inst);
    const Interval pre = b[static_cast<size_t>(i + 1)] - x_next;
    auto feasible = intersect(pre, env.at(i));
    if (feasible)
      feasible = intersect(*feasible, Interval{bat.b_min, bat.b_max});
    require(feasible.has_value(), "empty feasible set in backward step");
    b[static_cast<size_t>(i)] = feasible->hi;
  }
  for (int i = first; i <= last; ++i) {
    const double prev = i == first ? start_level : b[static_cast<size_t>(i - 1)];
    x[static_cast<size_t>(i)] = b[static_cast<size_t>(i)] - prev;
  }
}

namespace detail {

struct PinChoice {
  int step = -1;
  bool at_ceiling = false;  // true: b_max, false: b_min
};

// Latest step whose reachable envelope (at the reverted mu) touches the
// designated capacity bound. Which bound is designated follows from the
// violation that was standing when mu was memorized: a C1 break (the envelope
// eventually dives below the floor) means the sub-horizon serves heavy
// selling further out and must end full, so the ceiling is pinned; a C2 or C3
// break means the opposite and pins the floor.
inline PinChoice find_pin(const EnvelopeResult& env,
                          const ArbitrageInstance& inst,
                          ViolationKind memorized_violation) {
  const Battery& bat = inst.battery;
  PinChoice pin;
  pin.at_ceiling = memorized_violation == ViolationKind::c1;
  const double bound = pin.at_ceiling ? bat.b_max : bat.b_min;
  const int last = env.start_step + static_cast<int>(env.levels.size()) - 1;
  for (int i = last; i >= env.start_step; --i) {
    if (env.at(i).contains(bound)) {
      pin.step = i;
      return pin;
    }
  }
  return pin;
}

}  // namespace detail

// Optimal arbitrage schedule: discovers sub-horizons by tuning the
// accumulated multiplier over the discrete threshold prices, then resolves
// each sub-horizon backwards from its pinned terminal level. update_cap
// bounds the tuning iterations per sub-horizon (0 selects the default 8N);
// exceeding it means an internal error, since validation guarantees
// feasibility.
inline Solution solve(const ArbitrageInstance& inst, SolveStats* stats = nullptr,
                      int update_cap = 0) {
  require_valid(inst);
  const int n = inst.n();
  const Battery& bat = inst.battery;
  const auto cache = detail::threshold_cache(inst);

  Solution sol;
  sol.x.assign(static_cast<size_t>(n), 0.0);
  sol.b.assign(static_cast<size_t>(n), 0.0);
  sol.s.assign(static_cast<size_t>(n), 0.0);
  sol.mu_per_step.assign(static_cast<size_t>(n), 0.0);
  if (stats) *stats = {};

  int prev_end = -1;          // last resolved step
  double start_level = bat.b0;
  double mu = 0.0;            // first guess; later sub-horizons reuse mu_K-1
  if (update_cap <= 0) update_cap = 8 * n;

  while (prev_end < n - 1) {
    const int first = prev_end + 1;
    SolveStats::PerSubHorizon sh_stats;
    sh_stats.visited_mu.push_back(mu);

    int i_mem = prev_end;  // progress baseline: any break counts first time
    double mu_mem = mu;
    ViolationKind v_mem = ViolationKind::none;
    bool done = false;

    while (!done) {
      const EnvelopeResult env =
          propagate_envelope(mu, first, Interval::point(start_level), inst, cache);
      sh_stats.propagated_steps +=
          static_cast<long>(env.levels.size()) + (env.break_step >= 0 ? 1 : 0);
      sh_stats.probe_end = std::max(
          sh_stats.probe_end,
          env.break_step >= 0 ? env.break_step
                              : first + static_cast<int>(env.levels.size()) - 1);

      if (env.violation == ViolationKind::none) {
        // Clean pass to the end: this is the last sub-horizon. Terminal rule:
        // mu > 0 forces b_N = b_min, otherwise any reachable level is
        // cost-optimal and the maximum is taken.
        SubHorizon sh;
        sh.index = static_cast<int>(sol.sub_horizons.size()) + 1;
        sh.first_step = first;
        sh.last_step = n - 1;
        sh.mu = mu;
        if (mu > kTol) {
          sh.terminal = SubHorizon::Terminal::floor;
          sh.terminal_value = bat.b_min;
        } else {
          sh.terminal = SubHorizon::Terminal::free_level;
          sh.terminal_value = std::min(env.at(n - 1).hi, bat.b_max);
        }
        backward_step(mu, first, n - 1, start_level, sh.terminal_value, env,
                      inst, cache, sol.b, sol.x);
        std::fill(sol.mu_per_step.begin() + first, sol.mu_per_step.end(), mu);
        sol.sub_horizons.push_back(sh);
        prev_end = n - 1;
        done = true;
        break;
      }

      if (env.break_step >= i_mem) {
        // Progress (or a repeat of the frontier): memorize and keep tuning.
        i_mem = env.break_step;
        mu_mem = mu;
        v_mem = env.violation;
        auto next = env.violation == ViolationKind::c1
                        ? next_mu_up(mu, first, env.break_step, inst, cache)
                        : next_mu_down(mu, first, env.break_step, inst, cache);
        if (!next && env.violation != ViolationKind::c1 && mu > kTol) {
          // No threshold price left below mu. Zero is still admissible: it
          // keeps every window step in the same region and lifts the
          // terminal-multiplier condition.
          next = 0.0;
        }
        require(next.has_value(), "multiplier candidates exhausted");
        mu = *next;
        ++sh_stats.mu_updates;
        sh_stats.visited_mu.push_back(mu);
        require(sh_stats.mu_updates <= update_cap, "mu update cap exceeded");
        continue;
      }

      // The frontier moved backwards: mu_mem was the best value for this
      // sub-horizon. Re-propagate at mu_mem and pin the bound the memorized
      // violation designates, at its latest touch.
      mu = mu_mem;
      const EnvelopeResult best_env =
          propagate_envelope(mu, first, Interval::point(start_level), inst, cache);
      const detail::PinChoice pin = detail::find_pin(best_env, inst, v_mem);
      require(pin.step >= 0, "no bound touch in regressed sub-horizon");

      SubHorizon sh;
      sh.index = static_cast<int>(sol.sub_horizons.size()) + 1;
      sh.first_step = first;
      sh.last_step = pin.step;
      sh.mu = mu;
      sh.terminal = pin.at_ceiling ? SubHorizon::Terminal::ceiling
                                   : SubHorizon::Terminal::floor;
      sh.terminal_value = pin.at_ceiling ? bat.b_max : bat.b_min;
      backward_step(mu, first, pin.step, start_level, sh.terminal_value,
                    best_env, inst, cache, sol.b, sol.x);
      std::fill(sol.mu_per_step.begin() + first,
                sol.mu_per_step.begin() + pin.step + 1, mu);
      sol.sub_horizons.push_back(sh);

      start_level = sh.terminal_value;
      prev_end = pin.step;
      done = true;  // next sub-horizon starts with guess mu_K = mu
    }

    if (stats) {
      stats->sub_horizons.push_back(std::move(sh_stats));
      stats->total_mu_updates += stats->sub_horizons.back().mu_updates;
    }
  }

  for (int i = 0; i < n; ++i)
    sol.s[static_cast<size_t>(i)] = storage_output(sol.x[static_cast<size_t>(i)], bat);
  sol.total_cost = total_cost(sol.x, inst);
  sol.arbitrage_gain = no_storage_cost(inst) - sol.total_cost;
  return sol;
}

// Optimality certificate: checks the five conditions a solution tuple must
// satisfy. Empty result means the schedule is provably optimal (within
// tolerance); anything else lists the violated conditions.
inline std::vector<std::string> verify_certificate(const Solution& sol,
                                                   const ArbitrageInstance& inst,
                                                   int grid_points = 1000) {
  std::vector<std::string> out;
  const int n = inst.n();
  const Battery& bat = inst.battery;
  const auto fail = [&](int step, const std::string& what) {
    out.push_back("step " + std::to_string(step) + ": " + what);
  };

  if (static_cast<int>(sol.x.size()) != n || static_cast<int>(sol.b.size()) != n ||
      static_cast<int>(sol.s.size()) != n ||
      static_cast<int>(sol.mu_per_step.size()) != n) {
    out.push_back("solution vectors do not match the horizon length");
    return out;
  }

  // Condition 1+2: consistency of s with x and primal feasibility.
  for (int i = 0; i < n; ++i) {
    const double x = sol.x[static_cast<size_t>(i)];
    if (std::abs(sol.s[static_cast<size_t>(i)] - storage_output(x, bat)) > kTol)
      fail(i, "s != f(x)");
    const double prev = i == 0 ? bat.b0 : sol.b[static_cast<size_t>(i - 1)];
    if (std::abs(sol.b[static_cast<size_t>(i)] - (prev + x)) > kTol)
      fail(i, "level recursion violated");
    if (sol.b[static_cast<size_t>(i)] < bat.b_min - kTol ||
        sol.b[static_cast<size_t>(i)] > bat.b_max + kTol)
      fail(i, "level outside capacity");
    if (x < inst.x_min(i) - kTol || x > inst.x_max(i) + kTol)
      fail(i, "ramp bound violated");
  }

  // Condition 3: each x_i minimizes C_i(x) - mu_i x. The candidate set walks
  // a uniform s-grid plus the exact kinks, where a piecewise-linear minimum
  // must sit.
  for (int i = 0; i < n; ++i) {
    const double mu = sol.mu_per_step[static_cast<size_t>(i)];
    const double lo = inst.s_min(i), hi = inst.s_max(i);
    double best = std::numeric_limits<double>::infinity();
    const auto probe = [&](double s_cand) {
      const double x_cand = storage_input(s_cand, bat);
      best = std::min(best, step_cost(i, x_cand, inst) - mu * x_cand);
    };
    for (int k = 0; k < grid_points; ++k)
      probe(lo + (hi - lo) * k / std::max(1, grid_points - 1));
    probe(0.0);
    probe(std::clamp(-inst.z(i), lo, hi));
    probe(lo);
    probe(hi);
    const double mine =
        step_cost(i, sol.x[static_cast<size_t>(i)], inst) - mu * sol.x[static_cast<size_t>(i)];
    if (mine > best + 1e-9) fail(i, "action does not minimize C - mu x");
  }

  // Condition 4: mu may change across a step boundary only at a pinned level,
  // downwards at the floor and upwards at the ceiling.
  for (int i = 0; i + 1 < n; ++i) {
    const double level = sol.b[static_cast<size_t>(i)];
    const double cur = sol.mu_per_step[static_cast<size_t>(i)];
    const double nxt = sol.mu_per_step[static_cast<size_t>(i + 1)];
    const bool at_floor = std::abs(level - bat.b_min) <= kTol;
    const bool at_ceiling = std::abs(level - bat.b_max) <= kTol;
    if (!at_floor && !at_ceiling) {
      if (std::abs(nxt - cur) > kTol) fail(i, "mu changed at an interior level");
    } else {
      if (at_floor && !at_ceiling && nxt > cur + kTol)
        fail(i, "mu increased across a floor pin");
      if (at_ceiling && !at_floor && nxt < cur - kTol)
        fail(i, "mu decreased across a ceiling pin");
    }
  }

  // Condition 5: terminal multiplier.
  {
    const double level = sol.b[static_cast<size_t>(n - 1)];
    const double mu_n = sol.mu_per_step[static_cast<size_t>(n - 1)];
    const bool at_floor = std::abs(level - bat.b_min) <= kTol;
    const bool at_ceiling = std::abs(level - bat.b_max) <= kTol;
    if (!at_floor && !at_ceiling && std::abs(mu_n) > kTol)
      fail(n - 1, "terminal mu nonzero at an interior level");
    if (at_floor && !at_ceiling && mu_n < -kTol)
      fail(n - 1, "terminal mu negative at the floor");
    if (at_ceiling && !at_floor && mu_n > kTol)
      fail(n - 1, "terminal mu positive at the ceiling");
  }

  return out;
}

// Solver-versus-oracle report for one instance.
inline CompareReport compare(const ArbitrageInstance& inst, const DpConfig& cfg) {
  const double solver_cost = solve(inst).total_cost;
  const double dp_cost = dp_solve(inst, cfg).total_cost;
  return make_compare_report(solver_cost, dp_cost, cfg.resolved_tolerance(inst));
}

}  // namespace nemarb
