#pragma once

#include <algorithm>
#include <cmath>

#include "nemarb/interval.hpp"
#include "nemarb/model.hpp"

namespace nemarb {

// The four multiplier prices that partition the mu axis into nine regions:
//   mu1 = eta_dis * sell   effective discharging value under the sell price
//   mu2 = sell / eta_ch    effective charging cost under the sell price
//   mu3 = eta_dis * buy    effective discharging value under the buy price
//   mu4 = buy / eta_ch     effective charging cost under the buy price
// zeta = kappa / (eta_ch * eta_dis) decides whether mu2 or mu3 comes first.
struct ThresholdSet {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double mu3 = 0.0;
  double mu4 = 0.0;
  double zeta = 0.0;
};

inline ThresholdSet make_thresholds(double buy, double sell, double eta_ch,
                                    double eta_dis) {
  ThresholdSet t;
  t.mu1 = eta_dis * sell;
  t.mu2 = sell / eta_ch;
  t.mu3 = eta_dis * buy;
  t.mu4 = buy / eta_ch;
  const double kappa = buy <= 0.0 ? 1.0 : sell / buy;
  t.zeta = kappa / (eta_ch * eta_dis);
  return t;
}

inline ThresholdSet thresholds(int i, const ArbitrageInstance& inst) {
  inst.check_index(i);
  return make_thresholds(inst.buy(i), inst.sell(i), inst.battery.eta_ch,
                         inst.battery.eta_dis);
}

// Set-valued optimal meter-side action s*(mu) for one step.
//
// The nine regions reduce to five candidate levels separated by the sorted
// thresholds [mu1, mu2^mu3, mu2vmu3, mu4]:
//   s_min | discharge-to-cover-load | mid | charge-to-absorb-surplus | s_max
// where mid is the full load-matching level when zeta < 1 and idle otherwise.
// Strictly between thresholds the action is the singleton level; within
// tolerance of a threshold it is the bridging interval, and coincident
// thresholds merge into the hull of their bridges. All levels are sorted, so
// the map is monotone non-decreasing in mu by construction.
inline Interval action_set_core(const ThresholdSet& t, double mu, double z,
                                double s_min, double s_max) {
  const double dis = std::min(0.0, std::max(-z, s_min));
  const double ch = std::max(0.0, std::min(-z, s_max));
  const double mid = (t.mu2 < t.mu3 - kTol) ? dis + ch : 0.0;
  const double level[5] = {s_min, dis, mid, ch, s_max};
  const double thr[4] = {t.mu1, std::min(t.mu2, t.mu3), std::max(t.mu2, t.mu3),
                         t.mu4};

  int first = -1, last = -1;
  for (int k = 0; k < 4; ++k) {
    if (std::abs(mu - thr[k]) <= kTol) {
      if (first < 0) first = k;
      last = k;
    }
  }
  if (first >= 0) return {level[first], level[last + 1]};

  int below = 0;
  for (int k = 0; k < 4; ++k)
    if (thr[k] < mu) ++below;
  return Interval::point(level[below]);
}

inline Interval action_set(double mu, int i, const ArbitrageInstance& inst) {
  inst.check_index(i);
  return action_set_core(thresholds(i, inst), mu, inst.z(i), inst.s_min(i),
                         inst.s_max(i));
}

// Equal buy/sell specialization (five cases, independent of the net load).
// Kept as a separate code path so the general map can be cross-checked
// against it.
inline Interval action_set_nem1(double mu, int i, const ArbitrageInstance& inst) {
  inst.check_index(i);
  if (std::abs(inst.tariff.kappa(i) - 1.0) > kTol)
    throw std::invalid_argument("action_set_nem1 requires kappa == 1");
  const double price = inst.buy(i);
  const double mu1 = inst.battery.eta_dis * price;
  const double mu4 = price / inst.battery.eta_ch;
  const double s_min = inst.s_min(i), s_max = inst.s_max(i);

  const bool at1 = std::abs(mu - mu1) <= kTol;
  const bool at4 = std::abs(mu - mu4) <= kTol;
  if (at1 && at4) return {s_min, s_max};  // lossless: both thresholds collapse
  if (at1) return {s_min, 0.0};
  if (at4) return {0.0, s_max};
  if (mu < mu1) return Interval::point(s_min);
  if (mu > mu4) return Interval::point(s_max);
  return Interval::point(0.0);
}

// Image of the action set in battery-side x, clipped to the ramp bounds.
inline Interval x_action_set(const ThresholdSet& t, double mu, int i,
                             const ArbitrageInstance& inst) {
  const Interval s = action_set_core(t, mu, inst.z(i), inst.s_min(i), inst.s_max(i));
  Interval x{storage_input(s.lo, inst.battery), storage_input(s.hi, inst.battery)};
  x.lo = std::max(x.lo, inst.x_min(i));
  x.hi = std::min(x.hi, inst.x_max(i));
  if (x.lo > x.hi) x.lo = x.hi = 0.5 * (x.lo + x.hi);
  return x;
}

}  // namespace nemarb
