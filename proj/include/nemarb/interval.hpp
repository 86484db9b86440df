#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "nemarb/common.hpp"

namespace nemarb {

// Closed real interval [lo, hi]. Carrier for set-valued storage actions and
// battery-level envelopes. A singleton has lo == hi.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  static Interval point(double v) { return {v, v}; }

  double width() const { return hi - lo; }
  bool is_point(double tol = kTol) const { return hi - lo <= tol; }
  bool contains(double v, double tol = kTol) const {
    return v >= lo - tol && v <= hi + tol;
  }
  double clamp(double v) const { return std::min(hi, std::max(lo, v)); }
};

// Interval addition: [a,b] + [c,d] = [a+c, b+d].
inline Interval operator+(const Interval& a, const Interval& b) {
  return {a.lo + b.lo, a.hi + b.hi};
}

// Point minus interval: v - [c,d] = [v-d, v-c].
inline Interval operator-(double v, const Interval& b) {
  return {v - b.hi, v - b.lo};
}

// Intersection with tolerance slack: overlaps short by at most tol collapse
// to the midpoint instead of reporting empty.
inline std::optional<Interval> intersect(const Interval& a, const Interval& b,
                                         double tol = kTol) {
  const double lo = std::max(a.lo, b.lo);
  const double hi = std::min(a.hi, b.hi);
  if (lo <= hi) return Interval{lo, hi};
  if (lo <= hi + tol) return Interval::point(0.5 * (lo + hi));
  return std::nullopt;
}

}  // namespace nemarb
