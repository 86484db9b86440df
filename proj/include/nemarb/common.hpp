#pragma once

#include <stdexcept>
#include <string>

namespace nemarb {

// Absolute comparison tolerance used everywhere prices, energies and
// multipliers are classified. Canonical units: kWh, kW, hours, currency/kWh.
inline constexpr double kTol = 1e-9;

// Internal-consistency check that survives NDEBUG builds. Failures indicate
// a logic bug, not bad user input.
inline void require(bool cond, const char* what) {
  if (!cond) throw std::logic_error(std::string("nemarb internal error: ") + what);
}

struct insufficient_history : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nemarb
