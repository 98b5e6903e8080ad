#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace cosim {

/// Internal integer time step. Always non-negative inside a run; signed so
/// that "one before tick 0" arithmetic stays well defined.
using Tick = std::int64_t;

/// Seconds represented by one tick.
class TimeResolution {
 public:
  constexpr TimeResolution() = default;
  explicit TimeResolution(double seconds_per_tick);

  constexpr double seconds_per_tick() const noexcept { return seconds_per_tick_; }

  friend constexpr bool operator==(TimeResolution, TimeResolution) = default;

 private:
  double seconds_per_tick_ = 1.0;
};

double ticks_to_seconds(Tick t, TimeResolution res);

/// floor(s / seconds_per_tick). Throws std::domain_error for negative or
/// non-finite input.
Tick seconds_to_ticks(double seconds, TimeResolution res);

/// (tick, iteration) pair. Iteration counts same-time loop micro-steps.
struct SuperdenseTime {
  Tick tick = 0;
  std::uint32_t iteration = 0;

  friend constexpr auto operator<=>(const SuperdenseTime&, const SuperdenseTime&) = default;
};

inline std::strong_ordering sdt_compare(const SuperdenseTime& a, const SuperdenseTime& b) {
  return a <=> b;
}

std::string to_string(const SuperdenseTime& t);

}  // namespace cosim
