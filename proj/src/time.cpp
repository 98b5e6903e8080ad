#include "cosim/time.hpp"

#include <cmath>
#include <stdexcept>

namespace cosim {

TimeResolution::TimeResolution(double seconds_per_tick) : seconds_per_tick_(seconds_per_tick) {
  if (!(seconds_per_tick > 0.0) || !std::isfinite(seconds_per_tick)) {
    throw std::invalid_argument("time_resolution must be a positive finite number");
  }
}

double ticks_to_seconds(Tick t, TimeResolution res) {
  return static_cast<double>(t) * res.seconds_per_tick();
}

Tick seconds_to_ticks(double seconds, TimeResolution res) {
  if (!(seconds >= 0.0) || !std::isfinite(seconds)) {
    throw std::domain_error("seconds_to_ticks: negative or non-finite duration");
  }
  auto ticks = static_cast<Tick>(std::floor(seconds / res.seconds_per_tick()));
  // Division rounding can land one tick off at exact boundaries.
  while (ticks > 0 && ticks_to_seconds(ticks, res) > seconds) --ticks;
  while (ticks_to_seconds(ticks + 1, res) <= seconds) ++ticks;
  return ticks;
}

std::string to_string(const SuperdenseTime& t) {
  return "(" + std::to_string(t.tick) + "," + std::to_string(t.iteration) + ")";
}

}  // namespace cosim
