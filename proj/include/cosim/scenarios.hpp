#pragma once

#include <cstdint>

#include "cosim/scenario_file.hpp"

namespace cosim::scenarios {

/// An agent sends `messages` messages, evenly spread over [0, until), through
/// a delay network (delivery-time emission, latency `latency`) into a
/// collector. Simulator ids: "agents", "net", "monitor".
ScenarioDescription delay_net(int messages, Tick until, Tick latency = 100);

/// Two negotiators bisecting towards each other within one tick. A ramp
/// kicks off "a.Negotiator-0" at tick 0; its offers reach "b.Negotiator-0"
/// strongly, the answers come back over a weak edge.
ScenarioDescription negotiation(double offer_a, double offer_b, double tolerance, Tick until = 3,
                                int max_loop_iterations = 100);

/// Random acyclic scenario of 2-5 builtin simulators (time-based, hybrid and
/// event-based), at most 50 ticks, strong edges from lower to higher
/// simulator index only and no future-dated outputs.
ScenarioDescription random_acyclic(std::uint64_t seed);

}  // namespace cosim::scenarios
