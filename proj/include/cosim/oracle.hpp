#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cosim/scenario_file.hpp"
#include "cosim/trace.hpp"

namespace cosim {

/// One value seen by a simulator on one of its inputs.
struct Observation {
  std::string dest;  // full id
  Tick tick = 0;
  std::string attr;
  std::string source;
  Json value;

  friend bool operator==(const Observation&, const Observation&) = default;
};

bool observation_less(const Observation& a, const Observation& b);
std::string to_string(const Observation& o);

struct OracleStep {
  InputBundle inputs;
  OutputBundle outputs;
};

/// Result of a lockstep run. Every simulator counts one step call per tick;
/// only steps with something to do are recorded in `per_tick`.
struct OracleTrace {
  Tick until = 0;
  std::map<Tick, std::map<std::string, OracleStep>> per_tick;
  std::size_t total_step_calls = 0;
  std::map<std::string, std::size_t> step_calls;
};

/// Brute-force reference: advances all simulators tick by tick in
/// topological order, every simulator taking a step at every tick. A step in
/// which a simulator has nothing to do is the empty-container exchange and is
/// not forwarded to it. Refuses (ScenarioError) scenarios outside its domain:
/// non-builtin simulators, weak connections, cycles, future-dated outputs.
OracleTrace oracle_run(const ScenarioDescription& scenario, Tick until);

std::vector<Observation> observations(const OracleTrace& trace);
/// Observations from the inputs of every step record of a scheduler trace.
std::vector<Observation> observations(const std::vector<TraceRecord>& trace);

struct CompareReport {
  bool equal = true;
  std::optional<Observation> first_divergence;
  std::size_t main_count = 0;
  std::size_t oracle_count = 0;
};

/// Compares the dataflow projection (dest, tick, attr, source, value) as
/// multisets; step counts do not matter.
CompareReport compare_traces(const std::vector<TraceRecord>& main, const OracleTrace& oracle);
CompareReport compare_observations(std::vector<Observation> main, std::vector<Observation> oracle);

}  // namespace cosim
