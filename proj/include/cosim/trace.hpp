#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cosim/api.hpp"

namespace cosim {

enum class TraceAction { Step, GetData, SetEvent, Inject, Error, Warning, Overrun };

std::string to_string(TraceAction action);
TraceAction trace_action_from_string(const std::string& name);

/// Why a simulator was activated. Coalesced activations carry several.
enum CauseFlags : unsigned {
  kSelfScheduled = 1u << 0,
  kTriggered = 1u << 1,
  kExternal = 1u << 2,
};

std::string cause_to_string(unsigned causes);
unsigned cause_from_string(const std::string& text);

/// One scheduler action. Records are appended in execution order; `seq`
/// numbers them from 0.
struct TraceRecord {
  std::uint64_t seq = 0;
  SuperdenseTime when;
  std::string sid;
  int rank = -1;
  TraceAction action = TraceAction::Step;
  unsigned cause = 0;

  // step
  std::optional<Tick> max_advance;
  std::optional<Tick> next_step;
  std::string inputs_digest;
  Json inputs;
  /// Number of pushed (trigger or transient) values among the inputs.
  int pushed = 0;
  /// Latest production tick among pulled persistent inputs.
  std::optional<Tick> pulled_max_tick;

  // get_data
  std::string outputs_digest;
  Json outputs;
  std::optional<Tick> output_time;

  // error, warning, overrun, inject, set_event
  std::string detail;
  /// Deadline slack in milliseconds; negative on an overrun.
  std::optional<double> slack_ms;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// Stable field order; one line, no trailing LF.
std::string to_json_line(const TraceRecord& record);
TraceRecord trace_record_from_json(const Json& j);
std::vector<TraceRecord> read_trace_file(const std::string& path);

/// FNV-1a 64 over the compact JSON dump, as 16 hex digits.
std::string digest(const Json& value);

/// Replays a trace and returns every violated invariant (empty = clean):
/// seq order, (tick, iteration, rank, sid) order, iteration bound, causality
/// of pulled inputs, and max_advance safety (external activations exempt).
std::vector<std::string> check_trace(const std::vector<TraceRecord>& trace, int max_loop_iterations);

}  // namespace cosim
