#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cosim/api.hpp"
#include "cosim/graph.hpp"
#include "cosim/time.hpp"
#include "cosim/trace.hpp"

namespace cosim {

/// Global run parameters.
struct WorldConfig {
  TimeResolution time_resolution{};
  int max_loop_iterations = 100;
  /// Wall seconds per simulated second. Absent runs as fast as possible.
  std::optional<double> rt_factor;
  /// Exclusive end tick. May also be given to run().
  std::optional<Tick> until;

  /// Throws ScenarioError on out-of-range values.
  void validate() const;
};

struct Activation {
  SuperdenseTime when;
  std::string sid;
  unsigned cause = 0;  // CauseFlags
  /// Origin of an external activation: "inject" (operator) or "set_event".
  std::string origin;
};

/// Where an entity lives.
struct EntityInfo {
  std::string sid;
  std::string eid;
  std::string model;
};

/// A simulator as seen by the scheduler.
struct SimBinding {
  std::string sid;
  Simulator* sim = nullptr;
  SimulatorMeta meta;
};

struct SchedulerOptions {
  /// Called for every trace record as soon as it is appended.
  std::function<void(const TraceRecord&)> on_record;
  /// Deadline misses below this are not recorded as overruns.
  std::chrono::microseconds overrun_tolerance{5000};
};

/// Deterministic superdense-time scheduler. One logical loop steps one
/// simulator at a time in (tick, iteration, rank, sid) order. External
/// events are the only input from other threads; they are deposited in an
/// inbox and drained at the top of the loop and while pacing.
class Scheduler {
 public:
  Scheduler(DependencyGraph graph, std::vector<SimBinding> sims, std::map<std::string, EntityInfo> entities,
            WorldConfig world, Tick until, SchedulerOptions options = {});
  ~Scheduler();
  Scheduler(const Scheduler&) = delete;
  Scheduler& operator=(const Scheduler&) = delete;

  /// Runs to completion and returns the full trace. Simulator errors surface
  /// as ProtocolError, loop overflows as LoopLimitError; both are also
  /// appended to the trace as "error" records first.
  std::vector<TraceRecord> run();

  /// Thread-safe. Schedules an external activation of `sid` at
  /// max(event_time, wall_tick + 1) and returns that tick. Throws
  /// RejectedError without real-time pacing, for unknown sids and for ticks
  /// at or beyond `until`.
  Tick inject_external_event(const std::string& sid, Tick event_time, const std::string& origin = "inject");

  // Individual steps of the loop, public for tests.

  /// Pending activations in pop order.
  std::vector<Activation> pending() const;
  /// Pops the minimum; nullopt when empty or the minimum is at/after until.
  std::optional<Activation> next_activation();
  InputBundle collect_inputs(const std::string& sid, SuperdenseTime when);
  Tick compute_max_advance(const std::string& sid, SuperdenseTime when) const;
  /// Steps the simulator, records progress and enqueues its next step.
  StepResult dispatch_step(const Activation& act, const InputBundle& inputs, Tick max_advance);
  /// Propagates a get_data result along outgoing connections.
  std::vector<Activation> process_outputs(const std::string& sid, SuperdenseTime when, const OutputBundle& bundle);

  /// Wall-clock tick (0 before the run starts, and always 0 in fast mode).
  Tick wall_tick() const;
  /// Tick of the activation being processed (or last paced to).
  Tick current_tick() const { return current_tick_.load(); }
  Tick until() const { return until_; }
  const WorldConfig& world() const { return world_; }
  bool finished() const { return finished_.load(); }
  std::size_t step_calls(const std::string& sid) const;
  const std::vector<TraceRecord>& trace() const { return trace_; }

 private:
  struct QueueKey {
    Tick tick;
    std::uint32_t iteration;
    int rank;
    std::string sid;
    friend auto operator<=>(const QueueKey&, const QueueKey&) = default;
  };

  struct OutLink {
    std::size_t dest;  // slot index
    std::string dest_eid;
    std::string dest_attr;
    bool weak;
    bool dest_trigger;
  };

  struct PullLink {
    std::string dest_eid;
    std::string dest_attr;
    std::string src_full;
    std::string src_attr;
  };

  struct Delivery {
    InputValue value;
    bool pushed;
  };

  struct Slot {
    SimBinding binding;
    int rank = 0;
    std::vector<std::size_t> ancestors;
    bool on_cycle = false;
    std::optional<SuperdenseTime> progress;
    std::optional<Tick> next_self_step;
    /// Pushed values by delivery time: eid -> attr -> values.
    std::map<SuperdenseTime, std::map<std::string, std::map<std::string, std::vector<InputValue>>>> pending_inputs;
    std::set<SuperdenseTime> pending;
    /// eid.attr -> outgoing links.
    std::map<std::pair<std::string, std::string>, std::vector<OutLink>> outgoing;
    std::vector<PullLink> pulls;
    OutputRequest request;
    std::size_t steps = 0;
  };

  struct InboxItem {
    std::string sid;
    Tick tick;
    std::string origin;
  };

  std::size_t slot_index(const std::string& sid) const;
  void enqueue(std::size_t slot, SuperdenseTime when, unsigned cause, const std::string& origin = {});
  void drop_self_schedule(std::size_t slot);
  void drain_inbox();
  /// Blocks until the deadline of `tick` or until the inbox receives work.
  /// Returns false if woken early by the inbox.
  bool rt_pace(Tick tick);
  void record(TraceRecord r);
  void record_error(const Activation* act, const std::string& message);
  void execute(const Activation& act);
  std::chrono::steady_clock::duration deadline_of(Tick tick) const;

  DependencyGraph graph_;
  WorldConfig world_;
  Tick until_;
  SchedulerOptions options_;
  std::vector<Slot> slots_;
  std::map<std::string, std::size_t> slot_by_sid_;
  std::map<std::string, EntityInfo> entities_;

  std::map<QueueKey, Activation> queue_;
  /// Persistent values: (src full id, attr) -> produced_at -> value.
  std::map<std::pair<std::string, std::string>, std::map<Tick, Json>> cache_;

  std::vector<TraceRecord> trace_;
  std::uint64_t next_seq_ = 0;

  // Wall clock and external inbox; shared with other threads.
  mutable std::mutex inbox_mutex_;
  std::condition_variable inbox_cv_;
  std::deque<InboxItem> inbox_;
  std::optional<std::chrono::steady_clock::time_point> start_;
  std::atomic<Tick> current_tick_{0};
  std::atomic<bool> finished_{false};
  Tick paced_tick_ = -1;
};

}  // namespace cosim
