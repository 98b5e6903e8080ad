#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cosim/api.hpp"

namespace cosim::sims {

/// Shared plumbing for the builtin simulators: static meta, "<Model>-<index>"
/// entity naming and a warnings buffer.
class BuiltinSimulator : public Simulator {
 public:
  SimulatorMeta init(const std::string& sid, TimeResolution resolution,
                     const Json& sim_params) override;
  std::vector<EntityDescriptor> create(int num, const std::string& model,
                                       const Json& model_params) override;
  void stop() override {}
  std::vector<std::string> take_warnings() override;

  const std::string& sid() const { return sid_; }
  TimeResolution resolution() const { return resolution_; }

 protected:
  explicit BuiltinSimulator(SimulatorMeta meta) : meta_(std::move(meta)) {}

  virtual void configure(const Json& /*sim_params*/) {}
  virtual void add_entity(const std::string& eid, const std::string& model, const Json& params) = 0;
  void warn(std::string message) { warnings_.push_back(std::move(message)); }

  SimulatorMeta meta_;

 private:
  std::string sid_;
  TimeResolution resolution_;
  std::map<std::string, int> counters_;
  std::vector<std::string> warnings_;
};

/// Time-based ramp: out = slope * time + bias, every `step_size` ticks.
class RampSim final : public BuiltinSimulator {
 public:
  RampSim();
  StepResult step(Tick time, const InputBundle& inputs, Tick max_advance) override;
  OutputBundle get_data(const OutputRequest& request) override;

 protected:
  void configure(const Json& sim_params) override;
  void add_entity(const std::string& eid, const std::string& model, const Json& params) override;

 private:
  struct State {
    double slope = 1.0;
    double value = 0.0;
  };
  Tick step_size_ = 1;
  std::map<std::string, State> entities_;
};

/// Hybrid ramp. "setpoint" triggers and restarts the ramp from the given
/// value; "jump" reports applied setpoints as transient data; "bias" is read
/// from persistent sources without triggering.
class HybridRampSim final : public BuiltinSimulator {
 public:
  HybridRampSim();
  StepResult step(Tick time, const InputBundle& inputs, Tick max_advance) override;
  OutputBundle get_data(const OutputRequest& request) override;

 protected:
  void configure(const Json& sim_params) override;
  void add_entity(const std::string& eid, const std::string& model, const Json& params) override;

 private:
  struct State {
    double slope = 1.0;
    double base_value = 0.0;
    Tick base_tick = 0;
    double value = 0.0;
    std::optional<double> jump;
  };
  Tick step_size_ = 1;
  double setpoint_min_ = -1e6;
  double setpoint_max_ = 1e6;
  std::map<std::string, State> entities_;
};

/// Event-based communication network with fixed latency. Messages sent into
/// "send" come out of "delivery" `latency` ticks later, at the node named by
/// the payload's "to" field (or the sending node).
///
/// In the default "send" emission mode the delivery is published right away
/// with a future output time; in "delivery" mode it is published from the
/// self-scheduled step at the delivery tick. Either way the node steps once
/// per tick with traffic and once per delivery tick.
class DelayNetSim final : public BuiltinSimulator {
 public:
  DelayNetSim();
  StepResult step(Tick time, const InputBundle& inputs, Tick max_advance) override;
  OutputBundle get_data(const OutputRequest& request) override;

  std::size_t step_calls() const { return step_calls_; }
  std::size_t in_flight() const { return in_flight_.size(); }
  /// Tick up to which the network state has been advanced.
  Tick clock() const { return clock_; }

 protected:
  void configure(const Json& sim_params) override;
  void add_entity(const std::string& eid, const std::string& model, const Json& params) override;

 private:
  struct Message {
    Tick deliver_at;
    std::uint64_t seq;
    std::string dest;
    Json payload;
  };

  Tick latency_ = 1;
  bool emit_on_send_ = true;
  std::vector<std::string> nodes_;
  std::deque<Message> in_flight_;  // sorted by (deliver_at, seq)
  std::vector<Message> outbox_;
  std::optional<Tick> outbox_time_;
  std::uint64_t seq_ = 0;
  std::size_t step_calls_ = 0;
  Tick clock_ = 0;
};

/// Event-based negotiator for same-time loops. On receiving an offer it moves
/// its proposal to the midpoint and answers while the gap exceeds the
/// tolerance; otherwise it stays silent, which ends the loop. A value on
/// "start" makes it announce its current proposal.
class NegotiatorSim final : public BuiltinSimulator {
 public:
  NegotiatorSim();
  StepResult step(Tick time, const InputBundle& inputs, Tick max_advance) override;
  OutputBundle get_data(const OutputRequest& request) override;

  struct State {
    double proposal = 0.0;
    double tolerance = 1.0;
    int rounds = 0;
    std::optional<double> outgoing;
  };
  const State& state(const std::string& eid) const { return entities_.at(eid); }

 protected:
  void add_entity(const std::string& eid, const std::string& model, const Json& params) override;

 private:
  std::map<std::string, State> entities_;
  Tick time_ = 0;
};

/// Event-based probe. Every attribute is a trigger; all inputs are logged.
class CollectorSim final : public BuiltinSimulator {
 public:
  struct Entry {
    Tick tick;
    std::string eid;
    std::string attr;
    std::string source;
    Json value;
  };

  CollectorSim();
  StepResult step(Tick time, const InputBundle& inputs, Tick max_advance) override;
  OutputBundle get_data(const OutputRequest& request) override;
  void stop() override;

  const std::vector<Entry>& log() const { return log_; }
  std::size_t step_calls() const { return step_calls_; }
  /// Line-delimited JSON, one entry per line.
  void dump_log(const std::string& path) const;

 protected:
  void configure(const Json& sim_params) override;
  void add_entity(const std::string& eid, const std::string& model, const Json& params) override;

 private:
  std::vector<Entry> log_;
  std::string log_path_;
  std::size_t step_calls_ = 0;
};

/// Event-based relay: out = gain * sum(numeric inputs), valid at the step's
/// tick. With `hold` > 0 it schedules itself `hold` ticks later and repeats
/// its last value from that self-triggered step.
class RelaySim final : public BuiltinSimulator {
 public:
  RelaySim();
  StepResult step(Tick time, const InputBundle& inputs, Tick max_advance) override;
  OutputBundle get_data(const OutputRequest& request) override;

 protected:
  void configure(const Json& sim_params) override;
  void add_entity(const std::string& eid, const std::string& model, const Json& params) override;

 private:
  struct State {
    double gain = 1.0;
    double last = 0.0;
    bool emit = false;
  };
  Tick hold_ = 0;
  std::map<std::string, State> entities_;
};

/// Hybrid software agent: sends a message on "msg" at each tick listed in
/// `sends` (self-scheduled) and records whatever arrives on "inbox".
class AgentSim final : public BuiltinSimulator {
 public:
  AgentSim();
  StepResult step(Tick time, const InputBundle& inputs, Tick max_advance) override;
  OutputBundle get_data(const OutputRequest& request) override;

  struct State {
    std::vector<Tick> sends;
    std::string to;
    int sent = 0;
    std::optional<Json> outgoing;
    std::vector<std::pair<Tick, Json>> received;
  };
  const State& state(const std::string& eid) const { return entities_.at(eid); }

 protected:
  void add_entity(const std::string& eid, const std::string& model, const Json& params) override;

 private:
  std::map<std::string, State> entities_;
};

/// Builtin names: Ramp, HybridRamp, DelayNet, Negotiator, Collector, Relay,
/// Agent (case-insensitive). Throws ScenarioError for unknown names.
std::unique_ptr<Simulator> make_builtin(const std::string& name);
std::vector<std::string> builtin_names();

}  // namespace cosim::sims
