#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cosim/time.hpp"

namespace cosim {

using Json = nlohmann::json;

enum class ComponentType { TimeBased, EventBased, Hybrid };

std::string to_string(ComponentType type);
ComponentType component_type_from_string(const std::string& name);

struct ModelMeta {
  bool is_public = true;
  std::vector<std::string> params;
  std::vector<std::string> attrs;
  std::vector<std::string> trigger;
  std::vector<std::string> non_persistent;

  bool has_attr(const std::string& attr) const;

  friend bool operator==(const ModelMeta&, const ModelMeta&) = default;
};

/// Meta data returned by init. Trigger and non-persistence are resolved
/// through the component type: time-based simulators never trigger and never
/// emit transient data, event-based ones always do, hybrids use the lists.
struct SimulatorMeta {
  std::string api_version = "3.0";
  ComponentType type = ComponentType::TimeBased;
  std::map<std::string, ModelMeta> models;

  /// Throws ProtocolError naming the first violated rule.
  void validate() const;

  bool is_trigger(const std::string& model, const std::string& attr) const;
  bool is_persistent(const std::string& model, const std::string& attr) const;
  const ModelMeta& model(const std::string& name) const;

  friend bool operator==(const SimulatorMeta&, const SimulatorMeta&) = default;
};

Json to_json(const SimulatorMeta& meta);
SimulatorMeta meta_from_json(const Json& j);

struct EntityDescriptor {
  std::string eid;
  std::string model;
  std::vector<EntityDescriptor> children;

  friend bool operator==(const EntityDescriptor&, const EntityDescriptor&) = default;
};

Json to_json(const EntityDescriptor& e);
EntityDescriptor entity_from_json(const Json& j);

/// One value arriving on an input attribute, tagged with the full id
/// ("<sid>.<eid>") of the entity that produced it.
struct InputValue {
  std::string source;
  Json value;

  friend bool operator==(const InputValue&, const InputValue&) = default;
};

/// eid -> attr -> values. Attributes without data are absent.
using InputBundle = std::map<std::string, std::map<std::string, std::vector<InputValue>>>;

Json inputs_to_json(const InputBundle& inputs);
/// Stable-sorts every value list by source id (the canonical input order).
void sort_by_source(InputBundle& inputs);
InputBundle inputs_from_json(const Json& j);

/// eid -> requested attrs.
using OutputRequest = std::map<std::string, std::vector<std::string>>;

Json request_to_json(const OutputRequest& request);
OutputRequest request_from_json(const Json& j);

struct OutputBundle {
  std::map<std::string, std::map<std::string, Json>> data;
  /// Tick from which the data is valid. Absent means the step's own tick.
  std::optional<Tick> output_time;

  bool empty() const { return data.empty(); }

  friend bool operator==(const OutputBundle&, const OutputBundle&) = default;
};

Json to_json(const OutputBundle& out);
OutputBundle outputs_from_json(const Json& j);

struct StepResult {
  std::optional<Tick> next_step;

  friend bool operator==(const StepResult&, const StepResult&) = default;
};

/// The simulator contract. Implementations need not be thread-safe: the
/// scheduler issues one call at a time. set_event is the only call that flows
/// the other way; it may be invoked from any thread once a channel is
/// attached.
class Simulator {
 public:
  using EventChannel = std::function<void(Tick)>;

  virtual ~Simulator() = default;

  virtual SimulatorMeta init(const std::string& sid, TimeResolution resolution,
                             const Json& sim_params) = 0;
  virtual std::vector<EntityDescriptor> create(int num, const std::string& model,
                                               const Json& model_params) = 0;
  virtual StepResult step(Tick time, const InputBundle& inputs, Tick max_advance) = 0;
  virtual OutputBundle get_data(const OutputRequest& request) = 0;
  virtual void stop() = 0;

  /// Diagnostics produced since the last call (e.g. ignored inputs).
  virtual std::vector<std::string> take_warnings() { return {}; }

  virtual void attach_event_channel(EventChannel channel) { events_ = std::move(channel); }

 protected:
  /// Ask the scheduler for an activation at `time`. Throws RejectedError when
  /// no channel is attached.
  void set_event(Tick time);

 private:
  EventChannel events_;
};

}  // namespace cosim
