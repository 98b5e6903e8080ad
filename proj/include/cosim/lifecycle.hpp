#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "cosim/api.hpp"

namespace cosim {

/// Wraps any Simulator and enforces the component contract around it:
/// call ordering (init, create*, (step, get_data?)*, stop), meta validity,
/// declared attributes on inputs and requests, next_step and output-time
/// rules. Violations raise ProtocolError. Both builtin and remote simulators
/// are driven through this wrapper, so they fail identically.
class LifecycleGuard final : public Simulator {
 public:
  explicit LifecycleGuard(std::unique_ptr<Simulator> inner);

  SimulatorMeta init(const std::string& sid, TimeResolution resolution,
                     const Json& sim_params) override;
  std::vector<EntityDescriptor> create(int num, const std::string& model,
                                       const Json& model_params) override;
  StepResult step(Tick time, const InputBundle& inputs, Tick max_advance) override;
  OutputBundle get_data(const OutputRequest& request) override;
  /// Idempotent. Waits for an in-flight call to finish.
  void stop() override;
  std::vector<std::string> take_warnings() override;
  void attach_event_channel(EventChannel channel) override;

  const SimulatorMeta& meta() const;
  Simulator& inner() { return *inner_; }
  bool stopped() const;

 private:
  enum class State { Fresh, Ready, Stepped, Stopped };

  void require(bool ok, const std::string& what) const;
  void register_entity(const EntityDescriptor& e);

  std::unique_ptr<Simulator> inner_;
  mutable std::mutex mutex_;
  State state_ = State::Fresh;
  std::string sid_;
  std::optional<SimulatorMeta> meta_;
  std::unordered_map<std::string, std::string> entity_models_;
  std::optional<Tick> last_step_;
};

}  // namespace cosim
