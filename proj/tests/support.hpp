#pragma once

#include <chrono>
#include <functional>
#include <thread>

#include "cosim/api.hpp"
#include "cosim/scenario.hpp"
#include "cosim/trace.hpp"

namespace testing {

using namespace cosim;

/// Simulator whose behavior is a test-supplied function.
class ScriptedSim : public Simulator {
 public:
  using StepFn = std::function<StepResult(Tick, const InputBundle&, Tick)>;
  using DataFn = std::function<OutputBundle(const OutputRequest&)>;

  ScriptedSim(ComponentType type, std::vector<std::string> attrs, std::vector<std::string> trigger = {},
              std::vector<std::string> non_persistent = {}) {
    meta_.type = type;
    meta_.models["M"] = ModelMeta{true, {}, std::move(attrs), std::move(trigger), std::move(non_persistent)};
  }

  StepFn on_step = [](Tick, const InputBundle&, Tick) { return StepResult{}; };
  DataFn on_data = [](const OutputRequest&) { return OutputBundle{}; };
  std::vector<std::pair<Tick, Tick>> steps;  // (time, max_advance)

  SimulatorMeta init(const std::string&, TimeResolution, const Json&) override { return meta_; }
  std::vector<EntityDescriptor> create(int num, const std::string& model, const Json&) override {
    std::vector<EntityDescriptor> out;
    for (int i = 0; i < num; ++i) out.push_back({model + "-" + std::to_string(next_++), model, {}});
    return out;
  }
  StepResult step(Tick t, const InputBundle& in, Tick max_advance) override {
    steps.emplace_back(t, max_advance);
    return on_step(t, in, max_advance);
  }
  OutputBundle get_data(const OutputRequest& r) override { return on_data(r); }
  void stop() override {}
  void request_event(Tick t) { set_event(t); }

 private:
  SimulatorMeta meta_;
  int next_ = 0;
};

inline std::vector<TraceRecord> of_action(const std::vector<TraceRecord>& trace, TraceAction a,
                                          const std::string& sid = {}) {
  std::vector<TraceRecord> out;
  for (const auto& r : trace) {
    if (r.action == a && (sid.empty() || r.sid == sid)) out.push_back(r);
  }
  return out;
}

template <class Pred>
bool wait_until(Pred pred, std::chrono::milliseconds timeout = std::chrono::seconds(10)) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (!pred()) {
    if (std::chrono::steady_clock::now() > deadline) return false;
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  return true;
}

}  // namespace testing
