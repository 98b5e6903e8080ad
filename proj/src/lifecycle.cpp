#include "cosim/lifecycle.hpp"

#include <algorithm>

#include "cosim/errors.hpp"

namespace cosim {

LifecycleGuard::LifecycleGuard(std::unique_ptr<Simulator> inner) : inner_(std::move(inner)) {}

void LifecycleGuard::require(bool ok, const std::string& what) const {
  if (!ok) throw ProtocolError((sid_.empty() ? std::string("simulator") : sid_) + ": " + what);
}

SimulatorMeta LifecycleGuard::init(const std::string& sid, TimeResolution resolution,
                                   const Json& sim_params) {
  std::lock_guard lock(mutex_);
  require(state_ == State::Fresh, "init called more than once or after stop");
  sid_ = sid;
  SimulatorMeta meta = inner_->init(sid, resolution, sim_params);
  meta.validate();
  meta_ = meta;
  state_ = State::Ready;
  return meta;
}

void LifecycleGuard::register_entity(const EntityDescriptor& e) {
  require(meta_->models.count(e.model) > 0, "entity '" + e.eid + "' has unknown model '" + e.model + "'");
  require(entity_models_.emplace(e.eid, e.model).second, "duplicate entity id '" + e.eid + "'");
  for (const auto& c : e.children) register_entity(c);
}

std::vector<EntityDescriptor> LifecycleGuard::create(int num, const std::string& model,
                                                     const Json& model_params) {
  std::lock_guard lock(mutex_);
  require(state_ == State::Ready, "create is only allowed after init and before the first step");
  require(num > 0, "create: num must be positive");
  auto it = meta_->models.find(model);
  require(it != meta_->models.end(), "create: unknown model '" + model + "'");
  require(it->second.is_public, "create: model '" + model + "' is not public");
  auto entities = inner_->create(num, model, model_params);
  require(static_cast<int>(entities.size()) == num, "create returned a wrong number of entities");
  for (const auto& e : entities) register_entity(e);
  return entities;
}

StepResult LifecycleGuard::step(Tick time, const InputBundle& inputs, Tick max_advance) {
  std::lock_guard lock(mutex_);
  require(state_ == State::Ready || state_ == State::Stepped, "step before init or after stop");
  require(time >= 0, "step: negative time");
  require(!last_step_ || time >= *last_step_, "step: time " + std::to_string(time) +
                                                   " precedes previous step at " +
                                                   std::to_string(*last_step_));
  for (const auto& [eid, attrs] : inputs) {
    auto ent = entity_models_.find(eid);
    require(ent != entity_models_.end(), "step: inputs for unknown entity '" + eid + "'");
    const auto& model = meta_->model(ent->second);
    for (const auto& [attr, values] : attrs) {
      require(model.has_attr(attr), "step: input attr '" + attr + "' not declared by " + ent->second);
      require(!values.empty(), "step: empty input list for '" + eid + "." + attr + "'");
    }
  }
  StepResult result = inner_->step(time, inputs, max_advance);
  if (meta_->type == ComponentType::TimeBased) {
    require(result.next_step.has_value(),
            "time-based simulator returned no next_step at tick " + std::to_string(time));
  }
  if (result.next_step) {
    require(*result.next_step > time, "next_step " + std::to_string(*result.next_step) +
                                          " is not after current tick " + std::to_string(time));
  }
  last_step_ = time;
  state_ = State::Stepped;
  return result;
}

OutputBundle LifecycleGuard::get_data(const OutputRequest& request) {
  std::lock_guard lock(mutex_);
  require(state_ == State::Stepped, "get_data before the first step or after stop");
  for (const auto& [eid, attrs] : request) {
    auto ent = entity_models_.find(eid);
    require(ent != entity_models_.end(), "get_data: unknown entity '" + eid + "'");
    const auto& model = meta_->model(ent->second);
    for (const auto& a : attrs) {
      require(model.has_attr(a), "get_data: attr '" + a + "' not declared by " + ent->second);
    }
  }
  OutputBundle out = inner_->get_data(request);
  for (const auto& [eid, attrs] : out.data) {
    auto req = request.find(eid);
    require(req != request.end(), "get_data: unrequested entity '" + eid + "' in result");
    for (const auto& [attr, value] : attrs) {
      require(std::find(req->second.begin(), req->second.end(), attr) != req->second.end(),
              "get_data: unrequested attr '" + eid + "." + attr + "' in result");
    }
  }
  if (out.output_time) {
    require(*out.output_time >= *last_step_, "get_data: output time " +
                                                 std::to_string(*out.output_time) +
                                                 " lies before the step at " +
                                                 std::to_string(*last_step_));
  }
  return out;
}

void LifecycleGuard::stop() {
  std::lock_guard lock(mutex_);
  if (state_ == State::Stopped) return;
  state_ = State::Stopped;
  inner_->stop();
}

std::vector<std::string> LifecycleGuard::take_warnings() {
  std::lock_guard lock(mutex_);
  return inner_->take_warnings();
}

void LifecycleGuard::attach_event_channel(EventChannel channel) {
  inner_->attach_event_channel(std::move(channel));
}

const SimulatorMeta& LifecycleGuard::meta() const {
  require(meta_.has_value(), "meta requested before init");
  return *meta_;
}

bool LifecycleGuard::stopped() const {
  std::lock_guard lock(mutex_);
  return state_ == State::Stopped;
}

}  // namespace cosim
