#include "cosim/scheduler.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

#include "cosim/errors.hpp"

namespace cosim {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

}  // namespace

void WorldConfig::validate() const {
  if (max_loop_iterations < 1) throw ScenarioError("max_loop_iterations must be a positive integer");
  if (rt_factor && !(*rt_factor > 0.0 && std::isfinite(*rt_factor))) {
    throw ScenarioError("rt_factor must be a positive number");
  }
  if (until && *until <= 0) throw ScenarioError("until must be a positive tick");
}

Scheduler::Scheduler(DependencyGraph graph, std::vector<SimBinding> sims, std::map<std::string, EntityInfo> entities,
                     WorldConfig world, Tick until, SchedulerOptions options)
    : graph_(std::move(graph)),
      world_(std::move(world)),
      until_(until),
      options_(std::move(options)),
      entities_(std::move(entities)) {
  world_.validate();
  if (until_ <= 0) throw ScenarioError("until must be a positive tick");

  std::map<std::string, SimBinding> by_sid;
  for (auto& b : sims) by_sid.emplace(b.sid, std::move(b));
  for (const auto& sid : graph_.sids()) {
    auto it = by_sid.find(sid);
    if (it == by_sid.end()) throw ScenarioError("no simulator bound for '" + sid + "'");
    Slot slot;
    slot.binding = std::move(it->second);
    slot.rank = graph_.rank(sid);
    slot_by_sid_[sid] = slots_.size();
    slots_.push_back(std::move(slot));
  }
  for (auto& slot : slots_) {
    for (const auto& a : graph_.ancestors(slot.binding.sid)) {
      slot.ancestors.push_back(slot_by_sid_.at(a));
      if (a == slot.binding.sid) slot.on_cycle = true;
    }
  }

  auto entity = [&](const std::string& full) -> const EntityInfo& {
    auto it = entities_.find(full);
    if (it == entities_.end()) throw ScenarioError("unknown entity '" + full + "'");
    return it->second;
  };
  for (const auto& c : graph_.connections()) {
    const auto& src = entity(c.src);
    const auto& dest = entity(c.dest);
    auto& src_slot = slots_[slot_index(src.sid)];
    const std::size_t dest_index = slot_index(dest.sid);
    const auto& dest_meta = slots_[dest_index].binding.meta;
    const bool dest_trigger = dest_meta.is_trigger(dest.model, c.dest_attr);
    const bool src_persistent = src_slot.binding.meta.is_persistent(src.model, c.src_attr);

    src_slot.outgoing[{src.eid, c.src_attr}].push_back({dest_index, dest.eid, c.dest_attr, c.weak, dest_trigger});
    auto& req = src_slot.request[src.eid];
    if (std::find(req.begin(), req.end(), c.src_attr) == req.end()) req.push_back(c.src_attr);
    if (!dest_trigger && src_persistent) {
      slots_[dest_index].pulls.push_back({dest.eid, c.dest_attr, c.src, c.src_attr});
    }
  }

  // Time-based and hybrid simulators start at tick 0; event-based ones wait.
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i].binding.meta.type != ComponentType::EventBased) {
      enqueue(i, {0, 0}, kSelfScheduled);
      slots_[i].next_self_step = 0;
    }
  }

  for (auto& slot : slots_) {
    const std::string sid = slot.binding.sid;
    slot.binding.sim->attach_event_channel([this, sid](Tick t) { inject_external_event(sid, t, "set_event"); });
  }
}

Scheduler::~Scheduler() {
  for (auto& slot : slots_) slot.binding.sim->attach_event_channel({});
}

std::size_t Scheduler::slot_index(const std::string& sid) const {
  auto it = slot_by_sid_.find(sid);
  if (it == slot_by_sid_.end()) throw ScenarioError("unknown simulator '" + sid + "'");
  return it->second;
}

void Scheduler::enqueue(std::size_t index, SuperdenseTime when, unsigned cause, const std::string& origin) {
  auto& slot = slots_[index];
  QueueKey key{when.tick, when.iteration, slot.rank, slot.binding.sid};
  auto [it, inserted] = queue_.try_emplace(key, Activation{when, slot.binding.sid, 0, {}});
  it->second.cause |= cause;
  if (!origin.empty() && it->second.origin.empty()) it->second.origin = origin;
  slot.pending.insert(when);
}

void Scheduler::drop_self_schedule(std::size_t index) {
  auto& slot = slots_[index];
  if (!slot.next_self_step) return;
  QueueKey key{*slot.next_self_step, 0, slot.rank, slot.binding.sid};
  if (auto it = queue_.find(key); it != queue_.end()) {
    it->second.cause &= ~static_cast<unsigned>(kSelfScheduled);
    if (it->second.cause == 0) {
      slot.pending.erase(it->second.when);
      queue_.erase(it);
    }
  }
  slot.next_self_step.reset();
}

std::vector<Activation> Scheduler::pending() const {
  std::vector<Activation> out;
  for (const auto& [key, act] : queue_) out.push_back(act);
  return out;
}

std::optional<Activation> Scheduler::next_activation() {
  if (queue_.empty()) return std::nullopt;
  if (queue_.begin()->first.tick >= until_) {
    for (auto& slot : slots_) slot.pending.clear();
    queue_.clear();
    return std::nullopt;
  }
  auto node = queue_.extract(queue_.begin());
  Activation act = std::move(node.mapped());
  slots_[slot_index(act.sid)].pending.erase(act.when);
  return act;
}

namespace {

struct Collected {
  InputBundle inputs;
  int pushed = 0;
  std::optional<Tick> pulled_max_tick;
};

}  // namespace

InputBundle Scheduler::collect_inputs(const std::string& sid, SuperdenseTime when) {
  auto& slot = slots_[slot_index(sid)];
  InputBundle out;
  // Deliveries for earlier times were transient data the simulator was not
  // stepped for; they are gone.
  while (!slot.pending_inputs.empty() && slot.pending_inputs.begin()->first < when) {
    slot.pending_inputs.erase(slot.pending_inputs.begin());
  }
  if (auto it = slot.pending_inputs.find(when); it != slot.pending_inputs.end()) {
    out = std::move(it->second);
    slot.pending_inputs.erase(it);
  }
  for (const auto& pull : slot.pulls) {
    auto c = cache_.find({pull.src_full, pull.src_attr});
    if (c == cache_.end()) continue;
    auto& history = c->second;
    auto it = history.upper_bound(when.tick);
    if (it == history.begin()) continue;
    --it;
    out[pull.dest_eid][pull.dest_attr].push_back({pull.src_full, it->second});
    history.erase(history.begin(), it);
  }
  sort_by_source(out);
  return out;
}

Tick Scheduler::compute_max_advance(const std::string& sid, SuperdenseTime when) const {
  const auto& slot = slots_[slot_index(sid)];
  std::optional<Tick> earliest;
  auto consider = [&](Tick t) {
    if (!earliest || t < *earliest) earliest = t;
  };
  for (auto a : slot.ancestors) {
    if (!slots_[a].pending.empty()) consider(slots_[a].pending.begin()->tick);
  }
  // On a cycle, this very step may feed back into the simulator.
  if (slot.on_cycle) consider(when.tick);
  if (auto it = slot.pending_inputs.upper_bound(when); it != slot.pending_inputs.end()) consider(it->first.tick);
  if (!earliest) return until_;
  return std::min(until_, *earliest - 1);
}

StepResult Scheduler::dispatch_step(const Activation& act, const InputBundle& inputs, Tick max_advance) {
  const std::size_t index = slot_index(act.sid);
  auto& slot = slots_[index];
  if (slot.progress && !(act.when > *slot.progress)) {
    throw ProtocolError(act.sid + ": activation at " + to_string(act.when) + " does not follow progress " +
                        to_string(*slot.progress));
  }
  StepResult result = slot.binding.sim->step(act.when.tick, inputs, max_advance);
  slot.progress = act.when;
  ++slot.steps;
  if (slot.next_self_step && *slot.next_self_step == act.when.tick && act.when.iteration == 0) {
    slot.next_self_step.reset();
  }
  drop_self_schedule(index);
  if (result.next_step) {
    if (*result.next_step <= act.when.tick) {
      throw ProtocolError(act.sid + ": next_step " + std::to_string(*result.next_step) +
                          " is not after tick " + std::to_string(act.when.tick));
    }
    enqueue(index, {*result.next_step, 0}, kSelfScheduled);
    slot.next_self_step = result.next_step;
  }
  return result;
}

std::vector<Activation> Scheduler::process_outputs(const std::string& sid, SuperdenseTime when,
                                                   const OutputBundle& bundle) {
  const std::size_t index = slot_index(sid);
  auto& slot = slots_[index];
  const Tick effective = bundle.output_time.value_or(when.tick);
  if (effective < when.tick) {
    throw ProtocolError(sid + ": output time " + std::to_string(effective) + " lies before tick " +
                        std::to_string(when.tick));
  }
  std::vector<Activation> created;
  for (const auto& [eid, attrs] : bundle.data) {
    const std::string src_full = full_id(sid, eid);
    auto ent = entities_.find(src_full);
    if (ent == entities_.end()) throw ProtocolError(sid + ": output for unknown entity '" + eid + "'");
    for (const auto& [attr, value] : attrs) {
      const bool persistent = slot.binding.meta.is_persistent(ent->second.model, attr);
      if (persistent) cache_[{src_full, attr}][effective] = value;
      auto links = slot.outgoing.find({eid, attr});
      if (links == slot.outgoing.end()) continue;
      for (const auto& link : links->second) {
        if (!link.dest_trigger && persistent) continue;  // pulled by the destination
        SuperdenseTime target = when;
        if (effective > when.tick) {
          target = {effective, 0};
        } else if (link.weak) {
          target = {when.tick, when.iteration + 1};
          if (target.iteration >= static_cast<std::uint32_t>(world_.max_loop_iterations)) {
            throw LoopLimitError("same-time loop exceeded max_loop_iterations=" +
                                 std::to_string(world_.max_loop_iterations) + " at tick " +
                                 std::to_string(when.tick) + " among [" + join(graph_.component(sid)) + "]");
          }
        }
        auto& dest = slots_[link.dest];
        if (dest.progress && !(target > *dest.progress)) {
          throw ProtocolError("causality violation: delivery to " + dest.binding.sid + " at " + to_string(target) +
                              " but it already progressed to " + to_string(*dest.progress));
        }
        dest.pending_inputs[target][link.dest_eid][link.dest_attr].push_back({src_full, value});
        if (link.dest_trigger) {
          enqueue(link.dest, target, kTriggered);
          created.push_back({target, dest.binding.sid, kTriggered, {}});
        }
      }
    }
  }
  return created;
}

void Scheduler::record(TraceRecord r) {
  r.seq = next_seq_++;
  trace_.push_back(std::move(r));
  if (options_.on_record) options_.on_record(trace_.back());
}

void Scheduler::record_error(const Activation* act, const std::string& message) {
  TraceRecord r;
  if (act) {
    r.when = act->when;
    r.sid = act->sid;
    r.rank = slots_[slot_index(act->sid)].rank;
  } else {
    r.when = {current_tick_.load(), 0};
  }
  r.action = TraceAction::Error;
  r.detail = message;
  record(std::move(r));
}

void Scheduler::execute(const Activation& act) {
  const std::size_t index = slot_index(act.sid);
  auto& slot = slots_[index];
  current_tick_ = act.when.tick;

  if (act.cause & kExternal) {
    TraceRecord r;
    r.when = act.when;
    r.sid = act.sid;
    r.rank = slot.rank;
    r.action = act.origin == "set_event" ? TraceAction::SetEvent : TraceAction::Inject;
    r.detail = act.origin;
    record(std::move(r));
  }

  // Split pushed and pulled values for the trace before handing them over.
  int pushed = 0;
  if (auto it = slot.pending_inputs.find(act.when); it != slot.pending_inputs.end()) {
    for (const auto& [eid, attrs] : it->second) {
      for (const auto& [attr, values] : attrs) pushed += static_cast<int>(values.size());
    }
  }
  std::optional<Tick> pulled_max;
  for (const auto& pull : slot.pulls) {
    auto c = cache_.find({pull.src_full, pull.src_attr});
    if (c == cache_.end()) continue;
    auto it = c->second.upper_bound(act.when.tick);
    if (it == c->second.begin()) continue;
    --it;
    if (!pulled_max || it->first > *pulled_max) pulled_max = it->first;
  }
  InputBundle inputs = collect_inputs(act.sid, act.when);
  const Tick max_advance = compute_max_advance(act.sid, act.when);

  StepResult result;
  OutputBundle outputs;
  try {
    result = dispatch_step(act, inputs, max_advance);
  } catch (const Error& e) {
    record_error(&act, e.what());
    throw;
  } catch (const std::exception& e) {
    const std::string msg = act.sid + " step at " + to_string(act.when) + ": " + e.what();
    record_error(&act, msg);
    throw ProtocolError(msg);
  }

  TraceRecord step;
  step.when = act.when;
  step.sid = act.sid;
  step.rank = slot.rank;
  step.action = TraceAction::Step;
  step.cause = act.cause;
  step.max_advance = max_advance;
  step.next_step = result.next_step;
  step.inputs = inputs_to_json(inputs);
  step.inputs_digest = digest(step.inputs);
  step.pushed = pushed;
  step.pulled_max_tick = pulled_max;
  record(std::move(step));

  for (auto& w : slot.binding.sim->take_warnings()) {
    TraceRecord r;
    r.when = act.when;
    r.sid = act.sid;
    r.rank = slot.rank;
    r.action = TraceAction::Warning;
    r.detail = std::move(w);
    record(std::move(r));
  }

  try {
    outputs = slot.binding.sim->get_data(slot.request);
  } catch (const Error& e) {
    record_error(&act, e.what());
    throw;
  } catch (const std::exception& e) {
    const std::string msg = act.sid + " get_data at " + to_string(act.when) + ": " + e.what();
    record_error(&act, msg);
    throw ProtocolError(msg);
  }

  TraceRecord data;
  data.when = act.when;
  data.sid = act.sid;
  data.rank = slot.rank;
  data.action = TraceAction::GetData;
  data.outputs = to_json(outputs)["data"];
  data.outputs_digest = digest(data.outputs);
  data.output_time = outputs.output_time;
  record(std::move(data));

  try {
    process_outputs(act.sid, act.when, outputs);
  } catch (const Error& e) {
    record_error(&act, e.what());
    throw;
  }
}

std::chrono::steady_clock::duration Scheduler::deadline_of(Tick tick) const {
  const double seconds = ticks_to_seconds(tick, world_.time_resolution) * world_.rt_factor.value_or(0.0);
  return std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(seconds));
}

Tick Scheduler::wall_tick() const {
  std::lock_guard lock(inbox_mutex_);
  if (!start_ || !world_.rt_factor) return 0;
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - *start_).count();
  return seconds_to_ticks(elapsed / *world_.rt_factor, world_.time_resolution);
}

Tick Scheduler::inject_external_event(const std::string& sid, Tick event_time, const std::string& origin) {
  if (!world_.rt_factor) throw RejectedError("external events require real-time pacing (rt_factor)");
  if (!slot_by_sid_.count(sid)) throw RejectedError("unknown simulator '" + sid + "'");
  if (finished_) throw RejectedError("the run has finished");
  const Tick target = std::max(event_time, wall_tick() + 1);
  if (target >= until_) {
    throw RejectedError("event tick " + std::to_string(target) + " is not before until=" + std::to_string(until_));
  }
  {
    std::lock_guard lock(inbox_mutex_);
    inbox_.push_back({sid, target, origin});
  }
  inbox_cv_.notify_all();
  return target;
}

void Scheduler::drain_inbox() {
  std::deque<InboxItem> items;
  {
    std::lock_guard lock(inbox_mutex_);
    items.swap(inbox_);
  }
  for (auto& item : items) {
    const Tick target = std::max(item.tick, current_tick_.load() + 1);
    if (target >= until_) {
      spdlog::warn("external event for {} at tick {} dropped: past until", item.sid, target);
      continue;
    }
    enqueue(slot_index(item.sid), {target, 0}, kExternal, item.origin);
  }
}

bool Scheduler::rt_pace(Tick tick) {
  std::unique_lock lock(inbox_mutex_);
  const auto deadline = *start_ + deadline_of(tick);
  const auto now = std::chrono::steady_clock::now();
  if (now > deadline + options_.overrun_tolerance) {
    lock.unlock();
    TraceRecord r;
    r.when = {tick, 0};
    r.action = TraceAction::Overrun;
    r.slack_ms = -std::chrono::duration<double, std::milli>(now - deadline).count();
    r.detail = "deadline of tick " + std::to_string(tick) + " missed";
    record(std::move(r));
    current_tick_ = tick;
    return true;
  }
  if (inbox_cv_.wait_until(lock, deadline, [&] { return !inbox_.empty(); })) return false;
  current_tick_ = tick;
  return true;
}

std::vector<TraceRecord> Scheduler::run() {
  {
    std::lock_guard lock(inbox_mutex_);
    start_ = std::chrono::steady_clock::now();
  }
  spdlog::info("run: {} simulators, until={}, rt_factor={}", slots_.size(), until_,
               world_.rt_factor ? std::to_string(*world_.rt_factor) : std::string("none"));
  try {
    for (;;) {
      drain_inbox();
      Tick next_tick = until_;
      if (!queue_.empty() && queue_.begin()->first.tick < until_) next_tick = queue_.begin()->first.tick;
      if (world_.rt_factor && next_tick > paced_tick_) {
        if (!rt_pace(next_tick)) continue;
        paced_tick_ = next_tick;
      }
      auto act = next_activation();
      if (!act) break;
      spdlog::debug("activate {} at {}", act->sid, to_string(act->when));
      execute(*act);
    }
  } catch (...) {
    finished_ = true;
    throw;
  }
  finished_ = true;
  return trace_;
}

std::size_t Scheduler::step_calls(const std::string& sid) const { return slots_[slot_index(sid)].steps; }

}  // namespace cosim
