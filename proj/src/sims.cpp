#include "cosim/sims.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "cosim/errors.hpp"

namespace cosim::sims {

namespace {

std::optional<double> as_number(const Json& v) {
  if (v.is_number()) return v.get<double>();
  return std::nullopt;
}

const std::vector<InputValue>* find_input(const InputBundle& inputs, const std::string& eid,
                                          const std::string& attr) {
  auto e = inputs.find(eid);
  if (e == inputs.end()) return nullptr;
  auto a = e->second.find(attr);
  return a == e->second.end() ? nullptr : &a->second;
}

bool requested(const OutputRequest& request, const std::string& eid, const std::string& attr) {
  auto it = request.find(eid);
  return it != request.end() && std::find(it->second.begin(), it->second.end(), attr) != it->second.end();
}

Tick positive_tick(const Json& params, const char* key, Tick fallback) {
  Tick v = params.is_object() ? params.value(key, fallback) : fallback;
  if (v <= 0) throw ProtocolError(std::string(key) + " must be a positive integer");
  return v;
}

ModelMeta model(std::vector<std::string> params, std::vector<std::string> attrs,
                std::vector<std::string> trigger = {}, std::vector<std::string> non_persistent = {}) {
  return ModelMeta{true, std::move(params), std::move(attrs), std::move(trigger), std::move(non_persistent)};
}

SimulatorMeta meta(ComponentType type, std::string name, ModelMeta m) {
  SimulatorMeta out;
  out.type = type;
  out.models.emplace(std::move(name), std::move(m));
  return out;
}

}  // namespace

SimulatorMeta BuiltinSimulator::init(const std::string& sid, TimeResolution resolution,
                                     const Json& sim_params) {
  sid_ = sid;
  resolution_ = resolution;
  configure(sim_params.is_null() ? Json::object() : sim_params);
  return meta_;
}

std::vector<EntityDescriptor> BuiltinSimulator::create(int num, const std::string& model,
                                                       const Json& model_params) {
  std::vector<EntityDescriptor> out;
  const Json params = model_params.is_null() ? Json::object() : model_params;
  for (int i = 0; i < num; ++i) {
    std::string eid = model + "-" + std::to_string(counters_[model]++);
    add_entity(eid, model, params);
    out.push_back({eid, model, {}});
  }
  return out;
}

std::vector<std::string> BuiltinSimulator::take_warnings() {
  std::vector<std::string> out;
  out.swap(warnings_);
  return out;
}

// --- Ramp -------------------------------------------------------------------

RampSim::RampSim()
    : BuiltinSimulator(meta(ComponentType::TimeBased, "Ramp", model({"slope"}, {"out", "bias"}))) {}

void RampSim::configure(const Json& sim_params) { step_size_ = positive_tick(sim_params, "step_size", 1); }

void RampSim::add_entity(const std::string& eid, const std::string&, const Json& params) {
  entities_[eid] = State{params.value("slope", 1.0), 0.0};
}

StepResult RampSim::step(Tick time, const InputBundle& inputs, Tick) {
  for (auto& [eid, state] : entities_) {
    double bias = 0.0;
    if (const auto* values = find_input(inputs, eid, "bias")) {
      for (const auto& v : *values) bias += as_number(v.value).value_or(0.0);
    }
    state.value = state.slope * static_cast<double>(time) + bias;
  }
  return {time + step_size_};
}

OutputBundle RampSim::get_data(const OutputRequest& request) {
  OutputBundle out;
  for (const auto& [eid, state] : entities_) {
    if (requested(request, eid, "out")) out.data[eid]["out"] = state.value;
  }
  return out;
}

// --- HybridRamp -------------------------------------------------------------

HybridRampSim::HybridRampSim()
    : BuiltinSimulator(meta(ComponentType::Hybrid, "Ramp",
                            model({"slope"}, {"out", "jump", "setpoint", "bias"}, {"setpoint"}, {"jump"}))) {}

void HybridRampSim::configure(const Json& sim_params) {
  step_size_ = positive_tick(sim_params, "step_size", 1);
  setpoint_min_ = sim_params.value("setpoint_min", setpoint_min_);
  setpoint_max_ = sim_params.value("setpoint_max", setpoint_max_);
}

void HybridRampSim::add_entity(const std::string& eid, const std::string&, const Json& params) {
  State s;
  s.slope = params.value("slope", 1.0);
  entities_[eid] = s;
}

StepResult HybridRampSim::step(Tick time, const InputBundle& inputs, Tick) {
  for (auto& [eid, state] : entities_) {
    state.jump.reset();
    if (const auto* values = find_input(inputs, eid, "setpoint")) {
      auto sp = as_number(values->back().value);
      if (!sp || *sp < setpoint_min_ || *sp > setpoint_max_) {
        warn(eid + ": setpoint " + values->back().value.dump() + " outside [" + std::to_string(setpoint_min_) +
             ", " + std::to_string(setpoint_max_) + "] ignored");
      } else {
        state.base_value = *sp;
        state.base_tick = time;
        state.jump = *sp;
      }
    }
    double bias = 0.0;
    if (const auto* values = find_input(inputs, eid, "bias")) {
      for (const auto& v : *values) bias += as_number(v.value).value_or(0.0);
    }
    state.value = state.base_value + state.slope * static_cast<double>(time - state.base_tick) + bias;
  }
  return {time + step_size_};
}

OutputBundle HybridRampSim::get_data(const OutputRequest& request) {
  OutputBundle out;
  for (const auto& [eid, state] : entities_) {
    if (requested(request, eid, "out")) out.data[eid]["out"] = state.value;
    if (state.jump && requested(request, eid, "jump")) out.data[eid]["jump"] = *state.jump;
  }
  return out;
}

// --- DelayNet ---------------------------------------------------------------

DelayNetSim::DelayNetSim()
    : BuiltinSimulator(meta(ComponentType::EventBased, "Node", model({}, {"send", "delivery"}))) {}

void DelayNetSim::configure(const Json& sim_params) {
  latency_ = positive_tick(sim_params, "latency", 1);
  const std::string emit = sim_params.value("emit", std::string("send"));
  if (emit != "send" && emit != "delivery") throw ProtocolError("emit must be 'send' or 'delivery'");
  emit_on_send_ = emit == "send";
}

void DelayNetSim::add_entity(const std::string& eid, const std::string&, const Json&) {
  nodes_.push_back(eid);
}

StepResult DelayNetSim::step(Tick time, const InputBundle& inputs, Tick max_advance) {
  ++step_calls_;
  outbox_.clear();
  outbox_time_.reset();

  while (!in_flight_.empty() && in_flight_.front().deliver_at <= time) {
    if (!emit_on_send_) outbox_.push_back(std::move(in_flight_.front()));
    in_flight_.pop_front();
  }

  for (const auto& node : nodes_) {
    const auto* values = find_input(inputs, node, "send");
    if (!values) continue;
    for (const auto& v : *values) {
      std::string dest = node;
      if (v.value.is_object() && v.value.contains("to") && v.value["to"].is_string()) {
        auto to = v.value["to"].get<std::string>();
        if (std::find(nodes_.begin(), nodes_.end(), to) != nodes_.end()) {
          dest = to;
        } else {
          warn(node + ": unknown destination '" + to + "', delivering locally");
        }
      }
      Message m{time + latency_, seq_++, dest, v.value};
      if (emit_on_send_) outbox_.push_back(m);
      // Constant latency keeps the queue sorted by (deliver_at, seq).
      in_flight_.push_back(std::move(m));
    }
  }
  if (emit_on_send_ && !outbox_.empty()) outbox_time_ = time + latency_;

  std::optional<Tick> next;
  if (!in_flight_.empty()) next = in_flight_.front().deliver_at;
  clock_ = next ? std::min(max_advance, *next - 1) : max_advance;
  clock_ = std::max(clock_, time);
  return {next};
}

OutputBundle DelayNetSim::get_data(const OutputRequest& request) {
  OutputBundle out;
  for (const auto& m : outbox_) {
    if (!requested(request, m.dest, "delivery")) continue;
    auto& slot = out.data[m.dest]["delivery"];
    if (slot.is_null()) slot = Json::array();
    slot.push_back(m.payload);
  }
  if (!out.empty()) out.output_time = outbox_time_;
  return out;
}

// --- Negotiator -------------------------------------------------------------

NegotiatorSim::NegotiatorSim()
    : BuiltinSimulator(meta(ComponentType::EventBased, "Negotiator",
                            model({"initial", "tolerance"}, {"start", "offer"}))) {}

void NegotiatorSim::add_entity(const std::string& eid, const std::string&, const Json& params) {
  State s;
  s.proposal = params.value("initial", 0.0);
  s.tolerance = params.value("tolerance", 1.0);
  if (s.tolerance < 0) throw ProtocolError("tolerance must be non-negative");
  entities_[eid] = s;
}

StepResult NegotiatorSim::step(Tick time, const InputBundle& inputs, Tick) {
  time_ = time;
  for (auto& [eid, state] : entities_) {
    state.outgoing.reset();
    if (const auto* offers = find_input(inputs, eid, "offer")) {
      auto received = as_number(offers->back().value);
      if (!received) {
        warn(eid + ": non-numeric offer ignored");
        continue;
      }
      // Exact bisection of distinct offers never closes the gap; with zero
      // tolerance a gap closed by rounding does not count as agreement.
      const double gap = std::abs(state.proposal - *received);
      if (gap > state.tolerance || (state.tolerance == 0.0 && state.rounds > 0)) {
        state.proposal = (state.proposal + *received) / 2.0;
        ++state.rounds;
        state.outgoing = state.proposal;
      }
    } else if (find_input(inputs, eid, "start")) {
      state.outgoing = state.proposal;
    }
  }
  return {};
}

OutputBundle NegotiatorSim::get_data(const OutputRequest& request) {
  OutputBundle out;
  for (const auto& [eid, state] : entities_) {
    if (state.outgoing && requested(request, eid, "offer")) out.data[eid]["offer"] = *state.outgoing;
  }
  if (!out.empty()) out.output_time = time_;
  return out;
}

// --- Collector --------------------------------------------------------------

CollectorSim::CollectorSim()
    : BuiltinSimulator(meta(ComponentType::EventBased, "Monitor", model({}, {"in"}))) {}

void CollectorSim::configure(const Json& sim_params) {
  if (sim_params.contains("attrs")) {
    auto& m = meta_.models.at("Monitor");
    m.attrs = sim_params["attrs"].get<std::vector<std::string>>();
  }
  log_path_ = sim_params.value("log_path", std::string());
}

void CollectorSim::add_entity(const std::string&, const std::string&, const Json&) {}

StepResult CollectorSim::step(Tick time, const InputBundle& inputs, Tick) {
  ++step_calls_;
  for (const auto& [eid, attrs] : inputs) {
    for (const auto& [attr, values] : attrs) {
      for (const auto& v : values) log_.push_back({time, eid, attr, v.source, v.value});
    }
  }
  return {};
}

OutputBundle CollectorSim::get_data(const OutputRequest&) { return {}; }

void CollectorSim::stop() {
  if (!log_path_.empty()) dump_log(log_path_);
}

void CollectorSim::dump_log(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write collector log to " + path);
  for (const auto& e : log_) {
    nlohmann::ordered_json j;
    j["tick"] = e.tick;
    j["eid"] = e.eid;
    j["attr"] = e.attr;
    j["source"] = e.source;
    j["value"] = e.value;
    out << j.dump() << '\n';
  }
}

// --- Relay ------------------------------------------------------------------

RelaySim::RelaySim()
    : BuiltinSimulator(meta(ComponentType::EventBased, "Relay", model({"gain"}, {"in", "out"}))) {}

void RelaySim::configure(const Json& sim_params) {
  hold_ = sim_params.value("hold", Tick{0});
  if (hold_ < 0) throw ProtocolError("hold must be non-negative");
}

void RelaySim::add_entity(const std::string& eid, const std::string&, const Json& params) {
  entities_[eid] = State{params.value("gain", 1.0), 0.0, false};
}

StepResult RelaySim::step(Tick time, const InputBundle& inputs, Tick) {
  bool any_input = false;
  for (auto& [eid, state] : entities_) {
    state.emit = false;
    if (const auto* values = find_input(inputs, eid, "in")) {
      double sum = 0.0;
      for (const auto& v : *values) sum += as_number(v.value).value_or(0.0);
      state.last = state.gain * sum;
      state.emit = true;
      any_input = true;
    }
  }
  if (!any_input) {
    // Self-scheduled repeat.
    for (auto& [eid, state] : entities_) state.emit = true;
    return {};
  }
  if (hold_ > 0) return {time + hold_};
  return {};
}

OutputBundle RelaySim::get_data(const OutputRequest& request) {
  OutputBundle out;
  for (const auto& [eid, state] : entities_) {
    if (state.emit && requested(request, eid, "out")) out.data[eid]["out"] = state.last;
  }
  return out;
}

// --- Agent ------------------------------------------------------------------

AgentSim::AgentSim()
    : BuiltinSimulator(meta(ComponentType::Hybrid, "Agent",
                            model({"sends", "to"}, {"msg", "inbox"}, {"inbox"}, {"msg"}))) {}

void AgentSim::add_entity(const std::string& eid, const std::string&, const Json& params) {
  State s;
  if (params.contains("sends")) s.sends = params["sends"].get<std::vector<Tick>>();
  std::sort(s.sends.begin(), s.sends.end());
  s.to = params.value("to", std::string());
  entities_[eid] = std::move(s);
}

StepResult AgentSim::step(Tick time, const InputBundle& inputs, Tick) {
  std::optional<Tick> next;
  for (auto& [eid, state] : entities_) {
    state.outgoing.reset();
    if (const auto* values = find_input(inputs, eid, "inbox")) {
      for (const auto& v : *values) state.received.emplace_back(time, v.value);
    }
    if (std::binary_search(state.sends.begin(), state.sends.end(), time)) {
      Json msg = {{"from", eid}, {"seq", state.sent++}, {"sent_at", time}};
      if (!state.to.empty()) msg["to"] = state.to;
      state.outgoing = std::move(msg);
    }
    auto it = std::upper_bound(state.sends.begin(), state.sends.end(), time);
    if (it != state.sends.end() && (!next || *it < *next)) next = *it;
  }
  return {next};
}

OutputBundle AgentSim::get_data(const OutputRequest& request) {
  OutputBundle out;
  for (const auto& [eid, state] : entities_) {
    if (state.outgoing && requested(request, eid, "msg")) out.data[eid]["msg"] = *state.outgoing;
  }
  return out;
}

// --- registry ---------------------------------------------------------------

std::vector<std::string> builtin_names() {
  return {"Ramp", "HybridRamp", "DelayNet", "Negotiator", "Collector", "Relay", "Agent"};
}

std::unique_ptr<Simulator> make_builtin(const std::string& name) {
  std::string key;
  for (char c : name) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (key == "ramp") return std::make_unique<RampSim>();
  if (key == "hybridramp") return std::make_unique<HybridRampSim>();
  if (key == "delaynet") return std::make_unique<DelayNetSim>();
  if (key == "negotiator") return std::make_unique<NegotiatorSim>();
  if (key == "collector") return std::make_unique<CollectorSim>();
  if (key == "relay") return std::make_unique<RelaySim>();
  if (key == "agent") return std::make_unique<AgentSim>();
  throw ScenarioError("unknown builtin simulator '" + name + "'");
}

}  // namespace cosim::sims
