#include "cosim/remote.hpp"

#include <spdlog/spdlog.h>

#include "cosim/errors.hpp"

namespace cosim {

using namespace std::chrono_literals;

RemoteSimulator::RemoteSimulator(std::unique_ptr<net::LineChannel> channel,
                                 std::chrono::milliseconds call_timeout)
    : channel_(std::move(channel)), call_timeout_(call_timeout) {
  reader_ = std::thread([this] { read_loop(); });
}

RemoteSimulator::~RemoteSimulator() {
  channel_->shutdown();
  if (reader_.joinable()) reader_.join();
}

void RemoteSimulator::read_loop() {
  for (;;) {
    std::optional<std::string> line;
    std::string error;
    try {
      line = channel_->read_line();
    } catch (const std::exception& e) {
      error = e.what();
    }
    if (!line) {
      std::lock_guard lock(mutex_);
      closed_ = true;
      failure_ = error.empty() ? "connection closed by simulator" : error;
      cv_.notify_all();
      return;
    }
    wire::Message msg;
    try {
      msg = wire::decode_message(*line);
    } catch (const DecodeError& e) {
      std::lock_guard lock(mutex_);
      closed_ = true;
      failure_ = std::string("undecodable frame from simulator: ") + e.what();
      cv_.notify_all();
      return;
    }
    if (msg.kind == wire::Kind::Notify) {
      EventChannel events;
      {
        std::lock_guard lock(mutex_);
        events = events_;
      }
      if (msg.method == "set_event" && msg.params.contains("time") &&
          msg.params["time"].is_number_integer()) {
        if (!events) {
          spdlog::warn("{}: set_event dropped, no scheduler channel", sid_);
          continue;
        }
        try {
          events(msg.params["time"].get<Tick>());
        } catch (const std::exception& e) {
          spdlog::warn("{}: set_event rejected: {}", sid_, e.what());
        }
      } else {
        spdlog::debug("{}: ignoring notify '{}'", sid_, msg.method);
      }
      continue;
    }
    if (msg.kind == wire::Kind::Request) {
      channel_->write(wire::encode_message(wire::Message::error(msg.id, "simulators cannot send requests")));
      continue;
    }
    std::lock_guard lock(mutex_);
    reply_ = std::move(msg);
    cv_.notify_all();
  }
}

Json RemoteSimulator::call(const std::string& method, Json params) {
  const std::uint64_t id = next_id_++;
  {
    std::lock_guard lock(mutex_);
    if (closed_) throw ProtocolError(sid_ + ": " + failure_);
    reply_.reset();
  }
  channel_->write(wire::encode_message(wire::Message::request(id, method, std::move(params))));
  std::unique_lock lock(mutex_);
  if (!cv_.wait_for(lock, call_timeout_, [&] { return reply_.has_value() || closed_; })) {
    throw ProtocolError(sid_ + ": timed out waiting for '" + method + "' response");
  }
  if (!reply_) throw ProtocolError(sid_ + ": " + failure_);
  wire::Message msg = std::move(*reply_);
  reply_.reset();
  if (msg.id != id) {
    throw ProtocolError(sid_ + ": response id " + std::to_string(msg.id) + " does not match request " +
                        std::to_string(id));
  }
  if (msg.kind == wire::Kind::Error) throw ProtocolError(sid_ + ": " + msg.message);
  return std::move(msg.result);
}

SimulatorMeta RemoteSimulator::init(const std::string& sid, TimeResolution resolution,
                                    const Json& sim_params) {
  sid_ = sid;
  Json result = call("init", {{"sid", sid},
                              {"time_resolution", resolution.seconds_per_tick()},
                              {"sim_params", sim_params.is_null() ? Json::object() : sim_params}});
  return meta_from_json(result);
}

std::vector<EntityDescriptor> RemoteSimulator::create(int num, const std::string& model,
                                                      const Json& model_params) {
  Json result = call("create", {{"num", num},
                                {"model", model},
                                {"model_params", model_params.is_null() ? Json::object() : model_params}});
  if (!result.is_array()) throw ProtocolError(sid_ + ": create must return a list");
  std::vector<EntityDescriptor> out;
  for (const auto& e : result) out.push_back(entity_from_json(e));
  return out;
}

StepResult RemoteSimulator::step(Tick time, const InputBundle& inputs, Tick max_advance) {
  Json result = call("step", {{"time", time}, {"inputs", inputs_to_json(inputs)}, {"max_advance", max_advance}});
  if (result.is_null()) return {};
  if (!result.is_number_integer()) throw ProtocolError(sid_ + ": step must return an integer or null");
  return {result.get<Tick>()};
}

OutputBundle RemoteSimulator::get_data(const OutputRequest& request) {
  return outputs_from_json(call("get_data", {{"outputs", request_to_json(request)}}));
}

void RemoteSimulator::stop() {
  if (stopped_) return;
  stopped_ = true;
  {
    std::lock_guard lock(mutex_);
    if (closed_) return;
  }
  try {
    call("stop", Json::object());
  } catch (const ProtocolError& e) {
    spdlog::debug("{}: stop: {}", sid_, e.what());
  }
  channel_->shutdown();
}

void RemoteSimulator::attach_event_channel(EventChannel channel) {
  std::lock_guard lock(mutex_);
  events_ = std::move(channel);
}

void serve_simulator(net::LineChannel& channel, Simulator& sim, const std::string& sid) {
  std::atomic<std::uint64_t> notify_id{1};
  auto send = [&](const wire::Message& m) { channel.write(wire::encode_message(m)); };
  send(wire::Message::notify(notify_id++, "hello", {{"sid", sid}}));
  sim.attach_event_channel([&](Tick t) {
    send(wire::Message::notify(notify_id++, "set_event", {{"time", t}}));
  });

  for (;;) {
    auto line = channel.read_line();
    if (!line) return;
    wire::Message req;
    try {
      req = wire::decode_message(*line);
    } catch (const DecodeError& e) {
      send(wire::Message::error(0, e.what()));
      continue;
    }
    if (req.kind != wire::Kind::Request) {
      if (req.kind != wire::Kind::Notify) send(wire::Message::error(req.id, "expected a request"));
      continue;
    }
    const Json& p = req.params;
    try {
      if (req.method == "init") {
        SimulatorMeta meta = sim.init(p.at("sid").get<std::string>(),
                                      TimeResolution(p.at("time_resolution").get<double>()),
                                      p.value("sim_params", Json::object()));
        send(wire::Message::response(req.id, to_json(meta)));
      } else if (req.method == "create") {
        auto entities = sim.create(p.at("num").get<int>(), p.at("model").get<std::string>(),
                                   p.value("model_params", Json::object()));
        Json list = Json::array();
        for (const auto& e : entities) list.push_back(to_json(e));
        send(wire::Message::response(req.id, list));
      } else if (req.method == "step") {
        StepResult r = sim.step(p.at("time").get<Tick>(), inputs_from_json(p.at("inputs")),
                                p.at("max_advance").get<Tick>());
        send(wire::Message::response(req.id, r.next_step ? Json(*r.next_step) : Json(nullptr)));
      } else if (req.method == "get_data") {
        send(wire::Message::response(req.id, to_json(sim.get_data(request_from_json(p.at("outputs"))))));
      } else if (req.method == "stop") {
        sim.stop();
        send(wire::Message::response(req.id, nullptr));
        return;
      } else {
        send(wire::Message::error(req.id, "unknown method '" + req.method + "'"));
      }
    } catch (const std::exception& e) {
      send(wire::Message::error(req.id, e.what()));
    }
  }
}

std::unique_ptr<net::LineChannel> HandshakeBroker::await(const std::string& sid,
                                                         std::chrono::milliseconds timeout,
                                                         const std::function<bool()>& still_alive) {
  if (auto it = parked_.find(sid); it != parked_.end()) {
    auto channel = std::move(it->second);
    parked_.erase(it);
    return channel;
  }
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    if (still_alive && !still_alive()) {
      throw ProtocolError(sid + ": simulator process exited before handshake");
    }
    auto channel = listener_.accept(100ms);
    if (!channel) continue;
    try {
      auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      auto line = channel->read_line(std::max(remaining, std::chrono::milliseconds(1)));
      if (!line) continue;
      auto hello = wire::decode_message(*line);
      if (hello.kind != wire::Kind::Notify || hello.method != "hello" || !hello.params.contains("sid") ||
          !hello.params["sid"].is_string()) {
        spdlog::warn("dropping connection without hello handshake");
        continue;
      }
      auto who = hello.params["sid"].get<std::string>();
      if (who == sid) return channel;
      parked_[who] = std::move(channel);
    } catch (const ProtocolError& e) {
      spdlog::warn("handshake failed: {}", e.what());
    }
  }
  throw ProtocolError(sid + ": handshake timed out");
}

}  // namespace cosim
