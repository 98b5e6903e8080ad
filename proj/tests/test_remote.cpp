#include <doctest.h>

#include <atomic>
#include <thread>

#include "conformance.hpp"
#include "cosim/scenario_file.hpp"
#include "cosim/trace.hpp"
#include "support.hpp"

using namespace cosim;

TEST_CASE("builtins behave identically in process and over a peer thread") {
  for (const auto& script : conformance::scripts()) {
    CAPTURE(script.builtin);
    const Json local = conformance::in_process(script);
    bool ordered = false;
    const Json remote = conformance::over_thread(script, &ordered);
    CHECK(ordered);
    CHECK(local.dump() == remote.dump());
  }
}

TEST_CASE("builtins behave identically in a spawned peer process") {
  for (const auto& script : conformance::scripts()) {
    CAPTURE(script.builtin);
    CHECK(conformance::in_process(script).dump() == conformance::over_process(script, COSIM_PEER_PATH).dump());
  }
}

TEST_CASE("transcripts include contract violations") {
  const auto script = conformance::scripts().front();
  const Json t = conformance::in_process(script);
  auto find = [&](const std::string& key) {
    for (const auto& e : t) {
      if (e.contains(key)) return e[key];
    }
    return Json();
  };
  CHECK(find("create-unknown-model") == "ProtocolError");
  CHECK(find("get_data-undeclared") == "ProtocolError");
  CHECK(find("step-backwards") == "ProtocolError");
  CHECK(find("stop-again") == "ok");
  CHECK(find("step-after-stop") == "ProtocolError");
}

TEST_CASE("the order checker") {
  using conformance::well_ordered;
  CHECK(well_ordered({"init", "create", "create", "step", "get_data", "step", "stop"}));
  CHECK(well_ordered({"init", "stop"}));
  CHECK_FALSE(well_ordered({"create", "init"}));
  CHECK_FALSE(well_ordered({"init", "step", "create"}));
  CHECK_FALSE(well_ordered({"init", "get_data"}));
  CHECK_FALSE(well_ordered({"init", "stop", "step"}));
}

namespace {

ScenarioDescription wire_delay() {
  auto desc = parse_scenario_file(std::string(COSIM_SCENARIO_DIR) + "/wire_delay.json");
  for (auto& s : desc.simulators) {
    if (s.attach == SimConfig::Attach::Spawn && !s.command.empty() && s.command[0] == "cosim_peer") {
      s.command[0] = COSIM_PEER_PATH;
    }
  }
  return desc;
}

std::unique_ptr<net::LineChannel> attach_peer(std::uint16_t port, std::thread& th, Simulator& sim,
                                              const std::string& sid) {
  net::TcpListener listener(port);
  th = std::thread([&sim, sid, p = listener.port()] {
    auto ch = net::connect_tcp("127.0.0.1", p);
    serve_simulator(*ch, sim, sid);
  });
  HandshakeBroker broker(listener);
  return broker.await(sid, std::chrono::seconds(10));
}

}  // namespace

TEST_CASE("a scenario with a spawned network simulator matches the builtin one") {
  auto remote_desc = wire_delay();
  auto local_desc = wire_delay();
  for (auto& s : local_desc.simulators) {
    if (s.attach == SimConfig::Attach::Spawn) {
      s.attach = SimConfig::Attach::Builtin;
      s.builtin = "DelayNet";
      s.command.clear();
    }
  }
  auto remote = build_world(remote_desc)->run();
  auto local = build_world(local_desc)->run();
  REQUIRE(remote.size() == local.size());
  for (std::size_t i = 0; i < remote.size(); ++i) CHECK(to_json_line(remote[i]) == to_json_line(local[i]));
  CHECK(check_trace(remote, 100).empty());
}

TEST_CASE("garbage on the wire is a protocol error") {
  net::TcpListener listener(0);
  ChildProcess child({COSIM_PEER_PATH, "--fault", "garbage", "Relay", "127.0.0.1", std::to_string(listener.port()), "r"});
  HandshakeBroker broker(listener);
  LifecycleGuard g(std::make_unique<RemoteSimulator>(broker.await("r", std::chrono::seconds(10))));
  g.init("r", TimeResolution(1.0), Json::object());
  g.create(1, "Relay", Json::object());
  CHECK_THROWS_AS(g.step(0, {}, 0), ProtocolError);
}

TEST_CASE("a peer that stalls its own clock is rejected") {
  net::TcpListener listener(0);
  ChildProcess child(
      {COSIM_PEER_PATH, "--fault", "stall-step", "Ramp", "127.0.0.1", std::to_string(listener.port()), "r"});
  HandshakeBroker broker(listener);
  LifecycleGuard g(std::make_unique<RemoteSimulator>(broker.await("r", std::chrono::seconds(10))));
  g.init("r", TimeResolution(1.0), Json::object());
  g.create(1, "Ramp", Json::object());
  CHECK_THROWS_AS(g.step(0, {}, 10), ProtocolError);
}

TEST_CASE("handshake fails when the spawned peer dies") {
  net::TcpListener listener(0);
  ChildProcess child({"/bin/false"});
  HandshakeBroker broker(listener);
  CHECK_THROWS_AS(broker.await("x", std::chrono::seconds(5), [&] { return child.running(); }), ProtocolError);
}

TEST_CASE("set_event travels over the wire") {
  testing::ScriptedSim sim(ComponentType::EventBased, {"x"}, {"x"});
  std::thread peer;
  auto channel = attach_peer(0, peer, sim, "ev");
  RemoteSimulator remote(std::move(channel));
  std::atomic<Tick> got{-1};
  remote.attach_event_channel([&](Tick t) { got = t; });
  remote.init("ev", TimeResolution(1.0), Json::object());
  sim.request_event(42);
  CHECK(testing::wait_until([&] { return got.load() == 42; }, std::chrono::seconds(5)));
  remote.stop();
  peer.join();
}
