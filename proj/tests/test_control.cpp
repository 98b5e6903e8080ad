#include <doctest.h>
#include <httplib.h>

#include <thread>

#include "cosim/control.hpp"
#include "cosim/scenario_file.hpp"
#include "support.hpp"

using namespace cosim;

namespace {

ScenarioDescription operator_scenario(Tick until, std::optional<double> rt_factor) {
  auto d = parse_scenario_file(std::string(COSIM_SCENARIO_DIR) + "/hil_rt.json");
  d.world.until = until;
  d.world.rt_factor = rt_factor;
  return d;
}

/// A prepared world running on a background thread with the control
/// endpoint attached.
struct LiveRun {
  TraceLog log;
  std::unique_ptr<World> world;
  Scheduler* scheduler = nullptr;
  std::unique_ptr<ControlServer> server;
  std::thread runner;
  std::vector<TraceRecord> trace;
  std::string failure;

  LiveRun(Tick until, std::optional<double> rt_factor) {
    world = build_world(operator_scenario(until, rt_factor));
    SchedulerOptions opts;
    opts.on_record = [this](const TraceRecord& r) { log.append(r); };
    scheduler = &world->prepare(std::nullopt, opts);
    server = std::make_unique<ControlServer>(*scheduler, log);
    server->start(0);
  }
  void start() {
    runner = std::thread([this] {
      try {
        trace = world->run_prepared();
      } catch (const std::exception& e) {
        failure = e.what();
      }
      log.finish();
    });
  }
  void join() {
    if (runner.joinable()) runner.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", server->port());
    c.set_read_timeout(10, 0);
    return c;
  }
  ~LiveRun() {
    join();
    server->stop();
  }
};

httplib::Result post_event(LiveRun& run, const std::string& body) {
  auto c = run.client();
  return c.Post("/events", body, "application/json");
}

std::string read_stream(LiveRun& run, const std::string& path, const httplib::Headers& headers = {}) {
  auto c = run.client();
  std::string body;
  auto res = c.Get(path, headers, [&](const char* data, std::size_t n) {
    body.append(data, n);
    return true;
  });
  REQUIRE(res);
  CHECK(res->status == 200);
  return body;
}

}  // namespace

TEST_CASE("an event posted during a paced run reaches the simulator") {
  LiveRun run(40, 0.02);  // 20 ms per tick
  auto c = run.client();
  run.start();
  REQUIRE(testing::wait_until([&] { return run.scheduler->current_tick() >= 5; }));
  auto res = post_event(run, R"({"sid": "operator", "time": 30})");
  REQUIRE(res);
  CHECK(res->status == 202);
  const Json reply = Json::parse(res->body);
  CHECK(reply["sid"] == "operator");
  CHECK(reply["tick"] == 30);
  run.join();
  CHECK(run.failure.empty());
  bool stepped = false;
  for (const auto& r : testing::of_action(run.trace, TraceAction::Step, "operator")) {
    if (r.when.tick == 30 && (r.cause & kExternal) != 0) stepped = true;
  }
  CHECK(stepped);
  CHECK_FALSE(testing::of_action(run.trace, TraceAction::Inject, "operator").empty());
}

TEST_CASE("bad event requests are refused with distinct codes") {
  LiveRun run(30, 0.02);
  auto c = run.client();
  run.start();
  REQUIRE(testing::wait_until([&] { return run.scheduler->current_tick() >= 1; }));
  auto status = [&](const std::string& body) {
    auto res = post_event(run, body);
    REQUIRE(res);
    return res->status;
  };
  CHECK(status(R"({"sid": "nobody", "time": 10})") == 404);
  CHECK(status(R"({"sid": "operator", "time": 500})") == 422);
  CHECK(status(R"({"sid": "operator"})") == 400);
  CHECK(status(R"({"sid": "operator", "time": -1})") == 400);
  CHECK(status("not json") == 400);
  CHECK(status(R"({"sid": 3, "time": 4})") == 400);
  run.join();
}

TEST_CASE("events are refused without real-time pacing") {
  LiveRun run(10, std::nullopt);
  auto c = run.client();
  auto res = post_event(run, R"({"sid": "operator", "time": 5})");
  REQUIRE(res);
  CHECK(res->status == 409);
  run.start();
  run.join();
}

TEST_CASE("status reports a monotonic clock") {
  LiveRun run(25, 0.02);
  auto c = run.client();
  run.start();
  Tick last = -1;
  bool monotonic = true;
  int polls = 0;
  for (;;) {
    auto res = c.Get("/status");
    REQUIRE(res);
    REQUIRE(res->status == 200);
    const Json j = Json::parse(res->body);
    const Tick now = j["current_tick"].get<Tick>();
    if (now < last) monotonic = false;
    last = now;
    ++polls;
    CHECK(j["until"] == 25);
    CHECK(j["rt_factor"] == 0.02);
    if (j["finished"].get<bool>()) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  CHECK(monotonic);
  CHECK(polls > 3);
}

TEST_CASE("the trace stream replays the run and resumes") {
  LiveRun run(12, 0.01);
  run.start();
  // Subscribed while the run is live; ends when the log is finished.
  const auto live = parse_event_stream(read_stream(run, "/trace"));
  run.join();
  REQUIRE(!run.trace.empty());
  REQUIRE(live.size() == run.trace.size());
  for (std::size_t i = 0; i < live.size(); ++i) CHECK(to_json_line(live[i]) == to_json_line(run.trace[i]));

  const auto from = parse_event_stream(read_stream(run, "/trace?from=5"));
  REQUIRE(from.size() == run.trace.size() - 5);
  CHECK(from.front().seq == 5);

  const auto resumed = parse_event_stream(read_stream(run, "/trace", {{"Last-Event-ID", "7"}}));
  REQUIRE(resumed.size() == run.trace.size() - 8);
  CHECK(resumed.front().seq == 8);
}

TEST_CASE("stream framing") {
  const std::string body =
      "id: 0\ndata: " + to_json_line(TraceRecord{}) + "\n\n: ping\n\nid: 1\ndata: {\"seq\": 1";
  const auto records = parse_event_stream(body);
  REQUIRE(records.size() == 1);
  CHECK(records[0].seq == 0);
}

TEST_CASE("browser clients are allowed") {
  LiveRun run(3, std::nullopt);
  auto c = run.client();
  auto res = c.Options("/events");
  REQUIRE(res);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
  auto st = c.Get("/status");
  REQUIRE(st);
  CHECK(st->get_header_value("Access-Control-Allow-Origin") == "*");
  run.start();
  run.join();
}

TEST_CASE("an event posted at wall-second 3 is stepped near tick 4 and streamed promptly") {
  LiveRun run(7, 1.0);
  run.start();
  const auto t0 = std::chrono::steady_clock::now();
  std::this_thread::sleep_for(std::chrono::milliseconds(3000));
  auto res = post_event(run, R"({"sid": "operator", "time": 0})");
  const auto posted = std::chrono::steady_clock::now();
  REQUIRE(res);
  REQUIRE(res->status == 202);
  const Tick tick = Json::parse(res->body)["tick"].get<Tick>();
  CHECK(tick >= 3);
  CHECK(tick <= 5);

  // Follow the stream until the external step shows up.
  std::optional<double> seen_after;
  std::string buffer;
  auto c = run.client();
  c.Get("/trace", [&](const char* data, std::size_t n) {
    buffer.append(data, n);
    for (const auto& r : parse_event_stream(buffer)) {
      if (r.action == TraceAction::Step && r.sid == "operator" && (r.cause & kExternal) != 0) {
        seen_after = std::chrono::duration<double>(std::chrono::steady_clock::now() - posted).count();
        return false;
      }
    }
    return true;
  });
  REQUIRE(seen_after.has_value());
  CHECK(*seen_after < 2.0);
  CHECK(std::chrono::duration<double>(posted - t0).count() >= 3.0);
}
