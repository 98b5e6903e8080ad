#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "cosim/errors.hpp"
#include "cosim/scenario_file.hpp"
#include "cosim/scenarios.hpp"
#include "cosim/trace.hpp"

using namespace cosim;

namespace {

TraceRecord step(std::uint64_t seq, Tick tick, std::uint32_t iteration, const std::string& sid, int rank,
                 Tick max_advance, int pushed = 0, std::optional<Tick> pulled = std::nullopt,
                 unsigned cause = kTriggered) {
  TraceRecord r;
  r.seq = seq;
  r.when = {tick, iteration};
  r.sid = sid;
  r.rank = rank;
  r.action = TraceAction::Step;
  r.cause = cause;
  r.max_advance = max_advance;
  r.pushed = pushed;
  r.pulled_max_tick = pulled;
  r.inputs = Json::object();
  r.inputs_digest = digest(r.inputs);
  return r;
}

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
  for (const auto& p : problems)
    if (p.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("cause strings") {
  CHECK(cause_to_string(kSelfScheduled) == "self_scheduled");
  CHECK(cause_to_string(kSelfScheduled | kTriggered) == "self_scheduled|triggered");
  CHECK(cause_from_string("triggered|external") == (kTriggered | kExternal));
  CHECK(cause_from_string(cause_to_string(7)) == 7u);
  for (auto a : {TraceAction::Step, TraceAction::GetData, TraceAction::SetEvent, TraceAction::Inject,
                 TraceAction::Error, TraceAction::Warning, TraceAction::Overrun}) {
    CHECK(trace_action_from_string(to_string(a)) == a);
  }
}

TEST_CASE("digest is FNV-1a over the compact dump") {
  // FNV-1a-64 of the empty string is the offset basis
  CHECK(digest(Json("")).size() == 16);
  CHECK(digest(Json::object()) == digest(Json::parse("{}")));
  CHECK(digest(Json{{"a", 1}}) != digest(Json{{"a", 2}}));
  // "{}" by hand
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : std::string("{}")) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  CHECK(digest(Json::object()) == buf);
}

TEST_CASE("trace lines round trip and keep field order") {
  auto trace = build_world(scenarios::delay_net(3, 300, 7))->run();
  REQUIRE(trace.size() > 5);
  for (const auto& r : trace) {
    const std::string line = to_json_line(r);
    CHECK(line.find('\n') == std::string::npos);
    CHECK(line.rfind("{\"seq\":", 0) == 0);
    CHECK(trace_record_from_json(Json::parse(line)) == r);
  }
  const std::string first = to_json_line(trace[0]);
  CHECK(first.find("\"tick\"") < first.find("\"iteration\""));
  CHECK(first.find("\"iteration\"") < first.find("\"sid\""));
  CHECK(first.find("\"sid\"") < first.find("\"action\""));
}

TEST_CASE("trace files are read back") {
  auto trace = build_world(scenarios::negotiation(0, 8, 1))->run();
  const std::string path = "trace_roundtrip.jsonl";
  {
    std::ofstream out(path);
    for (const auto& r : trace) out << to_json_line(r) << "\n";
  }
  CHECK(read_trace_file(path) == trace);
  {
    std::ofstream out(path);
    out << to_json_line(trace[0]) << "\nnot json\n";
  }
  CHECK_THROWS_AS(read_trace_file(path), Error);
  std::remove(path.c_str());
}

TEST_CASE("clean synthetic trace") {
  std::vector<TraceRecord> t{step(0, 0, 0, "A", 0, 8, 0, std::nullopt, kSelfScheduled),
                             step(1, 3, 0, "B", 1, 5, 1), step(2, 9, 0, "B", 1, 20, 1)};
  CHECK(check_trace(t, 100).empty());
}

TEST_CASE("seq and order violations") {
  std::vector<TraceRecord> t{step(0, 3, 0, "A", 0, 10), step(0, 4, 0, "A", 0, 10)};
  CHECK(mentions(check_trace(t, 100), "seq not increasing"));
  t = {step(0, 4, 0, "A", 0, 10), step(1, 3, 0, "A", 0, 10)};
  CHECK(mentions(check_trace(t, 100), "order"));
  t = {step(0, 4, 0, "B", 1, 10), step(1, 4, 0, "A", 0, 10)};
  CHECK(mentions(check_trace(t, 100), "order"));
  t = {step(0, 4, 0, "B", 0, 10), step(1, 4, 0, "A", 0, 10)};
  CHECK(mentions(check_trace(t, 100), "order"));
  t = {step(0, 4, 1, "A", 0, 10), step(1, 4, 0, "B", 1, 10)};
  CHECK(mentions(check_trace(t, 100), "order"));
}

TEST_CASE("iteration bound") {
  std::vector<TraceRecord> t{step(0, 0, 99, "A", 0, -1)};
  CHECK(check_trace(t, 100).empty());
  t = {step(0, 0, 100, "A", 0, -1)};
  CHECK(mentions(check_trace(t, 100), "max_loop_iterations"));
}

TEST_CASE("causality of pulled values") {
  std::vector<TraceRecord> t{step(0, 3, 0, "A", 0, 3, 0, Tick{4})};
  CHECK(mentions(check_trace(t, 100), "produced at tick 4"));
}

TEST_CASE("max_advance violations") {
  // B granted up to 8 at tick 3, then receives a pushed value at tick 5
  std::vector<TraceRecord> t{step(0, 3, 0, "B", 1, 8, 1), step(1, 5, 0, "B", 1, 9, 1)};
  CHECK(mentions(check_trace(t, 100), "inside max_advance 8"));
  // pulled value produced after the grant's tick
  t = {step(0, 3, 0, "B", 1, 8, 0, Tick{1}), step(1, 6, 0, "B", 1, 9, 0, Tick{4}, kSelfScheduled)};
  CHECK(mentions(check_trace(t, 100), "pulled value from tick 4"));
  // old pulled value is fine
  t = {step(0, 3, 0, "B", 1, 8, 0, Tick{1}), step(1, 6, 0, "B", 1, 9, 0, Tick{3}, kSelfScheduled)};
  CHECK(check_trace(t, 100).empty());
  // external activations are exempt
  t = {step(0, 3, 0, "B", 1, 8, 1), step(1, 5, 0, "B", 1, 9, 1, std::nullopt, kExternal)};
  CHECK(check_trace(t, 100).empty());
  // after the grant expires deliveries are fine
  t = {step(0, 3, 0, "B", 1, 8, 1), step(1, 9, 0, "B", 1, 20, 1)};
  CHECK(check_trace(t, 100).empty());
  // other simulators are unaffected
  t = {step(0, 3, 0, "B", 1, 8, 1), step(1, 5, 0, "C", 1, 9, 1)};
  CHECK(check_trace(t, 100).empty());
}
