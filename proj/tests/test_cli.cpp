#include <doctest.h>
#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "cosim/trace.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = COSIM_CLI_PATH;
const std::string kDir = COSIM_SCENARIO_DIR;

int run(const std::string& args) {
  const std::string peer_dir = fs::path(COSIM_PEER_PATH).parent_path().string();
  const std::string cmd = "PATH=\"" + peer_dir + ":$PATH\" " + kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path temp(const std::string& name) { return fs::temp_directory_path() / ("cosim_cli_" + name); }

}  // namespace

TEST_CASE("cli: a clean run writes a checkable trace") {
  const auto trace = temp("delay.jsonl");
  CHECK(run("run " + kDir + "/delay_net.json --trace " + trace.string()) == 0);
  const auto records = cosim::read_trace_file(trace.string());
  CHECK_FALSE(records.empty());
  CHECK(cosim::check_trace(records, 100).empty());
  CHECK(run("check " + trace.string()) == 0);
  fs::remove(trace);
}

TEST_CASE("cli: runs are byte-identical") {
  const auto a = temp("a.jsonl");
  const auto b = temp("b.jsonl");
  REQUIRE(run("run " + kDir + "/negotiation.json --trace " + a.string()) == 0);
  REQUIRE(run("run " + kDir + "/negotiation.json --trace " + b.string()) == 0);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(slurp(a) == slurp(b));
  CHECK_FALSE(slurp(a).empty());
  fs::remove(a);
  fs::remove(b);
}

TEST_CASE("cli: a divergent loop exits with 2 and the trace ends in an error") {
  const auto trace = temp("div.jsonl");
  CHECK(run("run " + kDir + "/negotiation_divergent.json --trace " + trace.string()) == 2);
  const auto records = cosim::read_trace_file(trace.string());
  REQUIRE_FALSE(records.empty());
  CHECK(records.back().action == cosim::TraceAction::Error);
  CHECK(records.back().when.iteration == 99);
  fs::remove(trace);
}

TEST_CASE("cli: a misbehaving peer exits with 3") {
  const auto scenario = temp("fault.json");
  std::ofstream(scenario) << R"({"world": {"until": 5},
    "simulators": [{"sid": "r", "spawn": ["cosim_peer", "--fault", "stall-step", "Ramp"]}],
    "entities": [{"sid": "r", "model": "Ramp"}]})";
  CHECK(run("run " + scenario.string()) == 3);
  fs::remove(scenario);
}

TEST_CASE("cli: a spawned peer scenario runs") { CHECK(run("run " + kDir + "/wire_delay.json") == 0); }

TEST_CASE("cli: bad input exits with 1") {
  CHECK(run("run /nonexistent.json") == 1);
  const auto scenario = temp("bad.json");
  std::ofstream(scenario) << R"({"world": {}})";
  CHECK(run("run " + scenario.string()) == 1);
  fs::remove(scenario);
}

TEST_CASE("cli: check flags a tampered trace") {
  const auto trace = temp("tamper.jsonl");
  REQUIRE(run("run " + kDir + "/delay_net.json --trace " + trace.string()) == 0);
  auto records = cosim::read_trace_file(trace.string());
  REQUIRE(records.size() > 3);
  std::swap(records[1], records[2]);
  {
    std::ofstream out(trace);
    for (const auto& r : records) out << cosim::to_json_line(r) << '\n';
  }
  CHECK(run("check " + trace.string()) == 1);
  fs::remove(trace);
}

TEST_CASE("cli: --rt paces wall time") {
  const auto start = std::chrono::steady_clock::now();
  CHECK(run("run " + kDir + "/negotiation.json --until 5 --rt 1.0") == 0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(secs >= 5.0);
  CHECK(secs < 8.0);
}
