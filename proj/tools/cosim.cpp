// cosim: run scenario files and check trace files.

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <chrono>
#include <fstream>
#include <iostream>
#include <thread>

#include "cosim/control.hpp"
#include "cosim/errors.hpp"
#include "cosim/log.hpp"
#include "cosim/scenario_file.hpp"
#include "cosim/trace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitLoopLimit = 2;
constexpr int kExitProtocol = 3;

struct RunArgs {
  std::string scenario;
  std::string trace_path;
  std::optional<double> rt;
  std::optional<cosim::Tick> until;
  std::optional<int> control_port;
  int listen_port = 0;
  double linger = 0.0;
};

int run_command(const RunArgs& args) {
  using namespace cosim;
  ScenarioDescription desc = parse_scenario_file(args.scenario);
  if (args.rt) desc.world.rt_factor = *args.rt;
  if (args.until) desc.world.until = *args.until;
  desc.world.validate();

  std::ofstream trace_file;
  if (!args.trace_path.empty()) {
    trace_file.open(args.trace_path, std::ios::binary | std::ios::trunc);
    if (!trace_file) throw Error("cannot open trace file " + args.trace_path);
  }
  const bool realtime = desc.world.rt_factor.has_value();

  WorldOptions options;
  options.listen_port = static_cast<std::uint16_t>(args.listen_port);
  auto world = build_world(desc, options);

  TraceLog log;
  SchedulerOptions sched_options;
  sched_options.on_record = [&](const TraceRecord& r) {
    if (trace_file.is_open()) {
      trace_file << to_json_line(r) << '\n';
      if (realtime) trace_file.flush();
    }
    log.append(r);
  };
  Scheduler& scheduler = world->prepare(std::nullopt, sched_options);

  std::unique_ptr<ControlServer> control;
  if (args.control_port) {
    control = std::make_unique<ControlServer>(scheduler, log);
    const auto port = control->start(static_cast<std::uint16_t>(*args.control_port));
    std::cerr << "control endpoint: http://127.0.0.1:" << port << std::endl;
  }

  auto finish = [&] {
    log.finish();
    if (trace_file.is_open()) trace_file.flush();
    if (control && args.linger > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(args.linger));
    }
    if (control) control->stop();
  };
  try {
    world->run_prepared();
  } catch (...) {
    finish();
    throw;
  }
  finish();
  return kExitOk;
}

int check_command(const std::string& path, int max_loop) {
  const auto trace = cosim::read_trace_file(path);
  const auto problems = cosim::check_trace(trace, max_loop);
  for (const auto& p : problems) std::cout << p << "\n";
  std::cout << trace.size() << " records, " << problems.size() << " violations\n";
  return problems.empty() ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  cosim::configure_logging();
  CLI::App app{"co-simulation orchestrator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "run a scenario file");
  run_cmd->add_option("scenario", run.scenario, "scenario JSON file")->required();
  run_cmd->add_option("--trace", run.trace_path, "write the JSONL trace to PATH");
  run_cmd->add_option("--rt", run.rt, "real-time factor (wall seconds per simulated second)")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--until", run.until, "exclusive end tick (overrides the file)")->check(CLI::PositiveNumber);
  run_cmd->add_option("--control-port", run.control_port, "serve the HTTP control endpoint (0 = any port)")
      ->check(CLI::Range(0, 65535));
  run_cmd->add_option("--listen-port", run.listen_port, "port for wire-attached simulators (0 = any)")
      ->check(CLI::Range(0, 65535));
  run_cmd->add_option("--linger", run.linger, "keep the control endpoint up for SECONDS after the run")
      ->check(CLI::NonNegativeNumber);

  std::string check_path;
  int max_loop = 100;
  auto* check_cmd = app.add_subcommand("check", "validate a trace file offline");
  check_cmd->add_option("trace", check_path, "trace JSONL file")->required();
  check_cmd->add_option("--max-loop", max_loop, "max_loop_iterations of the run")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run_command(run);
    return check_command(check_path, max_loop);
  } catch (const cosim::LoopLimitError& e) {
    std::cerr << "loop limit: " << e.what() << std::endl;
    return kExitLoopLimit;
  } catch (const cosim::ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << std::endl;
    return kExitProtocol;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitFailure;
  }
}
