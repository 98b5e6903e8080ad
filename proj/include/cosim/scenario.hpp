#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cosim/api.hpp"
#include "cosim/graph.hpp"
#include "cosim/lifecycle.hpp"
#include "cosim/net.hpp"
#include "cosim/process.hpp"
#include "cosim/remote.hpp"
#include "cosim/scheduler.hpp"

namespace cosim {

/// How a simulator joins the world.
struct SimConfig {
  enum class Attach { Builtin, Spawn, Listen };

  std::string sid;
  Attach attach = Attach::Builtin;
  /// Builtin name for Attach::Builtin.
  std::string builtin;
  /// Command line for Attach::Spawn. "{host}", "{port}" and "{sid}" are
  /// substituted; without placeholders "<host> <port> <sid>" is appended.
  std::vector<std::string> command;
  Json sim_params = Json::object();

  static SimConfig make_builtin(std::string sid, std::string name, Json params = Json::object());
  static SimConfig make_spawn(std::string sid, std::vector<std::string> command, Json params = Json::object());
  static SimConfig make_listen(std::string sid, Json params = Json::object());
};

struct WorldOptions {
  /// Port for spawned and listening simulators; 0 picks a free one.
  std::uint16_t listen_port = 0;
  std::chrono::milliseconds handshake_timeout{10000};
};

/// A co-simulation scenario under construction, and its execution.
class World {
 public:
  explicit World(WorldConfig config = {}, WorldOptions options = {});
  ~World();
  World(const World&) = delete;
  World& operator=(const World&) = delete;

  const WorldConfig& config() const { return config_; }

  /// Attaches and initializes a simulator; returns its meta.
  const SimulatorMeta& add_simulator(const SimConfig& cfg);
  /// Attaches an in-process simulator instance.
  const SimulatorMeta& add_simulator(const std::string& sid, std::unique_ptr<Simulator> sim,
                                     const Json& sim_params = Json::object());

  /// Creates entities and returns their full ids.
  std::vector<std::string> create(const std::string& sid, int num, const std::string& model,
                                  const Json& params = Json::object());

  void connect(const std::string& src, const std::string& src_attr, const std::string& dest,
               const std::string& dest_attr, bool weak = false);

  DependencyGraph validate_graph() const;

  /// Builds the scheduler for a run; it can be used for external events
  /// before and during Scheduler::run(). `until` defaults to config().until.
  Scheduler& prepare(std::optional<Tick> until = std::nullopt, SchedulerOptions options = {});
  /// prepare() + Scheduler::run(); all simulators are stopped afterwards,
  /// also on error.
  std::vector<TraceRecord> run(std::optional<Tick> until = std::nullopt, SchedulerOptions options = {});
  /// Runs a prepared scheduler and stops all simulators afterwards.
  std::vector<TraceRecord> run_prepared();

  void stop_all();

  /// The simulator behind the contract guard (e.g. a builtin, for inspection).
  Simulator& simulator(const std::string& sid);
  const SimulatorMeta& meta(const std::string& sid) const;
  const std::map<std::string, EntityInfo>& entities() const { return entities_; }
  std::uint16_t listen_port();

 private:
  struct Entry {
    std::string sid;
    std::unique_ptr<ChildProcess> process;
    std::unique_ptr<LifecycleGuard> guard;
  };

  Entry& entry(const std::string& sid);
  const Entry& entry(const std::string& sid) const;
  const SimulatorMeta& attach(const std::string& sid, std::unique_ptr<Simulator> sim, const Json& sim_params,
                              std::unique_ptr<ChildProcess> process);
  void register_entity(const std::string& sid, const EntityDescriptor& e);
  HandshakeBroker& broker();

  WorldConfig config_;
  WorldOptions options_;
  std::unique_ptr<net::TcpListener> listener_;
  std::unique_ptr<HandshakeBroker> broker_;
  std::vector<Entry> sims_;
  std::map<std::string, EntityInfo> entities_;
  std::vector<Connection> connections_;
  std::unique_ptr<Scheduler> scheduler_;
};

}  // namespace cosim
