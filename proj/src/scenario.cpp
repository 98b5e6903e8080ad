#include "cosim/scenario.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>

#include "cosim/errors.hpp"
#include "cosim/sims.hpp"

namespace cosim {

SimConfig SimConfig::make_builtin(std::string sid, std::string name, Json params) {
  SimConfig c;
  c.sid = std::move(sid);
  c.attach = Attach::Builtin;
  c.builtin = std::move(name);
  c.sim_params = std::move(params);
  return c;
}

SimConfig SimConfig::make_spawn(std::string sid, std::vector<std::string> command, Json params) {
  SimConfig c;
  c.sid = std::move(sid);
  c.attach = Attach::Spawn;
  c.command = std::move(command);
  c.sim_params = std::move(params);
  return c;
}

SimConfig SimConfig::make_listen(std::string sid, Json params) {
  SimConfig c;
  c.sid = std::move(sid);
  c.attach = Attach::Listen;
  c.sim_params = std::move(params);
  return c;
}

World::World(WorldConfig config, WorldOptions options) : config_(std::move(config)), options_(options) {
  config_.validate();
}

World::~World() {
  scheduler_.reset();
  stop_all();
}

World::Entry& World::entry(const std::string& sid) {
  for (auto& e : sims_) {
    if (e.sid == sid) return e;
  }
  throw ScenarioError("unknown simulator '" + sid + "'");
}

const World::Entry& World::entry(const std::string& sid) const {
  for (const auto& e : sims_) {
    if (e.sid == sid) return e;
  }
  throw ScenarioError("unknown simulator '" + sid + "'");
}

std::uint16_t World::listen_port() {
  if (!listener_) listener_ = std::make_unique<net::TcpListener>(options_.listen_port);
  return listener_->port();
}

HandshakeBroker& World::broker() {
  listen_port();
  if (!broker_) broker_ = std::make_unique<HandshakeBroker>(*listener_);
  return *broker_;
}

const SimulatorMeta& World::add_simulator(const SimConfig& cfg) {
  if (cfg.sid.empty() || cfg.sid.find('.') != std::string::npos) {
    throw ScenarioError("sid '" + cfg.sid + "' must be non-empty and must not contain '.'");
  }
  if (std::any_of(sims_.begin(), sims_.end(), [&](const Entry& e) { return e.sid == cfg.sid; })) {
    throw ScenarioError("duplicate sid '" + cfg.sid + "'");
  }
  switch (cfg.attach) {
    case SimConfig::Attach::Builtin:
      return attach(cfg.sid, sims::make_builtin(cfg.builtin), cfg.sim_params, nullptr);
    case SimConfig::Attach::Spawn: {
      const std::string port = std::to_string(listen_port());
      std::vector<std::string> argv;
      bool substituted = false;
      for (auto arg : cfg.command) {
        for (const auto& [key, value] :
             std::vector<std::pair<std::string, std::string>>{{"{host}", "127.0.0.1"}, {"{port}", port}, {"{sid}", cfg.sid}}) {
          for (auto pos = arg.find(key); pos != std::string::npos; pos = arg.find(key, pos + value.size())) {
            arg.replace(pos, key.size(), value);
            substituted = true;
          }
        }
        argv.push_back(std::move(arg));
      }
      if (!substituted) argv.insert(argv.end(), {"127.0.0.1", port, cfg.sid});
      auto process = std::make_unique<ChildProcess>(argv);
      ChildProcess* raw = process.get();
      auto channel = broker().await(cfg.sid, options_.handshake_timeout, [raw] { return raw->running(); });
      return attach(cfg.sid, std::make_unique<RemoteSimulator>(std::move(channel)), cfg.sim_params,
                    std::move(process));
    }
    case SimConfig::Attach::Listen: {
      auto channel = broker().await(cfg.sid, options_.handshake_timeout);
      return attach(cfg.sid, std::make_unique<RemoteSimulator>(std::move(channel)), cfg.sim_params, nullptr);
    }
  }
  throw ScenarioError("invalid attach mode");
}

const SimulatorMeta& World::add_simulator(const std::string& sid, std::unique_ptr<Simulator> sim,
                                          const Json& sim_params) {
  if (sid.empty() || sid.find('.') != std::string::npos) {
    throw ScenarioError("sid '" + sid + "' must be non-empty and must not contain '.'");
  }
  if (std::any_of(sims_.begin(), sims_.end(), [&](const Entry& e) { return e.sid == sid; })) {
    throw ScenarioError("duplicate sid '" + sid + "'");
  }
  return attach(sid, std::move(sim), sim_params, nullptr);
}

const SimulatorMeta& World::attach(const std::string& sid, std::unique_ptr<Simulator> sim, const Json& sim_params,
                                   std::unique_ptr<ChildProcess> process) {
  auto guard = std::make_unique<LifecycleGuard>(std::move(sim));
  guard->init(sid, config_.time_resolution, sim_params.is_null() ? Json::object() : sim_params);
  sims_.push_back({sid, std::move(process), std::move(guard)});
  spdlog::debug("attached {} ({})", sid, to_string(sims_.back().guard->meta().type));
  return sims_.back().guard->meta();
}

void World::register_entity(const std::string& sid, const EntityDescriptor& e) {
  entities_[full_id(sid, e.eid)] = {sid, e.eid, e.model};
  for (const auto& c : e.children) register_entity(sid, c);
}

std::vector<std::string> World::create(const std::string& sid, int num, const std::string& model,
                                       const Json& params) {
  if (scheduler_) throw ScenarioError("entities cannot be created after the run was prepared");
  auto& e = entry(sid);
  auto descriptors = e.guard->create(num, model, params.is_null() ? Json::object() : params);
  std::vector<std::string> ids;
  for (const auto& d : descriptors) {
    register_entity(sid, d);
    ids.push_back(full_id(sid, d.eid));
  }
  return ids;
}

void World::connect(const std::string& src, const std::string& src_attr, const std::string& dest,
                    const std::string& dest_attr, bool weak) {
  if (scheduler_) throw ScenarioError("connections cannot change after the run was prepared");
  auto lookup = [&](const std::string& full) -> const EntityInfo& {
    auto it = entities_.find(full);
    if (it == entities_.end()) throw ScenarioError("unknown entity '" + full + "'");
    return it->second;
  };
  const auto& s = lookup(src);
  const auto& d = lookup(dest);
  const auto& smeta = meta(s.sid);
  const auto& dmeta = meta(d.sid);
  if (!smeta.model(s.model).has_attr(src_attr)) {
    throw ScenarioError("'" + src_attr + "' is not an attribute of " + src + " (" + s.model + ")");
  }
  if (!dmeta.model(d.model).has_attr(dest_attr)) {
    throw ScenarioError("'" + dest_attr + "' is not an attribute of " + dest + " (" + d.model + ")");
  }
  if (weak && !dmeta.is_trigger(d.model, dest_attr)) {
    throw ScenarioError("weak connection into " + dest + "." + dest_attr + ": destination attr is not a trigger (" +
                        to_string(dmeta.type) + ")");
  }
  connections_.push_back({src, src_attr, dest, dest_attr, weak});
}

DependencyGraph World::validate_graph() const {
  std::vector<std::string> sids;
  for (const auto& e : sims_) sids.push_back(e.sid);
  return DependencyGraph(std::move(sids), connections_);
}

Scheduler& World::prepare(std::optional<Tick> until, SchedulerOptions options) {
  if (scheduler_) throw ScenarioError("the world has already been prepared for a run");
  const auto end = until ? until : config_.until;
  if (!end) throw ScenarioError("no end time: pass until or set it in the world config");
  auto graph = validate_graph();
  std::vector<SimBinding> bindings;
  for (auto& e : sims_) bindings.push_back({e.sid, e.guard.get(), e.guard->meta()});
  scheduler_ = std::make_unique<Scheduler>(std::move(graph), std::move(bindings), entities_, config_, *end,
                                           std::move(options));
  return *scheduler_;
}

std::vector<TraceRecord> World::run(std::optional<Tick> until, SchedulerOptions options) {
  try {
    prepare(until, std::move(options));
  } catch (...) {
    stop_all();
    throw;
  }
  return run_prepared();
}

std::vector<TraceRecord> World::run_prepared() {
  if (!scheduler_) throw ScenarioError("run_prepared without prepare");
  std::vector<TraceRecord> trace;
  try {
    trace = scheduler_->run();
  } catch (...) {
    stop_all();
    throw;
  }
  stop_all();
  return trace;
}

void World::stop_all() {
  for (auto& e : sims_) {
    try {
      e.guard->stop();
    } catch (const std::exception& ex) {
      spdlog::warn("{}: stop failed: {}", e.sid, ex.what());
    }
  }
  for (auto& e : sims_) {
    if (e.process) e.process->terminate();
  }
}

Simulator& World::simulator(const std::string& sid) { return entry(sid).guard->inner(); }

const SimulatorMeta& World::meta(const std::string& sid) const { return entry(sid).guard->meta(); }

}  // namespace cosim
