#include "cosim/scenario_file.hpp"

#include <fstream>
#include <map>
#include <set>

#include "cosim/errors.hpp"
#include "cosim/sims.hpp"

namespace cosim {

namespace {

[[noreturn]] void fail(const std::string& pointer, const std::string& what) {
  throw ScenarioError(pointer + ": " + what);
}

const Json& require(const Json& obj, const std::string& pointer, const char* key) {
  if (!obj.contains(key)) fail(pointer + "/" + key, "required field is missing");
  return obj.at(key);
}

std::string require_string(const Json& obj, const std::string& pointer, const char* key) {
  const Json& v = require(obj, pointer, key);
  if (!v.is_string()) fail(pointer + "/" + key, "must be a string");
  return v.get<std::string>();
}

void require_object(const Json& v, const std::string& pointer) {
  if (!v.is_object()) fail(pointer.empty() ? "/" : pointer, "must be an object");
}

const Json* optional_array(const Json& doc, const char* key) {
  if (!doc.contains(key)) return nullptr;
  if (!doc[key].is_array()) fail(std::string("/") + key, "must be an array");
  return &doc[key];
}

WorldConfig parse_world(const Json& w) {
  require_object(w, "/world");
  static const std::set<std::string> known{"time_resolution", "max_loop_iterations", "rt_factor", "until"};
  for (const auto& [key, value] : w.items()) {
    if (!known.count(key)) fail("/world/" + key, "unknown field");
  }
  WorldConfig cfg;
  const Json& until = require(w, "/world", "until");
  if (!until.is_number_integer() || until.get<Tick>() <= 0) fail("/world/until", "must be a positive integer");
  cfg.until = until.get<Tick>();
  if (w.contains("time_resolution")) {
    const Json& r = w["time_resolution"];
    if (!r.is_number() || !(r.get<double>() > 0.0)) fail("/world/time_resolution", "must be a positive number");
    cfg.time_resolution = TimeResolution(r.get<double>());
  }
  if (w.contains("max_loop_iterations")) {
    const Json& m = w["max_loop_iterations"];
    if (!m.is_number_integer() || m.get<long long>() < 1) {
      fail("/world/max_loop_iterations", "must be a positive integer");
    }
    cfg.max_loop_iterations = m.get<int>();
  }
  if (w.contains("rt_factor") && !w["rt_factor"].is_null()) {
    const Json& f = w["rt_factor"];
    if (!f.is_number() || !(f.get<double>() > 0.0)) fail("/world/rt_factor", "must be a positive number or null");
    cfg.rt_factor = f.get<double>();
  }
  return cfg;
}

SimConfig parse_simulator(const Json& s, const std::string& pointer) {
  require_object(s, pointer);
  SimConfig cfg;
  cfg.sid = require_string(s, pointer, "sid");
  if (cfg.sid.empty() || cfg.sid.find('.') != std::string::npos) {
    fail(pointer + "/sid", "must be non-empty and must not contain '.'");
  }
  const int modes = static_cast<int>(s.contains("builtin")) + static_cast<int>(s.contains("spawn")) +
                    static_cast<int>(s.contains("listen"));
  if (modes != 1) fail(pointer, "exactly one of 'builtin', 'spawn', 'listen' is required");
  if (s.contains("builtin")) {
    cfg.attach = SimConfig::Attach::Builtin;
    cfg.builtin = require_string(s, pointer, "builtin");
  } else if (s.contains("spawn")) {
    cfg.attach = SimConfig::Attach::Spawn;
    const Json& cmd = s["spawn"];
    if (cmd.is_string()) {
      cfg.command = split_command(cmd.get<std::string>());
    } else if (cmd.is_array()) {
      for (std::size_t i = 0; i < cmd.size(); ++i) {
        if (!cmd[i].is_string()) fail(pointer + "/spawn/" + std::to_string(i), "must be a string");
        cfg.command.push_back(cmd[i].get<std::string>());
      }
    } else {
      fail(pointer + "/spawn", "must be a command string or an array of strings");
    }
    if (cfg.command.empty()) fail(pointer + "/spawn", "empty command line");
  } else {
    cfg.attach = SimConfig::Attach::Listen;
    if (s["listen"] != true) fail(pointer + "/listen", "must be true");
  }
  if (s.contains("sim_params")) {
    require_object(s["sim_params"], pointer + "/sim_params");
    cfg.sim_params = s["sim_params"];
  }
  return cfg;
}

/// Cross-checks entities and connections of builtin simulators against
/// their meta, predicting entity ids the way the builtins assign them.
void check_builtins(const ScenarioDescription& desc) {
  std::map<std::string, SimulatorMeta> metas;
  std::set<std::string> sids;
  for (std::size_t i = 0; i < desc.simulators.size(); ++i) {
    const auto& sim = desc.simulators[i];
    sids.insert(sim.sid);
    if (sim.attach != SimConfig::Attach::Builtin) continue;
    const std::string pointer = "/simulators/" + std::to_string(i);
    try {
      auto instance = sims::make_builtin(sim.builtin);
      metas[sim.sid] = instance->init(sim.sid, desc.world.time_resolution, sim.sim_params);
    } catch (const std::exception& e) {
      fail(pointer, e.what());
    }
  }

  std::map<std::string, std::string> entity_model;
  std::map<std::pair<std::string, std::string>, int> counters;
  for (std::size_t i = 0; i < desc.entities.size(); ++i) {
    const auto& e = desc.entities[i];
    const std::string pointer = "/entities/" + std::to_string(i);
    if (!sids.count(e.sid)) fail(pointer + "/sid", "unknown simulator '" + e.sid + "'");
    auto meta = metas.find(e.sid);
    if (meta == metas.end()) continue;
    auto model = meta->second.models.find(e.model);
    if (model == meta->second.models.end() || !model->second.is_public) {
      fail(pointer + "/model", "'" + e.model + "' is not a public model of " + e.sid);
    }
    for (int k = 0; k < e.num; ++k) {
      entity_model[full_id(e.sid, e.model + "-" + std::to_string(counters[{e.sid, e.model}]++))] = e.model;
    }
  }

  for (std::size_t i = 0; i < desc.connections.size(); ++i) {
    const auto& c = desc.connections[i];
    const std::string pointer = "/connections/" + std::to_string(i);
    auto check_end = [&](const std::string& full, const std::string& attr, const char* id_key,
                         const char* attr_key) -> const SimulatorMeta* {
      std::string sid;
      try {
        sid = split_full_id(full).first;
      } catch (const ScenarioError& e) {
        fail(pointer + "/" + id_key, e.what());
      }
      if (!sids.count(sid)) fail(pointer + "/" + id_key, "unknown simulator '" + sid + "'");
      auto meta = metas.find(sid);
      if (meta == metas.end()) return nullptr;
      auto ent = entity_model.find(full);
      if (ent == entity_model.end()) fail(pointer + "/" + id_key, "unknown entity '" + full + "'");
      if (!meta->second.model(ent->second).has_attr(attr)) {
        fail(pointer + "/" + attr_key, "'" + attr + "' is not an attribute of " + ent->second);
      }
      return &meta->second;
    };
    check_end(c.src, c.src_attr, "src", "src_attr");
    const SimulatorMeta* dest = check_end(c.dest, c.dest_attr, "dest", "dest_attr");
    if (c.weak && dest && !dest->is_trigger(entity_model.at(c.dest), c.dest_attr)) {
      fail(pointer + "/weak", "weak connection into non-trigger attr " + c.dest + "." + c.dest_attr + " (" +
                                  to_string(dest->type) + ")");
    }
  }
}

}  // namespace

ScenarioDescription parse_scenario(const Json& doc) {
  require_object(doc, "");
  ScenarioDescription desc;
  desc.world = parse_world(require(doc, "", "world"));

  const Json& simulators = require(doc, "", "simulators");
  if (!simulators.is_array()) fail("/simulators", "must be an array");
  std::set<std::string> sids;
  for (std::size_t i = 0; i < simulators.size(); ++i) {
    const std::string pointer = "/simulators/" + std::to_string(i);
    auto cfg = parse_simulator(simulators[i], pointer);
    if (!sids.insert(cfg.sid).second) fail(pointer + "/sid", "duplicate sid '" + cfg.sid + "'");
    desc.simulators.push_back(std::move(cfg));
  }

  if (const Json* entities = optional_array(doc, "entities")) {
    for (std::size_t i = 0; i < entities->size(); ++i) {
      const std::string pointer = "/entities/" + std::to_string(i);
      const Json& e = (*entities)[i];
      require_object(e, pointer);
      EntitySpec spec;
      spec.sid = require_string(e, pointer, "sid");
      spec.model = require_string(e, pointer, "model");
      if (e.contains("num")) {
        if (!e["num"].is_number_integer() || e["num"].get<long long>() < 1) {
          fail(pointer + "/num", "must be a positive integer");
        }
        spec.num = e["num"].get<int>();
      }
      if (e.contains("params")) {
        require_object(e["params"], pointer + "/params");
        spec.params = e["params"];
      }
      desc.entities.push_back(std::move(spec));
    }
  }

  if (const Json* connections = optional_array(doc, "connections")) {
    for (std::size_t i = 0; i < connections->size(); ++i) {
      const std::string pointer = "/connections/" + std::to_string(i);
      const Json& c = (*connections)[i];
      require_object(c, pointer);
      Connection conn;
      conn.src = require_string(c, pointer, "src");
      conn.src_attr = require_string(c, pointer, "src_attr");
      conn.dest = require_string(c, pointer, "dest");
      conn.dest_attr = require_string(c, pointer, "dest_attr");
      if (c.contains("weak")) {
        if (!c["weak"].is_boolean()) fail(pointer + "/weak", "must be a boolean");
        conn.weak = c["weak"].get<bool>();
      }
      desc.connections.push_back(std::move(conn));
    }
  }

  check_builtins(desc);
  return desc;
}

ScenarioDescription parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path + ": cannot open scenario file");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ScenarioError(path + ": malformed JSON at byte " + std::to_string(e.byte));
  }
  return parse_scenario(doc);
}

Json to_json(const ScenarioDescription& desc) {
  Json world = {{"time_resolution", desc.world.time_resolution.seconds_per_tick()},
                {"max_loop_iterations", desc.world.max_loop_iterations},
                {"rt_factor", desc.world.rt_factor ? Json(*desc.world.rt_factor) : Json(nullptr)}};
  if (desc.world.until) world["until"] = *desc.world.until;
  Json sims = Json::array();
  for (const auto& s : desc.simulators) {
    Json j = {{"sid", s.sid}, {"sim_params", s.sim_params}};
    switch (s.attach) {
      case SimConfig::Attach::Builtin:
        j["builtin"] = s.builtin;
        break;
      case SimConfig::Attach::Spawn:
        j["spawn"] = s.command;
        break;
      case SimConfig::Attach::Listen:
        j["listen"] = true;
        break;
    }
    sims.push_back(std::move(j));
  }
  Json entities = Json::array();
  for (const auto& e : desc.entities) {
    entities.push_back({{"sid", e.sid}, {"model", e.model}, {"num", e.num}, {"params", e.params}});
  }
  Json connections = Json::array();
  for (const auto& c : desc.connections) {
    connections.push_back({{"src", c.src},
                           {"src_attr", c.src_attr},
                           {"dest", c.dest},
                           {"dest_attr", c.dest_attr},
                           {"weak", c.weak}});
  }
  return {{"world", world}, {"simulators", sims}, {"entities", entities}, {"connections", connections}};
}

std::unique_ptr<World> build_world(const ScenarioDescription& desc, WorldOptions options) {
  auto world = std::make_unique<World>(desc.world, options);
  for (const auto& s : desc.simulators) world->add_simulator(s);
  for (const auto& e : desc.entities) world->create(e.sid, e.num, e.model, e.params);
  for (const auto& c : desc.connections) world->connect(c.src, c.src_attr, c.dest, c.dest_attr, c.weak);
  return world;
}

}  // namespace cosim
