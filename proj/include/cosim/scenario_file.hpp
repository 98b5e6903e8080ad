#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cosim/scenario.hpp"

namespace cosim {

struct EntitySpec {
  std::string sid;
  std::string model;
  int num = 1;
  Json params = Json::object();
};

/// Data-only scenario: what a scenario file holds.
struct ScenarioDescription {
  WorldConfig world;
  std::vector<SimConfig> simulators;
  std::vector<EntitySpec> entities;
  std::vector<Connection> connections;
};

/// Schema and consistency checks; errors are ScenarioErrors whose message
/// starts with the JSON pointer of the offending value ("/world/until: ...").
/// Connections between builtin simulators are checked against their meta
/// (unknown entities or attributes, weak edges into non-trigger attrs).
ScenarioDescription parse_scenario(const Json& doc);
ScenarioDescription parse_scenario_file(const std::string& path);
Json to_json(const ScenarioDescription& desc);

/// Attaches simulators, creates entities and connects them, in file order.
std::unique_ptr<World> build_world(const ScenarioDescription& desc, WorldOptions options = {});

}  // namespace cosim
