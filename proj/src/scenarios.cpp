#include "cosim/scenarios.hpp"

#include <random>
#include <set>

namespace cosim::scenarios {

ScenarioDescription delay_net(int messages, Tick until, Tick latency) {
  ScenarioDescription d;
  d.world.until = until;
  Json sends = Json::array();
  const Tick spacing = until / std::max(messages, 1);
  for (int i = 0; i < messages; ++i) sends.push_back(spacing / 2 + i * spacing);
  d.simulators.push_back(SimConfig::make_builtin("agents", "Agent"));
  d.simulators.push_back(SimConfig::make_builtin("net", "DelayNet", {{"latency", latency}, {"emit", "delivery"}}));
  d.simulators.push_back(SimConfig::make_builtin("monitor", "Collector"));
  d.entities.push_back({"agents", "Agent", 1, {{"sends", sends}}});
  d.entities.push_back({"net", "Node", 1, Json::object()});
  d.entities.push_back({"monitor", "Monitor", 1, Json::object()});
  d.connections.push_back({"agents.Agent-0", "msg", "net.Node-0", "send", false});
  d.connections.push_back({"net.Node-0", "delivery", "monitor.Monitor-0", "in", false});
  return d;
}

ScenarioDescription negotiation(double offer_a, double offer_b, double tolerance, Tick until,
                                int max_loop_iterations) {
  ScenarioDescription d;
  d.world.until = until;
  d.world.max_loop_iterations = max_loop_iterations;
  d.simulators.push_back(SimConfig::make_builtin("kick", "Ramp", {{"step_size", 1000000}}));
  d.simulators.push_back(SimConfig::make_builtin("a", "Negotiator"));
  d.simulators.push_back(SimConfig::make_builtin("b", "Negotiator"));
  d.entities.push_back({"kick", "Ramp", 1, Json::object()});
  d.entities.push_back({"a", "Negotiator", 1, {{"initial", offer_a}, {"tolerance", tolerance}}});
  d.entities.push_back({"b", "Negotiator", 1, {{"initial", offer_b}, {"tolerance", tolerance}}});
  d.connections.push_back({"kick.Ramp-0", "out", "a.Negotiator-0", "start", false});
  d.connections.push_back({"a.Negotiator-0", "offer", "b.Negotiator-0", "offer", false});
  d.connections.push_back({"b.Negotiator-0", "offer", "a.Negotiator-0", "offer", true});
  return d;
}

namespace {

struct Kind {
  const char* builtin;
  const char* model;
  std::vector<const char*> outputs;
  std::vector<const char*> inputs;
  bool self_starting;
};

const std::vector<Kind>& kinds() {
  static const std::vector<Kind> k{
      {"Ramp", "Ramp", {"out"}, {"bias"}, true},
      {"HybridRamp", "Ramp", {"out", "jump"}, {"setpoint", "bias"}, true},
      {"Agent", "Agent", {"msg"}, {"inbox"}, true},
      {"Relay", "Relay", {"out"}, {"in"}, false},
      {"DelayNet", "Node", {"delivery"}, {"send"}, false},
      {"Collector", "Monitor", {}, {"in"}, false},
  };
  return k;
}

}  // namespace

ScenarioDescription random_acyclic(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  ScenarioDescription d;
  const Tick until = pick(5, 50);
  d.world.until = until;
  const int n = pick(2, 5);

  struct Placed {
    const Kind* kind;
    std::string sid;
    std::vector<std::string> entities;
  };
  std::vector<Placed> placed;
  for (int i = 0; i < n; ++i) {
    // the first simulator has to start on its own
    const Kind& kind = kinds()[static_cast<std::size_t>(i == 0 ? pick(0, 2) : pick(0, 5))];
    Placed p{&kind, "s" + std::to_string(i), {}};
    Json params = Json::object();
    const std::string b = kind.builtin;
    if (b == "Ramp" || b == "HybridRamp") params["step_size"] = pick(1, 7);
    if (b == "HybridRamp") {
      params["setpoint_min"] = -50.0;
      params["setpoint_max"] = 50.0;
    }
    if (b == "Relay") params["hold"] = pick(0, 3);
    if (b == "DelayNet") {
      params["latency"] = pick(1, 5);
      params["emit"] = "delivery";
    }
    d.simulators.push_back(SimConfig::make_builtin(p.sid, kind.builtin, params));

    const int num = pick(1, 2);
    for (int e = 0; e < num; ++e) {
      Json ep = Json::object();
      if (b == "Ramp" || b == "HybridRamp") ep["slope"] = pick(-3, 3) * 0.5;
      if (b == "Relay") ep["gain"] = pick(1, 4) * 0.25;
      if (b == "Agent") {
        std::set<Tick> sends;
        const int count = pick(0, 6);
        for (int k = 0; k < count; ++k) sends.insert(pick(0, static_cast<int>(until) - 1));
        ep["sends"] = std::vector<Tick>(sends.begin(), sends.end());
      }
      d.entities.push_back({p.sid, kind.model, 1, ep});
      p.entities.push_back(p.sid + "." + kind.model + "-" + std::to_string(e));
    }
    placed.push_back(std::move(p));
  }

  std::set<std::tuple<std::string, std::string, std::string, std::string>> seen;
  for (int i = 1; i < n; ++i) {
    const Placed& dest = placed[static_cast<std::size_t>(i)];
    const int edges = pick(1, 3);
    for (int k = 0; k < edges; ++k) {
      std::vector<const Placed*> sources;
      for (int j = 0; j < i; ++j) {
        if (!placed[static_cast<std::size_t>(j)].kind->outputs.empty()) sources.push_back(&placed[static_cast<std::size_t>(j)]);
      }
      if (sources.empty()) break;
      const Placed& src = *sources[static_cast<std::size_t>(pick(0, static_cast<int>(sources.size()) - 1))];
      const auto& s_ent = src.entities[static_cast<std::size_t>(pick(0, static_cast<int>(src.entities.size()) - 1))];
      const auto& d_ent = dest.entities[static_cast<std::size_t>(pick(0, static_cast<int>(dest.entities.size()) - 1))];
      const std::string s_attr = src.kind->outputs[static_cast<std::size_t>(pick(0, static_cast<int>(src.kind->outputs.size()) - 1))];
      const std::string d_attr = dest.kind->inputs[static_cast<std::size_t>(pick(0, static_cast<int>(dest.kind->inputs.size()) - 1))];
      if (!seen.insert({s_ent, s_attr, d_ent, d_attr}).second) continue;
      d.connections.push_back({s_ent, s_attr, d_ent, d_attr, false});
    }
  }
  return d;
}

}  // namespace cosim::scenarios
