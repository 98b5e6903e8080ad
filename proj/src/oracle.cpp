#include "cosim/oracle.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "cosim/errors.hpp"
#include "cosim/lifecycle.hpp"
#include "cosim/sims.hpp"

namespace cosim {

bool observation_less(const Observation& a, const Observation& b) {
  return std::forward_as_tuple(a.tick, a.dest, a.attr, a.source) <
             std::forward_as_tuple(b.tick, b.dest, b.attr, b.source) ||
         (std::forward_as_tuple(a.tick, a.dest, a.attr, a.source) ==
              std::forward_as_tuple(b.tick, b.dest, b.attr, b.source) &&
          a.value.dump() < b.value.dump());
}

std::string to_string(const Observation& o) {
  return o.dest + "." + o.attr + " @ " + std::to_string(o.tick) + " <- " + o.source + " = " + o.value.dump();
}

namespace {

struct OracleSim {
  std::string sid;
  std::unique_ptr<LifecycleGuard> sim;
  SimulatorMeta meta;
  std::optional<Tick> next_self;
  OutputRequest request;
};

struct Link {
  std::size_t dest;
  std::string dest_eid;
  std::string dest_attr;
  bool dest_trigger;
};

void refuse(const std::string& why) { throw ScenarioError("oracle refuses scenario: " + why); }

}  // namespace

OracleTrace oracle_run(const ScenarioDescription& scenario, Tick until) {
  for (const auto& c : scenario.connections) {
    if (c.weak) refuse("weak connection " + c.src + " -> " + c.dest + " (same-time loops have no per-tick analogue)");
  }

  std::vector<OracleSim> sims;
  std::map<std::string, std::size_t> index;
  for (const auto& cfg : scenario.simulators) {
    if (cfg.attach != SimConfig::Attach::Builtin) refuse("simulator '" + cfg.sid + "' is not a builtin");
    OracleSim s;
    s.sid = cfg.sid;
    s.sim = std::make_unique<LifecycleGuard>(sims::make_builtin(cfg.builtin));
    s.meta = s.sim->init(cfg.sid, scenario.world.time_resolution, cfg.sim_params);
    index[cfg.sid] = sims.size();
    sims.push_back(std::move(s));
  }
  std::map<std::string, std::string> model_of;  // full id -> model
  for (const auto& e : scenario.entities) {
    auto it = index.find(e.sid);
    if (it == index.end()) refuse("entity of unknown simulator '" + e.sid + "'");
    for (const auto& d : sims[it->second].sim->create(e.num, e.model, e.params)) {
      model_of[full_id(e.sid, d.eid)] = d.model;
    }
  }

  // Lockstep order: repeatedly take the alphabetically first simulator whose
  // predecessors are all placed.
  std::map<std::string, std::set<std::string>> preds;
  for (const auto& s : sims) preds[s.sid];
  for (const auto& c : scenario.connections) preds[c.dest_sid()].insert(c.src_sid());
  std::vector<std::size_t> order;
  std::set<std::string> placed;
  while (placed.size() < sims.size()) {
    bool progress = false;
    for (const auto& [sid, ps] : preds) {
      if (placed.count(sid)) continue;
      if (std::all_of(ps.begin(), ps.end(), [&](const std::string& p) { return placed.count(p) > 0; })) {
        placed.insert(sid);
        order.push_back(index.at(sid));
        progress = true;
        break;
      }
    }
    if (!progress) refuse("cyclic dependencies");
  }

  std::map<std::pair<std::string, std::string>, std::vector<Link>> links;  // (src full, attr)
  struct Pull {
    std::string dest_eid, dest_attr, src_full, src_attr;
  };
  std::vector<std::vector<Pull>> pulls(sims.size());
  for (const auto& c : scenario.connections) {
    const std::size_t src = index.at(c.src_sid());
    const std::size_t dest = index.at(c.dest_sid());
    const auto& src_model = model_of.at(c.src);
    const auto& dest_model = model_of.at(c.dest);
    const bool trigger = sims[dest].meta.is_trigger(dest_model, c.dest_attr);
    const bool persistent = sims[src].meta.is_persistent(src_model, c.src_attr);
    const std::string dest_eid = split_full_id(c.dest).second;
    const std::string src_eid = split_full_id(c.src).second;
    auto& req = sims[src].request[src_eid];
    if (std::find(req.begin(), req.end(), c.src_attr) == req.end()) req.push_back(c.src_attr);
    if (trigger || !persistent) links[{c.src, c.src_attr}].push_back({dest, dest_eid, c.dest_attr, trigger});
    if (!trigger && persistent) pulls[dest].push_back({dest_eid, c.dest_attr, c.src, c.src_attr});
  }

  OracleTrace out;
  out.until = until;
  std::map<std::pair<std::string, std::string>, Json> latest;  // persistent values
  for (auto& s : sims) {
    if (s.meta.type != ComponentType::EventBased) s.next_self = 0;
  }

  for (Tick t = 0; t < until; ++t) {
    std::vector<InputBundle> pushed(sims.size());
    std::vector<bool> triggered(sims.size(), false);
    for (std::size_t i : order) {
      auto& s = sims[i];
      ++out.total_step_calls;
      ++out.step_calls[s.sid];
      const bool due = triggered[i] || (s.next_self && *s.next_self == t);
      if (!due) continue;

      InputBundle inputs = std::move(pushed[i]);
      for (const auto& p : pulls[i]) {
        auto v = latest.find({p.src_full, p.src_attr});
        if (v != latest.end()) inputs[p.dest_eid][p.dest_attr].push_back({p.src_full, v->second});
      }
      sort_by_source(inputs);
      StepResult r = s.sim->step(t, inputs, t);
      s.next_self = r.next_step;
      OutputBundle outputs = s.sim->get_data(s.request);
      if (outputs.output_time && *outputs.output_time > t) {
        refuse("future-dated output from " + s.sid + " at tick " + std::to_string(t));
      }
      for (const auto& [eid, attrs] : outputs.data) {
        const std::string src_full = full_id(s.sid, eid);
        for (const auto& [attr, value] : attrs) {
          if (s.meta.is_persistent(model_of.at(src_full), attr)) latest[{src_full, attr}] = value;
          auto l = links.find({src_full, attr});
          if (l == links.end()) continue;
          for (const auto& link : l->second) {
            pushed[link.dest][link.dest_eid][link.dest_attr].push_back({src_full, value});
            if (link.dest_trigger) triggered[link.dest] = true;
          }
        }
      }
      out.per_tick[t][s.sid] = {std::move(inputs), std::move(outputs)};
    }
  }
  for (auto& s : sims) s.sim->stop();
  return out;
}

std::vector<Observation> observations(const OracleTrace& trace) {
  std::vector<Observation> out;
  for (const auto& [tick, by_sid] : trace.per_tick) {
    for (const auto& [sid, step] : by_sid) {
      for (const auto& [eid, attrs] : step.inputs) {
        for (const auto& [attr, values] : attrs) {
          for (const auto& v : values) out.push_back({full_id(sid, eid), tick, attr, v.source, v.value});
        }
      }
    }
  }
  return out;
}

std::vector<Observation> observations(const std::vector<TraceRecord>& trace) {
  std::vector<Observation> out;
  for (const auto& r : trace) {
    if (r.action != TraceAction::Step || !r.inputs.is_object()) continue;
    for (const auto& [eid, attrs] : r.inputs.items()) {
      for (const auto& [attr, values] : attrs.items()) {
        for (const auto& pair : values) {
          out.push_back({full_id(r.sid, eid), r.when.tick, attr, pair[0].get<std::string>(), pair[1]});
        }
      }
    }
  }
  return out;
}

CompareReport compare_observations(std::vector<Observation> main, std::vector<Observation> oracle) {
  std::sort(main.begin(), main.end(), observation_less);
  std::sort(oracle.begin(), oracle.end(), observation_less);
  CompareReport report;
  report.main_count = main.size();
  report.oracle_count = oracle.size();
  const std::size_t n = std::min(main.size(), oracle.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!(main[i] == oracle[i])) {
      report.equal = false;
      report.first_divergence = observation_less(main[i], oracle[i]) ? main[i] : oracle[i];
      return report;
    }
  }
  if (main.size() != oracle.size()) {
    report.equal = false;
    report.first_divergence = main.size() > n ? main[n] : oracle[n];
  }
  return report;
}

CompareReport compare_traces(const std::vector<TraceRecord>& main, const OracleTrace& oracle) {
  return compare_observations(observations(main), observations(oracle));
}

}  // namespace cosim
