#include "cosim/trace.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <tuple>

#include "cosim/errors.hpp"

namespace cosim {

std::string to_string(TraceAction action) {
  switch (action) {
    case TraceAction::Step:
      return "step";
    case TraceAction::GetData:
      return "get_data";
    case TraceAction::SetEvent:
      return "set_event";
    case TraceAction::Inject:
      return "inject";
    case TraceAction::Error:
      return "error";
    case TraceAction::Warning:
      return "warning";
    case TraceAction::Overrun:
      return "overrun";
  }
  return "?";
}

TraceAction trace_action_from_string(const std::string& name) {
  for (auto a : {TraceAction::Step, TraceAction::GetData, TraceAction::SetEvent, TraceAction::Inject,
                 TraceAction::Error, TraceAction::Warning, TraceAction::Overrun}) {
    if (to_string(a) == name) return a;
  }
  throw Error("unknown trace action '" + name + "'");
}

std::string cause_to_string(unsigned causes) {
  std::string out;
  auto add = [&](unsigned flag, const char* name) {
    if (!(causes & flag)) return;
    if (!out.empty()) out += '|';
    out += name;
  };
  add(kSelfScheduled, "self_scheduled");
  add(kTriggered, "triggered");
  add(kExternal, "external");
  return out;
}

unsigned cause_from_string(const std::string& text) {
  unsigned out = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto bar = text.find('|', start);
    auto part = text.substr(start, bar == std::string::npos ? std::string::npos : bar - start);
    if (part == "self_scheduled") out |= kSelfScheduled;
    else if (part == "triggered") out |= kTriggered;
    else if (part == "external") out |= kExternal;
    else throw Error("unknown cause '" + part + "'");
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  return out;
}

std::string digest(const Json& value) {
  const std::string text = value.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

template <class T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <class T>
std::optional<T> opt_from(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

}  // namespace

std::string to_json_line(const TraceRecord& r) {
  nlohmann::ordered_json j;
  j["seq"] = r.seq;
  j["tick"] = r.when.tick;
  j["iteration"] = r.when.iteration;
  j["sid"] = r.sid;
  j["rank"] = r.rank;
  j["action"] = to_string(r.action);
  switch (r.action) {
    case TraceAction::Step:
      j["cause"] = cause_to_string(r.cause);
      j["max_advance"] = opt(r.max_advance);
      j["next_step"] = opt(r.next_step);
      j["inputs_digest"] = r.inputs_digest;
      j["pushed"] = r.pushed;
      j["pulled_max_tick"] = opt(r.pulled_max_tick);
      j["inputs"] = r.inputs;
      break;
    case TraceAction::GetData:
      j["outputs_digest"] = r.outputs_digest;
      j["output_time"] = opt(r.output_time);
      j["outputs"] = r.outputs;
      break;
    case TraceAction::Overrun:
      j["slack_ms"] = opt(r.slack_ms);
      j["detail"] = r.detail;
      break;
    default:
      j["detail"] = r.detail;
      break;
  }
  return j.dump();
}

TraceRecord trace_record_from_json(const Json& j) {
  TraceRecord r;
  r.seq = j.at("seq").get<std::uint64_t>();
  r.when = {j.at("tick").get<Tick>(), j.at("iteration").get<std::uint32_t>()};
  r.sid = j.at("sid").get<std::string>();
  r.rank = j.at("rank").get<int>();
  r.action = trace_action_from_string(j.at("action").get<std::string>());
  if (j.contains("cause")) r.cause = cause_from_string(j["cause"].get<std::string>());
  r.max_advance = opt_from<Tick>(j, "max_advance");
  r.next_step = opt_from<Tick>(j, "next_step");
  r.inputs_digest = j.value("inputs_digest", std::string());
  if (j.contains("inputs")) r.inputs = j["inputs"];
  r.pushed = j.value("pushed", 0);
  r.pulled_max_tick = opt_from<Tick>(j, "pulled_max_tick");
  r.outputs_digest = j.value("outputs_digest", std::string());
  if (j.contains("outputs")) r.outputs = j["outputs"];
  r.output_time = opt_from<Tick>(j, "output_time");
  r.detail = j.value("detail", std::string());
  r.slack_ms = opt_from<double>(j, "slack_ms");
  return r;
}

std::vector<TraceRecord> read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trace file " + path);
  std::vector<TraceRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(trace_record_from_json(Json::parse(line)));
    } catch (const std::exception& e) {
      throw Error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::string> check_trace(const std::vector<TraceRecord>& trace, int max_loop_iterations) {
  std::vector<std::string> problems;
  auto where = [](const TraceRecord& r) {
    return "seq " + std::to_string(r.seq) + " (" + r.sid + " @ " + to_string(r.when) + ")";
  };

  struct Grant {
    Tick tick;
    Tick max_advance;
    std::uint64_t seq;
  };
  std::map<std::string, std::vector<Grant>> grants;

  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& r = trace[i];
    if (i > 0) {
      const auto& p = trace[i - 1];
      if (r.seq <= p.seq) problems.push_back(where(r) + ": seq not increasing");
      if (std::tie(r.when, r.rank, r.sid) < std::tie(p.when, p.rank, p.sid)) {
        problems.push_back(where(r) + ": out of (time, rank, sid) order after " + where(p));
      }
    }
    if (static_cast<long long>(r.when.iteration) >= max_loop_iterations) {
      problems.push_back(where(r) + ": iteration reaches max_loop_iterations");
    }
    if (r.action != TraceAction::Step) continue;

    if (r.pulled_max_tick && *r.pulled_max_tick > r.when.tick) {
      problems.push_back(where(r) + ": consumes a value produced at tick " + std::to_string(*r.pulled_max_tick));
    }
    auto& open = grants[r.sid];
    std::erase_if(open, [&](const Grant& g) { return g.max_advance < r.when.tick; });
    if (!(r.cause & kExternal)) {
      for (const auto& g : open) {
        if (r.when.tick > g.max_advance) continue;
        if (r.pushed > 0) {
          problems.push_back(where(r) + ": delivery at tick " + std::to_string(r.when.tick) +
                             " inside max_advance " + std::to_string(g.max_advance) + " granted at seq " +
                             std::to_string(g.seq));
        } else if (r.pulled_max_tick && *r.pulled_max_tick > g.tick) {
          problems.push_back(where(r) + ": pulled value from tick " + std::to_string(*r.pulled_max_tick) +
                             " produced inside max_advance " + std::to_string(g.max_advance) +
                             " granted at seq " + std::to_string(g.seq));
        }
      }
    }
    if (r.max_advance) open.push_back({r.when.tick, *r.max_advance, r.seq});
  }
  return problems;
}

}  // namespace cosim
