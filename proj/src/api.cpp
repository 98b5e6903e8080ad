#include "cosim/api.hpp"

#include <algorithm>

#include "cosim/errors.hpp"

namespace cosim {

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::vector<std::string> string_list(const Json& j, const char* key) {
  if (!j.contains(key)) return {};
  const auto& v = j.at(key);
  if (!v.is_array()) throw ProtocolError(std::string("meta: '") + key + "' must be a list");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw ProtocolError(std::string("meta: '") + key + "' must hold strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

std::string to_string(ComponentType type) {
  switch (type) {
    case ComponentType::TimeBased:
      return "time-based";
    case ComponentType::EventBased:
      return "event-based";
    case ComponentType::Hybrid:
      return "hybrid";
  }
  return "?";
}

ComponentType component_type_from_string(const std::string& name) {
  if (name == "time-based") return ComponentType::TimeBased;
  if (name == "event-based") return ComponentType::EventBased;
  if (name == "hybrid") return ComponentType::Hybrid;
  throw ProtocolError("meta: unknown component type '" + name + "'");
}

bool ModelMeta::has_attr(const std::string& attr) const { return contains(attrs, attr); }

void SimulatorMeta::validate() const {
  if (api_version != "3" && api_version.rfind("3.", 0) != 0) {
    throw ProtocolError("meta: unsupported api_version '" + api_version + "'");
  }
  bool any_public = false;
  for (const auto& [name, m] : models) {
    any_public = any_public || m.is_public;
    for (const auto& t : m.trigger) {
      if (!m.has_attr(t)) {
        throw ProtocolError("meta: model '" + name + "': trigger attr '" + t +
                            "' is not in attrs (trigger must be a subset of attrs)");
      }
    }
    for (const auto& t : m.non_persistent) {
      if (!m.has_attr(t)) {
        throw ProtocolError("meta: model '" + name + "': non-persistent attr '" + t +
                            "' is not in attrs (non-persistent must be a subset of attrs)");
      }
    }
    if (type == ComponentType::TimeBased && (!m.trigger.empty() || !m.non_persistent.empty())) {
      throw ProtocolError("meta: model '" + name +
                          "': time-based models cannot declare trigger or non-persistent attrs");
    }
  }
  if (!any_public) throw ProtocolError("meta: at least one public model is required");
}

const ModelMeta& SimulatorMeta::model(const std::string& name) const {
  auto it = models.find(name);
  if (it == models.end()) throw ProtocolError("unknown model '" + name + "'");
  return it->second;
}

bool SimulatorMeta::is_trigger(const std::string& model_name, const std::string& attr) const {
  const auto& m = model(model_name);
  switch (type) {
    case ComponentType::TimeBased:
      return false;
    case ComponentType::EventBased:
      return m.has_attr(attr);
    case ComponentType::Hybrid:
      return contains(m.trigger, attr);
  }
  return false;
}

bool SimulatorMeta::is_persistent(const std::string& model_name, const std::string& attr) const {
  const auto& m = model(model_name);
  switch (type) {
    case ComponentType::TimeBased:
      return true;
    case ComponentType::EventBased:
      return false;
    case ComponentType::Hybrid:
      return !contains(m.non_persistent, attr);
  }
  return true;
}

Json to_json(const SimulatorMeta& meta) {
  Json models = Json::object();
  for (const auto& [name, m] : meta.models) {
    models[name] = {{"public", m.is_public},       {"params", m.params},
                    {"attrs", m.attrs},            {"trigger", m.trigger},
                    {"non-persistent", m.non_persistent}};
  }
  return {{"api_version", meta.api_version}, {"type", to_string(meta.type)}, {"models", models}};
}

SimulatorMeta meta_from_json(const Json& j) {
  if (!j.is_object()) throw ProtocolError("meta: expected an object");
  SimulatorMeta meta;
  if (j.contains("api_version")) {
    if (!j["api_version"].is_string()) throw ProtocolError("meta: 'api_version' must be a string");
    meta.api_version = j["api_version"].get<std::string>();
  }
  if (!j.contains("type") || !j["type"].is_string()) throw ProtocolError("meta: 'type' is required");
  meta.type = component_type_from_string(j["type"].get<std::string>());
  if (!j.contains("models") || !j["models"].is_object()) {
    throw ProtocolError("meta: 'models' must be an object");
  }
  for (const auto& [name, mj] : j["models"].items()) {
    if (!mj.is_object()) throw ProtocolError("meta: model '" + name + "' must be an object");
    ModelMeta m;
    m.is_public = mj.value("public", false);
    m.params = string_list(mj, "params");
    m.attrs = string_list(mj, "attrs");
    m.trigger = string_list(mj, "trigger");
    m.non_persistent = string_list(mj, "non-persistent");
    meta.models.emplace(name, std::move(m));
  }
  return meta;
}

Json to_json(const EntityDescriptor& e) {
  Json children = Json::array();
  for (const auto& c : e.children) children.push_back(to_json(c));
  return {{"eid", e.eid}, {"model", e.model}, {"children", children}};
}

EntityDescriptor entity_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("eid") || !j["eid"].is_string() || !j.contains("model") ||
      !j["model"].is_string()) {
    throw ProtocolError("entity descriptor needs string 'eid' and 'model'");
  }
  EntityDescriptor e{j["eid"].get<std::string>(), j["model"].get<std::string>(), {}};
  if (j.contains("children")) {
    for (const auto& c : j["children"]) e.children.push_back(entity_from_json(c));
  }
  return e;
}

void sort_by_source(InputBundle& inputs) {
  for (auto& [eid, attrs] : inputs) {
    for (auto& [attr, values] : attrs) {
      std::stable_sort(values.begin(), values.end(),
                       [](const InputValue& a, const InputValue& b) { return a.source < b.source; });
    }
  }
}

Json inputs_to_json(const InputBundle& inputs) {
  Json out = Json::object();
  for (const auto& [eid, attrs] : inputs) {
    Json ja = Json::object();
    for (const auto& [attr, values] : attrs) {
      Json list = Json::array();
      for (const auto& v : values) list.push_back(Json::array({v.source, v.value}));
      ja[attr] = std::move(list);
    }
    out[eid] = std::move(ja);
  }
  return out;
}

InputBundle inputs_from_json(const Json& j) {
  if (!j.is_object()) throw ProtocolError("inputs must be an object");
  InputBundle out;
  for (const auto& [eid, attrs] : j.items()) {
    if (!attrs.is_object()) throw ProtocolError("inputs['" + eid + "'] must be an object");
    auto& target = out[eid];
    for (const auto& [attr, list] : attrs.items()) {
      if (!list.is_array()) throw ProtocolError("inputs: attr '" + attr + "' must be a list");
      auto& values = target[attr];
      for (const auto& pair : list) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string()) {
          throw ProtocolError("inputs: entries must be [source, value] pairs");
        }
        values.push_back({pair[0].get<std::string>(), pair[1]});
      }
    }
  }
  return out;
}

Json request_to_json(const OutputRequest& request) {
  Json out = Json::object();
  for (const auto& [eid, attrs] : request) out[eid] = attrs;
  return out;
}

OutputRequest request_from_json(const Json& j) {
  if (!j.is_object()) throw ProtocolError("get_data outputs must be an object");
  OutputRequest out;
  for (const auto& [eid, attrs] : j.items()) {
    if (!attrs.is_array()) throw ProtocolError("get_data: attrs of '" + eid + "' must be a list");
    auto& v = out[eid];
    for (const auto& a : attrs) {
      if (!a.is_string()) throw ProtocolError("get_data: attr names must be strings");
      v.push_back(a.get<std::string>());
    }
  }
  return out;
}

Json to_json(const OutputBundle& out) {
  Json data = Json::object();
  for (const auto& [eid, attrs] : out.data) {
    Json ja = Json::object();
    for (const auto& [attr, value] : attrs) ja[attr] = value;
    data[eid] = std::move(ja);
  }
  Json j = {{"data", data}};
  if (out.output_time) j["time"] = *out.output_time;
  return j;
}

OutputBundle outputs_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("data") || !j["data"].is_object()) {
    throw ProtocolError("get_data result must be an object with 'data'");
  }
  OutputBundle out;
  for (const auto& [eid, attrs] : j["data"].items()) {
    if (!attrs.is_object()) throw ProtocolError("get_data: data['" + eid + "'] must be an object");
    auto& target = out.data[eid];
    for (const auto& [attr, value] : attrs.items()) target[attr] = value;
  }
  if (j.contains("time") && !j["time"].is_null()) {
    if (!j["time"].is_number_integer()) throw ProtocolError("get_data: 'time' must be an integer");
    out.output_time = j["time"].get<Tick>();
  }
  return out;
}

void Simulator::set_event(Tick time) {
  if (!events_) throw RejectedError("set_event: no scheduler channel attached");
  events_(time);
}

}  // namespace cosim
