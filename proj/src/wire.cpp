#include "cosim/wire.hpp"

#include "cosim/errors.hpp"

namespace cosim::wire {

namespace {

const char* kind_name(Kind kind) {
  switch (kind) {
    case Kind::Request:
      return "request";
    case Kind::Response:
      return "response";
    case Kind::Error:
      return "error";
    case Kind::Notify:
      return "notify";
  }
  return "?";
}

Kind kind_from(const std::string& s, std::size_t offset) {
  if (s == "request") return Kind::Request;
  if (s == "response") return Kind::Response;
  if (s == "error") return Kind::Error;
  if (s == "notify") return Kind::Notify;
  throw DecodeError("unknown message kind '" + s + "'", offset);
}

}  // namespace

std::string to_string(Kind kind) { return kind_name(kind); }

Message Message::request(std::uint64_t id, std::string method, Json params) {
  Message m;
  m.id = id;
  m.kind = Kind::Request;
  m.method = std::move(method);
  m.params = std::move(params);
  return m;
}

Message Message::notify(std::uint64_t id, std::string method, Json params) {
  Message m = request(id, std::move(method), std::move(params));
  m.kind = Kind::Notify;
  return m;
}

Message Message::response(std::uint64_t id, Json result) {
  Message m;
  m.id = id;
  m.kind = Kind::Response;
  m.result = std::move(result);
  return m;
}

Message Message::error(std::uint64_t id, std::string message) {
  Message m;
  m.id = id;
  m.kind = Kind::Error;
  m.message = std::move(message);
  return m;
}

std::string encode_message(const Message& msg) {
  Json j = {{"id", msg.id}, {"kind", kind_name(msg.kind)}};
  switch (msg.kind) {
    case Kind::Request:
    case Kind::Notify:
      j["method"] = msg.method;
      j["params"] = msg.params;
      break;
    case Kind::Response:
      j["result"] = msg.result;
      break;
    case Kind::Error:
      j["message"] = msg.message;
      break;
  }
  // Invalid UTF-8 in strings is replaced rather than thrown on.
  std::string line = j.dump(-1, ' ', false, Json::error_handler_t::replace);
  line.push_back('\n');
  return line;
}

Message decode_message(std::string_view bytes, bool require_terminator) {
  if (bytes.size() > kMaxFrameBytes) throw DecodeError("frame exceeds 16 MiB", kMaxFrameBytes);
  std::string_view body = bytes;
  if (require_terminator) {
    if (body.empty() || body.back() != '\n') throw DecodeError("truncated frame: missing LF", body.size());
    body.remove_suffix(1);
  }
  if (auto lf = body.find('\n'); lf != std::string_view::npos) {
    throw DecodeError("embedded LF inside a frame", lf);
  }

  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw DecodeError(std::string("malformed JSON: ") + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
  if (!j.is_object()) throw DecodeError("frame must be a JSON object", 0);

  Message m;
  if (!j.contains("id") || !j["id"].is_number_unsigned()) {
    throw DecodeError("'id' must be an unsigned integer", 0);
  }
  m.id = j["id"].get<std::uint64_t>();
  if (!j.contains("kind") || !j["kind"].is_string()) throw DecodeError("'kind' must be a string", 0);
  m.kind = kind_from(j["kind"].get<std::string>(), 0);

  std::size_t expected_keys = 2;
  switch (m.kind) {
    case Kind::Request:
    case Kind::Notify:
      if (!j.contains("method") || !j["method"].is_string()) {
        throw DecodeError("'method' must be a string", 0);
      }
      if (!j.contains("params") || !j["params"].is_object()) {
        throw DecodeError("'params' must be an object", 0);
      }
      m.method = j["method"].get<std::string>();
      m.params = j["params"];
      expected_keys += 2;
      break;
    case Kind::Response:
      if (!j.contains("result")) throw DecodeError("response without 'result'", 0);
      m.result = j["result"];
      expected_keys += 1;
      break;
    case Kind::Error:
      if (!j.contains("message") || !j["message"].is_string()) {
        throw DecodeError("'message' must be a string", 0);
      }
      m.message = j["message"].get<std::string>();
      expected_keys += 1;
      break;
  }
  if (j.size() != expected_keys) throw DecodeError("unexpected keys for kind " + to_string(m.kind), 0);
  return m;
}

}  // namespace cosim::wire
