#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "cosim/api.hpp"

namespace cosim::wire {

/// Frames larger than this are rejected by decode and by the line reader.
inline constexpr std::size_t kMaxFrameBytes = 16u * 1024u * 1024u;

enum class Kind { Request, Response, Error, Notify };

std::string to_string(Kind kind);

/// One line of the newline-delimited JSON protocol.
struct Message {
  std::uint64_t id = 0;
  Kind kind = Kind::Request;
  std::string method;            // request, notify
  Json params = Json::object();  // request, notify
  Json result;                   // response
  std::string message;           // error

  static Message request(std::uint64_t id, std::string method, Json params);
  static Message notify(std::uint64_t id, std::string method, Json params);
  static Message response(std::uint64_t id, Json result);
  static Message error(std::uint64_t id, std::string message);

  friend bool operator==(const Message&, const Message&) = default;
};

/// UTF-8 JSON object followed by a single LF.
std::string encode_message(const Message& msg);

/// Accepts exactly one frame (with or without the trailing LF stripped by the
/// reader, see `require_terminator`). Throws DecodeError with a byte offset.
Message decode_message(std::string_view bytes, bool require_terminator = true);

}  // namespace cosim::wire
