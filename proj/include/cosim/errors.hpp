#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cosim {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A simulator broke the component contract (bad meta, bad next_step, bad
/// output time, undeclared attribute, wire-level garbage, ...).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// The wire codec could not parse a frame.
class DecodeError : public ProtocolError {
 public:
  DecodeError(const std::string& what, std::size_t offset)
      : ProtocolError(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// A same-time loop hit max_loop_iterations.
class LoopLimitError : public Error {
 public:
  using Error::Error;
};

/// Invalid scenario: schema violations, unknown entities, bad topology.
class ScenarioError : public Error {
 public:
  using Error::Error;
};

/// An external event or set_event that cannot be honored.
class RejectedError : public Error {
 public:
  using Error::Error;
};

}  // namespace cosim
