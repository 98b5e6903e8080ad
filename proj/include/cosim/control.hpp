#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cosim/scheduler.hpp"
#include "cosim/trace.hpp"

namespace cosim {

/// Append-only record store shared between the scheduler thread (writer)
/// and stream readers.
class TraceLog {
 public:
  void append(const TraceRecord& r);
  /// Marks the end of the run and wakes all readers.
  void finish();
  bool finished() const;
  /// Records with seq >= from; waits up to `wait` if none are available yet
  /// and the log is not finished.
  std::vector<TraceRecord> read_from(std::uint64_t from, std::chrono::milliseconds wait) const;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  mutable std::condition_variable cv_;
  std::vector<TraceRecord> records_;
  bool finished_ = false;
};

/// HTTP control endpoint:
///   POST /events {"sid": s, "time": t} -> 202 {"sid", "tick"}
///        409 without real-time pacing, 422 past until or after the run,
///        404 unknown sid, 400 malformed body
///   GET /trace  -> text/event-stream, one "id: <seq>" / "data: <record>"
///        event per record; resumes after ?from=<seq> or Last-Event-ID
///   GET /status -> {"current_tick", "until", "rt_factor", "finished"}
class ControlServer {
 public:
  ControlServer(Scheduler& scheduler, const TraceLog& log);
  ~ControlServer();
  ControlServer(const ControlServer&) = delete;
  ControlServer& operator=(const ControlServer&) = delete;

  /// Binds 127.0.0.1:port (0 picks a free port) and serves on a background
  /// thread. Returns the bound port.
  std::uint16_t start(std::uint16_t port);
  void stop();
  std::uint16_t port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::uint16_t port_ = 0;
};

/// Parses "id: 3\ndata: {...}\n\n" blocks from an event stream body.
/// Incomplete trailing blocks are ignored.
std::vector<TraceRecord> parse_event_stream(const std::string& body);

}  // namespace cosim
