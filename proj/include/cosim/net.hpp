#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace cosim::net {

/// Owning, line-oriented TCP stream. Reads and writes may happen from
/// different threads; concurrent writers are serialized.
class LineChannel {
 public:
  explicit LineChannel(int fd);
  ~LineChannel();
  LineChannel(const LineChannel&) = delete;
  LineChannel& operator=(const LineChannel&) = delete;

  /// Writes `line` verbatim; it must already carry its LF terminator.
  void write(const std::string& line);

  /// Next line including its LF, or nullopt on orderly EOF. A partial line at
  /// EOF is returned without LF so the decoder can report truncation.
  /// `timeout` bounds the wait for the first byte of data.
  std::optional<std::string> read_line(
      std::optional<std::chrono::milliseconds> timeout = std::nullopt);

  /// Unblocks pending reads in other threads.
  void shutdown();

 private:
  int fd_;
  std::mutex write_mutex_;
  std::string buffer_;
};

class TcpListener {
 public:
  /// Binds 127.0.0.1:port; port 0 picks an ephemeral port.
  explicit TcpListener(std::uint16_t port = 0);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }

  /// Returns nullptr on timeout.
  std::unique_ptr<LineChannel> accept(std::chrono::milliseconds timeout);

 private:
  int fd_;
  std::uint16_t port_;
};

std::unique_ptr<LineChannel> connect_tcp(const std::string& host, std::uint16_t port);

}  // namespace cosim::net
