#pragma once

#include <sys/types.h>

#include <chrono>
#include <string>
#include <vector>

namespace cosim {

/// A spawned simulator process. Killed on destruction if still running.
class ChildProcess {
 public:
  explicit ChildProcess(const std::vector<std::string>& argv);
  ~ChildProcess();
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  bool running();
  /// Waits up to `grace` for a voluntary exit, then kills.
  void terminate(std::chrono::milliseconds grace = std::chrono::milliseconds(2000));
  pid_t pid() const { return pid_; }

 private:
  pid_t pid_ = -1;
  bool reaped_ = false;
};

/// Splits a command line on whitespace (no quoting rules).
std::vector<std::string> split_command(const std::string& command);

}  // namespace cosim
