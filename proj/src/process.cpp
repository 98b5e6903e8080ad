#include "cosim/process.hpp"

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>

#include <cstring>
#include <sstream>
#include <thread>

#include "cosim/errors.hpp"

extern char** environ;

namespace cosim {

ChildProcess::ChildProcess(const std::vector<std::string>& argv) {
  if (argv.empty()) throw ScenarioError("spawn: empty command line");
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  int rc = ::posix_spawnp(&pid_, args[0], nullptr, nullptr, args.data(), environ);
  if (rc != 0) {
    throw ScenarioError("spawn '" + argv[0] + "' failed: " + std::strerror(rc));
  }
}

ChildProcess::~ChildProcess() { terminate(std::chrono::milliseconds(500)); }

bool ChildProcess::running() {
  if (reaped_) return false;
  int status = 0;
  pid_t r = ::waitpid(pid_, &status, WNOHANG);
  if (r == pid_) reaped_ = true;
  return !reaped_;
}

void ChildProcess::terminate(std::chrono::milliseconds grace) {
  const auto deadline = std::chrono::steady_clock::now() + grace;
  while (running() && std::chrono::steady_clock::now() < deadline) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  if (running()) {
    ::kill(pid_, SIGKILL);
    int status = 0;
    ::waitpid(pid_, &status, 0);
    reaped_ = true;
  }
}

std::vector<std::string> split_command(const std::string& command) {
  std::istringstream in(command);
  std::vector<std::string> out;
  for (std::string word; in >> word;) out.push_back(word);
  return out;
}

}  // namespace cosim
