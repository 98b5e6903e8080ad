#include "cosim/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "cosim/errors.hpp"
#include "cosim/wire.hpp"

namespace cosim::net {

namespace {

[[noreturn]] void fail(const std::string& what) {
  throw ProtocolError(what + ": " + std::strerror(errno));
}

}  // namespace

LineChannel::LineChannel(int fd) : fd_(fd) {
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

LineChannel::~LineChannel() {
  if (fd_ >= 0) ::close(fd_);
}

void LineChannel::write(const std::string& line) {
  std::lock_guard lock(write_mutex_);
  std::size_t sent = 0;
  while (sent < line.size()) {
    ssize_t n = ::send(fd_, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("socket write");
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> LineChannel::read_line(std::optional<std::chrono::milliseconds> timeout) {
  char chunk[65536];
  for (;;) {
    if (auto lf = buffer_.find('\n'); lf != std::string::npos) {
      std::string line = buffer_.substr(0, lf + 1);
      buffer_.erase(0, lf + 1);
      return line;
    }
    if (buffer_.size() > wire::kMaxFrameBytes) {
      throw DecodeError("frame exceeds 16 MiB", buffer_.size());
    }
    if (timeout) {
      pollfd pfd{fd_, POLLIN, 0};
      int r = ::poll(&pfd, 1, static_cast<int>(timeout->count()));
      if (r == 0) throw ProtocolError("timed out waiting for data");
      if (r < 0 && errno != EINTR) fail("poll");
    }
    ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EBADF || errno == EINVAL) return std::nullopt;
      fail("socket read");
    }
    if (n == 0) {
      if (buffer_.empty()) return std::nullopt;
      std::string partial = std::move(buffer_);
      buffer_.clear();
      return partial;
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void LineChannel::shutdown() { ::shutdown(fd_, SHUT_RDWR); }

TcpListener::TcpListener(std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) fail("socket");
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    ::close(fd_);
    fail("bind to port " + std::to_string(port));
  }
  if (::listen(fd_, 16) < 0) {
    ::close(fd_);
    fail("listen");
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() { ::close(fd_); }

std::unique_ptr<LineChannel> TcpListener::accept(std::chrono::milliseconds timeout) {
  pollfd pfd{fd_, POLLIN, 0};
  int r = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (r == 0) return nullptr;
  if (r < 0) {
    if (errno == EINTR) return nullptr;
    fail("poll");
  }
  int client = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
  if (client < 0) fail("accept");
  return std::make_unique<LineChannel>(client);
}

std::unique_ptr<LineChannel> connect_tcp(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res); rc != 0) {
    throw ProtocolError("resolve " + host + ": " + ::gai_strerror(rc));
  }
  int fd = ::socket(res->ai_family, res->ai_socktype | SOCK_CLOEXEC, res->ai_protocol);
  if (fd < 0) {
    ::freeaddrinfo(res);
    fail("socket");
  }
  if (::connect(fd, res->ai_addr, res->ai_addrlen) < 0) {
    ::freeaddrinfo(res);
    ::close(fd);
    fail("connect " + host + ":" + std::to_string(port));
  }
  ::freeaddrinfo(res);
  return std::make_unique<LineChannel>(fd);
}

}  // namespace cosim::net
