// Copyright 2026 The splitrank Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "splitrank/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>

#include "splitrank/error.hpp"

namespace splitrank {

namespace {

constexpr size_t kMaxLineBytes = 64ull * 1024 * 1024;
constexpr int kPollSliceMs = 100;

std::string errno_message(const std::string& what) {
  return what + ": " + std::strerror(errno);
}

struct AddrInfoHolder {
  addrinfo* res = nullptr;
  ~AddrInfoHolder() {
    if (res) freeaddrinfo(res);
  }
};

int resolve_and_socket(const std::string& host, uint16_t port, addrinfo** out,
                       AddrInfoHolder& holder) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  int rc = getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &holder.res);
  if (rc != 0) throw NetError("resolve " + host + ": " + gai_strerror(rc));
  *out = holder.res;
  int fd = socket(holder.res->ai_family, holder.res->ai_socktype, holder.res->ai_protocol);
  if (fd < 0) throw NetError(errno_message("socket"));
  return fd;
}

}  // namespace

std::pair<std::string, uint16_t> parse_endpoint(const std::string& endpoint) {
  size_t colon = endpoint.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == endpoint.size()) {
    throw InputError("endpoint must be host:port, got: " + endpoint);
  }
  unsigned long port = 0;
  try {
    port = std::stoul(endpoint.substr(colon + 1));
  } catch (const std::exception&) {
    throw InputError("bad port in endpoint: " + endpoint);
  }
  if (port == 0 || port > 0xffff) throw InputError("bad port in endpoint: " + endpoint);
  return {endpoint.substr(0, colon), static_cast<uint16_t>(port)};
}

void LineSocket::send_line(const std::string& line) {
  std::string out = line;
  out.push_back('\n');
  size_t sent = 0;
  while (sent < out.size()) {
    ssize_t n = send(fd_, out.data() + sent, out.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw NetError(errno_message("send"));
    }
    sent += static_cast<size_t>(n);
  }
}

std::optional<std::string> LineSocket::recv_line(int timeout_ms, const std::atomic<bool>* stop) {
  auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  for (;;) {
    size_t nl = buf_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buf_.substr(0, nl);
      buf_.erase(0, nl + 1);
      return line;
    }
    if (buf_.size() > kMaxLineBytes) throw NetError("line exceeds " + std::to_string(kMaxLineBytes) + " bytes");
    if (stop && stop->load()) return std::nullopt;

    int slice = kPollSliceMs;
    if (timeout_ms >= 0) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now()).count();
      if (left <= 0) throw NetError("timeout", "no response within " + std::to_string(timeout_ms) + " ms");
      slice = static_cast<int>(std::min<long long>(left, kPollSliceMs));
    }
    pollfd pfd{fd_, POLLIN, 0};
    int rc = poll(&pfd, 1, slice);
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw NetError(errno_message("poll"));
    }
    if (rc == 0) continue;  // slice elapsed; loop re-checks stop/deadline

    char chunk[4096];
    ssize_t n = recv(fd_, chunk, sizeof chunk, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw NetError(errno_message("recv"));
    }
    if (n == 0) return std::nullopt;  // peer closed
    buf_.append(chunk, static_cast<size_t>(n));
  }
}

LineServer::LineServer(const std::string& host, uint16_t port, Handler handler)
    : host_(host), port_(port), handler_(std::move(handler)) {
  AddrInfoHolder holder;
  addrinfo* res = nullptr;
  listen_fd_ = resolve_and_socket(host, port, &res, holder);
  int yes = 1;
  setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  if (bind(listen_fd_, res->ai_addr, res->ai_addrlen) < 0) {
    std::string msg = errno_message("bind " + host + ":" + std::to_string(port));
    close(listen_fd_);
    listen_fd_ = -1;
    throw NetError(msg);
  }
  if (listen(listen_fd_, 64) < 0) {
    std::string msg = errno_message("listen");
    close(listen_fd_);
    listen_fd_ = -1;
    throw NetError(msg);
  }
  if (port_ == 0) {
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    if (getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len) == 0) {
      port_ = ntohs(addr.sin_port);
    }
  }
}

LineServer::~LineServer() { stop(); }

void LineServer::start() {
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void LineServer::stop() {
  if (stop_.exchange(true)) {
    if (accept_thread_.joinable()) accept_thread_.join();
    return;
  }
  if (listen_fd_ >= 0) shutdown(listen_fd_, SHUT_RDWR);
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::thread> conns;
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (int fd : conn_fds_) shutdown(fd, SHUT_RDWR);
    conns.swap(conn_threads_);
  }
  for (auto& t : conns) {
    if (t.joinable()) t.join();
  }
  if (listen_fd_ >= 0) {
    close(listen_fd_);
    listen_fd_ = -1;
  }
}

void LineServer::accept_loop() {
  while (!stop_.load()) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    int rc = poll(&pfd, 1, kPollSliceMs);
    if (rc <= 0) continue;
    int fd = accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    int yes = 1;
    setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);
    std::lock_guard<std::mutex> lock(mu_);
    if (stop_.load()) {
      close(fd);
      return;
    }
    conn_fds_.push_back(fd);
    conn_threads_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void LineServer::serve_connection(int fd) {
  LineSocket sock(fd);
  try {
    for (;;) {
      auto line = sock.recv_line(-1, &stop_);
      if (!line) break;
      sock.send_line(handler_(*line));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "connection error: %s\n", e.what());
  }
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (auto it = conn_fds_.begin(); it != conn_fds_.end(); ++it) {
      if (*it == fd) {
        conn_fds_.erase(it);
        break;
      }
    }
  }
  close(fd);
}

LineClient::LineClient(const std::string& endpoint, int timeout_ms)
    : timeout_ms_(timeout_ms), sock_(-1) {
  auto [host, port] = parse_endpoint(endpoint);
  AddrInfoHolder holder;
  addrinfo* res = nullptr;
  fd_ = resolve_and_socket(host, port, &res, holder);

  int flags = fcntl(fd_, F_GETFL, 0);
  fcntl(fd_, F_SETFL, flags | O_NONBLOCK);
  int rc = connect(fd_, res->ai_addr, res->ai_addrlen);
  if (rc < 0 && errno != EINPROGRESS) {
    std::string msg = errno_message("connect " + endpoint);
    close(fd_);
    fd_ = -1;
    throw NetError(msg);
  }
  if (rc < 0) {
    pollfd pfd{fd_, POLLOUT, 0};
    rc = poll(&pfd, 1, timeout_ms_);
    int err = 0;
    socklen_t len = sizeof err;
    if (rc > 0) getsockopt(fd_, SOL_SOCKET, SO_ERROR, &err, &len);
    if (rc <= 0 || err != 0) {
      close(fd_);
      fd_ = -1;
      if (rc <= 0) throw NetError("timeout", "connect " + endpoint + " timed out");
      throw NetError("connect " + endpoint + ": " + std::strerror(err));
    }
  }
  fcntl(fd_, F_SETFL, flags);
  int yes = 1;
  setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);
  sock_ = LineSocket(fd_);
}

LineClient::~LineClient() {
  if (fd_ >= 0) close(fd_);
}

std::string LineClient::request(const std::string& line) {
  if (fd_ < 0) throw NetError("client not connected");
  sock_.send_line(line);
  auto resp = sock_.recv_line(timeout_ms_);
  if (!resp) throw NetError("server closed connection");
  return *resp;
}

std::string LineClient::request_once(const std::string& endpoint, const std::string& line,
                                     int timeout_ms) {
  LineClient client(endpoint, timeout_ms);
  return client.request(line);
}

}  // namespace splitrank
