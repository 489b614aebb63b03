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

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace splitrank {

// host:port, port required. The only address form used anywhere.
std::pair<std::string, uint16_t> parse_endpoint(const std::string& endpoint);

// Buffered newline-delimited IO over one socket. recv_line returns nullopt
// on clean EOF and throws NetError on timeout or socket failure.
class LineSocket {
 public:
  explicit LineSocket(int fd) : fd_(fd) {}

  void send_line(const std::string& line);
  std::optional<std::string> recv_line(int timeout_ms, const std::atomic<bool>* stop = nullptr);

  int fd() const { return fd_; }

 private:
  int fd_;
  std::string buf_;
};

// One response line per request line, over raw TCP. Each connection gets a
// thread; the handler must not throw (servers map their errors to wire
// error messages before returning).
class LineServer {
 public:
  using Handler = std::function<std::string(const std::string&)>;

  // port 0 binds an ephemeral port; port() reports the real one.
  LineServer(const std::string& host, uint16_t port, Handler handler);
  ~LineServer();

  LineServer(const LineServer&) = delete;
  LineServer& operator=(const LineServer&) = delete;

  void start();
  void stop();

  uint16_t port() const { return port_; }
  std::string endpoint() const { return host_ + ":" + std::to_string(port_); }

 private:
  void accept_loop();
  void serve_connection(int fd);

  std::string host_;
  uint16_t port_;
  Handler handler_;
  int listen_fd_ = -1;
  std::atomic<bool> stop_{false};
  std::thread accept_thread_;
  std::mutex mu_;
  std::vector<std::thread> conn_threads_;
  std::vector<int> conn_fds_;
};

// Persistent client connection; request() sends one line and waits for one
// response line within the timeout.
class LineClient {
 public:
  explicit LineClient(const std::string& endpoint, int timeout_ms = 2000);
  ~LineClient();

  LineClient(const LineClient&) = delete;
  LineClient& operator=(const LineClient&) = delete;

  std::string request(const std::string& line);

  static std::string request_once(const std::string& endpoint, const std::string& line,
                                  int timeout_ms = 2000);

 private:
  int fd_ = -1;
  int timeout_ms_;
  LineSocket sock_;
};

}  // namespace splitrank
