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

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "splitrank/net.hpp"
#include "splitrank/wire.hpp"

namespace splitrank {

struct BrokerConfig {
  std::vector<std::string> shards;  // searcher endpoints, index = shard_id
  int timeout_ms = 500;
};

BrokerConfig load_broker_config(const std::string& path);
void save_broker_config(const BrokerConfig& cfg, const std::string& path);

// Concurrent scatter to every endpoint, one attempt each, per-shard timeout.
// A failed or timed-out shard yields nullopt at its position.
std::vector<std::optional<SearchResponse>> fan_out(const SearchRequest& request,
                                                   const std::vector<std::string>& endpoints,
                                                   int timeout_ms);

// K-way merge of per-shard hit lists (each sorted score desc, uid asc) into
// the global top-k under the same order.
std::vector<SearchHit> merge(const std::vector<std::vector<SearchHit>>& per_shard, uint32_t k);

// Full broker request handling: fan out, merge, report degraded shard ids.
// All shards failing is an aggregate error.
BrokerResult broker_search(const SearchRequest& request, const std::vector<std::string>& endpoints,
                           int timeout_ms);

// Stateless scatter-gather server. The request may carry a "shards"
// override; otherwise the configured endpoints are used.
class BrokerServer {
 public:
  BrokerServer(BrokerConfig cfg, const std::string& host, uint16_t port);

  void start() { server_.start(); }
  void stop() { server_.stop(); }
  std::string endpoint() const { return server_.endpoint(); }
  uint16_t port() const { return server_.port(); }

 private:
  std::string handle(const std::string& line);

  BrokerConfig cfg_;
  LineServer server_;
};

}  // namespace splitrank
