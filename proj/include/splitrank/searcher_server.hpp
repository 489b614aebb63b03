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
#include <mutex>
#include <string>

#include "splitrank/net.hpp"
#include "splitrank/searcher.hpp"

namespace splitrank {

// One shard behind a TCP line server. Requests run against whatever
// snapshot is current when they arrive; live updates swap in a new snapshot
// without touching in-flight requests. Scoring makes no outbound calls:
// everything it needs is in the snapshot and the request.
class SearcherServer {
 public:
  SearcherServer(ShardSnapshot snapshot, CrossBundle cross, const std::string& host, uint16_t port);

  void start() { server_.start(); }
  void stop() { server_.stop(); }
  std::string endpoint() const { return server_.endpoint(); }
  uint16_t port() const { return server_.port(); }

  void live_update(const MemberProfile& profile, const std::vector<float>& vector,
                   const ModelVersion& version);

  std::shared_ptr<const ShardSnapshot> current_snapshot() const;

 private:
  std::string handle(const std::string& line);

  mutable std::mutex snap_mu_;
  std::shared_ptr<const ShardSnapshot> snapshot_;
  CrossBundle cross_;
  LineServer server_;
};

}  // namespace splitrank
