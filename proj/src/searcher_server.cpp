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

#include "splitrank/searcher_server.hpp"

#include "splitrank/error.hpp"
#include "splitrank/wire.hpp"

namespace splitrank {

using nlohmann::json;

SearcherServer::SearcherServer(ShardSnapshot snapshot, CrossBundle cross, const std::string& host,
                               uint16_t port)
    : snapshot_(std::make_shared<const ShardSnapshot>(std::move(snapshot))),
      cross_(std::move(cross)),
      server_(host, port, [this](const std::string& line) { return handle(line); }) {}

void SearcherServer::live_update(const MemberProfile& profile, const std::vector<float>& vector,
                                 const ModelVersion& version) {
  std::lock_guard<std::mutex> lock(snap_mu_);
  auto next = std::make_shared<const ShardSnapshot>(apply_live_update(*snapshot_, profile, vector, version));
  snapshot_ = std::move(next);
}

std::shared_ptr<const ShardSnapshot> SearcherServer::current_snapshot() const {
  std::lock_guard<std::mutex> lock(snap_mu_);
  return snapshot_;
}

std::string SearcherServer::handle(const std::string& line) {
  try {
    SearchRequest req = search_request_from_json(json::parse(line));
    auto snap = current_snapshot();
    SearchResponse resp = search(*snap, req, cross_);
    return search_response_to_json(resp).dump();
  } catch (const json::exception& e) {
    return error_response("bad_request", std::string("bad json: ") + e.what()).dump();
  } catch (const Error& e) {
    return error_response(e.code(), e.what()).dump();
  } catch (const std::exception& e) {
    return error_response("internal", e.what()).dump();
  }
}

}  // namespace splitrank
