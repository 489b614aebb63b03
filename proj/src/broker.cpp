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

#include "splitrank/broker.hpp"

#include <algorithm>
#include <thread>

#include "splitrank/binio.hpp"
#include "splitrank/error.hpp"

namespace splitrank {

using nlohmann::json;

BrokerConfig load_broker_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  BrokerConfig cfg;
  for (const auto& s : require_field(j, "shards")) cfg.shards.push_back(s.get<std::string>());
  cfg.timeout_ms = j.value("timeout_ms", 500);
  if (cfg.shards.empty()) throw InputError(path + ": broker config needs at least one shard");
  return cfg;
}

void save_broker_config(const BrokerConfig& cfg, const std::string& path) {
  json j{{"shards", cfg.shards}, {"timeout_ms", cfg.timeout_ms}};
  write_file_atomic(path, j.dump(2) + "\n");
}

std::vector<std::optional<SearchResponse>> fan_out(const SearchRequest& request,
                                                   const std::vector<std::string>& endpoints,
                                                   int timeout_ms) {
  if (endpoints.empty()) throw InputError("fan_out needs at least one endpoint");
  std::string line = search_request_to_json(request).dump();
  std::vector<std::optional<SearchResponse>> out(endpoints.size());
  std::vector<std::thread> workers;
  workers.reserve(endpoints.size());
  for (size_t i = 0; i < endpoints.size(); ++i) {
    workers.emplace_back([&, i] {
      try {
        std::string resp = LineClient::request_once(endpoints[i], line, timeout_ms);
        out[i] = search_response_from_json(json::parse(resp));
      } catch (const std::exception&) {
        out[i] = std::nullopt;  // timeout, refusal or bad payload: shard is degraded
      }
    });
  }
  for (auto& w : workers) w.join();
  return out;
}

std::vector<SearchHit> merge(const std::vector<std::vector<SearchHit>>& per_shard, uint32_t k) {
  struct Cursor {
    const std::vector<SearchHit>* hits;
    size_t pos;
  };
  auto better = [](const SearchHit& a, const SearchHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.uid < b.uid;
  };
  std::vector<Cursor> cursors;
  for (const auto& hits : per_shard) {
    if (!hits.empty()) cursors.push_back({&hits, 0});
  }
  std::vector<SearchHit> out;
  while (out.size() < k && !cursors.empty()) {
    size_t best = 0;
    for (size_t i = 1; i < cursors.size(); ++i) {
      const SearchHit& a = (*cursors[i].hits)[cursors[i].pos];
      const SearchHit& b = (*cursors[best].hits)[cursors[best].pos];
      if (better(a, b)) best = i;
    }
    out.push_back((*cursors[best].hits)[cursors[best].pos]);
    if (++cursors[best].pos == cursors[best].hits->size()) {
      cursors.erase(cursors.begin() + static_cast<long>(best));
    }
  }
  return out;
}

BrokerResult broker_search(const SearchRequest& request, const std::vector<std::string>& endpoints,
                           int timeout_ms) {
  auto responses = fan_out(request, endpoints, timeout_ms);
  BrokerResult result;
  std::vector<std::vector<SearchHit>> per_shard;
  size_t ok = 0;
  for (size_t i = 0; i < responses.size(); ++i) {
    if (responses[i]) {
      per_shard.push_back(std::move(responses[i]->hits));
      ++ok;
    } else {
      result.degraded.push_back(static_cast<uint32_t>(i));
    }
  }
  if (ok == 0) throw NetError("all " + std::to_string(endpoints.size()) + " shards failed");
  result.hits = merge(per_shard, request.k);
  return result;
}

BrokerServer::BrokerServer(BrokerConfig cfg, const std::string& host, uint16_t port)
    : cfg_(std::move(cfg)), server_(host, port, [this](const std::string& line) { return handle(line); }) {}

std::string BrokerServer::handle(const std::string& line) {
  try {
    json j = json::parse(line, nullptr, true);
    SearchRequest req = search_request_from_json(j);
    std::vector<std::string> endpoints = cfg_.shards;
    if (auto it = j.find("shards"); it != j.end()) {
      endpoints.clear();
      for (const auto& s : *it) endpoints.push_back(s.get<std::string>());
    }
    BrokerResult result = broker_search(req, endpoints, cfg_.timeout_ms);
    return broker_response_to_json(result).dump();
  } catch (const json::exception& e) {
    return error_response("bad_request", std::string("bad json: ") + e.what()).dump();
  } catch (const Error& e) {
    return error_response(e.code(), e.what()).dump();
  } catch (const std::exception& e) {
    return error_response("internal", e.what()).dump();
  }
}

}  // namespace splitrank
