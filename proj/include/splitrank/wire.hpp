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

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "splitrank/searcher.hpp"

namespace splitrank {

// Newline-delimited JSON messages. Floats pass through double, which holds
// every float32 exactly, so serialized scores and vectors round-trip
// bit-exactly.

nlohmann::json search_request_to_json(const SearchRequest& r);
SearchRequest search_request_from_json(const nlohmann::json& j);

nlohmann::json search_response_to_json(const SearchResponse& r);
SearchResponse search_response_from_json(const nlohmann::json& j);

nlohmann::json hit_to_json(const SearchHit& h);
SearchHit hit_from_json(const nlohmann::json& j);

nlohmann::json error_response(const std::string& code, const std::string& message);

// Throws the wire error as a NetError/VersionError/InputError depending on
// its code; returns the message untouched when j is not an error.
const nlohmann::json& throw_if_error(const nlohmann::json& j);

// Broker layer: the searcher request plus an optional shards override, the
// searcher hits response plus the failed-shard list.
struct BrokerResult {
  std::vector<SearchHit> hits;
  std::vector<uint32_t> degraded;
};

nlohmann::json broker_response_to_json(const BrokerResult& r);
BrokerResult broker_response_from_json(const nlohmann::json& j);

// Frontend layer.
struct UserSearchRequest {
  std::string text;
  std::map<uint16_t, std::vector<std::string>> facets;
  uint32_t k = 0;  // 0 = frontend default
};

struct RequestTrace {
  uint64_t parse_us = 0;
  uint64_t qarm_us = 0;
  uint64_t backend_us = 0;
  uint64_t total_us = 0;
};

struct UserSearchResponse {
  std::vector<SearchHit> hits;
  std::vector<uint32_t> degraded;
  RequestTrace trace;
};

nlohmann::json user_search_request_to_json(const UserSearchRequest& r);
UserSearchRequest user_search_request_from_json(const nlohmann::json& j);

nlohmann::json user_search_response_to_json(const UserSearchResponse& r);
UserSearchResponse user_search_response_from_json(const nlohmann::json& j);

// Strict field accessors: missing or mistyped fields raise InputError with
// the field name instead of nlohmann's generic type_error.
const nlohmann::json& require_field(const nlohmann::json& j, const std::string& key);

}  // namespace splitrank
