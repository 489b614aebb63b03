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

#include "splitrank/wire.hpp"

#include "splitrank/error.hpp"

namespace splitrank {

using nlohmann::json;

const json& require_field(const json& j, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end()) throw InputError("missing field: " + key);
  return *it;
}

namespace {

uint16_t field_id_from_key(const std::string& key) {
  try {
    unsigned long v = std::stoul(key);
    if (v > 0xffff) throw std::out_of_range("field id");
    return static_cast<uint16_t>(v);
  } catch (const std::exception&) {
    throw InputError("bad field id key: " + key);
  }
}

json facets_to_json(const std::map<uint16_t, std::vector<std::string>>& facets) {
  json j = json::object();
  for (const auto& [fid, toks] : facets) j[std::to_string(fid)] = toks;
  return j;
}

std::map<uint16_t, std::vector<std::string>> facets_from_json(const json& j) {
  if (!j.is_object()) throw InputError("facets must be an object");
  std::map<uint16_t, std::vector<std::string>> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::vector<std::string> toks;
    for (const auto& t : it.value()) toks.push_back(t.get<std::string>());
    out[field_id_from_key(it.key())] = std::move(toks);
  }
  return out;
}

}  // namespace

json search_request_to_json(const SearchRequest& r) {
  json terms = json::array();
  for (const Term& t : r.terms) terms.push_back(json::array({t.field_id, t.token}));
  json qrep = json::array();
  for (float x : r.qrep) qrep.push_back(static_cast<double>(x));
  return json{{"type", "search"},
              {"version", r.version},
              {"qrep", std::move(qrep)},
              {"terms", std::move(terms)},
              {"mode", to_string(r.mode)},
              {"max_candidates", r.max_candidates},
              {"k", r.k},
              {"w_sem", static_cast<double>(r.w_sem)},
              {"w_term", static_cast<double>(r.w_term)}};
}

SearchRequest search_request_from_json(const json& j) {
  if (require_field(j, "type").get<std::string>() != "search") {
    throw InputError("expected type \"search\"");
  }
  SearchRequest r;
  r.version = require_field(j, "version").get<uint16_t>();
  for (const auto& x : require_field(j, "qrep")) r.qrep.push_back(static_cast<float>(x.get<double>()));
  for (const auto& t : require_field(j, "terms")) {
    if (!t.is_array() || t.size() != 2) throw InputError("term must be [field_id, token]");
    r.terms.push_back({t[0].get<uint16_t>(), t[1].get<std::string>()});
  }
  r.mode = retrieval_mode_from_string(require_field(j, "mode").get<std::string>());
  r.max_candidates = require_field(j, "max_candidates").get<uint32_t>();
  r.k = require_field(j, "k").get<uint32_t>();
  r.w_sem = static_cast<float>(require_field(j, "w_sem").get<double>());
  r.w_term = static_cast<float>(require_field(j, "w_term").get<double>());
  return r;
}

json hit_to_json(const SearchHit& h) {
  return json{{"uid", h.uid},
              {"score", static_cast<double>(h.score)},
              {"semantic", static_cast<double>(h.semantic)},
              {"term_match", static_cast<double>(h.term_match)}};
}

SearchHit hit_from_json(const json& j) {
  SearchHit h;
  h.uid = require_field(j, "uid").get<uint64_t>();
  h.score = static_cast<float>(require_field(j, "score").get<double>());
  h.semantic = static_cast<float>(require_field(j, "semantic").get<double>());
  h.term_match = static_cast<float>(require_field(j, "term_match").get<double>());
  return h;
}

json search_response_to_json(const SearchResponse& r) {
  json hits = json::array();
  for (const SearchHit& h : r.hits) hits.push_back(hit_to_json(h));
  return json{{"type", "hits"},
              {"shard_id", r.shard_id},
              {"hits", std::move(hits)},
              {"timing", {{"retrieve_us", r.timing.retrieve_us}, {"score_us", r.timing.score_us}}}};
}

SearchResponse search_response_from_json(const json& j) {
  throw_if_error(j);
  if (require_field(j, "type").get<std::string>() != "hits") throw InputError("expected type \"hits\"");
  SearchResponse r;
  r.shard_id = require_field(j, "shard_id").get<uint32_t>();
  for (const auto& h : require_field(j, "hits")) r.hits.push_back(hit_from_json(h));
  const json& t = require_field(j, "timing");
  r.timing.retrieve_us = require_field(t, "retrieve_us").get<uint64_t>();
  r.timing.score_us = require_field(t, "score_us").get<uint64_t>();
  return r;
}

json error_response(const std::string& code, const std::string& message) {
  return json{{"type", "error"}, {"code", code}, {"message", message}};
}

const json& throw_if_error(const json& j) {
  if (j.is_object() && j.value("type", "") == "error") {
    std::string code = j.value("code", "internal");
    std::string message = j.value("message", "unknown error");
    if (code == "version_mismatch") throw VersionError(message);
    if (code == "bad_request") throw InputError(message);
    if (code == "format") throw FormatError(message);
    throw NetError(code, message);
  }
  return j;
}

json broker_response_to_json(const BrokerResult& r) {
  json hits = json::array();
  for (const SearchHit& h : r.hits) hits.push_back(hit_to_json(h));
  return json{{"type", "hits"}, {"hits", std::move(hits)}, {"degraded", r.degraded}};
}

BrokerResult broker_response_from_json(const json& j) {
  throw_if_error(j);
  if (require_field(j, "type").get<std::string>() != "hits") throw InputError("expected type \"hits\"");
  BrokerResult r;
  for (const auto& h : require_field(j, "hits")) r.hits.push_back(hit_from_json(h));
  if (auto it = j.find("degraded"); it != j.end()) {
    for (const auto& d : *it) r.degraded.push_back(d.get<uint32_t>());
  }
  return r;
}

json user_search_request_to_json(const UserSearchRequest& r) {
  return json{{"type", "user_search"}, {"text", r.text}, {"facets", facets_to_json(r.facets)}, {"k", r.k}};
}

UserSearchRequest user_search_request_from_json(const json& j) {
  if (require_field(j, "type").get<std::string>() != "user_search") {
    throw InputError("expected type \"user_search\"");
  }
  UserSearchRequest r;
  r.text = require_field(j, "text").get<std::string>();
  r.facets = facets_from_json(require_field(j, "facets"));
  r.k = j.value("k", 0u);
  return r;
}

json user_search_response_to_json(const UserSearchResponse& r) {
  json hits = json::array();
  for (const SearchHit& h : r.hits) hits.push_back(hit_to_json(h));
  return json{{"type", "results"},
              {"hits", std::move(hits)},
              {"degraded", r.degraded},
              {"trace",
               {{"parse_us", r.trace.parse_us},
                {"qarm_us", r.trace.qarm_us},
                {"backend_us", r.trace.backend_us},
                {"total_us", r.trace.total_us}}}};
}

UserSearchResponse user_search_response_from_json(const json& j) {
  throw_if_error(j);
  if (require_field(j, "type").get<std::string>() != "results") {
    throw InputError("expected type \"results\"");
  }
  UserSearchResponse r;
  for (const auto& h : require_field(j, "hits")) r.hits.push_back(hit_from_json(h));
  if (auto it = j.find("degraded"); it != j.end()) {
    for (const auto& d : *it) r.degraded.push_back(d.get<uint32_t>());
  }
  const json& t = require_field(j, "trace");
  r.trace.parse_us = require_field(t, "parse_us").get<uint64_t>();
  r.trace.qarm_us = require_field(t, "qarm_us").get<uint64_t>();
  r.trace.backend_us = require_field(t, "backend_us").get<uint64_t>();
  r.trace.total_us = require_field(t, "total_us").get<uint64_t>();
  return r;
}

}  // namespace splitrank
