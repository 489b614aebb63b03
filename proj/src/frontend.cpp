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

#include "splitrank/frontend.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "splitrank/binio.hpp"
#include "splitrank/error.hpp"

namespace splitrank {

using nlohmann::json;

uint64_t nearest_rank_percentile(std::vector<uint64_t> samples, double p) {
  if (samples.empty()) throw InputError("percentile of empty sample set");
  if (p <= 0.0 || p > 100.0) throw InputError("percentile must be in (0, 100]");
  std::sort(samples.begin(), samples.end());
  size_t rank = static_cast<size_t>(std::ceil(p / 100.0 * static_cast<double>(samples.size())));
  if (rank == 0) rank = 1;
  return samples[rank - 1];
}

PhasePercentiles phase_percentiles(const std::vector<uint64_t>& samples) {
  PhasePercentiles out;
  out.p50 = nearest_rank_percentile(samples, 50.0);
  out.p90 = nearest_rank_percentile(samples, 90.0);
  out.p99 = nearest_rank_percentile(samples, 99.0);
  return out;
}

LatencyRecorder::LatencyRecorder(LatencyRecorder&& other) {
  std::lock_guard<std::mutex> lock(other.mu_);
  parse_ = std::move(other.parse_);
  qarm_ = std::move(other.qarm_);
  backend_ = std::move(other.backend_);
  total_ = std::move(other.total_);
}

void LatencyRecorder::record(const RequestTrace& t) {
  std::lock_guard<std::mutex> lock(mu_);
  parse_.push_back(t.parse_us);
  qarm_.push_back(t.qarm_us);
  backend_.push_back(t.backend_us);
  total_.push_back(t.total_us);
}

size_t LatencyRecorder::count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return total_.size();
}

PhasePercentiles LatencyRecorder::parse() const {
  std::lock_guard<std::mutex> lock(mu_);
  return phase_percentiles(parse_);
}

PhasePercentiles LatencyRecorder::qarm() const {
  std::lock_guard<std::mutex> lock(mu_);
  return phase_percentiles(qarm_);
}

PhasePercentiles LatencyRecorder::backend() const {
  std::lock_guard<std::mutex> lock(mu_);
  return phase_percentiles(backend_);
}

PhasePercentiles LatencyRecorder::total() const {
  std::lock_guard<std::mutex> lock(mu_);
  return phase_percentiles(total_);
}

std::vector<uint64_t> LatencyRecorder::qarm_samples() const {
  std::lock_guard<std::mutex> lock(mu_);
  return qarm_;
}

namespace {

json percentiles_to_json(const PhasePercentiles& p) {
  return json{{"p50", p.p50}, {"p90", p.p90}, {"p99", p.p99}};
}

}  // namespace

json LatencyRecorder::summary() const {
  std::lock_guard<std::mutex> lock(mu_);
  if (total_.empty()) return json{{"count", 0}};
  return json{{"count", total_.size()},
              {"parse_us", percentiles_to_json(phase_percentiles(parse_))},
              {"qarm_us", percentiles_to_json(phase_percentiles(qarm_))},
              {"backend_us", percentiles_to_json(phase_percentiles(backend_))},
              {"total_us", percentiles_to_json(phase_percentiles(total_))}};
}

FrontendConfig load_frontend_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  FrontendConfig cfg;
  cfg.dict_path = require_field(j, "dict").get<std::string>();
  cfg.query_arm_dir = require_field(j, "query_arm").get<std::string>();
  cfg.broker_endpoint = require_field(j, "broker").get<std::string>();
  cfg.w_sem = j.value("w_sem", cfg.w_sem);
  cfg.w_term = j.value("w_term", cfg.w_term);
  cfg.default_k = j.value("k", cfg.default_k);
  cfg.max_candidates = j.value("max_candidates", cfg.max_candidates);
  cfg.text_field_id = j.value("text_field_id", cfg.text_field_id);
  if (j.contains("mode")) cfg.mode = retrieval_mode_from_string(j["mode"].get<std::string>());
  cfg.timeout_ms = j.value("timeout_ms", cfg.timeout_ms);
  return cfg;
}

void save_frontend_config(const FrontendConfig& cfg, const std::string& path) {
  json j{{"dict", cfg.dict_path},
         {"query_arm", cfg.query_arm_dir},
         {"broker", cfg.broker_endpoint},
         {"w_sem", cfg.w_sem},
         {"w_term", cfg.w_term},
         {"k", cfg.default_k},
         {"max_candidates", cfg.max_candidates},
         {"text_field_id", cfg.text_field_id},
         {"mode", to_string(cfg.mode)},
         {"timeout_ms", cfg.timeout_ms}};
  write_file_atomic(path, j.dump(2) + "\n");
}

Frontend::Frontend(EmbeddingDictionary dict, QueryArmBundle bundle, FrontendConfig cfg)
    : dict_(std::move(dict)), bundle_(std::move(bundle)), cfg_(std::move(cfg)) {
  if (dict_.version.version_id != bundle_.version.version_id) {
    throw VersionError("dictionary version " + std::to_string(dict_.version.version_id) +
                       " does not match query arm version " +
                       std::to_string(bundle_.version.version_id));
  }
}

Frontend::Frontend(Frontend&& other)
    : dict_(std::move(other.dict_)),
      bundle_(std::move(other.bundle_)),
      cfg_(std::move(other.cfg_)),
      backend_(std::move(other.backend_)),
      qarm_evals_(other.qarm_evals_.load()),
      recorder_(std::move(other.recorder_)) {}

std::pair<std::vector<float>, uint32_t> Frontend::build_query_representation(
    const QueryFeatures& features) {
  std::vector<float> aggregate;
  aggregate.reserve(bundle_.spec.aggregate_width());
  uint32_t misses = 0;

  static const std::vector<std::string> kNoTokens;
  for (const FieldSpec& fs : bundle_.spec.fields) {
    const std::vector<std::string>* tokens = &kNoTokens;
    if (fs.field_id == cfg_.text_field_id) {
      tokens = &features.trigrams;
    } else if (auto it = features.facets.find(fs.field_id); it != features.facets.end()) {
      tokens = &it->second;
    }

    std::vector<float> pooled(fs.embed_dim, 0.0f);
    size_t resolved = 0;
    for (const std::string& tok : *tokens) {
      const std::vector<float>* vec = dict_.lookup(fs.field_id, tok);
      if (!vec) {
        ++misses;
        continue;
      }
      for (uint32_t d = 0; d < fs.embed_dim; ++d) pooled[d] += (*vec)[d];
      ++resolved;
    }
    if (fs.pooling == Pooling::kMean && resolved > 0) {
      float inv = 1.0f / static_cast<float>(resolved);
      for (float& x : pooled) x *= inv;
    }
    aggregate.insert(aggregate.end(), pooled.begin(), pooled.end());
  }

  std::vector<float> qrep = forward_dense_stack(bundle_.arm(), aggregate);
  qarm_evals_.fetch_add(1);
  return {std::move(qrep), misses};
}

std::vector<Term> Frontend::build_terms(const QueryFeatures& features) const {
  std::vector<Term> terms;
  for (const std::string& w : features.raw_terms) terms.push_back({kAnyField, w});
  for (const auto& [fid, toks] : features.facets) {
    for (const std::string& t : toks) terms.push_back({fid, t});
  }
  return terms;
}

UserSearchResponse Frontend::handle_search(const UserSearchRequest& req) {
  using clock = std::chrono::steady_clock;
  auto us = [](clock::time_point a, clock::time_point b) {
    return static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(b - a).count());
  };

  auto t0 = clock::now();
  QueryFeatures features = parse_query(req.text, req.facets);
  auto t1 = clock::now();
  auto [qrep, misses] = build_query_representation(features);
  auto t2 = clock::now();

  SearchRequest sreq;
  sreq.version = bundle_.version.version_id;
  sreq.qrep = std::move(qrep);
  sreq.terms = build_terms(features);
  sreq.mode = cfg_.mode;
  sreq.max_candidates = cfg_.max_candidates;
  sreq.k = req.k ? req.k : cfg_.default_k;
  sreq.w_sem = cfg_.w_sem;
  sreq.w_term = cfg_.w_term;

  json wire_request = search_request_to_json(sreq);
  json backend_resp;
  if (backend_) {
    backend_resp = backend_(wire_request);
  } else {
    backend_resp = json::parse(
        LineClient::request_once(cfg_.broker_endpoint, wire_request.dump(), cfg_.timeout_ms));
  }
  auto t3 = clock::now();
  BrokerResult result = broker_response_from_json(backend_resp);

  UserSearchResponse out;
  out.hits = std::move(result.hits);
  out.degraded = std::move(result.degraded);
  out.trace.parse_us = us(t0, t1);
  out.trace.qarm_us = us(t1, t2);
  out.trace.backend_us = us(t2, t3);
  out.trace.total_us = us(t0, clock::now());
  recorder_.record(out.trace);
  return out;
}

Frontend make_frontend(const FrontendConfig& cfg) {
  EmbeddingDictionary dict = load_dictionary(cfg.dict_path);
  QueryArmBundle bundle = load_query_arm_bundle(cfg.query_arm_dir);
  return Frontend(std::move(dict), std::move(bundle), cfg);
}

FrontendServer::FrontendServer(Frontend frontend, const std::string& host, uint16_t port)
    : frontend_(std::move(frontend)),
      server_(host, port, [this](const std::string& line) { return handle(line); }) {}

std::string FrontendServer::handle(const std::string& line) {
  try {
    json j = json::parse(line);
    std::string type = require_field(j, "type").get<std::string>();
    if (type == "stats") {
      json s = frontend_.latencies().summary();
      s["type"] = "stats";
      s["qarm_evals"] = frontend_.qarm_eval_count();
      return s.dump();
    }
    UserSearchRequest req = user_search_request_from_json(j);
    return user_search_response_to_json(frontend_.handle_search(req)).dump();
  } catch (const json::exception& e) {
    return error_response("bad_request", std::string("bad json: ") + e.what()).dump();
  } catch (const Error& e) {
    return error_response(e.code(), e.what()).dump();
  } catch (const std::exception& e) {
    return error_response("internal", e.what()).dump();
  }
}

}  // namespace splitrank
