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
#include <string>
#include <vector>

#include "splitrank/embed_dict.hpp"
#include "splitrank/net.hpp"
#include "splitrank/wire.hpp"

namespace splitrank {

// Nearest-rank percentile: the ceil(p/100 * n)-th smallest sample.
uint64_t nearest_rank_percentile(std::vector<uint64_t> samples, double p);

struct PhasePercentiles {
  uint64_t p50 = 0;
  uint64_t p90 = 0;
  uint64_t p99 = 0;
};

PhasePercentiles phase_percentiles(const std::vector<uint64_t>& samples);

// Thread-safe accumulator of request traces.
class LatencyRecorder {
 public:
  LatencyRecorder() = default;
  LatencyRecorder(LatencyRecorder&& other);

  void record(const RequestTrace& t);

  size_t count() const;
  PhasePercentiles parse() const;
  PhasePercentiles qarm() const;
  PhasePercentiles backend() const;
  PhasePercentiles total() const;
  std::vector<uint64_t> qarm_samples() const;

  nlohmann::json summary() const;

 private:
  mutable std::mutex mu_;
  std::vector<uint64_t> parse_;
  std::vector<uint64_t> qarm_;
  std::vector<uint64_t> backend_;
  std::vector<uint64_t> total_;
};

struct FrontendConfig {
  std::string dict_path;
  std::string query_arm_dir;
  std::string broker_endpoint;
  float w_sem = 1.0f;
  float w_term = 0.25f;
  uint32_t default_k = 10;
  uint32_t max_candidates = 10000;
  uint16_t text_field_id = 1;
  RetrievalMode mode = RetrievalMode::kAny;
  int timeout_ms = 2000;
};

FrontendConfig load_frontend_config(const std::string& path);
void save_frontend_config(const FrontendConfig& cfg, const std::string& path);

// Query-side online processing: parse, evaluate the query arm once via the
// dictionary, ship the representation to the broker, record latencies. The
// backend transport is injectable so tests can run without sockets.
class Frontend {
 public:
  using Backend = std::function<nlohmann::json(const nlohmann::json&)>;

  // Dictionary and bundle versions must match; a mismatch is refused here,
  // at startup, not per request.
  Frontend(EmbeddingDictionary dict, QueryArmBundle bundle, FrontendConfig cfg);
  Frontend(Frontend&& other);

  // Overrides the default broker transport (a LineClient round trip).
  void set_backend(Backend backend) { backend_ = std::move(backend); }

  // Pools dictionary vectors per field (misses skipped and counted; mean
  // pooling averages over the resolved tokens) and runs the dense stack.
  std::pair<std::vector<float>, uint32_t> build_query_representation(const QueryFeatures& features);

  // Retrieval/term-match terms: text words as any-field terms, facet tokens
  // field-qualified.
  std::vector<Term> build_terms(const QueryFeatures& features) const;

  UserSearchResponse handle_search(const UserSearchRequest& req);

  uint64_t qarm_eval_count() const { return qarm_evals_.load(); }
  const LatencyRecorder& latencies() const { return recorder_; }
  const FrontendConfig& config() const { return cfg_; }
  uint16_t version_id() const { return bundle_.version.version_id; }

 private:
  EmbeddingDictionary dict_;
  QueryArmBundle bundle_;
  FrontendConfig cfg_;
  Backend backend_;
  std::atomic<uint64_t> qarm_evals_{0};
  LatencyRecorder recorder_;
};

// Loads the dictionary and bundle named by the config.
Frontend make_frontend(const FrontendConfig& cfg);

class FrontendServer {
 public:
  FrontendServer(Frontend frontend, const std::string& host, uint16_t port);

  void start() { server_.start(); }
  void stop() { server_.stop(); }
  std::string endpoint() const { return server_.endpoint(); }
  uint16_t port() const { return server_.port(); }

  Frontend& frontend() { return frontend_; }

 private:
  std::string handle(const std::string& line);

  Frontend frontend_;
  LineServer server_;
};

}  // namespace splitrank
