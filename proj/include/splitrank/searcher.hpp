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

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "splitrank/bundle.hpp"
#include "splitrank/features.hpp"
#include "splitrank/index_build.hpp"
#include "splitrank/index_format.hpp"

namespace splitrank {

struct Term {
  uint16_t field_id = kAnyField;
  std::string token;
};

enum class RetrievalMode : uint8_t { kAny, kAll };
std::string to_string(RetrievalMode m);
RetrievalMode retrieval_mode_from_string(const std::string& s);

struct SearchRequest {
  uint16_t version = kUnversioned;
  std::vector<float> qrep;
  std::vector<Term> terms;
  RetrievalMode mode = RetrievalMode::kAny;
  uint32_t max_candidates = 10000;
  uint32_t k = 10;
  float w_sem = 1.0f;
  float w_term = 0.0f;
};

struct SearchHit {
  uint64_t uid = 0;
  float score = 0.0f;
  float semantic = 0.0f;
  float term_match = 0.0f;
};

struct SearchTiming {
  uint64_t retrieve_us = 0;
  uint64_t score_us = 0;
};

struct SearchResponse {
  uint32_t shard_id = 0;
  std::vector<SearchHit> hits;
  SearchTiming timing;
};

// The immutable part of a shard, shared by every snapshot derived from it.
struct ShardBase {
  uint32_t shard_id = 0;
  uint16_t version = kUnversioned;  // agreed field_version of all records
  ForwardIndex forward;
  InvertedIndex inverted;
};

// One consistent view of a shard: the shared base plus a live-update overlay
// whose records shadow base records by uid. Snapshots are values; an update
// copies the overlay and leaves every existing snapshot untouched.
struct ShardSnapshot {
  std::shared_ptr<const ShardBase> base;
  std::map<uint64_t, ForwardIndexRecord> overlay;

  // Overlay-aware record lookup; nullptr when the uid is absent.
  const ForwardIndexRecord* record(uint64_t uid) const;
  uint16_t version() const { return base->version; }
  uint32_t shard_id() const { return base->shard_id; }
};

// Reads dir/forward.fwdx + dir/inverted.invx. All records must carry the
// same field_version; a mix is a load error.
ShardSnapshot load_shard(const std::string& dir, uint32_t shard_id);
ShardSnapshot make_snapshot(ShardIndex index);

// Candidate retrieval: `any` unions, `all` intersects the term postings,
// overlay-aware, in ascending uid order, truncated at max_candidates.
// kAnyField terms match the token in every indexed field. No terms, or
// unknown terms only, yield no candidates.
std::vector<uint64_t> retrieve(const ShardSnapshot& snapshot, const std::vector<Term>& terms,
                               RetrievalMode mode, uint32_t max_candidates);

struct ScoreWeights {
  float w_sem = 1.0f;
  float w_term = 0.0f;
};

// Scores every candidate: semantic = similarity(cross, qrep, stored vector),
// term_match = fraction of qterms present in the stored attributes, final =
// w_sem*semantic + w_term*term_match. Records with field_version 0
// contribute semantic 0. Output sorted by score descending, uid ascending.
std::vector<SearchHit> score_hits(const ShardSnapshot& snapshot,
                                  const std::vector<uint64_t>& candidates,
                                  const std::vector<float>& qrep,
                                  const std::vector<Term>& qterms,
                                  const CrossBundle& cross, ScoreWeights weights);

// Copy-on-write live update: returns a new snapshot whose overlay contains
// the member's record; the input snapshot stays valid for in-flight reads.
ShardSnapshot apply_live_update(const ShardSnapshot& snapshot, const MemberProfile& profile,
                                const std::vector<float>& vector, const ModelVersion& version);

// retrieve + score + truncate to k, with per-phase timings. Version rule:
// request, cross bundle and shard must agree; an empty shard (version 0)
// accepts any request version and returns term-only scores.
SearchResponse search(const ShardSnapshot& snapshot, const SearchRequest& request,
                      const CrossBundle& cross);

}  // namespace splitrank
