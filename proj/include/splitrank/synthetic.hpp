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
#include <string>
#include <vector>

#include "splitrank/features.hpp"
#include "splitrank/model.hpp"
#include "splitrank/train.hpp"

namespace splitrank {

// Field layout of the synthetic corpus. Fields 1-3 feed the arms; the word
// and location fields exist for retrieval and term matching only.
inline constexpr uint16_t kTextField = 1;      // trigrams of the headline
inline constexpr uint16_t kSkillField = 2;
inline constexpr uint16_t kTitleField = 3;
inline constexpr uint16_t kWordField = 4;      // headline words, verbatim
inline constexpr uint16_t kLocationField = 5;

// Members are drawn from latent clusters. Every cluster owns synonym token
// pairs (variant a and b) for its word, skill and title; a member commits to
// one variant, so b-variant members of a cluster share no surface token with
// the cluster's a-variant query. "Past cluster" tokens plant lexical false
// positives: members carrying another cluster's a-tokens without belonging
// to it. Synonym clusters are b-heavy, which is what starves lexical
// matching on their queries.
struct SyntheticConfig {
  uint64_t seed = 7;
  uint32_t n_members = 50000;
  uint32_t n_clusters = 20;
  uint32_t synonym_clusters = 5;
  uint32_t queries_per_cluster = 10;

  uint32_t noise_words = 200;
  uint32_t noise_skills = 200;
  uint32_t noise_titles = 200;
  uint32_t locations = 5;
  double zipf_exponent = 1.0;

  double b_rate = 0.45;        // balanced clusters
  double b_rate_heavy = 0.9;   // synonym clusters
  double past_prob = 0.5;
  double extra_noise_skill_prob = 0.5;

  void validate() const;
};

SyntheticConfig synthetic_config_from_json_file(const std::string& path);

struct SyntheticQuery {
  uint32_t qid = 0;
  std::string text;
  std::map<uint16_t, std::vector<std::string>> facets;
  uint32_t cluster = 0;
  bool synonym = false;  // targets a b-heavy cluster
};

struct SyntheticOutput {
  SyntheticConfig config;
  std::vector<MemberProfile> members;            // uids 1..n, ascending
  std::vector<uint32_t> member_cluster;          // by uid-1
  std::vector<SyntheticQuery> queries;
  std::map<uint32_t, std::vector<uint64_t>> judgments;  // qid -> sorted uids
  Vocabulary vocab;
  TokenCounts counts;
  ModelSpec model_spec;
};

// Deterministic: one seed, one byte-identical output.
SyntheticOutput gen_synthetic(const SyntheticConfig& config);

// corpus.jsonl, queries.jsonl, judgments.jsonl, vocab.json, counts.json,
// modelspec.json under dir.
void write_synthetic(const SyntheticOutput& out, const std::string& dir);

std::vector<SyntheticQuery> load_queries(const std::string& path);
std::map<uint32_t, std::vector<uint64_t>> load_judgments(const std::string& path);

// Arm shapes used by the experiment: shallow query arm, deeper member arm,
// embed dim 32 per field, output dim 64, cosine cross. Vocab sizes come
// from the generated vocabulary.
ModelSpec make_default_model_spec(const Vocabulary& vocab);

// Pairwise examples: a query, one relevant member, one member sampled from
// outside the relevant set. Deterministic in (output, seed).
std::vector<TrainExample> make_training_pairs(const SyntheticOutput& out, uint32_t pairs_per_query,
                                              uint64_t seed);

// Every 10th pair goes to the held-out set.
std::pair<std::vector<TrainExample>, std::vector<TrainExample>> split_pairs(
    std::vector<TrainExample> pairs);

}  // namespace splitrank
