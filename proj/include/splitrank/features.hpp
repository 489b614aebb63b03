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
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "splitrank/nn.hpp"

namespace splitrank {

// Wildcard field id in search terms: (kAnyField, token) matches the token in
// any stored field. Real fields therefore start at 1.
inline constexpr uint16_t kAnyField = 0;

// Parsed query: character trigrams of the free text, facet selections keyed
// by facet field id, and the raw lowercased words for the term-match
// feature.
struct QueryFeatures {
  std::vector<std::string> trigrams;
  std::map<uint16_t, std::vector<std::string>> facets;
  std::vector<std::string> raw_terms;
};

struct MemberProfile {
  uint64_t uid = 0;
  std::map<uint16_t, std::vector<std::string>> fields;
};

// Lowercases, splits on non-alphanumerics, wraps each word in '#' boundary
// markers and emits all character trigrams: "java" -> #ja jav ava va#.
std::vector<std::string> word_trigrams(const std::string& word);
std::vector<std::string> text_words(const std::string& text);
std::vector<std::string> text_trigrams(const std::string& text);

// Query parsing as the search frontend runs it. Facet tokens pass through
// verbatim; raw_terms are the lowercased text words. Retrieval terms are
// built from raw_terms (any-field) plus the facets (field-qualified).
QueryFeatures parse_query(const std::string& raw_text,
                          const std::map<uint16_t, std::vector<std::string>>& facets);

// Per-field token <-> id mapping shared by training, indexing and the
// dictionary builder. Ids are dense and equal the token's position in
// insertion order.
class Vocabulary {
 public:
  uint32_t add(uint16_t field_id, const std::string& token);
  std::optional<uint32_t> id(uint16_t field_id, const std::string& token) const;
  const std::string& token(uint16_t field_id, uint32_t id) const;
  uint32_t size(uint16_t field_id) const;
  std::vector<uint16_t> field_ids() const;
  const std::vector<std::string>& tokens(uint16_t field_id) const;

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  struct Field {
    std::vector<std::string> tokens;
    std::unordered_map<std::string, uint32_t> index;
  };
  std::map<uint16_t, Field> fields_;
};

// String tokens -> id lists for the arm's declared fields. Tokens missing
// from the vocabulary are skipped; every arm field gets an entry.
FieldInputs member_field_inputs(const MemberProfile& profile, const ArmSpec& arm, const Vocabulary& vocab);
FieldInputs query_field_inputs(const QueryFeatures& features, const ArmSpec& arm, const Vocabulary& vocab,
                               uint16_t text_field_id);

// Token usage counts per field, the frequency input of the dictionary
// builder.
using TokenCounts = std::map<uint16_t, std::map<std::string, uint64_t>>;
void save_token_counts(const TokenCounts& counts, const std::string& path);
TokenCounts load_token_counts(const std::string& path);

// Newline-delimited JSON corpus: {"uid": u64, "fields": {"<field_id>": [tokens...]}}.
// Malformed lines fail with their line number; duplicate uids are rejected.
std::vector<MemberProfile> ingest_members(const std::string& path);
void write_members(const std::vector<MemberProfile>& profiles, const std::string& path);
nlohmann::json member_to_json(const MemberProfile& p);
MemberProfile member_from_json(const nlohmann::json& j);

}  // namespace splitrank
