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

#include "splitrank/bundle.hpp"
#include "splitrank/features.hpp"

namespace splitrank {

// Token-embedding dictionary for the query side. Holds the top-K most
// frequent tokens per field with their embedding rows copied out of the
// query-arm bundle. Immutable after build; concurrent reads are safe.
struct EmbeddingDictionary {
  ModelVersion version;

  struct Field {
    uint16_t embed_dim = 0;
    std::map<std::string, std::vector<float>> entries;
  };
  std::map<uint16_t, Field> fields;

  // Returns the stored vector, or nullptr on miss. A miss is a value,
  // not an error; callers decide what to do with uncovered tokens.
  const std::vector<float>* lookup(uint16_t field_id,
                                   const std::string& token) const;

  uint64_t entry_count() const;
};

struct DictBuildOptions {
  // Per-field entry cap; fields absent from per_field use default_top_k.
  uint32_t default_top_k = UINT32_MAX;
  std::map<uint16_t, uint32_t> per_field_top_k;
  // Builder warns on stderr when the serialized file would exceed this.
  uint64_t size_budget_bytes = 256ull * 1024 * 1024;
};

// Extracts embedding rows for the K most frequent tokens of every query-arm
// field. Ranking is by count descending, token ascending on ties; tokens
// missing from `counts` rank with count 0.
EmbeddingDictionary build_dictionary(const QueryArmBundle& bundle,
                                     const Vocabulary& vocab,
                                     const TokenCounts& counts,
                                     const DictBuildOptions& opts = {});

// Fraction of (field, token) occurrences in the log that lookup resolves.
// Trigrams count against text_field_id, facet tokens against their field.
float coverage(const EmbeddingDictionary& dict,
               const std::vector<QueryFeatures>& query_log,
               uint16_t text_field_id);

uint64_t embd_file_size(const EmbeddingDictionary& dict);

void save_dictionary(const EmbeddingDictionary& dict, const std::string& path);
EmbeddingDictionary load_dictionary(const std::string& path);

}  // namespace splitrank
