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
#include <set>
#include <string>
#include <vector>

#include "splitrank/quantize.hpp"

namespace splitrank {

inline constexpr uint8_t kQuantNone = 0;
inline constexpr uint8_t kQuantInt8 = 1;

// Per-member scoring payload: the versioned semantic vector plus the stored
// attribute tokens used for term matching and display. field_version 0 means
// the record carries no usable vector and scores semantic = 0.
struct ForwardIndexRecord {
  uint64_t uid = 0;
  uint16_t field_version = 0;
  QuantizedVector qvec;                               // kQuantInt8 payload
  std::vector<float> fvec;                            // kQuantNone payload
  std::map<uint16_t, std::vector<std::string>> tokens;
};

// Records are kept in ascending uid order; the file format refuses anything
// else so binary search over uids is always valid.
struct ForwardIndex {
  uint16_t dim = 0;
  uint8_t scheme = kQuantInt8;
  std::vector<ForwardIndexRecord> records;

  const ForwardIndexRecord* find(uint64_t uid) const;
  std::vector<float> decode(const ForwardIndexRecord& r) const;
};

void save_forward_index(const ForwardIndex& fwd, const std::string& path);
ForwardIndex load_forward_index(const std::string& path);

// Term -> sorted uid postings. Terms are (field_id, token) pairs serialized
// as "<field_id>:<token>"; field ids are tracked so kAnyField lookups can
// expand across every indexed field.
class InvertedIndex {
 public:
  void add(uint16_t field_id, const std::string& token, uint64_t uid);

  // Posting lists matching the term. A real field id yields zero or one
  // list; kAnyField yields one list per field that stores the token.
  std::vector<const std::vector<uint64_t>*> match(uint16_t field_id,
                                                  const std::string& token) const;

  size_t term_count() const { return postings_.size(); }
  const std::map<std::string, std::vector<uint64_t>>& postings() const { return postings_; }
  const std::set<uint16_t>& field_ids() const { return field_ids_; }

  static std::string term_key(uint16_t field_id, const std::string& token);

 private:
  std::map<std::string, std::vector<uint64_t>> postings_;
  std::set<uint16_t> field_ids_;
};

void save_inverted_index(const InvertedIndex& inv, const std::string& path);
InvertedIndex load_inverted_index(const std::string& path);

}  // namespace splitrank
