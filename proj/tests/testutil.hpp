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

#include <cstdio>
#include <filesystem>
#include <string>

#include "splitrank/model.hpp"

namespace testutil {

// Unique scratch directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0;; ++i) {
      path_ = base / ("splitrank_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++) );
      std::error_code ec;
      if (std::filesystem::create_directory(path_, ec)) break;
      if (i > 100) throw std::runtime_error("cannot create temp dir");
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }
  std::string sub(const std::string& name) const { return (path_ / name).string(); }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

inline splitrank::FieldSpec field(uint16_t id, uint32_t vocab, uint32_t dim,
                                  splitrank::Pooling pooling = splitrank::Pooling::kMean) {
  splitrank::FieldSpec f;
  f.field_id = id;
  f.vocab_size = vocab;
  f.embed_dim = dim;
  f.pooling = pooling;
  return f;
}

// Small two-field model used across the tests: query fields {1,2}, member
// fields {1,2,3}, so the arms have different aggregate widths.
inline splitrank::ModelSpec toy_spec(splitrank::Activation act = splitrank::Activation::kTanh,
                                     splitrank::CrossKind kind = splitrank::CrossKind::kCosine) {
  splitrank::ModelSpec spec;
  spec.query_arm.fields = {field(1, 12, 4), field(2, 8, 3, splitrank::Pooling::kSum)};
  spec.query_arm.hidden_dims = {6, 5};
  spec.query_arm.activation = act;
  spec.member_arm.fields = {field(1, 12, 4), field(2, 8, 3), field(3, 9, 2)};
  spec.member_arm.hidden_dims = {7, 5};
  spec.member_arm.activation = act;
  spec.cross.kind = kind;
  if (kind == splitrank::CrossKind::kDenseCross) spec.cross.hidden_dims = {6, 1};
  spec.cross.activation = act;
  return spec;
}

}  // namespace testutil
