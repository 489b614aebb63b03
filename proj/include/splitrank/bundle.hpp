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
#include <string>
#include <tuple>

#include "splitrank/nn.hpp"

namespace splitrank {

// Version id 0 is reserved for "unversioned/absent": a forward-index record
// without a semantic vector, or a monolithic model that was never split.
struct ModelVersion {
  uint16_t version_id = 0;
  std::string label;
};

inline constexpr uint16_t kUnversioned = 0;

// The three independently deployable pieces of one trained model. All three
// carry the same version and together hold exactly the monolithic tensors.
struct QueryArmBundle {
  ModelVersion version;
  ArmSpec spec;
  TensorStore weights;  // tensor names keep their "query." prefix
  ArmRef arm() const { return {&spec, &weights, "query"}; }
};

struct MemberArmBundle {
  ModelVersion version;
  ArmSpec spec;
  TensorStore weights;
  ArmRef arm() const { return {&spec, &weights, "member"}; }
};

struct CrossBundle {
  ModelVersion version;
  CrossSpec spec;
  uint32_t query_dim = 0;
  uint32_t member_dim = 0;
  TensorStore weights;
  CrossRef cross() const { return {&spec, &weights, query_dim, member_dim}; }
};

// Carves a trained model into its three sub-networks. Tensor names are
// preserved, so the three bundles partition the monolithic tensor set.
std::tuple<QueryArmBundle, MemberArmBundle, CrossBundle> split(const Model& model,
                                                               const ModelVersion& version);

// Bundle directory format: manifest.json (kind, version, spec, tensor order
// and shapes) + weights.bin (all tensors concatenated in manifest order as
// little-endian float32). Round-trips are bit-exact.
void save_model(const Model& model, const std::string& dir, const std::string& version_label = "unversioned");
Model load_model(const std::string& dir);

void save_bundle(const QueryArmBundle& b, const std::string& dir);
void save_bundle(const MemberArmBundle& b, const std::string& dir);
void save_bundle(const CrossBundle& b, const std::string& dir);

QueryArmBundle load_query_arm_bundle(const std::string& dir);
MemberArmBundle load_member_arm_bundle(const std::string& dir);
CrossBundle load_cross_bundle(const std::string& dir);

}  // namespace splitrank
