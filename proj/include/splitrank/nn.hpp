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

#include "splitrank/model.hpp"

namespace splitrank {

// Token ids per field, the id-space input of an arm. String tokens are
// resolved to ids one layer up (see features.hpp); everything below this
// line is pure arithmetic over (spec, weights, ids).
using FieldInputs = std::map<uint16_t, std::vector<uint32_t>>;

struct Model {
  ModelSpec spec;
  ModelWeights weights;
};

// View of one arm inside a tensor store. `prefix` selects the tensor names
// ("query", "member", "cross").
struct ArmRef {
  const ArmSpec* spec;
  const TensorStore* weights;
  std::string prefix;
};

struct CrossRef {
  const CrossSpec* spec;
  const TensorStore* weights;
  uint32_t query_dim;
  uint32_t member_dim;
};

ArmRef query_arm_ref(const Model& m);
ArmRef member_arm_ref(const Model& m);
CrossRef cross_ref(const Model& m);

// Fresh model with every parameter drawn uniform(-range, range) from one
// seeded generator, tensors filled in manifest order.
Model init_model(const ModelSpec& spec, uint64_t seed, float range = 0.05f);

// Collapses a token list to one vector via the field's embedding table.
// Empty token list yields the zero vector; out-of-range ids throw.
std::vector<float> embed_pool(const std::vector<uint32_t>& tokens, const Tensor& table, Pooling mode);

// Pooled fields stacked in declared order, then the dense stack. `inputs`
// must carry a (possibly empty) entry for every field of the arm.
std::vector<float> forward_arm(const ArmRef& arm, const FieldInputs& inputs);

// Pools every field of the arm and concatenates in declared order.
std::vector<float> aggregate_fields(const ArmRef& arm, const FieldInputs& inputs);

// Dense stack only, on a pre-pooled aggregate. The frontend uses this with
// dictionary-resolved vectors instead of embedding tables.
std::vector<float> forward_dense_stack(const ArmRef& arm, const std::vector<float>& aggregate);

// Similarity layer. Cosine defines the zero-vector case as 0.0; dense_cross
// runs its stack on [q; m] with a linear final scalar.
float similarity(const CrossRef& cross, const std::vector<float>& qvec, const std::vector<float>& mvec);

// The monolithic scoring function: both arms plus the similarity layer.
// This is the oracle the split pipeline is checked against.
float score_pair(const Model& model, const FieldInputs& query, const FieldInputs& member);

}  // namespace splitrank
