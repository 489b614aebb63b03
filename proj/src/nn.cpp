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

#include "splitrank/nn.hpp"

#include "nn_kernels.hpp"
#include "splitrank/rng.hpp"

namespace splitrank {

ArmRef query_arm_ref(const Model& m) { return {&m.spec.query_arm, &m.weights, "query"}; }
ArmRef member_arm_ref(const Model& m) { return {&m.spec.member_arm, &m.weights, "member"}; }

CrossRef cross_ref(const Model& m) {
  return {&m.spec.cross, &m.weights, m.spec.query_arm.output_dim(), m.spec.member_arm.output_dim()};
}

Model init_model(const ModelSpec& spec, uint64_t seed, float range) {
  Model model;
  model.spec = spec;
  model.weights = make_zero_weights(spec);
  Rng rng(seed);
  for (auto& t : model.weights.tensors_mut()) {
    for (auto& v : t.data) v = rng.uniform_f(-range, range);
  }
  return model;
}

std::vector<float> embed_pool(const std::vector<uint32_t>& tokens, const Tensor& table, Pooling mode) {
  if (table.shape.size() != 2) throw InputError("embed_pool: table must be rank 2");
  uint32_t vocab = table.shape[0];
  uint32_t dim = table.shape[1];
  std::vector<float> out(dim);
  detail::pool_field<float>(table, tokens, mode, vocab, dim, out.data());
  return out;
}

std::vector<float> aggregate_fields(const ArmRef& arm, const FieldInputs& inputs) {
  return detail::arm_aggregate<float>(arm, inputs);
}

std::vector<float> forward_arm(const ArmRef& arm, const FieldInputs& inputs) {
  return detail::arm_forward<float>(arm, inputs);
}

std::vector<float> forward_dense_stack(const ArmRef& arm, const std::vector<float>& aggregate) {
  return detail::dense_stack<float>(*arm.weights, arm.prefix, arm.spec->hidden_dims,
                                    arm.spec->activation, /*linear_last=*/false, aggregate);
}

float similarity(const CrossRef& cross, const std::vector<float>& qvec, const std::vector<float>& mvec) {
  return detail::cross_score<float>(cross, qvec, mvec);
}

float score_pair(const Model& model, const FieldInputs& query, const FieldInputs& member) {
  std::vector<float> q = forward_arm(query_arm_ref(model), query);
  std::vector<float> m = forward_arm(member_arm_ref(model), member);
  return similarity(cross_ref(model), q, m);
}

}  // namespace splitrank
