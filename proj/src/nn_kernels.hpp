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

// Private compute kernels, templated on the accumulator type: float for the
// runtime path, double for the finite-difference loss used by grad_check.
// Weights are always float32; T only widens the arithmetic.

#pragma once

#include <cmath>
#include <vector>

#include "splitrank/nn.hpp"

namespace splitrank::detail {

template <typename T>
T apply_act(Activation act, T x) {
  if (act == Activation::kTanh) return std::tanh(x);
  return x > T(0) ? x : T(0);
}

template <typename T>
void pool_field(const Tensor& table, const std::vector<uint32_t>& tokens, Pooling mode,
                uint32_t vocab_size, uint32_t dim, T* out) {
  for (uint32_t d = 0; d < dim; ++d) out[d] = T(0);
  if (tokens.empty()) return;
  for (uint32_t tok : tokens) {
    if (tok >= vocab_size) {
      throw InputError("token id " + std::to_string(tok) + " out of range for vocab " +
                       std::to_string(vocab_size));
    }
    const float* row = table.data.data() + static_cast<size_t>(tok) * dim;
    for (uint32_t d = 0; d < dim; ++d) out[d] += T(row[d]);
  }
  if (mode == Pooling::kMean) {
    T inv = T(1) / T(tokens.size());
    for (uint32_t d = 0; d < dim; ++d) out[d] *= inv;
  }
}

// y = act(W x + b) per layer. `linear_last` leaves the final layer without
// activation (dense_cross scalar output). Optional pre/post captures feed
// backprop.
template <typename T>
std::vector<T> dense_stack(const TensorStore& weights, const std::string& prefix,
                           const std::vector<uint32_t>& dims, Activation act, bool linear_last,
                           std::vector<T> x, std::vector<std::vector<T>>* pre_out = nullptr,
                           std::vector<std::vector<T>>* post_out = nullptr) {
  for (size_t layer = 0; layer < dims.size(); ++layer) {
    const Tensor& w = weights.get(dense_weight_name(prefix, layer));
    const Tensor& b = weights.get(dense_bias_name(prefix, layer));
    uint32_t out_dim = w.shape[0];
    uint32_t in_dim = w.shape[1];
    if (x.size() != in_dim) {
      throw InputError(prefix + " dense layer " + std::to_string(layer) + ": input width " +
                       std::to_string(x.size()) + " != " + std::to_string(in_dim));
    }
    std::vector<T> pre(out_dim);
    for (uint32_t o = 0; o < out_dim; ++o) {
      T acc = T(b.data[o]);
      const float* row = w.data.data() + static_cast<size_t>(o) * in_dim;
      for (uint32_t i = 0; i < in_dim; ++i) acc += T(row[i]) * x[i];
      pre[o] = acc;
    }
    bool linear = linear_last && layer + 1 == dims.size();
    std::vector<T> post(out_dim);
    for (uint32_t o = 0; o < out_dim; ++o) post[o] = linear ? pre[o] : apply_act(act, pre[o]);
    if (pre_out) pre_out->push_back(pre);
    if (post_out) post_out->push_back(post);
    x = std::move(post);
  }
  return x;
}

template <typename T>
std::vector<T> arm_aggregate(const ArmRef& arm, const FieldInputs& inputs) {
  std::vector<T> agg;
  agg.reserve(arm.spec->aggregate_width());
  for (const auto& f : arm.spec->fields) {
    auto it = inputs.find(f.field_id);
    if (it == inputs.end()) {
      throw InputError(arm.prefix + " arm: missing input for field " + std::to_string(f.field_id));
    }
    std::vector<T> pooled(f.embed_dim);
    const Tensor& table = arm.weights->get(embed_tensor_name(arm.prefix, f.field_id));
    pool_field(table, it->second, f.pooling, f.vocab_size, f.embed_dim, pooled.data());
    agg.insert(agg.end(), pooled.begin(), pooled.end());
  }
  return agg;
}

template <typename T>
std::vector<T> arm_forward(const ArmRef& arm, const FieldInputs& inputs,
                           std::vector<std::vector<T>>* pre = nullptr,
                           std::vector<std::vector<T>>* post = nullptr,
                           std::vector<T>* agg_out = nullptr) {
  std::vector<T> agg = arm_aggregate<T>(arm, inputs);
  if (agg_out) *agg_out = agg;
  return dense_stack<T>(*arm.weights, arm.prefix, arm.spec->hidden_dims, arm.spec->activation,
                        /*linear_last=*/false, std::move(agg), pre, post);
}

template <typename T>
T cosine(const std::vector<T>& a, const std::vector<T>& b) {
  T dot = T(0), na = T(0), nb = T(0);
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == T(0) || nb == T(0)) return T(0);
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

template <typename T>
T cross_score(const CrossRef& cross, const std::vector<T>& q, const std::vector<T>& m,
              std::vector<std::vector<T>>* pre = nullptr, std::vector<std::vector<T>>* post = nullptr) {
  if (q.size() != cross.query_dim || m.size() != cross.member_dim) {
    throw InputError("similarity: dimension mismatch (got " + std::to_string(q.size()) + "/" +
                     std::to_string(m.size()) + ", want " + std::to_string(cross.query_dim) + "/" +
                     std::to_string(cross.member_dim) + ")");
  }
  if (cross.spec->kind == CrossKind::kCosine) return cosine(q, m);
  std::vector<T> x;
  x.reserve(q.size() + m.size());
  x.insert(x.end(), q.begin(), q.end());
  x.insert(x.end(), m.begin(), m.end());
  std::vector<T> out = dense_stack<T>(*cross.weights, "cross", cross.spec->hidden_dims,
                                      cross.spec->activation, /*linear_last=*/true, std::move(x), pre, post);
  return out[0];
}

}  // namespace splitrank::detail
