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

#include <nlohmann/json_fwd.hpp>

#include "splitrank/error.hpp"

namespace splitrank {

enum class Pooling : uint8_t { kMean, kSum };
enum class Activation : uint8_t { kTanh, kRelu };
enum class CrossKind : uint8_t { kCosine, kDenseCross };

std::string to_string(Pooling p);
std::string to_string(Activation a);
std::string to_string(CrossKind k);
Pooling pooling_from_string(const std::string& s);
Activation activation_from_string(const std::string& s);
CrossKind cross_kind_from_string(const std::string& s);

// One categorical input field of an arm: an embedding table plus a pooling
// mode that collapses the field's token list to a single vector.
struct FieldSpec {
  uint16_t field_id = 0;
  uint32_t vocab_size = 0;
  uint32_t embed_dim = 0;
  Pooling pooling = Pooling::kMean;
};

// One tower: per-field embeddings, stacked in declared field order, then a
// dense stack. The activation is applied after every dense layer, the last
// one included, so arm outputs stay bounded for the cosine cross.
struct ArmSpec {
  std::vector<FieldSpec> fields;
  std::vector<uint32_t> hidden_dims;
  Activation activation = Activation::kTanh;

  uint32_t aggregate_width() const {
    uint32_t w = 0;
    for (const auto& f : fields) w += f.embed_dim;
    return w;
  }
  uint32_t output_dim() const { return hidden_dims.empty() ? 0 : hidden_dims.back(); }

  void validate(const std::string& name) const;
};

// Similarity layer. For kDenseCross the stack runs on [query; member] with a
// final width-1 linear layer (no activation on the scalar output).
struct CrossSpec {
  CrossKind kind = CrossKind::kCosine;
  std::vector<uint32_t> hidden_dims;  // dense_cross only; final entry must be 1
  Activation activation = Activation::kTanh;
};

struct ModelSpec {
  ArmSpec query_arm;
  ArmSpec member_arm;
  CrossSpec cross;

  void validate() const;
};

// Named weight tensor, row-major float32.
struct Tensor {
  std::string name;
  std::vector<uint32_t> shape;
  std::vector<float> data;

  size_t numel() const {
    size_t n = 1;
    for (uint32_t d : shape) n *= d;
    return n;
  }
};

// All parameters of a model or sub-network, in manifest order. Lookup is by
// name; order is part of the on-disk contract.
class TensorStore {
 public:
  Tensor& add(std::string name, std::vector<uint32_t> shape);
  const Tensor& get(const std::string& name) const;
  Tensor& get_mut(const std::string& name);
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  const std::vector<Tensor>& tensors() const { return tensors_; }
  std::vector<Tensor>& tensors_mut() { return tensors_; }

  size_t total_params() const;
  bool all_finite() const;

 private:
  std::vector<Tensor> tensors_;
  std::map<std::string, size_t> index_;
};

using ModelWeights = TensorStore;

// Tensor naming scheme shared by the monolithic model and the split bundles.
// The "query."/"member."/"cross." prefixes are what makes the split a clean
// partition of tensor names.
std::string embed_tensor_name(const std::string& arm, uint16_t field_id);
std::string dense_weight_name(const std::string& arm, size_t layer);
std::string dense_bias_name(const std::string& arm, size_t layer);

// Declares every tensor of `spec` in manifest order with zeroed data.
ModelWeights make_zero_weights(const ModelSpec& spec);

// Expected shapes for one arm's tensors, keyed by name, in declared order.
std::vector<Tensor> arm_tensor_shapes(const std::string& arm, const ArmSpec& spec);
std::vector<Tensor> cross_tensor_shapes(const CrossSpec& spec, uint32_t query_dim, uint32_t member_dim);

// JSON (de)serialization of specs, used by bundle manifests and CLI config.
nlohmann::json arm_spec_to_json(const ArmSpec& s);
ArmSpec arm_spec_from_json(const nlohmann::json& j);
nlohmann::json cross_spec_to_json(const CrossSpec& s);
CrossSpec cross_spec_from_json(const nlohmann::json& j);
nlohmann::json model_spec_to_json(const ModelSpec& s);
ModelSpec model_spec_from_json(const nlohmann::json& j);

}  // namespace splitrank
