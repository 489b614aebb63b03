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

#include "splitrank/model.hpp"

#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

namespace splitrank {

std::string to_string(Pooling p) { return p == Pooling::kMean ? "mean" : "sum"; }
std::string to_string(Activation a) { return a == Activation::kTanh ? "tanh" : "relu"; }
std::string to_string(CrossKind k) { return k == CrossKind::kCosine ? "cosine" : "dense_cross"; }

Pooling pooling_from_string(const std::string& s) {
  if (s == "mean") return Pooling::kMean;
  if (s == "sum") return Pooling::kSum;
  throw FormatError("unknown pooling: " + s);
}

Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::kTanh;
  if (s == "relu") return Activation::kRelu;
  throw FormatError("unknown activation: " + s);
}

CrossKind cross_kind_from_string(const std::string& s) {
  if (s == "cosine") return CrossKind::kCosine;
  if (s == "dense_cross") return CrossKind::kDenseCross;
  throw FormatError("unknown cross kind: " + s);
}

void ArmSpec::validate(const std::string& name) const {
  if (fields.empty()) throw InputError(name + ": arm needs at least one field");
  std::set<uint16_t> seen;
  for (const auto& f : fields) {
    if (f.vocab_size < 1) throw InputError(name + ": field " + std::to_string(f.field_id) + " vocab_size < 1");
    if (f.embed_dim < 1) throw InputError(name + ": field " + std::to_string(f.field_id) + " embed_dim < 1");
    if (!seen.insert(f.field_id).second) {
      throw InputError(name + ": duplicate field_id " + std::to_string(f.field_id));
    }
  }
  if (hidden_dims.empty()) throw InputError(name + ": hidden_dims must be non-empty");
  for (uint32_t d : hidden_dims) {
    if (d < 1) throw InputError(name + ": hidden dim must be positive");
  }
}

void ModelSpec::validate() const {
  query_arm.validate("query_arm");
  member_arm.validate("member_arm");
  if (cross.kind == CrossKind::kCosine) {
    if (query_arm.output_dim() != member_arm.output_dim()) {
      throw InputError("cosine cross requires query output_dim == member output_dim");
    }
  } else {
    if (cross.hidden_dims.empty() || cross.hidden_dims.back() != 1) {
      throw InputError("dense_cross hidden_dims must end in 1");
    }
    for (uint32_t d : cross.hidden_dims) {
      if (d < 1) throw InputError("dense_cross hidden dim must be positive");
    }
  }
}

Tensor& TensorStore::add(std::string name, std::vector<uint32_t> shape) {
  if (index_.count(name)) throw InputError("duplicate tensor name: " + name);
  Tensor t;
  t.name = std::move(name);
  t.shape = std::move(shape);
  t.data.assign(t.numel(), 0.0f);
  index_[t.name] = tensors_.size();
  tensors_.push_back(std::move(t));
  return tensors_.back();
}

const Tensor& TensorStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw InputError("no such tensor: " + name);
  return tensors_[it->second];
}

Tensor& TensorStore::get_mut(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw InputError("no such tensor: " + name);
  return tensors_[it->second];
}

size_t TensorStore::total_params() const {
  size_t n = 0;
  for (const auto& t : tensors_) n += t.data.size();
  return n;
}

bool TensorStore::all_finite() const {
  for (const auto& t : tensors_) {
    for (float v : t.data) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

std::string embed_tensor_name(const std::string& arm, uint16_t field_id) {
  return arm + ".embed.f" + std::to_string(field_id);
}

std::string dense_weight_name(const std::string& arm, size_t layer) {
  return arm + ".dense." + std::to_string(layer) + ".weight";
}

std::string dense_bias_name(const std::string& arm, size_t layer) {
  return arm + ".dense." + std::to_string(layer) + ".bias";
}

std::vector<Tensor> arm_tensor_shapes(const std::string& arm, const ArmSpec& spec) {
  std::vector<Tensor> out;
  for (const auto& f : spec.fields) {
    Tensor t;
    t.name = embed_tensor_name(arm, f.field_id);
    t.shape = {f.vocab_size, f.embed_dim};
    out.push_back(std::move(t));
  }
  uint32_t in = spec.aggregate_width();
  for (size_t i = 0; i < spec.hidden_dims.size(); ++i) {
    uint32_t outw = spec.hidden_dims[i];
    Tensor w;
    w.name = dense_weight_name(arm, i);
    w.shape = {outw, in};
    out.push_back(std::move(w));
    Tensor b;
    b.name = dense_bias_name(arm, i);
    b.shape = {outw};
    out.push_back(std::move(b));
    in = outw;
  }
  return out;
}

std::vector<Tensor> cross_tensor_shapes(const CrossSpec& spec, uint32_t query_dim, uint32_t member_dim) {
  std::vector<Tensor> out;
  if (spec.kind == CrossKind::kCosine) return out;
  uint32_t in = query_dim + member_dim;
  for (size_t i = 0; i < spec.hidden_dims.size(); ++i) {
    uint32_t outw = spec.hidden_dims[i];
    Tensor w;
    w.name = dense_weight_name("cross", i);
    w.shape = {outw, in};
    out.push_back(std::move(w));
    Tensor b;
    b.name = dense_bias_name("cross", i);
    b.shape = {outw};
    out.push_back(std::move(b));
    in = outw;
  }
  return out;
}

ModelWeights make_zero_weights(const ModelSpec& spec) {
  spec.validate();
  ModelWeights w;
  for (auto& t : arm_tensor_shapes("query", spec.query_arm)) w.add(t.name, t.shape);
  for (auto& t : arm_tensor_shapes("member", spec.member_arm)) w.add(t.name, t.shape);
  for (auto& t : cross_tensor_shapes(spec.cross, spec.query_arm.output_dim(), spec.member_arm.output_dim())) {
    w.add(t.name, t.shape);
  }
  return w;
}

nlohmann::json arm_spec_to_json(const ArmSpec& s) {
  nlohmann::json fields = nlohmann::json::array();
  for (const auto& f : s.fields) {
    fields.push_back({{"field_id", f.field_id},
                      {"vocab_size", f.vocab_size},
                      {"embed_dim", f.embed_dim},
                      {"pooling", to_string(f.pooling)}});
  }
  return {{"fields", fields}, {"hidden_dims", s.hidden_dims}, {"activation", to_string(s.activation)}};
}

ArmSpec arm_spec_from_json(const nlohmann::json& j) {
  ArmSpec s;
  for (const auto& f : j.at("fields")) {
    FieldSpec fs;
    fs.field_id = f.at("field_id").get<uint16_t>();
    fs.vocab_size = f.at("vocab_size").get<uint32_t>();
    fs.embed_dim = f.at("embed_dim").get<uint32_t>();
    fs.pooling = pooling_from_string(f.at("pooling").get<std::string>());
    s.fields.push_back(fs);
  }
  s.hidden_dims = j.at("hidden_dims").get<std::vector<uint32_t>>();
  s.activation = activation_from_string(j.at("activation").get<std::string>());
  return s;
}

nlohmann::json cross_spec_to_json(const CrossSpec& s) {
  return {{"kind", to_string(s.kind)},
          {"hidden_dims", s.hidden_dims},
          {"activation", to_string(s.activation)}};
}

CrossSpec cross_spec_from_json(const nlohmann::json& j) {
  CrossSpec s;
  s.kind = cross_kind_from_string(j.at("kind").get<std::string>());
  s.hidden_dims = j.at("hidden_dims").get<std::vector<uint32_t>>();
  if (j.contains("activation")) s.activation = activation_from_string(j.at("activation").get<std::string>());
  return s;
}

nlohmann::json model_spec_to_json(const ModelSpec& s) {
  return {{"query_arm", arm_spec_to_json(s.query_arm)},
          {"member_arm", arm_spec_to_json(s.member_arm)},
          {"cross", cross_spec_to_json(s.cross)}};
}

ModelSpec model_spec_from_json(const nlohmann::json& j) {
  ModelSpec s;
  s.query_arm = arm_spec_from_json(j.at("query_arm"));
  s.member_arm = arm_spec_from_json(j.at("member_arm"));
  s.cross = cross_spec_from_json(j.at("cross"));
  return s;
}

}  // namespace splitrank
