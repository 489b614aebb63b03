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

#include "splitrank/bundle.hpp"

#include <filesystem>

#include <nlohmann/json.hpp>

#include "splitrank/binio.hpp"

namespace splitrank {

namespace {

constexpr int kManifestFormat = 1;

nlohmann::json tensor_list_json(const TensorStore& w) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : w.tensors()) {
    arr.push_back({{"name", t.name}, {"shape", t.shape}});
  }
  return arr;
}

std::string weights_blob(const TensorStore& w) {
  BinWriter out;
  for (const auto& t : w.tensors()) {
    for (float v : t.data) out.f32(v);
  }
  return out.data();
}

void write_bundle_dir(const std::string& dir, nlohmann::json manifest, const TensorStore& w) {
  std::filesystem::create_directories(dir);
  manifest["tensors"] = tensor_list_json(w);
  write_file_atomic(dir + "/manifest.json", manifest.dump(2) + "\n");
  write_file_atomic(dir + "/weights.bin", weights_blob(w));
}

struct LoadedBundle {
  nlohmann::json manifest;
  TensorStore weights;
  ModelVersion version;
};

// Parses manifest.json, validates the declared tensor list against
// weights.bin, and loads the floats. Every mismatch names the tensor.
LoadedBundle read_bundle_dir(const std::string& dir, const std::string& expected_kind) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(dir + "/manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(dir + "/manifest.json: " + e.what());
  }

  LoadedBundle out;
  try {
    if (manifest.at("format_version").get<int>() != kManifestFormat) {
      throw FormatError(dir + ": unsupported manifest format_version");
    }
    std::string kind = manifest.at("kind").get<std::string>();
    if (kind != expected_kind) {
      throw FormatError(dir + ": manifest kind is '" + kind + "', expected '" + expected_kind + "'");
    }
    out.version.version_id = manifest.value("version_id", kUnversioned);
    out.version.label = manifest.value("version", "");
    if (expected_kind != "model" && out.version.version_id == kUnversioned) {
      throw FormatError(dir + ": version_id 0 is reserved, split bundles must carry a version");
    }

    std::string blob = read_file(dir + "/weights.bin");
    size_t offset = 0;
    for (const auto& tj : manifest.at("tensors")) {
      std::string name = tj.at("name").get<std::string>();
      std::vector<uint32_t> shape = tj.at("shape").get<std::vector<uint32_t>>();
      Tensor& t = out.weights.add(name, shape);
      size_t bytes = t.numel() * 4;
      if (offset + bytes > blob.size()) {
        throw FormatError(dir + "/weights.bin: truncated while reading tensor '" + name + "'");
      }
      BinReader r(blob.substr(offset, bytes), dir + "/weights.bin:" + name);
      for (auto& v : t.data) v = r.f32();
      offset += bytes;
    }
    if (offset != blob.size()) {
      throw FormatError(dir + "/weights.bin: " + std::to_string(blob.size() - offset) +
                        " trailing bytes beyond manifest tensors");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(dir + "/manifest.json: " + e.what());
  }
  out.manifest = std::move(manifest);
  return out;
}

// The manifest's tensor order must match what the spec dictates, otherwise
// weights.bin would be reinterpreted silently.
void check_tensor_layout(const std::string& dir, const TensorStore& loaded,
                         const std::vector<Tensor>& expected) {
  if (loaded.tensors().size() != expected.size()) {
    throw FormatError(dir + ": manifest lists " + std::to_string(loaded.tensors().size()) +
                      " tensors, spec requires " + std::to_string(expected.size()));
  }
  for (size_t i = 0; i < expected.size(); ++i) {
    const Tensor& got = loaded.tensors()[i];
    const Tensor& want = expected[i];
    if (got.name != want.name) {
      throw FormatError(dir + ": tensor " + std::to_string(i) + " is '" + got.name + "', expected '" +
                        want.name + "'");
    }
    if (got.shape != want.shape) {
      throw FormatError(dir + ": tensor '" + got.name + "' has unexpected shape");
    }
  }
}

}  // namespace

std::tuple<QueryArmBundle, MemberArmBundle, CrossBundle> split(const Model& model,
                                                               const ModelVersion& version) {
  if (version.version_id == kUnversioned) throw InputError("split: version_id must be > 0");
  if (!model.weights.all_finite()) throw InputError("split: model weights contain non-finite values");

  QueryArmBundle q;
  q.version = version;
  q.spec = model.spec.query_arm;
  MemberArmBundle m;
  m.version = version;
  m.spec = model.spec.member_arm;
  CrossBundle c;
  c.version = version;
  c.spec = model.spec.cross;
  c.query_dim = model.spec.query_arm.output_dim();
  c.member_dim = model.spec.member_arm.output_dim();

  for (const auto& t : model.weights.tensors()) {
    TensorStore* dest = nullptr;
    if (t.name.rfind("query.", 0) == 0) {
      dest = &q.weights;
    } else if (t.name.rfind("member.", 0) == 0) {
      dest = &m.weights;
    } else if (t.name.rfind("cross.", 0) == 0) {
      dest = &c.weights;
    } else {
      throw InputError("split: tensor '" + t.name + "' belongs to no sub-network");
    }
    dest->add(t.name, t.shape).data = t.data;
  }
  return {std::move(q), std::move(m), std::move(c)};
}

void save_model(const Model& model, const std::string& dir, const std::string& version_label) {
  nlohmann::json manifest = {{"format_version", kManifestFormat},
                             {"kind", "model"},
                             {"version", version_label},
                             {"version_id", kUnversioned},
                             {"spec", model_spec_to_json(model.spec)}};
  write_bundle_dir(dir, std::move(manifest), model.weights);
}

Model load_model(const std::string& dir) {
  LoadedBundle b = read_bundle_dir(dir, "model");
  Model model;
  try {
    model.spec = model_spec_from_json(b.manifest.at("spec"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(dir + "/manifest.json: " + e.what());
  }
  model.spec.validate();
  ModelWeights expected = make_zero_weights(model.spec);
  check_tensor_layout(dir, b.weights, expected.tensors());
  model.weights = std::move(b.weights);
  return model;
}

namespace {

nlohmann::json bundle_manifest(const std::string& kind, const ModelVersion& v) {
  if (v.version_id == kUnversioned) throw InputError("save_bundle: version_id must be > 0");
  return {{"format_version", kManifestFormat},
          {"kind", kind},
          {"version", v.label},
          {"version_id", v.version_id}};
}

}  // namespace

void save_bundle(const QueryArmBundle& b, const std::string& dir) {
  nlohmann::json manifest = bundle_manifest("query_arm", b.version);
  manifest["spec"] = arm_spec_to_json(b.spec);
  write_bundle_dir(dir, std::move(manifest), b.weights);
}

void save_bundle(const MemberArmBundle& b, const std::string& dir) {
  nlohmann::json manifest = bundle_manifest("member_arm", b.version);
  manifest["spec"] = arm_spec_to_json(b.spec);
  write_bundle_dir(dir, std::move(manifest), b.weights);
}

void save_bundle(const CrossBundle& b, const std::string& dir) {
  nlohmann::json manifest = bundle_manifest("cross", b.version);
  manifest["spec"] = cross_spec_to_json(b.spec);
  manifest["query_dim"] = b.query_dim;
  manifest["member_dim"] = b.member_dim;
  write_bundle_dir(dir, std::move(manifest), b.weights);
}

QueryArmBundle load_query_arm_bundle(const std::string& dir) {
  LoadedBundle lb = read_bundle_dir(dir, "query_arm");
  QueryArmBundle b;
  b.version = lb.version;
  try {
    b.spec = arm_spec_from_json(lb.manifest.at("spec"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(dir + "/manifest.json: " + e.what());
  }
  b.spec.validate("query_arm");
  check_tensor_layout(dir, lb.weights, arm_tensor_shapes("query", b.spec));
  b.weights = std::move(lb.weights);
  return b;
}

MemberArmBundle load_member_arm_bundle(const std::string& dir) {
  LoadedBundle lb = read_bundle_dir(dir, "member_arm");
  MemberArmBundle b;
  b.version = lb.version;
  try {
    b.spec = arm_spec_from_json(lb.manifest.at("spec"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(dir + "/manifest.json: " + e.what());
  }
  b.spec.validate("member_arm");
  check_tensor_layout(dir, lb.weights, arm_tensor_shapes("member", b.spec));
  b.weights = std::move(lb.weights);
  return b;
}

CrossBundle load_cross_bundle(const std::string& dir) {
  LoadedBundle lb = read_bundle_dir(dir, "cross");
  CrossBundle b;
  b.version = lb.version;
  try {
    b.spec = cross_spec_from_json(lb.manifest.at("spec"));
    b.query_dim = lb.manifest.at("query_dim").get<uint32_t>();
    b.member_dim = lb.manifest.at("member_dim").get<uint32_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(dir + "/manifest.json: " + e.what());
  }
  if (b.spec.kind == CrossKind::kCosine && b.query_dim != b.member_dim) {
    throw FormatError(dir + ": cosine cross with query_dim != member_dim");
  }
  check_tensor_layout(dir, lb.weights, cross_tensor_shapes(b.spec, b.query_dim, b.member_dim));
  b.weights = std::move(lb.weights);
  return b;
}

}  // namespace splitrank
