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

#include "splitrank/index_build.hpp"

#include <algorithm>
#include <filesystem>

#include "splitrank/error.hpp"

namespace splitrank {

std::map<uint64_t, std::vector<float>> compute_member_vectors(const MemberArmBundle& bundle,
                                                              const std::vector<MemberProfile>& profiles,
                                                              const Vocabulary& vocab,
                                                              size_t batch_size) {
  if (batch_size == 0) throw InputError("batch_size must be >= 1");
  ArmRef arm = bundle.arm();
  std::map<uint64_t, std::vector<float>> out;
  for (size_t start = 0; start < profiles.size(); start += batch_size) {
    size_t end = std::min(start + batch_size, profiles.size());
    for (size_t i = start; i < end; ++i) {
      const MemberProfile& p = profiles[i];
      out[p.uid] = forward_arm(arm, member_field_inputs(p, bundle.spec, vocab));
    }
  }
  return out;
}

std::vector<ShardIndex> build_shards(const std::vector<MemberProfile>& profiles,
                                     const std::map<uint64_t, std::vector<float>>& vectors,
                                     uint32_t num_shards, const ModelVersion& version,
                                     uint8_t scheme) {
  if (num_shards == 0) throw InputError("num_shards must be >= 1");
  if (profiles.empty()) throw InputError("refusing to build an index over an empty corpus");
  if (version.version_id == kUnversioned) throw InputError("index build requires a version id > 0");

  uint16_t dim = 0;
  for (const MemberProfile& p : profiles) {
    auto it = vectors.find(p.uid);
    if (it == vectors.end()) throw InputError("no vector for uid " + std::to_string(p.uid));
    if (dim == 0) {
      dim = static_cast<uint16_t>(it->second.size());
    } else if (it->second.size() != dim) {
      throw InputError("vector width mismatch at uid " + std::to_string(p.uid));
    }
  }

  std::vector<const MemberProfile*> sorted;
  sorted.reserve(profiles.size());
  for (const MemberProfile& p : profiles) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(),
            [](const MemberProfile* a, const MemberProfile* b) { return a->uid < b->uid; });

  std::vector<ShardIndex> shards(num_shards);
  for (uint32_t s = 0; s < num_shards; ++s) {
    shards[s].shard_id = s;
    shards[s].forward.dim = dim;
    shards[s].forward.scheme = scheme;
  }

  for (const MemberProfile* p : sorted) {
    ShardIndex& shard = shards[p->uid % num_shards];
    const std::vector<float>& vec = vectors.at(p->uid);

    ForwardIndexRecord rec;
    rec.uid = p->uid;
    rec.field_version = version.version_id;
    if (scheme == kQuantInt8) {
      rec.qvec = quantize(vec);
    } else {
      rec.fvec = vec;
    }
    rec.tokens = p->fields;
    shard.forward.records.push_back(std::move(rec));

    for (const auto& [fid, toks] : p->fields) {
      for (const std::string& t : toks) shard.inverted.add(fid, t, p->uid);
    }
  }
  return shards;
}

void write_shard(const ShardIndex& shard, const std::string& dir) {
  std::filesystem::create_directories(dir);
  save_forward_index(shard.forward, dir + "/forward.fwdx");
  save_inverted_index(shard.inverted, dir + "/inverted.invx");
}

std::vector<std::string> build_index(const MemberArmBundle& bundle,
                                     const std::vector<MemberProfile>& profiles,
                                     const Vocabulary& vocab, uint32_t num_shards,
                                     uint8_t scheme, size_t batch_size,
                                     const std::string& out_dir) {
  auto vectors = compute_member_vectors(bundle, profiles, vocab, batch_size);
  auto shards = build_shards(profiles, vectors, num_shards, bundle.version, scheme);
  std::vector<std::string> dirs;
  for (const ShardIndex& s : shards) {
    std::string dir = out_dir + "/shard" + std::to_string(s.shard_id);
    write_shard(s, dir);
    dirs.push_back(dir);
  }
  return dirs;
}

}  // namespace splitrank
