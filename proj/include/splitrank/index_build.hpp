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

#include "splitrank/bundle.hpp"
#include "splitrank/features.hpp"
#include "splitrank/index_format.hpp"

namespace splitrank {

// Batch inference over the corpus with the member-arm bundle. Output is
// independent of batch_size (bit-equal vectors); batching exists for the
// pipeline shape, not the math.
std::map<uint64_t, std::vector<float>> compute_member_vectors(const MemberArmBundle& bundle,
                                                              const std::vector<MemberProfile>& profiles,
                                                              const Vocabulary& vocab,
                                                              size_t batch_size);

struct ShardIndex {
  uint32_t shard_id = 0;
  ForwardIndex forward;
  InvertedIndex inverted;
};

// Partitions members by uid mod num_shards and builds both index structures
// per shard. Every profile must have a vector; all attribute tokens are
// indexed and also stored in the forward records for term matching.
std::vector<ShardIndex> build_shards(const std::vector<MemberProfile>& profiles,
                                     const std::map<uint64_t, std::vector<float>>& vectors,
                                     uint32_t num_shards, const ModelVersion& version,
                                     uint8_t scheme);

// Writes dir/forward.fwdx and dir/inverted.invx.
void write_shard(const ShardIndex& shard, const std::string& dir);

// Full offline pipeline: vectors, shards, files under out_dir/shard<N>/.
// Returns the shard directory paths in shard order.
std::vector<std::string> build_index(const MemberArmBundle& bundle,
                                     const std::vector<MemberProfile>& profiles,
                                     const Vocabulary& vocab, uint32_t num_shards,
                                     uint8_t scheme, size_t batch_size,
                                     const std::string& out_dir);

}  // namespace splitrank
