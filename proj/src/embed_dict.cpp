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

#include "splitrank/embed_dict.hpp"

#include <algorithm>
#include <cstdio>

#include "splitrank/binio.hpp"

namespace splitrank {

const std::vector<float>* EmbeddingDictionary::lookup(uint16_t field_id,
                                                      const std::string& token) const {
  auto fit = fields.find(field_id);
  if (fit == fields.end()) return nullptr;
  auto eit = fit->second.entries.find(token);
  if (eit == fit->second.entries.end()) return nullptr;
  return &eit->second;
}

uint64_t EmbeddingDictionary::entry_count() const {
  uint64_t n = 0;
  for (const auto& [fid, f] : fields) n += f.entries.size();
  return n;
}

EmbeddingDictionary build_dictionary(const QueryArmBundle& bundle,
                                     const Vocabulary& vocab,
                                     const TokenCounts& counts,
                                     const DictBuildOptions& opts) {
  EmbeddingDictionary dict;
  dict.version = bundle.version;

  for (const FieldSpec& fs : bundle.spec.fields) {
    const Tensor& table = bundle.weights.get(embed_tensor_name("query", fs.field_id));

    uint32_t k = opts.default_top_k;
    if (auto it = opts.per_field_top_k.find(fs.field_id); it != opts.per_field_top_k.end()) {
      k = it->second;
    }

    const std::map<std::string, uint64_t>* field_counts = nullptr;
    if (auto it = counts.find(fs.field_id); it != counts.end()) field_counts = &it->second;

    std::vector<std::pair<uint64_t, std::string>> ranked;
    if (vocab.size(fs.field_id) > 0) {
      for (const std::string& tok : vocab.tokens(fs.field_id)) {
        uint64_t c = 0;
        if (field_counts) {
          if (auto it = field_counts->find(tok); it != field_counts->end()) c = it->second;
        }
        ranked.emplace_back(c, tok);
      }
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    if (ranked.size() > k) ranked.resize(k);

    EmbeddingDictionary::Field out;
    out.embed_dim = static_cast<uint16_t>(fs.embed_dim);
    for (const auto& [c, tok] : ranked) {
      uint32_t id = *vocab.id(fs.field_id, tok);
      if (id >= fs.vocab_size) {
        throw InputError("build_dictionary: token id " + std::to_string(id) + " for '" + tok +
                         "' exceeds vocab size " + std::to_string(fs.vocab_size) + " of field " +
                         std::to_string(fs.field_id));
      }
      const float* row = table.data.data() + static_cast<size_t>(id) * fs.embed_dim;
      out.entries.emplace(tok, std::vector<float>(row, row + fs.embed_dim));
    }
    dict.fields.emplace(fs.field_id, std::move(out));
  }

  if (uint64_t sz = embd_file_size(dict); sz > opts.size_budget_bytes) {
    std::fprintf(stderr, "warning: dictionary size %llu bytes exceeds budget %llu\n",
                 static_cast<unsigned long long>(sz),
                 static_cast<unsigned long long>(opts.size_budget_bytes));
  }
  return dict;
}

float coverage(const EmbeddingDictionary& dict,
               const std::vector<QueryFeatures>& query_log,
               uint16_t text_field_id) {
  uint64_t total = 0;
  uint64_t hit = 0;
  for (const QueryFeatures& q : query_log) {
    for (const std::string& t : q.trigrams) {
      ++total;
      if (dict.lookup(text_field_id, t)) ++hit;
    }
    for (const auto& [fid, toks] : q.facets) {
      for (const std::string& t : toks) {
        ++total;
        if (dict.lookup(fid, t)) ++hit;
      }
    }
  }
  if (total == 0) return 1.0f;
  return static_cast<float>(static_cast<double>(hit) / static_cast<double>(total));
}

uint64_t embd_file_size(const EmbeddingDictionary& dict) {
  uint64_t n = 4 + 1 + 2 + 2;  // magic, format version, model version, field count
  for (const auto& [fid, f] : dict.fields) {
    n += 2 + 2 + 4;
    for (const auto& [tok, vec] : f.entries) n += 2 + tok.size() + 4ull * vec.size();
  }
  return n;
}

void save_dictionary(const EmbeddingDictionary& dict, const std::string& path) {
  BinWriter w;
  w.magic("EMBD");
  w.u8(1);
  w.u16(dict.version.version_id);
  w.u16(static_cast<uint16_t>(dict.fields.size()));
  for (const auto& [fid, f] : dict.fields) {
    w.u16(fid);
    w.u16(f.embed_dim);
    w.u32(static_cast<uint32_t>(f.entries.size()));
    for (const auto& [tok, vec] : f.entries) {
      w.str16(tok);
      for (float x : vec) w.f32(x);
    }
  }
  w.write_file(path);
}

EmbeddingDictionary load_dictionary(const std::string& path) {
  BinReader r = BinReader::from_file(path);
  r.expect_magic("EMBD");
  uint8_t fmt = r.u8();
  if (fmt != 1) throw FormatError(path + ": unsupported dictionary format version " + std::to_string(fmt));
  EmbeddingDictionary dict;
  dict.version.version_id = r.u16();
  uint16_t field_count = r.u16();
  for (uint16_t i = 0; i < field_count; ++i) {
    uint16_t fid = r.u16();
    EmbeddingDictionary::Field f;
    f.embed_dim = r.u16();
    uint32_t entries = r.u32();
    for (uint32_t e = 0; e < entries; ++e) {
      std::string tok = r.str16();
      std::vector<float> vec(f.embed_dim);
      for (auto& x : vec) x = r.f32();
      f.entries.emplace(std::move(tok), std::move(vec));
    }
    dict.fields.emplace(fid, std::move(f));
  }
  if (!r.at_end()) throw FormatError(path + ": trailing bytes after dictionary");
  return dict;
}

}  // namespace splitrank
