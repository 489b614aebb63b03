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

#include "splitrank/index_format.hpp"

#include <algorithm>

#include "splitrank/binio.hpp"
#include "splitrank/error.hpp"

namespace splitrank {

const ForwardIndexRecord* ForwardIndex::find(uint64_t uid) const {
  auto it = std::lower_bound(records.begin(), records.end(), uid,
                             [](const ForwardIndexRecord& r, uint64_t u) { return r.uid < u; });
  if (it == records.end() || it->uid != uid) return nullptr;
  return &*it;
}

std::vector<float> ForwardIndex::decode(const ForwardIndexRecord& r) const {
  if (scheme == kQuantNone) return r.fvec;
  return dequantize(r.qvec);
}

void save_forward_index(const ForwardIndex& fwd, const std::string& path) {
  if (fwd.scheme != kQuantNone && fwd.scheme != kQuantInt8) {
    throw InputError("unknown quantization scheme " + std::to_string(fwd.scheme));
  }
  BinWriter w;
  w.magic("FWDX");
  w.u8(1);
  w.u16(fwd.dim);
  w.u8(fwd.scheme);
  w.u32(static_cast<uint32_t>(fwd.records.size()));
  uint64_t prev_uid = 0;
  bool first = true;
  for (const ForwardIndexRecord& r : fwd.records) {
    if (!first && r.uid <= prev_uid) {
      throw InputError("forward index records not in strictly ascending uid order at uid " +
                       std::to_string(r.uid));
    }
    first = false;
    prev_uid = r.uid;

    w.u64(r.uid);
    w.u16(r.field_version);
    if (fwd.scheme == kQuantInt8) {
      if (r.qvec.values.size() != fwd.dim) {
        throw InputError("uid " + std::to_string(r.uid) + ": vector width " +
                         std::to_string(r.qvec.values.size()) + " != dim " + std::to_string(fwd.dim));
      }
      w.f32(r.qvec.scale);
      for (int8_t v : r.qvec.values) w.i8(v);
    } else {
      if (r.fvec.size() != fwd.dim) {
        throw InputError("uid " + std::to_string(r.uid) + ": vector width " +
                         std::to_string(r.fvec.size()) + " != dim " + std::to_string(fwd.dim));
      }
      w.f32(0.0f);
      for (float v : r.fvec) w.f32(v);
    }
    w.u16(static_cast<uint16_t>(r.tokens.size()));
    for (const auto& [fid, toks] : r.tokens) {
      if (toks.size() > 0xffff) throw InputError("too many tokens in one field");
      w.u16(fid);
      w.u16(static_cast<uint16_t>(toks.size()));
      for (const std::string& t : toks) w.str16(t);
    }
  }
  w.write_file(path);
}

ForwardIndex load_forward_index(const std::string& path) {
  BinReader r = BinReader::from_file(path);
  r.expect_magic("FWDX");
  uint8_t fmt = r.u8();
  if (fmt != 1) throw FormatError(path + ": unsupported forward index format version " + std::to_string(fmt));
  ForwardIndex fwd;
  fwd.dim = r.u16();
  fwd.scheme = r.u8();
  if (fwd.scheme != kQuantNone && fwd.scheme != kQuantInt8) {
    throw FormatError(path + ": unknown quantization scheme " + std::to_string(fwd.scheme));
  }
  uint32_t count = r.u32();
  fwd.records.reserve(count);
  uint64_t prev_uid = 0;
  for (uint32_t i = 0; i < count; ++i) {
    ForwardIndexRecord rec;
    rec.uid = r.u64();
    if (i > 0 && rec.uid <= prev_uid) {
      throw FormatError(path + ": records not in ascending uid order at uid " + std::to_string(rec.uid));
    }
    prev_uid = rec.uid;
    rec.field_version = r.u16();
    float scale = r.f32();
    if (fwd.scheme == kQuantInt8) {
      rec.qvec.scale = scale;
      rec.qvec.values.resize(fwd.dim);
      for (auto& v : rec.qvec.values) v = r.i8();
    } else {
      rec.fvec.resize(fwd.dim);
      for (auto& v : rec.fvec) v = r.f32();
    }
    uint16_t field_count = r.u16();
    for (uint16_t f = 0; f < field_count; ++f) {
      uint16_t fid = r.u16();
      uint16_t n = r.u16();
      auto& toks = rec.tokens[fid];
      toks.reserve(n);
      for (uint16_t t = 0; t < n; ++t) toks.push_back(r.str16());
    }
    fwd.records.push_back(std::move(rec));
  }
  if (!r.at_end()) throw FormatError(path + ": trailing bytes after records");
  return fwd;
}

std::string InvertedIndex::term_key(uint16_t field_id, const std::string& token) {
  return std::to_string(field_id) + ":" + token;
}

void InvertedIndex::add(uint16_t field_id, const std::string& token, uint64_t uid) {
  auto& list = postings_[term_key(field_id, token)];
  if (!list.empty() && list.back() == uid) return;  // same member repeats a token
  if (!list.empty() && list.back() > uid) {
    throw InputError("inverted index built out of uid order: term " + term_key(field_id, token) +
                     ", uid " + std::to_string(uid) + " after " + std::to_string(list.back()));
  }
  list.push_back(uid);
  field_ids_.insert(field_id);
}

std::vector<const std::vector<uint64_t>*> InvertedIndex::match(uint16_t field_id,
                                                               const std::string& token) const {
  std::vector<const std::vector<uint64_t>*> out;
  if (field_id != 0) {
    auto it = postings_.find(term_key(field_id, token));
    if (it != postings_.end()) out.push_back(&it->second);
    return out;
  }
  for (uint16_t fid : field_ids_) {
    auto it = postings_.find(term_key(fid, token));
    if (it != postings_.end()) out.push_back(&it->second);
  }
  return out;
}

void save_inverted_index(const InvertedIndex& inv, const std::string& path) {
  BinWriter w;
  w.magic("INVX");
  w.u32(static_cast<uint32_t>(inv.postings().size()));
  for (const auto& [term, uids] : inv.postings()) {
    w.str16(term);
    w.u32(static_cast<uint32_t>(uids.size()));
    for (uint64_t uid : uids) w.u64(uid);
  }
  w.write_file(path);
}

InvertedIndex load_inverted_index(const std::string& path) {
  BinReader r = BinReader::from_file(path);
  r.expect_magic("INVX");
  uint32_t terms = r.u32();
  InvertedIndex inv;
  for (uint32_t i = 0; i < terms; ++i) {
    std::string term = r.str16();
    size_t colon = term.find(':');
    if (colon == std::string::npos) throw FormatError(path + ": term without field prefix: " + term);
    uint16_t fid = 0;
    try {
      unsigned long v = std::stoul(term.substr(0, colon));
      if (v > 0xffff) throw std::out_of_range("fid");
      fid = static_cast<uint16_t>(v);
    } catch (const std::exception&) {
      throw FormatError(path + ": bad field id in term: " + term);
    }
    std::string token = term.substr(colon + 1);
    uint32_t n = r.u32();
    uint64_t prev = 0;
    for (uint32_t j = 0; j < n; ++j) {
      uint64_t uid = r.u64();
      if (j > 0 && uid <= prev) {
        throw FormatError(path + ": postings for term " + term + " not strictly ascending");
      }
      prev = uid;
      inv.add(fid, token, uid);
    }
  }
  if (!r.at_end()) throw FormatError(path + ": trailing bytes after postings");
  return inv;
}

}  // namespace splitrank
