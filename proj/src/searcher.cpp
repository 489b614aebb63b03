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

#include "splitrank/searcher.hpp"

#include <algorithm>
#include <chrono>

#include "splitrank/error.hpp"

namespace splitrank {

std::string to_string(RetrievalMode m) {
  return m == RetrievalMode::kAny ? "any" : "all";
}

RetrievalMode retrieval_mode_from_string(const std::string& s) {
  if (s == "any") return RetrievalMode::kAny;
  if (s == "all") return RetrievalMode::kAll;
  throw InputError("unknown retrieval mode: " + s);
}

const ForwardIndexRecord* ShardSnapshot::record(uint64_t uid) const {
  auto it = overlay.find(uid);
  if (it != overlay.end()) return &it->second;
  return base->forward.find(uid);
}

ShardSnapshot load_shard(const std::string& dir, uint32_t shard_id) {
  auto base = std::make_shared<ShardBase>();
  base->shard_id = shard_id;
  base->forward = load_forward_index(dir + "/forward.fwdx");
  base->inverted = load_inverted_index(dir + "/inverted.invx");

  bool first = true;
  for (const ForwardIndexRecord& r : base->forward.records) {
    if (first) {
      base->version = r.field_version;
      first = false;
    } else if (r.field_version != base->version) {
      throw VersionError("shard " + dir + " mixes field_versions " + std::to_string(base->version) +
                         " and " + std::to_string(r.field_version));
    }
  }
  return ShardSnapshot{std::move(base), {}};
}

ShardSnapshot make_snapshot(ShardIndex index) {
  auto base = std::make_shared<ShardBase>();
  base->shard_id = index.shard_id;
  base->forward = std::move(index.forward);
  base->inverted = std::move(index.inverted);
  bool first = true;
  for (const ForwardIndexRecord& r : base->forward.records) {
    if (first) {
      base->version = r.field_version;
      first = false;
    } else if (r.field_version != base->version) {
      throw VersionError("shard mixes field_versions");
    }
  }
  return ShardSnapshot{std::move(base), {}};
}

namespace {

// Union of the posting lists a term matches, as one ascending uid vector.
std::vector<uint64_t> term_postings(const InvertedIndex& inv, const Term& t) {
  auto lists = inv.match(t.field_id, t.token);
  if (lists.empty()) return {};
  if (lists.size() == 1) return *lists[0];
  std::vector<uint64_t> merged;
  for (const auto* l : lists) {
    std::vector<uint64_t> next;
    next.reserve(merged.size() + l->size());
    std::set_union(merged.begin(), merged.end(), l->begin(), l->end(), std::back_inserter(next));
    merged = std::move(next);
  }
  return merged;
}

bool tokens_contain(const std::map<uint16_t, std::vector<std::string>>& fields, const Term& t) {
  if (t.field_id != kAnyField) {
    auto it = fields.find(t.field_id);
    if (it == fields.end()) return false;
    return std::find(it->second.begin(), it->second.end(), t.token) != it->second.end();
  }
  for (const auto& [fid, toks] : fields) {
    if (std::find(toks.begin(), toks.end(), t.token) != toks.end()) return true;
  }
  return false;
}

bool overlay_matches(const ForwardIndexRecord& rec, const std::vector<Term>& terms,
                     RetrievalMode mode) {
  if (terms.empty()) return false;
  if (mode == RetrievalMode::kAll) {
    for (const Term& t : terms) {
      if (!tokens_contain(rec.tokens, t)) return false;
    }
    return true;
  }
  for (const Term& t : terms) {
    if (tokens_contain(rec.tokens, t)) return true;
  }
  return false;
}

}  // namespace

std::vector<uint64_t> retrieve(const ShardSnapshot& snapshot, const std::vector<Term>& terms,
                               RetrievalMode mode, uint32_t max_candidates) {
  if (max_candidates == 0) throw InputError("max_candidates must be >= 1");
  if (terms.empty()) return {};

  const InvertedIndex& inv = snapshot.base->inverted;
  std::vector<uint64_t> base;
  if (mode == RetrievalMode::kAny) {
    for (const Term& t : terms) {
      std::vector<uint64_t> p = term_postings(inv, t);
      if (base.empty()) {
        base = std::move(p);
      } else if (!p.empty()) {
        std::vector<uint64_t> next;
        next.reserve(base.size() + p.size());
        std::set_union(base.begin(), base.end(), p.begin(), p.end(), std::back_inserter(next));
        base = std::move(next);
      }
    }
  } else {
    bool first = true;
    for (const Term& t : terms) {
      std::vector<uint64_t> p = term_postings(inv, t);
      if (first) {
        base = std::move(p);
        first = false;
      } else {
        std::vector<uint64_t> next;
        std::set_intersection(base.begin(), base.end(), p.begin(), p.end(),
                              std::back_inserter(next));
        base = std::move(next);
      }
      if (base.empty()) break;
    }
  }

  // Overlay records shadow base postings: drop shadowed uids, then re-admit
  // overlay members on their current tokens.
  std::vector<uint64_t> out;
  out.reserve(std::min<size_t>(base.size() + snapshot.overlay.size(), max_candidates));
  auto bit = base.begin();
  auto oit = snapshot.overlay.begin();
  while (out.size() < max_candidates && (bit != base.end() || oit != snapshot.overlay.end())) {
    bool take_overlay;
    if (oit == snapshot.overlay.end()) {
      take_overlay = false;
    } else if (bit == base.end()) {
      take_overlay = true;
    } else if (oit->first == *bit) {
      ++bit;  // shadowed
      take_overlay = true;
    } else {
      take_overlay = oit->first < *bit;
    }
    if (take_overlay) {
      if (overlay_matches(oit->second, terms, mode)) out.push_back(oit->first);
      ++oit;
    } else {
      if (!snapshot.overlay.count(*bit)) out.push_back(*bit);
      ++bit;
    }
  }
  return out;
}

std::vector<SearchHit> score_hits(const ShardSnapshot& snapshot,
                                  const std::vector<uint64_t>& candidates,
                                  const std::vector<float>& qrep,
                                  const std::vector<Term>& qterms,
                                  const CrossBundle& cross, ScoreWeights weights) {
  if (snapshot.version() != kUnversioned && cross.version.version_id != snapshot.version()) {
    throw VersionError("cross bundle version " + std::to_string(cross.version.version_id) +
                       " does not match shard version " + std::to_string(snapshot.version()));
  }
  if (qrep.size() != cross.query_dim) {
    throw InputError("qrep width " + std::to_string(qrep.size()) + " != cross query dim " +
                     std::to_string(cross.query_dim));
  }
  CrossRef xref = cross.cross();

  std::vector<SearchHit> hits;
  hits.reserve(candidates.size());
  for (uint64_t uid : candidates) {
    const ForwardIndexRecord* rec = snapshot.record(uid);
    if (!rec) throw InputError("candidate uid " + std::to_string(uid) + " has no forward record");
    SearchHit h;
    h.uid = uid;
    if (rec->field_version != kUnversioned) {
      if (rec->field_version != cross.version.version_id) {
        throw VersionError("record uid " + std::to_string(uid) + " has field_version " +
                           std::to_string(rec->field_version) + ", cross bundle is " +
                           std::to_string(cross.version.version_id));
      }
      h.semantic = similarity(xref, qrep, snapshot.base->forward.decode(*rec));
    }
    if (!qterms.empty()) {
      size_t matched = 0;
      for (const Term& t : qterms) {
        if (tokens_contain(rec->tokens, t)) ++matched;
      }
      h.term_match = static_cast<float>(matched) / static_cast<float>(qterms.size());
    }
    h.score = weights.w_sem * h.semantic + weights.w_term * h.term_match;
    hits.push_back(h);
  }
  std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.uid < b.uid;
  });
  return hits;
}

ShardSnapshot apply_live_update(const ShardSnapshot& snapshot, const MemberProfile& profile,
                                const std::vector<float>& vector, const ModelVersion& version) {
  // A token-only update (profile changed before its vector is recomputed)
  // carries the reserved version 0 and no vector; it scores semantic 0.
  bool tokens_only = version.version_id == kUnversioned;
  if (tokens_only && !vector.empty()) {
    throw InputError("live update with version 0 must not carry a vector");
  }
  if (!tokens_only) {
    if (snapshot.version() != kUnversioned && version.version_id != snapshot.version()) {
      throw VersionError("live update version " + std::to_string(version.version_id) +
                         " does not match shard version " + std::to_string(snapshot.version()));
    }
    if (vector.size() != snapshot.base->forward.dim) {
      throw InputError("live update vector width " + std::to_string(vector.size()) +
                       " != index dim " + std::to_string(snapshot.base->forward.dim));
    }
  }
  ForwardIndexRecord rec;
  rec.uid = profile.uid;
  rec.field_version = version.version_id;
  if (!tokens_only) {
    if (snapshot.base->forward.scheme == kQuantInt8) {
      rec.qvec = quantize(vector);
    } else {
      rec.fvec = vector;
    }
  } else if (snapshot.base->forward.scheme == kQuantNone) {
    rec.fvec.assign(snapshot.base->forward.dim, 0.0f);
  } else {
    rec.qvec.values.assign(snapshot.base->forward.dim, 0);
  }
  rec.tokens = profile.fields;

  ShardSnapshot next;
  next.base = snapshot.base;
  next.overlay = snapshot.overlay;  // copy-on-write: base shared, overlay copied
  next.overlay[profile.uid] = std::move(rec);
  return next;
}

SearchResponse search(const ShardSnapshot& snapshot, const SearchRequest& request,
                      const CrossBundle& cross) {
  if (request.k == 0) throw InputError("k must be >= 1");
  if (snapshot.version() != kUnversioned && request.version != snapshot.version()) {
    throw VersionError("request version " + std::to_string(request.version) +
                       " does not match shard version " + std::to_string(snapshot.version()));
  }
  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  std::vector<uint64_t> candidates = retrieve(snapshot, request.terms, request.mode, request.max_candidates);
  auto t1 = clock::now();
  std::vector<SearchHit> hits = score_hits(snapshot, candidates, request.qrep, request.terms, cross,
                                           {request.w_sem, request.w_term});
  if (hits.size() > request.k) hits.resize(request.k);
  auto t2 = clock::now();

  SearchResponse resp;
  resp.shard_id = snapshot.shard_id();
  resp.hits = std::move(hits);
  resp.timing.retrieve_us =
      static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count());
  resp.timing.score_us =
      static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(t2 - t1).count());
  return resp;
}

}  // namespace splitrank
