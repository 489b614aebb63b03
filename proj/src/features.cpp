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

#include "splitrank/features.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "splitrank/binio.hpp"

namespace splitrank {

namespace {

bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

}  // namespace

std::vector<std::string> word_trigrams(const std::string& word) {
  std::vector<std::string> out;
  if (word.empty()) return out;
  std::string marked = "#" + word + "#";
  if (marked.size() < 3) return out;
  for (size_t i = 0; i + 3 <= marked.size(); ++i) out.push_back(marked.substr(i, 3));
  return out;
}

std::vector<std::string> text_words(const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (is_word_char(c)) {
      cur.push_back(lower(c));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

std::vector<std::string> text_trigrams(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& w : text_words(text)) {
    auto tg = word_trigrams(w);
    out.insert(out.end(), tg.begin(), tg.end());
  }
  return out;
}

QueryFeatures parse_query(const std::string& raw_text,
                          const std::map<uint16_t, std::vector<std::string>>& facets) {
  QueryFeatures f;
  std::vector<std::string> words = text_words(raw_text);
  for (const auto& w : words) {
    auto tg = word_trigrams(w);
    f.trigrams.insert(f.trigrams.end(), tg.begin(), tg.end());
  }
  f.facets = facets;
  f.raw_terms = std::move(words);
  return f;
}

uint32_t Vocabulary::add(uint16_t field_id, const std::string& token) {
  Field& f = fields_[field_id];
  auto it = f.index.find(token);
  if (it != f.index.end()) return it->second;
  uint32_t id = static_cast<uint32_t>(f.tokens.size());
  f.tokens.push_back(token);
  f.index.emplace(token, id);
  return id;
}

std::optional<uint32_t> Vocabulary::id(uint16_t field_id, const std::string& token) const {
  auto fit = fields_.find(field_id);
  if (fit == fields_.end()) return std::nullopt;
  auto it = fit->second.index.find(token);
  if (it == fit->second.index.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::token(uint16_t field_id, uint32_t id) const {
  const Field& f = fields_.at(field_id);
  if (id >= f.tokens.size()) throw InputError("vocabulary: id out of range");
  return f.tokens[id];
}

uint32_t Vocabulary::size(uint16_t field_id) const {
  auto it = fields_.find(field_id);
  return it == fields_.end() ? 0 : static_cast<uint32_t>(it->second.tokens.size());
}

std::vector<uint16_t> Vocabulary::field_ids() const {
  std::vector<uint16_t> out;
  for (const auto& [fid, _] : fields_) out.push_back(fid);
  return out;
}

const std::vector<std::string>& Vocabulary::tokens(uint16_t field_id) const {
  return fields_.at(field_id).tokens;
}

nlohmann::json Vocabulary::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [fid, f] : fields_) j[std::to_string(fid)] = f.tokens;
  return j;
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  Vocabulary v;
  for (const auto& [key, tokens] : j.items()) {
    uint16_t fid = static_cast<uint16_t>(std::stoul(key));
    for (const auto& t : tokens) v.add(fid, t.get<std::string>());
  }
  return v;
}

void Vocabulary::save(const std::string& path) const { write_file_atomic(path, to_json().dump() + "\n"); }

Vocabulary Vocabulary::load(const std::string& path) {
  try {
    return from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

namespace {

std::vector<uint32_t> resolve_tokens(const std::vector<std::string>* tokens, uint16_t field_id,
                                     const Vocabulary& vocab) {
  std::vector<uint32_t> ids;
  if (!tokens) return ids;
  ids.reserve(tokens->size());
  for (const auto& t : *tokens) {
    if (auto id = vocab.id(field_id, t)) ids.push_back(*id);
  }
  return ids;
}

}  // namespace

FieldInputs member_field_inputs(const MemberProfile& profile, const ArmSpec& arm, const Vocabulary& vocab) {
  FieldInputs inputs;
  for (const auto& f : arm.fields) {
    auto it = profile.fields.find(f.field_id);
    inputs[f.field_id] =
        resolve_tokens(it == profile.fields.end() ? nullptr : &it->second, f.field_id, vocab);
  }
  return inputs;
}

FieldInputs query_field_inputs(const QueryFeatures& features, const ArmSpec& arm, const Vocabulary& vocab,
                               uint16_t text_field_id) {
  FieldInputs inputs;
  for (const auto& f : arm.fields) {
    const std::vector<std::string>* tokens = nullptr;
    if (f.field_id == text_field_id) {
      tokens = &features.trigrams;
    } else {
      auto it = features.facets.find(f.field_id);
      if (it != features.facets.end()) tokens = &it->second;
    }
    inputs[f.field_id] = resolve_tokens(tokens, f.field_id, vocab);
  }
  return inputs;
}

void save_token_counts(const TokenCounts& counts, const std::string& path) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [fid, m] : counts) {
    nlohmann::json fj = nlohmann::json::object();
    for (const auto& [tok, n] : m) fj[tok] = n;
    j[std::to_string(fid)] = std::move(fj);
  }
  write_file_atomic(path, j.dump() + "\n");
}

TokenCounts load_token_counts(const std::string& path) {
  TokenCounts counts;
  try {
    nlohmann::json j = nlohmann::json::parse(read_file(path));
    for (const auto& [key, fj] : j.items()) {
      uint16_t fid = static_cast<uint16_t>(std::stoul(key));
      for (const auto& [tok, n] : fj.items()) counts[fid][tok] = n.get<uint64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return counts;
}

nlohmann::json member_to_json(const MemberProfile& p) {
  nlohmann::json fields = nlohmann::json::object();
  for (const auto& [fid, tokens] : p.fields) fields[std::to_string(fid)] = tokens;
  return {{"uid", p.uid}, {"fields", std::move(fields)}};
}

MemberProfile member_from_json(const nlohmann::json& j) {
  MemberProfile p;
  p.uid = j.at("uid").get<uint64_t>();
  for (const auto& [key, tokens] : j.at("fields").items()) {
    uint16_t fid = static_cast<uint16_t>(std::stoul(key));
    if (fid == kAnyField) throw FormatError("field id 0 is reserved");
    p.fields[fid] = tokens.get<std::vector<std::string>>();
  }
  return p;
}

std::vector<MemberProfile> ingest_members(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  std::vector<MemberProfile> out;
  std::set<uint64_t> seen;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    MemberProfile p;
    try {
      p = member_from_json(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!seen.insert(p.uid).second) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": duplicate uid " + std::to_string(p.uid));
    }
    out.push_back(std::move(p));
  }
  return out;
}

void write_members(const std::vector<MemberProfile>& profiles, const std::string& path) {
  std::ostringstream out;
  for (const auto& p : profiles) out << member_to_json(p).dump() << "\n";
  write_file_atomic(path, out.str());
}

}  // namespace splitrank
