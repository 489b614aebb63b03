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

#include "splitrank/synthetic.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "splitrank/binio.hpp"
#include "splitrank/error.hpp"
#include "splitrank/rng.hpp"

namespace splitrank {

using nlohmann::json;

void SyntheticConfig::validate() const {
  if (n_clusters < 2) throw InputError("n_clusters must be >= 2");
  if (synonym_clusters > n_clusters) throw InputError("synonym_clusters exceeds n_clusters");
  if (n_members < n_clusters) throw InputError("need at least one member per cluster");
  if (queries_per_cluster == 0) throw InputError("queries_per_cluster must be >= 1");
  if (locations == 0) throw InputError("locations must be >= 1");
  if (noise_words == 0 || noise_skills == 0 || noise_titles == 0) {
    throw InputError("noise vocab sizes must be >= 1");
  }
  if (b_rate < 0.0 || b_rate > 1.0 || b_rate_heavy < 0.0 || b_rate_heavy > 1.0 ||
      past_prob < 0.0 || past_prob > 1.0) {
    throw InputError("rates must be in [0, 1]");
  }
}

SyntheticConfig synthetic_config_from_json_file(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  SyntheticConfig c;
  c.seed = j.value("seed", c.seed);
  c.n_members = j.value("n_members", c.n_members);
  c.n_clusters = j.value("n_clusters", c.n_clusters);
  c.synonym_clusters = j.value("synonym_clusters", c.synonym_clusters);
  c.queries_per_cluster = j.value("queries_per_cluster", c.queries_per_cluster);
  c.noise_words = j.value("noise_words", c.noise_words);
  c.noise_skills = j.value("noise_skills", c.noise_skills);
  c.noise_titles = j.value("noise_titles", c.noise_titles);
  c.locations = j.value("locations", c.locations);
  c.zipf_exponent = j.value("zipf_exponent", c.zipf_exponent);
  c.b_rate = j.value("b_rate", c.b_rate);
  c.b_rate_heavy = j.value("b_rate_heavy", c.b_rate_heavy);
  c.past_prob = j.value("past_prob", c.past_prob);
  c.extra_noise_skill_prob = j.value("extra_noise_skill_prob", c.extra_noise_skill_prob);
  c.validate();
  return c;
}

namespace {

// Cluster token pairs: [cluster][0]=variant a, [1]=variant b.
struct ClusterTokens {
  std::vector<std::array<std::string, 2>> words;
  std::vector<std::array<std::string, 2>> skills;
  std::vector<std::array<std::string, 2>> titles;
};

std::string rand_suffix(Rng& rng) {
  std::string s;
  for (int i = 0; i < 5; ++i) s.push_back(static_cast<char>('a' + rng.below(26)));
  return s;
}

std::string fresh_token(Rng& rng, const std::string& prefix, std::set<std::string>& used) {
  for (;;) {
    std::string t = prefix + rand_suffix(rng);
    if (used.insert(t).second) return t;
  }
}

ClusterTokens make_cluster_tokens(Rng& rng, uint32_t n_clusters) {
  ClusterTokens ct;
  std::set<std::string> used;
  ct.words.resize(n_clusters);
  ct.skills.resize(n_clusters);
  ct.titles.resize(n_clusters);
  for (uint32_t c = 0; c < n_clusters; ++c) {
    ct.words[c] = {fresh_token(rng, "w", used), fresh_token(rng, "w", used)};
    ct.skills[c] = {fresh_token(rng, "s", used), fresh_token(rng, "s", used)};
    ct.titles[c] = {fresh_token(rng, "t", used), fresh_token(rng, "t", used)};
  }
  return ct;
}

void count_tokens(TokenCounts& counts, uint16_t fid, const std::vector<std::string>& toks) {
  auto& field = counts[fid];
  for (const std::string& t : toks) ++field[t];
}

void scan_into_vocab(Vocabulary& vocab, const MemberProfile& p) {
  for (const auto& [fid, toks] : p.fields) {
    for (const std::string& t : toks) vocab.add(fid, t);
  }
}

}  // namespace

SyntheticOutput gen_synthetic(const SyntheticConfig& config) {
  config.validate();
  SyntheticOutput out;
  out.config = config;

  Rng rng(config.seed);
  ClusterTokens ct = make_cluster_tokens(rng, config.n_clusters);

  // Synonym (b-heavy) clusters are the last `synonym_clusters` ids.
  auto is_synonym_cluster = [&](uint32_t c) {
    return c >= config.n_clusters - config.synonym_clusters;
  };

  ZipfSampler word_noise(config.noise_words, config.zipf_exponent);
  ZipfSampler skill_noise(config.noise_skills, config.zipf_exponent);
  ZipfSampler title_noise(config.noise_titles, config.zipf_exponent);

  std::vector<std::vector<uint64_t>> cluster_members(config.n_clusters);
  out.members.reserve(config.n_members);
  out.member_cluster.reserve(config.n_members);

  for (uint64_t uid = 1; uid <= config.n_members; ++uid) {
    uint32_t c = static_cast<uint32_t>(rng.below(config.n_clusters));
    double b_rate = is_synonym_cluster(c) ? config.b_rate_heavy : config.b_rate;
    int v = rng.chance(b_rate) ? 1 : 0;

    MemberProfile p;
    p.uid = uid;

    std::vector<std::string> words;
    words.push_back(ct.words[c][v]);
    words.push_back("nw" + std::to_string(word_noise.sample(rng)));

    std::vector<std::string> skills;
    skills.push_back(ct.skills[c][v]);
    skills.push_back("ns" + std::to_string(skill_noise.sample(rng)));
    if (rng.chance(config.extra_noise_skill_prob)) {
      skills.push_back("ns" + std::to_string(skill_noise.sample(rng)));
    }

    std::vector<std::string> titles;
    titles.push_back(ct.titles[c][v]);
    titles.push_back("nt" + std::to_string(title_noise.sample(rng)));

    // A past life in another cluster: its a-variant surface tokens without
    // its semantics. These members are the lexical false positives.
    if (config.n_clusters > 1 && rng.chance(config.past_prob)) {
      uint32_t x = static_cast<uint32_t>(rng.below(config.n_clusters - 1));
      if (x >= c) ++x;
      words.push_back(ct.words[x][0]);
      skills.push_back(ct.skills[x][0]);
    }

    std::vector<std::string> trigrams;
    for (const std::string& w : words) {
      auto tg = word_trigrams(w);
      trigrams.insert(trigrams.end(), tg.begin(), tg.end());
    }

    p.fields[kTextField] = std::move(trigrams);
    p.fields[kSkillField] = std::move(skills);
    p.fields[kTitleField] = std::move(titles);
    p.fields[kWordField] = std::move(words);
    p.fields[kLocationField] = {"loc" + std::to_string(rng.below(config.locations))};

    cluster_members[c].push_back(uid);
    out.member_cluster.push_back(c);
    out.members.push_back(std::move(p));
  }

  for (uint32_t c = 0; c < config.n_clusters; ++c) {
    if (cluster_members[c].empty()) {
      throw TrainingError("cluster " + std::to_string(c) +
                          " received no members; raise n_members or change the seed");
    }
  }

  // Queries always speak variant a; against b-heavy clusters that is the
  // synonym case where lexical match goes hungry.
  uint32_t qid = 0;
  for (uint32_t c = 0; c < config.n_clusters; ++c) {
    for (uint32_t i = 0; i < config.queries_per_cluster; ++i) {
      SyntheticQuery q;
      q.qid = qid++;
      q.cluster = c;
      q.synonym = is_synonym_cluster(c);
      q.text = ct.words[c][0];
      q.facets[kSkillField] = {ct.skills[c][0]};
      q.facets[kLocationField] = {"loc" + std::to_string(rng.below(config.locations))};
      out.judgments[q.qid] = cluster_members[c];
      out.queries.push_back(std::move(q));
    }
  }

  // Vocabulary and counts: members in uid order, then queries in qid order.
  for (const MemberProfile& p : out.members) {
    scan_into_vocab(out.vocab, p);
    for (const auto& [fid, toks] : p.fields) count_tokens(out.counts, fid, toks);
  }
  for (const SyntheticQuery& q : out.queries) {
    QueryFeatures f = parse_query(q.text, q.facets);
    for (const std::string& t : f.trigrams) {
      out.vocab.add(kTextField, t);
      ++out.counts[kTextField][t];
    }
    for (const auto& [fid, toks] : f.facets) {
      for (const std::string& t : toks) {
        out.vocab.add(fid, t);
        ++out.counts[fid][t];
      }
    }
  }

  out.model_spec = make_default_model_spec(out.vocab);
  return out;
}

ModelSpec make_default_model_spec(const Vocabulary& vocab) {
  ModelSpec spec;
  for (uint16_t fid : {kTextField, kSkillField, kTitleField}) {
    FieldSpec f;
    f.field_id = fid;
    f.vocab_size = vocab.size(fid);
    f.embed_dim = 32;
    f.pooling = Pooling::kMean;
    spec.query_arm.fields.push_back(f);
    spec.member_arm.fields.push_back(f);
  }
  spec.query_arm.hidden_dims = {64};
  spec.query_arm.activation = Activation::kTanh;
  spec.member_arm.hidden_dims = {96, 64};
  spec.member_arm.activation = Activation::kTanh;
  spec.cross.kind = CrossKind::kCosine;
  spec.validate();
  return spec;
}

void write_synthetic(const SyntheticOutput& out, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_members(out.members, dir + "/corpus.jsonl");

  std::ostringstream queries;
  for (const SyntheticQuery& q : out.queries) {
    json facets = json::object();
    for (const auto& [fid, toks] : q.facets) facets[std::to_string(fid)] = toks;
    json j{{"qid", q.qid},
           {"text", q.text},
           {"facets", std::move(facets)},
           {"cluster", q.cluster},
           {"synonym", q.synonym}};
    queries << j.dump() << "\n";
  }
  write_file_atomic(dir + "/queries.jsonl", queries.str());

  std::ostringstream judgments;
  for (const auto& [qid, uids] : out.judgments) {
    judgments << json{{"qid", qid}, {"uids", uids}}.dump() << "\n";
  }
  write_file_atomic(dir + "/judgments.jsonl", judgments.str());

  out.vocab.save(dir + "/vocab.json");
  save_token_counts(out.counts, dir + "/counts.json");
  write_file_atomic(dir + "/modelspec.json", model_spec_to_json(out.model_spec).dump(2) + "\n");
}

std::vector<SyntheticQuery> load_queries(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<SyntheticQuery> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      SyntheticQuery q;
      q.qid = j.at("qid").get<uint32_t>();
      q.text = j.at("text").get<std::string>();
      for (auto it = j.at("facets").begin(); it != j.at("facets").end(); ++it) {
        std::vector<std::string> toks;
        for (const auto& t : it.value()) toks.push_back(t.get<std::string>());
        q.facets[static_cast<uint16_t>(std::stoul(it.key()))] = std::move(toks);
      }
      q.cluster = j.value("cluster", 0u);
      q.synonym = j.value("synonym", false);
      out.push_back(std::move(q));
    } catch (const std::exception& e) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::map<uint32_t, std::vector<uint64_t>> load_judgments(const std::string& path) {
  std::istringstream in(read_file(path));
  std::map<uint32_t, std::vector<uint64_t>> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      uint32_t qid = j.at("qid").get<uint32_t>();
      std::vector<uint64_t> uids;
      for (const auto& u : j.at("uids")) uids.push_back(u.get<uint64_t>());
      if (!std::is_sorted(uids.begin(), uids.end())) std::sort(uids.begin(), uids.end());
      out[qid] = std::move(uids);
    } catch (const std::exception& e) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<TrainExample> make_training_pairs(const SyntheticOutput& out, uint32_t pairs_per_query,
                                              uint64_t seed) {
  for (size_t i = 0; i < out.members.size(); ++i) {
    if (out.members[i].uid != i + 1) {
      throw InputError("corpus uids must be contiguous from 1 for pair sampling");
    }
  }
  Rng rng(seed);
  std::vector<TrainExample> pairs;
  pairs.reserve(static_cast<size_t>(pairs_per_query) * out.queries.size());
  const ArmSpec& qarm = out.model_spec.query_arm;
  const ArmSpec& marm = out.model_spec.member_arm;

  for (const SyntheticQuery& q : out.queries) {
    const std::vector<uint64_t>& rel = out.judgments.at(q.qid);
    if (rel.size() == out.members.size()) {
      throw InputError("query " + std::to_string(q.qid) + " judges every member relevant");
    }
    QueryFeatures features = parse_query(q.text, q.facets);
    FieldInputs qin = query_field_inputs(features, qarm, out.vocab, kTextField);
    for (uint32_t i = 0; i < pairs_per_query; ++i) {
      TrainExample ex;
      ex.query = qin;
      ex.positive_uid = rel[rng.below(rel.size())];
      do {
        ex.negative_uid = 1 + rng.below(out.members.size());
      } while (std::binary_search(rel.begin(), rel.end(), ex.negative_uid));
      ex.positive = member_field_inputs(out.members[ex.positive_uid - 1], marm, out.vocab);
      ex.negative = member_field_inputs(out.members[ex.negative_uid - 1], marm, out.vocab);
      pairs.push_back(std::move(ex));
    }
  }
  return pairs;
}

std::pair<std::vector<TrainExample>, std::vector<TrainExample>> split_pairs(
    std::vector<TrainExample> pairs) {
  std::vector<TrainExample> train;
  std::vector<TrainExample> held;
  for (size_t i = 0; i < pairs.size(); ++i) {
    if (i % 10 == 9) {
      held.push_back(std::move(pairs[i]));
    } else {
      train.push_back(std::move(pairs[i]));
    }
  }
  return {std::move(train), std::move(held)};
}

}  // namespace splitrank
