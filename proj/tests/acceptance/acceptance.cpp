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

// Acceptance gate for the split ranking pipeline. Each criterion prints one
// PASS/FAIL line; the process exits non-zero if any criterion fails. Wall
// budgets are asserted where a criterion carries one.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "splitrank/bench.hpp"
#include "splitrank/binio.hpp"
#include "splitrank/broker.hpp"
#include "splitrank/bundle.hpp"
#include "splitrank/embed_dict.hpp"
#include "splitrank/error.hpp"
#include "splitrank/eval.hpp"
#include "splitrank/features.hpp"
#include "splitrank/frontend.hpp"
#include "splitrank/index_build.hpp"
#include "splitrank/index_format.hpp"
#include "splitrank/net.hpp"
#include "splitrank/nn.hpp"
#include "splitrank/quantize.hpp"
#include "splitrank/rng.hpp"
#include "splitrank/searcher.hpp"
#include "splitrank/searcher_server.hpp"
#include "splitrank/synthetic.hpp"
#include "splitrank/train.hpp"
#include "splitrank/wire.hpp"

#include "../testutil.hpp"

namespace {

using namespace splitrank;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Baselines measured once on the reference build (one core, g++ Release,
// this container) and pinned. The corpus/training values are deterministic
// for the fixed seed; the scoring throughput is wall clock and carries a
// wide band. Unset pins fail their criterion, so a fresh port has to
// measure before it can go green.
const std::optional<double> kPinnedSemTermP10 = 0.812;      // C2, +/-20% rel
const std::optional<double> kPinnedHeldOutAccuracy = 0.9;   // C8, +/-0.05 abs
const std::optional<double> kPinnedMicrosPerHit = 0.177;    // C4, +/-50%

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

// First failed requirement wins; notes accumulate into the detail string.
struct Criterion {
  bool ok = true;
  std::string fail;
  std::vector<std::string> notes;

  void must(bool cond, const std::string& what) {
    if (ok && !cond) {
      ok = false;
      fail = what;
    }
  }
  void note(const std::string& s) { notes.push_back(s); }

  std::string detail() const {
    std::string out;
    for (const auto& n : notes) {
      if (!out.empty()) out += ", ";
      out += n;
    }
    if (!ok) {
      if (!out.empty()) out += ", ";
      out += "FAILED: " + fail;
    }
    return out;
  }
};

void check_pin(Criterion& c, const char* name, std::optional<double> pin, double measured,
               double rel_tol, double abs_tol) {
  if (!pin) {
    c.must(false, std::string(name) + " baseline unset; measured " + fmt(measured, 6));
    return;
  }
  double tol = std::max(rel_tol * std::fabs(*pin), abs_tol);
  c.note(std::string(name) + " " + fmt(measured, 6) + " (pinned " + fmt(*pin, 6) + ")");
  c.must(std::fabs(measured - *pin) <= tol,
         std::string(name) + " " + fmt(measured, 6) + " outside pinned " + fmt(*pin, 6));
}

// ---------------------------------------------------------------------------
// Shared large fixture: the default synthetic corpus, trained end to end.
// Built once, on first use; the timings are attributed to the criteria that
// consume each stage.

struct Fixture {
  SyntheticOutput corpus;
  ModelSpec spec;
  Model model{ModelSpec{}, TensorStore{}};
  TrainResult train_result;
  double held_accuracy = 0.0;
  QueryArmBundle qbundle;
  MemberArmBundle mbundle;
  CrossBundle cbundle;
  EmbeddingDictionary dict;
  std::map<uint64_t, std::vector<float>> vectors;

  double gen_s = 0.0;
  double train_s = 0.0;
  double vectors_s = 0.0;
};

const Fixture& fixture() {
  static Fixture fx = [] {
    Fixture f;
    auto t0 = Clock::now();
    f.corpus = gen_synthetic(SyntheticConfig{});
    f.gen_s = seconds_since(t0);

    t0 = Clock::now();
    f.spec = make_default_model_spec(f.corpus.vocab);
    auto pairs = make_training_pairs(f.corpus, 4, f.corpus.config.seed);
    auto [train_set, held_set] = split_pairs(std::move(pairs));
    f.model = init_model(f.spec, f.corpus.config.seed);
    TrainOptions opts;
    opts.lr = 0.5f;
    opts.epochs = 20;
    opts.batch_size = 32;
    opts.seed = f.corpus.config.seed;
    f.train_result = train(f.model, train_set, opts);
    f.held_accuracy = pairwise_accuracy(f.model, held_set);
    f.train_s = seconds_since(t0);

    std::tie(f.qbundle, f.mbundle, f.cbundle) = split(f.model, ModelVersion{1, "acceptance"});
    f.dict = build_dictionary(f.qbundle, f.corpus.vocab, f.corpus.counts, DictBuildOptions{});

    t0 = Clock::now();
    f.vectors = compute_member_vectors(f.mbundle, f.corpus.members, f.corpus.vocab, 64);
    f.vectors_s = seconds_since(t0);

    std::printf("--  fixture: %u members, %zu queries; gen %.1fs, train %.1fs, vectors %.1fs\n",
                f.corpus.config.n_members, f.corpus.queries.size(), f.gen_s, f.train_s,
                f.vectors_s);
    std::fflush(stdout);
    return f;
  }();
  return fx;
}

FrontendConfig frontend_config(const std::string& broker, float w_sem, float w_term, uint32_t k,
                               uint32_t max_candidates) {
  FrontendConfig cfg;
  cfg.broker_endpoint = broker;
  cfg.w_sem = w_sem;
  cfg.w_term = w_term;
  cfg.default_k = k;
  cfg.max_candidates = max_candidates;
  cfg.text_field_id = kTextField;
  cfg.mode = RetrievalMode::kAny;
  cfg.timeout_ms = 5000;
  return cfg;
}

// ---------------------------------------------------------------------------
// C1. Split equivalence: the served frontend -> broker -> searcher score of a
// pair equals the monolithic score_pair. Retrieval is forced to cover the
// sampled member by adding one of its skill tokens as a facet; the oracle
// scores the identically augmented query.

Criterion c1_split_equivalence() {
  Criterion c;
  auto t0 = Clock::now();

  SyntheticConfig cfg;
  cfg.seed = 11;
  cfg.n_members = 800;
  cfg.n_clusters = 8;
  cfg.synonym_clusters = 2;
  cfg.queries_per_cluster = 5;
  cfg.noise_words = 60;
  cfg.noise_skills = 60;
  cfg.noise_titles = 60;
  cfg.locations = 4;
  SyntheticOutput corpus = gen_synthetic(cfg);

  ModelSpec spec = make_default_model_spec(corpus.vocab);
  Model model = init_model(spec, cfg.seed);
  auto pairs = make_training_pairs(corpus, 4, cfg.seed);
  auto [train_set, held_set] = split_pairs(std::move(pairs));
  TrainOptions topts;
  topts.lr = 0.5f;
  topts.epochs = 3;
  topts.batch_size = 32;
  topts.seed = cfg.seed;
  train(model, train_set, topts);

  ModelVersion version{3, "c1"};
  auto [qb, mb, cb] = split(model, version);
  EmbeddingDictionary dict = build_dictionary(qb, corpus.vocab, corpus.counts, DictBuildOptions{});
  auto vectors = compute_member_vectors(mb, corpus.members, corpus.vocab, 64);

  for (uint8_t scheme : {kQuantNone, kQuantInt8}) {
    auto shards = build_shards(corpus.members, vectors, 1, version, scheme);
    SearcherServer searcher(make_snapshot(std::move(shards[0])), cb, "127.0.0.1", 0);
    searcher.start();
    BrokerServer broker(BrokerConfig{{searcher.endpoint()}, 3000}, "127.0.0.1", 0);
    broker.start();
    Frontend fe(dict, qb, frontend_config(broker.endpoint(), 1.0f, 0.0f, cfg.n_members,
                                          cfg.n_members));
    FrontendServer frontend(std::move(fe), "127.0.0.1", 0);
    frontend.start();

    LineClient client(frontend.endpoint(), 5000);
    Rng rng(scheme == kQuantNone ? 101 : 202);
    double max_err = 0.0;
    size_t found = 0;
    const size_t kPairs = 1000;
    for (size_t i = 0; i < kPairs; ++i) {
      const SyntheticQuery& q = corpus.queries[rng.below(corpus.queries.size())];
      uint64_t uid = 1 + rng.below(cfg.n_members);
      const MemberProfile& prof = corpus.members[uid - 1];

      auto facets = q.facets;
      facets[kSkillField].push_back(prof.fields.at(kSkillField).front());

      UserSearchRequest req;
      req.text = q.text;
      req.facets = facets;
      req.k = cfg.n_members;
      nlohmann::json reply = nlohmann::json::parse(
          client.request(user_search_request_to_json(req).dump()));
      UserSearchResponse resp = user_search_response_from_json(throw_if_error(reply));

      QueryFeatures feats = parse_query(q.text, facets);
      FieldInputs qi = query_field_inputs(feats, spec.query_arm, corpus.vocab, kTextField);
      FieldInputs mi = member_field_inputs(prof, spec.member_arm, corpus.vocab);
      float expect = score_pair(model, qi, mi);

      for (const SearchHit& h : resp.hits) {
        if (h.uid != uid) continue;
        ++found;
        max_err = std::max(max_err, std::fabs(double(h.score) - double(expect)));
        break;
      }
    }
    frontend.stop();
    broker.stop();
    searcher.stop();

    double tol = scheme == kQuantNone ? 1e-5 : 0.01;
    const char* label = scheme == kQuantNone ? "f32" : "int8";
    c.note(std::string(label) + " max |err| " + fmt(max_err, 3) + " (tol " + fmt(tol, 2) + ")");
    c.must(found == kPairs, std::string(label) + ": only " + std::to_string(found) + "/1000 pairs retrieved");
    c.must(max_err <= tol, std::string(label) + " error " + fmt(max_err, 4) + " > " + fmt(tol, 2));
  }

  double elapsed = seconds_since(t0);
  c.note(fmt(elapsed, 3) + "s (budget 60s)");
  c.must(elapsed < 60.0, "over the 60s budget");
  return c;
}

// ---------------------------------------------------------------------------
// C2. Precision lift: the shipped ranker (w_sem=1, w_term=0.25) beats the
// term-only ablation (w_sem=0) by >= 3% relative mean precision@10 on the
// default corpus, and strictly on the synonym-query subset.

Criterion c2_precision_lift() {
  Criterion c;
  auto t0 = Clock::now();
  const Fixture& fx = fixture();
  const auto& corpus = fx.corpus;

  ModelVersion version{1, "acceptance"};
  auto shards = build_shards(corpus.members, fx.vectors, 1, version, kQuantInt8);
  ShardSnapshot snap = make_snapshot(std::move(shards[0]));

  auto run_ranker = [&](float w_sem, float w_term) {
    Frontend fe(fx.dict, fx.qbundle,
                frontend_config("unused", w_sem, w_term, 10, corpus.config.n_members + 1));
    fe.set_backend([&](const nlohmann::json& breq) {
      SearchRequest sr = search_request_from_json(breq);
      SearchResponse resp = search(snap, sr, fx.cbundle);
      return broker_response_to_json(BrokerResult{resp.hits, {}});
    });
    std::map<uint32_t, std::vector<uint64_t>> run;
    for (const SyntheticQuery& q : corpus.queries) {
      UserSearchRequest req;
      req.text = q.text;
      req.facets = q.facets;
      UserSearchResponse resp = fe.handle_search(req);
      auto& uids = run[q.qid];
      for (const SearchHit& h : resp.hits) uids.push_back(h.uid);
    }
    return run;
  };

  auto run_sem = run_ranker(1.0f, 0.25f);
  auto run_term = run_ranker(0.0f, 0.25f);
  EvalResult sem = evaluate(run_sem, corpus.judgments, 10);
  EvalResult term = evaluate(run_term, corpus.judgments, 10);

  auto subset_mean = [&](const EvalResult& r, bool synonym) {
    double sum = 0.0;
    size_t n = 0;
    for (const auto& [qid, p] : r.per_query) {
      if (corpus.queries[qid].synonym != synonym) continue;
      sum += p;
      ++n;
    }
    return n ? sum / double(n) : 0.0;
  };
  double sem_syn = subset_mean(sem, true);
  double term_syn = subset_mean(term, true);

  c.must(sem.evaluated == corpus.queries.size() && sem.skipped == 0, "queries skipped in eval");
  c.note("p@10 " + fmt(sem.mean_precision, 4) + " vs term-only " + fmt(term.mean_precision, 4));
  c.note("synonym subset " + fmt(sem_syn, 4) + " vs " + fmt(term_syn, 4));
  c.must(term.mean_precision > 0.0, "term baseline scored zero");
  double lift = sem.mean_precision / term.mean_precision - 1.0;
  c.note("lift " + fmt(100.0 * lift, 3) + "%");
  c.must(lift >= 0.03, "relative lift " + fmt(100.0 * lift, 3) + "% < 3%");
  c.must(sem_syn > term_syn, "no strict lift on the synonym subset");
  check_pin(c, "pinned p@10", kPinnedSemTermP10, sem.mean_precision, 0.20, 0.0);

  double total = fx.gen_s + fx.train_s + fx.vectors_s + seconds_since(t0);
  c.note(fmt(total, 3) + "s incl. fixture (budget 600s)");
  c.must(total < 600.0, "over the 600s budget");
  return c;
}

// ---------------------------------------------------------------------------
// C3. Query-arm latency: p99 of build_query_representation under the loaded
// dictionary stays within 3 ms.

Criterion c3_query_arm_latency() {
  Criterion c;
  auto t0 = Clock::now();
  const Fixture& fx = fixture();

  Frontend fe(fx.dict, fx.qbundle, frontend_config("unused", 1.0f, 0.25f, 10, 10000));
  std::vector<QueryFeatures> feats;
  feats.reserve(fx.corpus.queries.size());
  for (const SyntheticQuery& q : fx.corpus.queries) feats.push_back(parse_query(q.text, q.facets));

  const size_t kRequests = 10000;
  std::vector<uint64_t> us;
  us.reserve(kRequests);
  for (size_t i = 0; i < kRequests; ++i) {
    auto s = Clock::now();
    volatile float sink = fe.build_query_representation(feats[i % feats.size()]).first[0];
    (void)sink;
    us.push_back(uint64_t(std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - s)
                              .count()));
  }
  uint64_t p50 = nearest_rank_percentile(us, 50.0);
  uint64_t p99 = nearest_rank_percentile(us, 99.0);
  c.note("p50 " + std::to_string(p50) + "us, p99 " + std::to_string(p99) + "us over 10000 requests");
  c.must(p99 <= 3000, "p99 " + std::to_string(p99) + "us > 3ms");

  double elapsed = seconds_since(t0);
  c.note(fmt(elapsed, 3) + "s (budget 120s)");
  c.must(elapsed < 120.0, "over the 120s budget");
  return c;
}

// ---------------------------------------------------------------------------
// C4. Searcher scoring budget: 100k candidates per request, cosine at d=64,
// int8 payloads. The whole search call (retrieve + score + top-k) must fit
// 200 ms per request on one core.

Criterion c4_scoring_budget() {
  Criterion c;
  auto t0 = Clock::now();

  const uint32_t kMembers = 100000;
  const uint32_t kDim = 64;
  Rng rng(42);
  std::vector<MemberProfile> profiles(kMembers);
  std::map<uint64_t, std::vector<float>> vectors;
  for (uint32_t i = 0; i < kMembers; ++i) {
    profiles[i].uid = i + 1;
    profiles[i].fields[kSkillField] = {"all"};
    auto& v = vectors[i + 1];
    v.resize(kDim);
    for (auto& x : v) x = rng.uniform_f(-1.0f, 1.0f);
  }

  CrossBundle cross;
  cross.version = ModelVersion{1, "c4"};
  cross.spec.kind = CrossKind::kCosine;
  cross.query_dim = kDim;
  cross.member_dim = kDim;

  auto shards = build_shards(profiles, vectors, 1, cross.version, kQuantInt8);
  ShardSnapshot snap = make_snapshot(std::move(shards[0]));

  SearchRequest req;
  req.version = 1;
  req.terms = {{kSkillField, "all"}};
  req.mode = RetrievalMode::kAny;
  req.max_candidates = kMembers;
  req.k = 10;
  req.w_sem = 1.0f;
  req.w_term = 0.0f;
  req.qrep.resize(kDim);

  c.must(retrieve(snap, req.terms, req.mode, req.max_candidates).size() == kMembers,
         "posting does not cover all members");

  const size_t kRounds = 100;
  std::vector<uint64_t> us;
  us.reserve(kRounds);
  for (size_t r = 0; r < kRounds; ++r) {
    for (auto& x : req.qrep) x = rng.uniform_f(-1.0f, 1.0f);
    auto s = Clock::now();
    SearchResponse resp = search(snap, req, cross);
    us.push_back(uint64_t(std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - s)
                              .count()));
    c.must(resp.hits.size() == req.k, "short hit list");
  }
  uint64_t p50 = nearest_rank_percentile(us, 50.0);
  uint64_t p90 = nearest_rank_percentile(us, 90.0);
  uint64_t p99 = nearest_rank_percentile(us, 99.0);
  double us_per_hit = double(p50) / double(kMembers);
  c.note("per request p50 " + fmt(p50 / 1000.0, 3) + "ms, p90 " + fmt(p90 / 1000.0, 3) +
         "ms, p99 " + fmt(p99 / 1000.0, 3) + "ms");
  c.note(fmt(us_per_hit, 3) + "us/hit");
  c.must(p99 <= 200000, "p99 " + fmt(p99 / 1000.0, 3) + "ms > 200ms");
  c.must(us_per_hit <= 2.0, "over 2us/hit");
  check_pin(c, "pinned us/hit", kPinnedMicrosPerHit, us_per_hit, 0.50, 0.0);

  c.note(fmt(seconds_since(t0), 3) + "s");
  return c;
}

// ---------------------------------------------------------------------------
// C5. Shard invariance: the same corpus behind one shard and behind four
// shards returns the identical global top-10, uids exactly, scores to 1e-6.

Criterion c5_shard_invariance() {
  Criterion c;
  auto t0 = Clock::now();
  const Fixture& fx = fixture();
  const auto& corpus = fx.corpus;
  ModelVersion version{1, "acceptance"};

  auto one = build_shards(corpus.members, fx.vectors, 1, version, kQuantInt8);
  auto four = build_shards(corpus.members, fx.vectors, 4, version, kQuantInt8);

  std::vector<std::unique_ptr<SearcherServer>> servers;
  std::vector<std::string> single, sharded;
  servers.push_back(std::make_unique<SearcherServer>(make_snapshot(std::move(one[0])), fx.cbundle,
                                                     "127.0.0.1", 0));
  single.push_back(servers.back()->endpoint());
  for (auto& s : four) {
    servers.push_back(std::make_unique<SearcherServer>(make_snapshot(std::move(s)), fx.cbundle,
                                                       "127.0.0.1", 0));
    sharded.push_back(servers.back()->endpoint());
  }
  for (auto& s : servers) s->start();

  Frontend fe(fx.dict, fx.qbundle,
              frontend_config("unused", 1.0f, 0.25f, 10, corpus.config.n_members + 1));

  size_t compared = 0;
  double max_dscore = 0.0;
  bool uid_mismatch = false;
  for (const SyntheticQuery& q : corpus.queries) {
    QueryFeatures feats = parse_query(q.text, q.facets);
    SearchRequest req;
    req.version = 1;
    req.qrep = fe.build_query_representation(feats).first;
    req.terms = fe.build_terms(feats);
    req.mode = RetrievalMode::kAny;
    req.max_candidates = corpus.config.n_members + 1;
    req.k = 10;
    req.w_sem = 1.0f;
    req.w_term = 0.25f;

    BrokerResult a = broker_search(req, single, 5000);
    BrokerResult b = broker_search(req, sharded, 5000);
    c.must(a.degraded.empty() && b.degraded.empty(), "degraded shard during comparison");
    c.must(a.hits.size() == b.hits.size(), "hit count mismatch");
    if (a.hits.size() != b.hits.size()) break;
    for (size_t i = 0; i < a.hits.size(); ++i) {
      if (a.hits[i].uid != b.hits[i].uid) uid_mismatch = true;
      max_dscore = std::max(max_dscore,
                            std::fabs(double(a.hits[i].score) - double(b.hits[i].score)));
    }
    ++compared;
  }
  for (auto& s : servers) s->stop();

  c.note(std::to_string(compared) + " queries, max |score delta| " + fmt(max_dscore, 3));
  c.must(compared == corpus.queries.size(), "not all queries compared");
  c.must(!uid_mismatch, "uid sequences differ between shardings");
  c.must(max_dscore <= 1e-6, "score delta " + fmt(max_dscore, 4) + " > 1e-6");
  c.note(fmt(seconds_since(t0), 3) + "s");
  return c;
}

// ---------------------------------------------------------------------------
// C6. Gradient correctness across activation x similarity kinds.

Criterion c6_gradients() {
  Criterion c;
  auto t0 = Clock::now();

  Rng rng(314);
  auto random_example = [&]() {
    TrainExample ex;
    ex.query[1] = {rng.next_u32() % 12, rng.next_u32() % 12};
    ex.query[2] = {rng.next_u32() % 8};
    for (FieldInputs* m : {&ex.positive, &ex.negative}) {
      (*m)[1] = {rng.next_u32() % 12};
      (*m)[2] = {rng.next_u32() % 8, rng.next_u32() % 8};
      (*m)[3] = {rng.next_u32() % 9};
    }
    return ex;
  };

  double worst = 0.0;
  for (Activation act : {Activation::kTanh, Activation::kRelu}) {
    for (CrossKind kind : {CrossKind::kCosine, CrossKind::kDenseCross}) {
      Model m = init_model(testutil::toy_spec(act, kind), 31, 0.3f);
      for (int i = 0; i < 3; ++i) {
        worst = std::max(worst, grad_check(m, random_example(), 1e-4));
      }
    }
  }
  c.note("max rel err " + fmt(worst, 3) + " over {tanh,relu}x{cosine,dense} (tol 1e-3)");
  c.must(worst <= 1e-3, "gradient error " + fmt(worst, 4) + " > 1e-3");
  c.note(fmt(seconds_since(t0), 3) + "s");
  return c;
}

// ---------------------------------------------------------------------------
// C7. Quantization bound: per-component round-trip error <= scale/2 on
// random vectors, zero vector exact.

Criterion c7_quantization() {
  Criterion c;
  auto t0 = Clock::now();

  Rng rng(99);
  size_t checked = 0;
  double worst_ratio = 0.0;  // |err| / (scale/2)
  for (int i = 0; i < 10000; ++i) {
    size_t dim = 1 + rng.below(96);
    float mag = std::pow(10.0f, float(rng.below(5)) - 2.0f);
    std::vector<float> v(dim);
    for (auto& x : v) x = rng.uniform_f(-mag, mag);
    QuantizedVector qv = quantize(v);
    std::vector<float> back = dequantize(qv);
    for (size_t j = 0; j < dim; ++j) {
      double err = std::fabs(double(back[j]) - double(v[j]));
      // Half-ulp slack: the bound itself is computed in float.
      c.must(err <= qv.scale / 2.0 + 1e-7, "round-trip error above scale/2");
      if (qv.scale > 0) worst_ratio = std::max(worst_ratio, err / (qv.scale / 2.0));
      ++checked;
    }
  }
  std::vector<float> zero(64, 0.0f);
  QuantizedVector qz = quantize(zero);
  std::vector<float> zback = dequantize(qz);
  bool zero_exact = qz.scale == 0.0f &&
                    std::all_of(zback.begin(), zback.end(), [](float x) { return x == 0.0f; });
  c.must(zero_exact, "zero vector not exact");

  c.note(std::to_string(checked) + " components over 10000 vectors, worst |err|/(scale/2) " +
         fmt(worst_ratio, 4));
  c.note(fmt(seconds_since(t0), 3) + "s");
  return c;
}

// ---------------------------------------------------------------------------
// C8. Training sanity on the synthetic log: per-epoch loss non-increasing
// within 5% noise, held-out pairwise accuracy at least 0.8.

Criterion c8_training_sanity() {
  Criterion c;
  const Fixture& fx = fixture();
  const auto& loss = fx.train_result.epoch_loss;

  c.must(loss.size() == 20, "expected 20 epochs");
  bool monotone = true;
  for (size_t i = 1; i < loss.size(); ++i) {
    if (loss[i] > loss[i - 1] * 1.05) monotone = false;
  }
  c.note("loss " + fmt(loss.front(), 4) + " -> " + fmt(loss.back(), 4) + " over " +
         std::to_string(loss.size()) + " epochs");
  c.must(monotone, "epoch loss increased by more than 5%");

  c.note("held-out accuracy " + fmt(fx.held_accuracy, 4));
  c.must(fx.held_accuracy >= 0.8, "held-out accuracy below 0.8");
  check_pin(c, "pinned accuracy", kPinnedHeldOutAccuracy, fx.held_accuracy, 0.0, 0.05);

  c.note("train " + fmt(fx.train_s, 3) + "s (budget 300s)");
  c.must(fx.train_s < 300.0, "training over the 300s budget");
  return c;
}

// ---------------------------------------------------------------------------
// C9. Snapshot isolation: concurrent bench load plus live updates every
// 100 ms for 30 s. Sentinel vectors are unit basis vectors whose index
// encodes (uid, generation), so every served score identifies exactly one
// generation: a torn or mixed read would match none, a stale snapshot an
// out-of-window one. Within one response, generations may differ by at most
// one (an update batch in flight) and must not increase with uid, because
// the updater walks uids in ascending order.

Criterion c9_snapshot_isolation() {
  Criterion c;
  auto t0 = Clock::now();

  const uint32_t kSentinels = 64;
  const uint32_t kDim = 64;
  const uint16_t kVersion = 7;
  auto basis = [&](uint32_t j) {
    std::vector<float> v(kDim, 0.0f);
    v[j % kDim] = 1.0f;
    return v;
  };
  auto slot = [&](uint32_t uid, uint32_t g) { return (uid - 1 + g) % kDim; };

  std::vector<MemberProfile> profiles(kSentinels);
  std::map<uint64_t, std::vector<float>> vectors;
  for (uint32_t i = 0; i < kSentinels; ++i) {
    profiles[i].uid = i + 1;
    profiles[i].fields[kSkillField] = {"hit"};
    vectors[i + 1] = basis(slot(i + 1, 0));
  }

  CrossBundle cross;
  cross.version = ModelVersion{kVersion, "c9"};
  cross.spec.kind = CrossKind::kCosine;
  cross.query_dim = kDim;
  cross.member_dim = kDim;

  auto shards = build_shards(profiles, vectors, 1, cross.version, kQuantInt8);
  SearcherServer server(make_snapshot(std::move(shards[0])), cross, "127.0.0.1", 0);
  server.start();

  SearchRequest req;
  req.version = kVersion;
  req.qrep.resize(kDim);
  for (uint32_t j = 0; j < kDim; ++j) req.qrep[j] = float(j + 1);
  req.terms = {{kSkillField, "hit"}};
  req.mode = RetrievalMode::kAny;
  req.max_candidates = kSentinels;
  req.k = kSentinels;
  req.w_sem = 1.0f;
  req.w_term = 0.0f;
  const std::string req_line = search_request_to_json(req).dump();

  // Expected semantic score per basis slot, through the exact quantize ->
  // dequantize -> similarity path the searcher runs.
  std::vector<double> expected(kDim);
  double min_gap = 1e9;
  for (uint32_t j = 0; j < kDim; ++j) {
    expected[j] = similarity(cross.cross(), req.qrep, dequantize(quantize(basis(j))));
  }
  {
    auto sorted = expected;
    std::sort(sorted.begin(), sorted.end());
    for (size_t j = 1; j < sorted.size(); ++j) min_gap = std::min(min_gap, sorted[j] - sorted[j - 1]);
  }
  c.must(min_gap > 1e-3, "sentinel scores not separable");

  std::atomic<uint32_t> generation{0};
  std::atomic<bool> stop{false};
  std::thread updater([&] {
    uint32_t g = 0;
    auto next = Clock::now();
    while (!stop.load()) {
      next += std::chrono::milliseconds(100);
      std::this_thread::sleep_until(next);
      if (stop.load()) break;
      ++g;
      for (uint32_t uid = 1; uid <= kSentinels; ++uid) {
        server.live_update(profiles[uid - 1], basis(slot(uid, g)), cross.version);
      }
      generation.store(g);
    }
  });

  BenchReport report;
  std::string bench_error;
  std::thread load([&] {
    try {
      BenchOptions opts;
      opts.concurrency = 8;
      opts.duration_s = 30.0;
      opts.timeout_ms = 5000;
      report = bench(server.endpoint(), {req_line}, opts);
    } catch (const Error& e) {
      bench_error = e.what();
    }
  });

  size_t responses = 0;
  size_t checker_errors = 0;
  std::string violation;
  {
    LineClient client(server.endpoint(), 5000);
    while (seconds_since(t0) < 30.0 && violation.empty()) {
      uint32_t g0 = generation.load();
      SearchResponse resp;
      try {
        nlohmann::json reply = nlohmann::json::parse(client.request(req_line));
        resp = search_response_from_json(throw_if_error(reply));
      } catch (const Error&) {
        ++checker_errors;
        continue;
      }
      uint32_t g1 = generation.load();
      ++responses;

      if (resp.hits.size() != kSentinels) {
        violation = "response carried " + std::to_string(resp.hits.size()) + " hits";
        break;
      }
      std::map<uint64_t, uint32_t> hit_gen;
      for (const SearchHit& h : resp.hits) {
        int matched = -1;
        for (uint32_t j = 0; j < kDim; ++j) {
          if (std::fabs(double(h.semantic) - expected[j]) <= 1e-6) {
            matched = int(j);
            break;
          }
        }
        if (matched < 0) {
          violation = "uid " + std::to_string(h.uid) + " score matches no generation";
          break;
        }
        bool in_window = false;
        for (uint32_t g = g0; g <= g1 + 1; ++g) {
          if (slot(uint32_t(h.uid), g) == uint32_t(matched)) {
            hit_gen[h.uid] = g;
            in_window = true;
            break;
          }
        }
        if (!in_window) {
          violation = "uid " + std::to_string(h.uid) + " served an out-of-window generation";
          break;
        }
      }
      if (!violation.empty()) break;
      uint32_t gmin = UINT32_MAX, gmax = 0, prev = UINT32_MAX;
      for (const auto& [uid, g] : hit_gen) {
        gmin = std::min(gmin, g);
        gmax = std::max(gmax, g);
        if (prev != UINT32_MAX && g > prev) {
          violation = "generation increased with uid inside one response";
          break;
        }
        prev = g;
      }
      if (violation.empty() && gmax - gmin > 1) {
        violation = "response mixes generations " + std::to_string(gmin) + " and " +
                    std::to_string(gmax);
      }
    }
  }

  load.join();
  stop.store(true);
  updater.join();
  server.stop();

  c.note(std::to_string(responses) + " checked responses, " + std::to_string(generation.load()) +
         " update batches");
  c.note("bench " + std::to_string(report.samples) + " samples, " + std::to_string(report.errors) +
         " errors");
  c.must(violation.empty(), violation);
  c.must(checker_errors == 0, std::to_string(checker_errors) + " checker request errors");
  c.must(bench_error.empty(), "bench failed: " + bench_error);
  c.must(report.errors == 0, "bench saw request errors");
  c.must(report.samples > 1000, "bench produced too few samples");
  c.must(responses >= 50, "too few checked responses");
  c.must(generation.load() >= 100, "updater applied too few batches");
  c.note(fmt(seconds_since(t0), 3) + "s");
  return c;
}

// ---------------------------------------------------------------------------
// C10. Format round-trips: bundles, dictionary and both index files are
// bit-exact through save -> load -> save; corrupted files raise structured
// errors instead of crashing.

Criterion c10_formats() {
  Criterion c;
  auto t0 = Clock::now();
  testutil::TempDir tmp;

  Model model = init_model(testutil::toy_spec(), 17, 0.3f);
  auto [qb, mb, cb] = split(model, ModelVersion{9, "fmt"});

  auto slurp = [](const fs::path& p) { return read_file(p.string()); };
  auto same_files = [&](const fs::path& a, const fs::path& b, const char* name) {
    for (const char* f : {"manifest.json", "weights.bin"}) {
      c.must(slurp(a / f) == slurp(b / f),
             std::string(name) + "/" + f + " not bit-exact after reload");
    }
  };

  save_bundle(qb, tmp.sub("q1"));
  save_bundle(load_query_arm_bundle(tmp.sub("q1")), tmp.sub("q2"));
  same_files(tmp.sub("q1"), tmp.sub("q2"), "query");
  save_bundle(mb, tmp.sub("m1"));
  save_bundle(load_member_arm_bundle(tmp.sub("m1")), tmp.sub("m2"));
  same_files(tmp.sub("m1"), tmp.sub("m2"), "member");
  save_bundle(cb, tmp.sub("c1"));
  save_bundle(load_cross_bundle(tmp.sub("c1")), tmp.sub("c2"));
  same_files(tmp.sub("c1"), tmp.sub("c2"), "cross");

  // Dictionary and index built from a small corpus.
  SyntheticConfig cfg;
  cfg.seed = 5;
  cfg.n_members = 120;
  cfg.n_clusters = 4;
  cfg.synonym_clusters = 1;
  cfg.queries_per_cluster = 2;
  cfg.noise_words = cfg.noise_skills = cfg.noise_titles = 20;
  cfg.locations = 3;
  SyntheticOutput corpus = gen_synthetic(cfg);
  Model big = init_model(make_default_model_spec(corpus.vocab), 5);
  auto [qb2, mb2, cb2] = split(big, ModelVersion{2, "fmt"});

  EmbeddingDictionary dict =
      build_dictionary(qb2, corpus.vocab, corpus.counts, DictBuildOptions{});
  save_dictionary(dict, tmp.sub("d1.embd"));
  save_dictionary(load_dictionary(tmp.sub("d1.embd")), tmp.sub("d2.embd"));
  c.must(slurp(tmp.sub("d1.embd")) == slurp(tmp.sub("d2.embd")), "dictionary not bit-exact");

  auto vectors = compute_member_vectors(mb2, corpus.members, corpus.vocab, 32);
  auto shards = build_shards(corpus.members, vectors, 1, ModelVersion{2, "fmt"}, kQuantInt8);
  fs::create_directories(tmp.sub("i1"));
  fs::create_directories(tmp.sub("i2"));
  write_shard(shards[0], tmp.sub("i1"));
  ShardSnapshot snap = load_shard(tmp.sub("i1"), 0);
  ShardIndex reloaded{snap.shard_id(), snap.base->forward, snap.base->inverted};
  write_shard(reloaded, tmp.sub("i2"));
  for (const char* f : {"forward.fwdx", "inverted.invx"}) {
    c.must(slurp(tmp.sub("i1") + "/" + f) == slurp(tmp.sub("i2") + "/" + f),
           std::string(f) + " not bit-exact after reload");
  }

  // Corruption: truncated and bit-flipped copies must raise typed errors.
  size_t corrupted = 0;
  auto expect_error = [&](const std::string& what, const std::function<void()>& load) {
    try {
      load();
      c.must(false, what + ": corrupted file loaded without error");
    } catch (const Error&) {
      ++corrupted;
    } catch (const std::exception& e) {
      c.must(false, what + ": untyped exception " + std::string(e.what()));
    }
  };
  auto damage = [&](const std::string& victim, const std::string& out) {
    std::string bytes = slurp(victim);
    std::string trunc = bytes.substr(0, bytes.size() / 2);
    write_file_atomic(out, trunc);
    std::string flipped = bytes;
    for (size_t i = 0; i < std::min<size_t>(8, flipped.size()); ++i) flipped[i] ^= 0x5a;
    write_file_atomic(out + ".flip", flipped);
  };

  // weights.bin is raw f32 payload (no checksum by design), so bundle
  // corruption is structural: truncation, trailing bytes, manifest damage.
  fs::create_directories(tmp.sub("qx"));
  std::string blob = slurp(tmp.sub("q1") + "/weights.bin");
  std::string manifest = slurp(tmp.sub("q1") + "/manifest.json");
  fs::copy_file(tmp.sub("q1") + "/manifest.json", tmp.sub("qx") + "/manifest.json");
  write_file_atomic(tmp.sub("qx") + "/weights.bin", blob.substr(0, blob.size() / 2));
  expect_error("bundle truncated weights", [&] { load_query_arm_bundle(tmp.sub("qx")); });
  write_file_atomic(tmp.sub("qx") + "/weights.bin", blob + "junk");
  expect_error("bundle trailing bytes", [&] { load_query_arm_bundle(tmp.sub("qx")); });
  write_file_atomic(tmp.sub("qx") + "/weights.bin", blob);
  {
    nlohmann::json tampered = nlohmann::json::parse(manifest);
    tampered["tensors"][0]["shape"][0] = tampered["tensors"][0]["shape"][0].get<uint32_t>() + 1;
    write_file_atomic(tmp.sub("qx") + "/manifest.json", tampered.dump(2) + "\n");
    expect_error("bundle shape mismatch", [&] { load_query_arm_bundle(tmp.sub("qx")); });
    tampered = nlohmann::json::parse(manifest);
    tampered["version_id"] = 0;
    write_file_atomic(tmp.sub("qx") + "/manifest.json", tampered.dump(2) + "\n");
    expect_error("bundle version 0", [&] { load_query_arm_bundle(tmp.sub("qx")); });
  }
  write_file_atomic(tmp.sub("qx") + "/manifest.json", "not json {");
  expect_error("bundle garbled manifest", [&] { load_query_arm_bundle(tmp.sub("qx")); });

  damage(tmp.sub("d1.embd"), tmp.sub("dx.embd"));
  expect_error("dictionary truncated", [&] { load_dictionary(tmp.sub("dx.embd")); });
  expect_error("dictionary flipped", [&] { load_dictionary(tmp.sub("dx.embd") + ".flip"); });

  fs::create_directories(tmp.sub("ix"));
  damage(tmp.sub("i1") + "/forward.fwdx", tmp.sub("ix") + "/forward.fwdx");
  fs::copy_file(tmp.sub("i1") + "/inverted.invx", tmp.sub("ix") + "/inverted.invx");
  expect_error("forward index truncated", [&] { load_shard(tmp.sub("ix"), 0); });
  fs::copy_file(fs::path(tmp.sub("ix")) / "forward.fwdx.flip", fs::path(tmp.sub("ix")) / "forward.fwdx",
                fs::copy_options::overwrite_existing);
  expect_error("forward index flipped", [&] { load_shard(tmp.sub("ix"), 0); });
  fs::copy_file(tmp.sub("i1") + "/forward.fwdx", fs::path(tmp.sub("ix")) / "forward.fwdx",
                fs::copy_options::overwrite_existing);
  damage(tmp.sub("i1") + "/inverted.invx", tmp.sub("ix") + "/inverted.invx2");
  fs::copy_file(fs::path(tmp.sub("ix")) / "inverted.invx2", fs::path(tmp.sub("ix")) / "inverted.invx",
                fs::copy_options::overwrite_existing);
  expect_error("inverted index truncated", [&] { load_shard(tmp.sub("ix"), 0); });

  c.note("3 bundles, dictionary, 2 index files bit-exact; " + std::to_string(corrupted) +
         " corruptions raised typed errors");
  c.note(fmt(seconds_since(t0), 3) + "s");
  return c;
}

}  // namespace

int main() {
  struct Entry {
    const char* id;
    const char* name;
    Criterion (*fn)();
  };
  const Entry entries[] = {
      {"C1", "split equivalence", c1_split_equivalence},
      {"C2", "precision lift", c2_precision_lift},
      {"C3", "query-arm latency", c3_query_arm_latency},
      {"C4", "searcher scoring budget", c4_scoring_budget},
      {"C5", "shard invariance", c5_shard_invariance},
      {"C6", "gradient correctness", c6_gradients},
      {"C7", "quantization bound", c7_quantization},
      {"C8", "training sanity", c8_training_sanity},
      {"C9", "snapshot isolation", c9_snapshot_isolation},
      {"C10", "format round-trips", c10_formats},
  };

  int passed = 0;
  int total = 0;
  for (const Entry& e : entries) {
    ++total;
    Criterion c;
    try {
      c = e.fn();
    } catch (const std::exception& ex) {
      c.ok = false;
      c.fail = std::string("exception: ") + ex.what();
    }
    if (c.ok) ++passed;
    std::printf("%-4s %-26s %s  %s\n", e.id, e.name, c.ok ? "PASS" : "FAIL", c.detail().c_str());
    std::fflush(stdout);
  }
  std::printf("acceptance: %d/%d criteria passed\n", passed, total);
  return passed == total ? 0 : 1;
}
