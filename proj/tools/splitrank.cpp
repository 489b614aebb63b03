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

// Command-line harness tying the pipeline together: generate a corpus,
// train, split, index, serve the three tiers, and run queries, evals and
// benchmarks against them. Every subcommand is a pure function of its flags
// and input files except the serve-* family, which block until SIGINT or
// SIGTERM. Reports go to stdout as JSON, or to --out where offered.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "CLI/CLI.hpp"
#include "nlohmann/json.hpp"

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
#include "splitrank/model.hpp"
#include "splitrank/net.hpp"
#include "splitrank/searcher.hpp"
#include "splitrank/searcher_server.hpp"
#include "splitrank/synthetic.hpp"
#include "splitrank/train.hpp"
#include "splitrank/wire.hpp"

namespace {

using namespace splitrank;
using nlohmann::json;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

// Like parse_endpoint but admits port 0, which binds an ephemeral port; the
// serve commands report the resolved endpoint on stdout.
std::pair<std::string, uint16_t> parse_listen(const std::string& s) {
  size_t colon = s.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw InputError("--listen must be host:port, got: " + s);
  }
  unsigned long port = 0;
  try {
    port = std::stoul(s.substr(colon + 1));
  } catch (const std::exception&) {
    throw InputError("bad port in --listen: " + s);
  }
  if (port > 0xffff) throw InputError("bad port in --listen: " + s);
  return {s.substr(0, colon), static_cast<uint16_t>(port)};
}

void emit(const json& report, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    write_file_atomic(out_path, report.dump(2) + "\n");
  }
}

// Facet flags come as name=token or id=token; names are the synthetic
// corpus fields.
uint16_t facet_field_id(const std::string& name) {
  static const std::map<std::string, uint16_t> kNames = {
      {"text", kTextField},   {"skill", kSkillField},       {"title", kTitleField},
      {"word", kWordField},   {"location", kLocationField},
  };
  if (auto it = kNames.find(name); it != kNames.end()) return it->second;
  try {
    unsigned long id = std::stoul(name);
    if (id == 0 || id > 0xffff) throw InputError("facet field id out of range: " + name);
    return static_cast<uint16_t>(id);
  } catch (const InputError&) {
    throw;
  } catch (const std::exception&) {
    throw InputError("unknown facet field: " + name);
  }
}

std::map<uint16_t, std::vector<std::string>> parse_facets(const std::vector<std::string>& flags) {
  std::map<uint16_t, std::vector<std::string>> facets;
  for (const std::string& f : flags) {
    size_t eq = f.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == f.size()) {
      throw InputError("--facet expects field=token, got: " + f);
    }
    facets[facet_field_id(f.substr(0, eq))].push_back(f.substr(eq + 1));
  }
  return facets;
}

uint8_t scheme_from_string(const std::string& s) {
  if (s == "int8") return kQuantInt8;
  if (s == "none") return kQuantNone;
  throw InputError("unknown quantization scheme: " + s);
}

json vocab_sizes_json(const Vocabulary& vocab) {
  json sizes = json::object();
  for (uint16_t fid : vocab.field_ids()) {
    sizes[std::to_string(fid)] = vocab.size(fid);
  }
  return sizes;
}

void run_server_until_signal(const std::string& endpoint, const std::string& kind, json extra) {
  extra["type"] = "serving";
  extra["kind"] = kind;
  extra["endpoint"] = endpoint;
  std::cout << extra.dump() << std::endl;
  while (!g_stop.load()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

// --- subcommand bodies ---

int cmd_gen_data(const std::string& config_path, uint64_t seed_override, bool seed_given,
                 const std::string& out_dir) {
  SyntheticConfig cfg;
  if (!config_path.empty()) cfg = synthetic_config_from_json_file(config_path);
  if (seed_given) cfg.seed = seed_override;

  SyntheticOutput out = gen_synthetic(cfg);
  std::filesystem::create_directories(out_dir);
  write_synthetic(out, out_dir);

  json report{{"type", "gen-data"},
              {"dir", out_dir},
              {"seed", cfg.seed},
              {"members", out.members.size()},
              {"clusters", cfg.n_clusters},
              {"synonym_clusters", cfg.synonym_clusters},
              {"queries", out.queries.size()},
              {"vocab", vocab_sizes_json(out.vocab)}};
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_train(const std::string& data_dir, const std::string& spec_path, uint64_t seed,
              const std::string& out_dir, const TrainOptions& opts, uint32_t pairs_per_query,
              float init_range, const std::string& label) {
  SyntheticOutput data;
  data.members = ingest_members(data_dir + "/corpus.jsonl");
  data.queries = load_queries(data_dir + "/queries.jsonl");
  data.judgments = load_judgments(data_dir + "/judgments.jsonl");
  data.vocab = Vocabulary::load(data_dir + "/vocab.json");
  std::string spec_file = spec_path.empty() ? data_dir + "/modelspec.json" : spec_path;
  data.model_spec = model_spec_from_json(json::parse(read_file(spec_file)));
  data.model_spec.validate();

  auto pairs = make_training_pairs(data, pairs_per_query, seed);
  auto [train_set, held_out] = split_pairs(std::move(pairs));

  Model model = init_model(data.model_spec, seed, init_range);
  TrainOptions train_opts = opts;
  train_opts.seed = seed;
  TrainResult result = train(model, train_set, train_opts);
  double held_acc = held_out.empty() ? 0.0 : pairwise_accuracy(model, held_out);

  save_model(model, out_dir, label);

  json report{{"type", "train"},
              {"dir", out_dir},
              {"seed", seed},
              {"examples", train_set.size()},
              {"held_out", held_out.size()},
              {"epochs", train_opts.epochs},
              {"epoch_loss", result.epoch_loss},
              {"final_loss", result.epoch_loss.empty() ? 0.0 : result.epoch_loss.back()},
              {"held_out_accuracy", held_acc},
              {"params", model.weights.total_params()}};
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_split(const std::string& model_dir, uint16_t version, std::string label,
              const std::string& out_dir) {
  Model model = load_model(model_dir);
  if (label.empty()) label = "v" + std::to_string(version);
  auto [qb, mb, cb] = split(model, ModelVersion{version, label});

  std::filesystem::create_directories(out_dir);
  save_bundle(qb, out_dir + "/query");
  save_bundle(mb, out_dir + "/member");
  save_bundle(cb, out_dir + "/cross");

  auto params = [](const TensorStore& w) { return w.total_params(); };
  json report{{"type", "split"},
              {"version", version},
              {"label", label},
              {"query", {{"dir", out_dir + "/query"}, {"params", params(qb.weights)}}},
              {"member", {{"dir", out_dir + "/member"}, {"params", params(mb.weights)}}},
              {"cross",
               {{"dir", out_dir + "/cross"},
                {"params", params(cb.weights)},
                {"query_dim", cb.query_dim},
                {"member_dim", cb.member_dim}}}};
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_build_index(const std::string& members_path, const std::string& member_arm_dir,
                    const std::string& vocab_path, uint32_t shards, const std::string& scheme,
                    size_t batch, const std::string& out_dir) {
  std::vector<MemberProfile> profiles = ingest_members(members_path);
  Vocabulary vocab = Vocabulary::load(vocab_path);
  MemberArmBundle bundle = load_member_arm_bundle(member_arm_dir);

  auto dirs = build_index(bundle, profiles, vocab, shards, scheme_from_string(scheme), batch, out_dir);

  json report{{"type", "build-index"},
              {"members", profiles.size()},
              {"shards", dirs},
              {"dim", bundle.spec.output_dim()},
              {"scheme", scheme},
              {"version", bundle.version.version_id}};
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_build_dict(const std::string& query_arm_dir, const std::string& vocab_path,
                   const std::string& counts_path, uint32_t top_k, const std::string& out_path,
                   const std::string& queries_path) {
  QueryArmBundle bundle = load_query_arm_bundle(query_arm_dir);
  Vocabulary vocab = Vocabulary::load(vocab_path);
  TokenCounts counts = load_token_counts(counts_path);

  DictBuildOptions opts;
  if (top_k > 0) opts.default_top_k = top_k;
  EmbeddingDictionary dict = build_dictionary(bundle, vocab, counts, opts);
  save_dictionary(dict, out_path);

  json report{{"type", "build-dict"},
              {"path", out_path},
              {"entries", dict.entry_count()},
              {"bytes", embd_file_size(dict)},
              {"version", dict.version.version_id},
              {"top_k", top_k}};
  if (!queries_path.empty()) {
    std::vector<QueryFeatures> log;
    for (const SyntheticQuery& q : load_queries(queries_path)) {
      log.push_back(parse_query(q.text, q.facets));
    }
    report["coverage"] = coverage(dict, log, kTextField);
  }
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_serve_searcher(const std::string& shard_dir, uint32_t shard_id,
                       const std::string& cross_dir, const std::string& listen) {
  auto [host, port] = parse_listen(listen);
  ShardSnapshot snapshot = load_shard(shard_dir, shard_id);
  CrossBundle cross = load_cross_bundle(cross_dir);
  size_t members = snapshot.base->forward.records.size();
  uint16_t version = snapshot.version();

  SearcherServer server(std::move(snapshot), std::move(cross), host, port);
  server.start();
  run_server_until_signal(server.endpoint(), "searcher",
                          json{{"shard_id", shard_id}, {"members", members}, {"version", version}});
  server.stop();
  return 0;
}

int cmd_serve_broker(const std::string& config_path, const std::string& listen) {
  auto [host, port] = parse_listen(listen);
  BrokerConfig cfg = load_broker_config(config_path);
  BrokerServer server(cfg, host, port);
  server.start();
  run_server_until_signal(server.endpoint(), "broker", json{{"shards", cfg.shards.size()}});
  server.stop();
  return 0;
}

int cmd_serve_frontend(const std::string& config_path, const std::string& listen) {
  auto [host, port] = parse_listen(listen);
  FrontendConfig cfg = load_frontend_config(config_path);
  FrontendServer server(make_frontend(cfg), host, port);
  server.start();
  run_server_until_signal(server.endpoint(), "frontend",
                          json{{"broker", cfg.broker_endpoint},
                               {"version", server.frontend().version_id()}});
  server.stop();
  return 0;
}

int cmd_query(const std::string& frontend, const std::string& text,
              const std::vector<std::string>& facet_flags, uint32_t k,
              const std::string& queries_path, const std::string& run_path, int timeout_ms,
              const std::string& out_path) {
  if (queries_path.empty()) {
    UserSearchRequest req;
    req.text = text;
    req.facets = parse_facets(facet_flags);
    req.k = k;
    std::string line = user_search_request_to_json(req).dump();
    json resp = json::parse(LineClient::request_once(frontend, line, timeout_ms));
    throw_if_error(resp);
    emit(resp, out_path);
    return 0;
  }

  // Batch mode: replay a query file, write a run file for eval.
  if (run_path.empty()) throw InputError("--queries needs --run for the ranked output");
  std::vector<SyntheticQuery> queries = load_queries(queries_path);
  std::map<uint32_t, std::vector<uint64_t>> run;
  LineClient client(frontend, timeout_ms);
  uint64_t degraded_requests = 0;
  for (const SyntheticQuery& q : queries) {
    UserSearchRequest req;
    req.text = q.text;
    req.facets = q.facets;
    req.k = k;
    json resp = json::parse(client.request(user_search_request_to_json(req).dump()));
    UserSearchResponse parsed = user_search_response_from_json(resp);
    if (!parsed.degraded.empty()) ++degraded_requests;
    std::vector<uint64_t>& uids = run[q.qid];
    for (const SearchHit& h : parsed.hits) uids.push_back(h.uid);
  }
  save_run(run, run_path);

  json report{{"type", "query"},
              {"queries", queries.size()},
              {"run", run_path},
              {"k", k},
              {"degraded_requests", degraded_requests}};
  emit(report, out_path);
  return 0;
}

int cmd_eval(const std::string& run_path, const std::string& judgments_path, uint32_t k,
             const std::string& out_path) {
  auto run = load_run(run_path);
  auto judgments = load_judgments(judgments_path);
  EvalResult r = evaluate(run, judgments, k);

  json per_query = json::object();
  for (const auto& [qid, p] : r.per_query) per_query[std::to_string(qid)] = p;
  json report{{"type", "eval"},
              {"k", k},
              {"mean_precision", r.mean_precision},
              {"evaluated", r.evaluated},
              {"skipped", r.skipped},
              {"per_query", std::move(per_query)}};
  emit(report, out_path);
  return 0;
}

int cmd_bench(const std::string& target, const std::string& requests_path, uint32_t concurrency,
              double duration_s, int timeout_ms, const std::string& out_path) {
  BenchOptions opts;
  opts.concurrency = concurrency;
  opts.duration_s = duration_s;
  opts.timeout_ms = timeout_ms;
  BenchReport report = bench(target, load_request_lines(requests_path), opts);
  emit(bench_report_to_json(report), out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  CLI::App app{"split two-tower ranking pipeline"};
  app.require_subcommand(1);

  // gen-data
  std::string gd_config, gd_out;
  uint64_t gd_seed = 0;
  auto* gen_data = app.add_subcommand("gen-data", "generate a synthetic corpus with planted clusters");
  gen_data->add_option("--config", gd_config, "generator config json (defaults apply when omitted)");
  auto* gd_seed_opt = gen_data->add_option("--seed", gd_seed, "override the config seed");
  gen_data->add_option("--out", gd_out, "output directory")->required();

  // train
  std::string tr_data, tr_spec, tr_out, tr_objective = "pairwise", tr_label = "trained";
  uint64_t tr_seed = 7;
  uint32_t tr_pairs = 4;
  float tr_init = 0.05f;
  TrainOptions tr_opts;
  tr_opts.epochs = 20;
  tr_opts.lr = 0.5f;
  auto* train_cmd = app.add_subcommand("train", "train the two-tower model on a generated corpus");
  train_cmd->add_option("--data", tr_data, "gen-data output directory")->required();
  train_cmd->add_option("--spec", tr_spec, "model spec json (default: <data>/modelspec.json)");
  train_cmd->add_option("--seed", tr_seed, "init, sampling and shuffle seed");
  train_cmd->add_option("--out", tr_out, "model output directory")->required();
  train_cmd->add_option("--epochs", tr_opts.epochs, "training epochs")->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr", tr_opts.lr, "learning rate");
  train_cmd->add_option("--batch", tr_opts.batch_size, "mini-batch size")->check(CLI::PositiveNumber);
  train_cmd->add_option("--margin", tr_opts.margin, "pairwise margin");
  train_cmd->add_option("--objective", tr_objective, "pairwise or pointwise")
      ->check(CLI::IsMember({"pairwise", "pointwise"}));
  train_cmd->add_option("--pairs-per-query", tr_pairs, "training pairs sampled per query")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--init-range", tr_init, "uniform init range");
  train_cmd->add_option("--label", tr_label, "version label stored in the model manifest");

  // split
  std::string sp_model, sp_out, sp_label;
  uint16_t sp_version = 1;
  auto* split_cmd = app.add_subcommand("split", "carve a trained model into query/member/cross bundles");
  split_cmd->add_option("--model", sp_model, "trained model directory")->required();
  split_cmd->add_option("--version", sp_version, "bundle version id (>= 1)")
      ->required()
      ->check(CLI::Range(1, 65535));
  split_cmd->add_option("--label", sp_label, "version label (default: v<version>)");
  split_cmd->add_option("--out", sp_out, "bundle output directory")->required();

  // build-index
  std::string bi_members, bi_arm, bi_vocab, bi_out, bi_scheme = "int8";
  uint32_t bi_shards = 1;
  size_t bi_batch = 256;
  auto* build_index_cmd = app.add_subcommand("build-index", "embed members and build shard indexes");
  build_index_cmd->add_option("--members", bi_members, "corpus jsonl")->required();
  build_index_cmd->add_option("--member-arm", bi_arm, "member arm bundle directory")->required();
  build_index_cmd->add_option("--vocab", bi_vocab, "vocabulary json")->required();
  build_index_cmd->add_option("--shards", bi_shards, "shard count")->check(CLI::PositiveNumber);
  build_index_cmd->add_option("--scheme", bi_scheme, "vector payload: int8 or none")
      ->check(CLI::IsMember({"int8", "none"}));
  build_index_cmd->add_option("--batch", bi_batch, "embedding batch size")->check(CLI::PositiveNumber);
  build_index_cmd->add_option("--out", bi_out, "index output directory")->required();

  // build-dict
  std::string bd_arm, bd_vocab, bd_counts, bd_out, bd_queries;
  uint32_t bd_top_k = 0;
  auto* build_dict_cmd = app.add_subcommand("build-dict", "extract the query-side token dictionary");
  build_dict_cmd->add_option("--query-arm", bd_arm, "query arm bundle directory")->required();
  build_dict_cmd->add_option("--vocab", bd_vocab, "vocabulary json")->required();
  build_dict_cmd->add_option("--counts", bd_counts, "token counts json")->required();
  build_dict_cmd->add_option("--top-k", bd_top_k, "entries kept per field (0 = all)");
  build_dict_cmd->add_option("--queries", bd_queries, "query log jsonl for a coverage report");
  build_dict_cmd->add_option("--out", bd_out, "dictionary output path")->required();

  // serve-searcher
  std::string ss_shard, ss_cross, ss_listen;
  uint32_t ss_shard_id = 0;
  auto* serve_searcher = app.add_subcommand("serve-searcher", "serve one shard over tcp");
  serve_searcher->add_option("--shard", ss_shard, "shard directory")->required();
  serve_searcher->add_option("--shard-id", ss_shard_id, "shard id reported in responses");
  serve_searcher->add_option("--cross", ss_cross, "cross bundle directory")->required();
  serve_searcher->add_option("--listen", ss_listen, "host:port (port 0 = ephemeral)")->required();

  // serve-broker
  std::string sb_config, sb_listen;
  auto* serve_broker = app.add_subcommand("serve-broker", "serve the scatter-gather broker");
  serve_broker->add_option("--config", sb_config, "broker config json")->required();
  serve_broker->add_option("--listen", sb_listen, "host:port (port 0 = ephemeral)")->required();

  // serve-frontend
  std::string sf_config, sf_listen;
  auto* serve_frontend = app.add_subcommand("serve-frontend", "serve the query frontend");
  serve_frontend->add_option("--config", sf_config, "frontend config json")->required();
  serve_frontend->add_option("--listen", sf_listen, "host:port (port 0 = ephemeral)")->required();

  // query
  std::string q_frontend, q_text, q_queries, q_run, q_out;
  std::vector<std::string> q_facets;
  uint32_t q_k = 0;
  int q_timeout = 2000;
  auto* query_cmd = app.add_subcommand("query", "send one query, or replay a query file into a run");
  query_cmd->add_option("--frontend", q_frontend, "frontend host:port")->required();
  query_cmd->add_option("--text", q_text, "free-text query");
  query_cmd->add_option("--facet", q_facets, "facet as field=token (repeatable)");
  query_cmd->add_option("--k", q_k, "results per query (0 = frontend default)");
  query_cmd->add_option("--queries", q_queries, "query log jsonl to replay");
  query_cmd->add_option("--run", q_run, "run file to write in batch mode");
  query_cmd->add_option("--timeout-ms", q_timeout, "per-request timeout");
  query_cmd->add_option("--out", q_out, "write the report here instead of stdout");

  // eval
  std::string ev_run, ev_judgments, ev_out;
  uint32_t ev_k = 10;
  auto* eval_cmd = app.add_subcommand("eval", "precision@k of a run against judgments");
  eval_cmd->add_option("--run", ev_run, "run jsonl")->required();
  eval_cmd->add_option("--judgments", ev_judgments, "judgments jsonl")->required();
  eval_cmd->add_option("--k", ev_k, "cutoff")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--out", ev_out, "write the report here instead of stdout");

  // bench
  std::string be_target, be_requests, be_out;
  uint32_t be_concurrency = 8;
  double be_duration = 10.0;
  int be_timeout = 2000;
  auto* bench_cmd = app.add_subcommand("bench", "replay request lines at fixed concurrency");
  bench_cmd->add_option("--target", be_target, "line server host:port")->required();
  bench_cmd->add_option("--requests", be_requests, "request lines file")->required();
  bench_cmd->add_option("--concurrency", be_concurrency, "concurrent connections")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--duration", be_duration, "seconds to run")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--timeout-ms", be_timeout, "per-request timeout");
  bench_cmd->add_option("--out", be_out, "write the report here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_data) return cmd_gen_data(gd_config, gd_seed, gd_seed_opt->count() > 0, gd_out);
    if (*train_cmd) {
      tr_opts.objective =
          tr_objective == "pointwise" ? Objective::kPointwiseSigmoid : Objective::kPairwiseLogistic;
      return cmd_train(tr_data, tr_spec, tr_seed, tr_out, tr_opts, tr_pairs, tr_init, tr_label);
    }
    if (*split_cmd) return cmd_split(sp_model, sp_version, sp_label, sp_out);
    if (*build_index_cmd)
      return cmd_build_index(bi_members, bi_arm, bi_vocab, bi_shards, bi_scheme, bi_batch, bi_out);
    if (*build_dict_cmd)
      return cmd_build_dict(bd_arm, bd_vocab, bd_counts, bd_top_k, bd_out, bd_queries);
    if (*serve_searcher) return cmd_serve_searcher(ss_shard, ss_shard_id, ss_cross, ss_listen);
    if (*serve_broker) return cmd_serve_broker(sb_config, sb_listen);
    if (*serve_frontend) return cmd_serve_frontend(sf_config, sf_listen);
    if (*query_cmd)
      return cmd_query(q_frontend, q_text, q_facets, q_k, q_queries, q_run, q_timeout, q_out);
    if (*eval_cmd) return cmd_eval(ev_run, ev_judgments, ev_k, ev_out);
    if (*bench_cmd)
      return cmd_bench(be_target, be_requests, be_concurrency, be_duration, be_timeout, be_out);
  } catch (const Error& e) {
    std::cerr << json{{"type", "error"}, {"code", e.code()}, {"message", e.what()}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"type", "error"}, {"code", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
