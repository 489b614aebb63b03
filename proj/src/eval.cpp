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

#include "splitrank/eval.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "splitrank/binio.hpp"
#include "splitrank/error.hpp"

namespace splitrank {

using nlohmann::json;

double precision_at_k(const std::vector<uint64_t>& ranked, const std::vector<uint64_t>& relevant,
                      uint32_t k) {
  if (k == 0) throw InputError("k must be >= 1");
  size_t hits = 0;
  size_t depth = std::min<size_t>(k, ranked.size());
  for (size_t i = 0; i < depth; ++i) {
    if (std::binary_search(relevant.begin(), relevant.end(), ranked[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(k);
}

EvalResult evaluate(const std::map<uint32_t, std::vector<uint64_t>>& run,
                    const std::map<uint32_t, std::vector<uint64_t>>& judgments, uint32_t k) {
  EvalResult result;
  double sum = 0.0;
  for (const auto& [qid, ranked] : run) {
    auto it = judgments.find(qid);
    if (it == judgments.end() || it->second.empty()) {
      ++result.skipped;
      continue;
    }
    double p = precision_at_k(ranked, it->second, k);
    result.per_query[qid] = p;
    sum += p;
    ++result.evaluated;
  }
  if (result.evaluated > 0) sum /= static_cast<double>(result.evaluated);
  result.mean_precision = sum;
  return result;
}

std::map<uint32_t, std::vector<uint64_t>> load_run(const std::string& path) {
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
      out[qid] = std::move(uids);
    } catch (const std::exception& e) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void save_run(const std::map<uint32_t, std::vector<uint64_t>>& run, const std::string& path) {
  std::ostringstream out;
  for (const auto& [qid, uids] : run) {
    out << json{{"qid", qid}, {"uids", uids}}.dump() << "\n";
  }
  write_file_atomic(path, out.str());
}

}  // namespace splitrank
