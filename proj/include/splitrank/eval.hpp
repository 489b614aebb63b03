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

namespace splitrank {

// |relevant ∩ first k of ranked| / k. `relevant` must be sorted.
double precision_at_k(const std::vector<uint64_t>& ranked, const std::vector<uint64_t>& relevant,
                      uint32_t k);

struct EvalResult {
  double mean_precision = 0.0;
  size_t evaluated = 0;
  size_t skipped = 0;  // queries with no judgments
  std::map<uint32_t, double> per_query;
};

// run: qid -> ranked uids. Queries lacking judgments are skipped and
// counted, not averaged in.
EvalResult evaluate(const std::map<uint32_t, std::vector<uint64_t>>& run,
                    const std::map<uint32_t, std::vector<uint64_t>>& judgments, uint32_t k);

// Run files are newline JSON: {"qid": n, "uids": [ranked...]}.
std::map<uint32_t, std::vector<uint64_t>> load_run(const std::string& path);
void save_run(const std::map<uint32_t, std::vector<uint64_t>>& run, const std::string& path);

}  // namespace splitrank
