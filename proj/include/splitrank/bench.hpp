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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "splitrank/frontend.hpp"

namespace splitrank {

struct BenchOptions {
  uint32_t concurrency = 8;
  double duration_s = 10.0;
  int timeout_ms = 2000;
};

struct BenchReport {
  uint64_t samples = 0;
  uint64_t errors = 0;
  double duration_s = 0.0;
  double throughput_rps = 0.0;
  PhasePercentiles round_trip_us;
  std::vector<uint64_t> raw_round_trip_us;  // for external percentile checks
  // Server-side trace phases, present when responses carry a trace object.
  std::map<std::string, PhasePercentiles> trace_phases;
};

nlohmann::json bench_report_to_json(const BenchReport& r);

// Replays request lines round-robin at fixed concurrency against a line
// server until the duration elapses. Error responses and transport failures
// count as errors; an unreachable target raises immediately.
BenchReport bench(const std::string& endpoint, const std::vector<std::string>& request_lines,
                  const BenchOptions& opts);

std::vector<std::string> load_request_lines(const std::string& path);

}  // namespace splitrank
