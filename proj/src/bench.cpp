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

#include "splitrank/bench.hpp"

#include <chrono>
#include <sstream>
#include <thread>

#include "splitrank/binio.hpp"
#include "splitrank/error.hpp"
#include "splitrank/net.hpp"

namespace splitrank {

using nlohmann::json;

std::vector<std::string> load_request_lines(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(line);
  }
  if (out.empty()) throw InputError(path + ": no request lines");
  return out;
}

json bench_report_to_json(const BenchReport& r) {
  json phases = json::object();
  for (const auto& [name, p] : r.trace_phases) {
    phases[name] = json{{"p50", p.p50}, {"p90", p.p90}, {"p99", p.p99}};
  }
  return json{{"samples", r.samples},
              {"errors", r.errors},
              {"duration_s", r.duration_s},
              {"throughput_rps", r.throughput_rps},
              {"round_trip_us",
               {{"p50", r.round_trip_us.p50}, {"p90", r.round_trip_us.p90}, {"p99", r.round_trip_us.p99}}},
              {"trace_phases", std::move(phases)}};
}

BenchReport bench(const std::string& endpoint, const std::vector<std::string>& request_lines,
                  const BenchOptions& opts) {
  if (request_lines.empty()) throw InputError("bench needs at least one request");
  if (opts.concurrency == 0) throw InputError("concurrency must be >= 1");

  // Fail fast if the target is down instead of reporting a zero-sample run.
  { LineClient probe(endpoint, opts.timeout_ms); }

  using clock = std::chrono::steady_clock;
  struct WorkerResult {
    std::vector<uint64_t> round_trip_us;
    std::map<std::string, std::vector<uint64_t>> trace;
    uint64_t errors = 0;
  };
  std::vector<WorkerResult> results(opts.concurrency);

  auto start = clock::now();
  auto deadline = start + std::chrono::duration_cast<clock::duration>(
                              std::chrono::duration<double>(opts.duration_s));
  std::vector<std::thread> workers;
  workers.reserve(opts.concurrency);
  for (uint32_t w = 0; w < opts.concurrency; ++w) {
    workers.emplace_back([&, w] {
      WorkerResult& res = results[w];
      try {
        LineClient client(endpoint, opts.timeout_ms);
        size_t next = w % request_lines.size();
        while (clock::now() < deadline) {
          auto t0 = clock::now();
          std::string line;
          try {
            line = client.request(request_lines[next]);
          } catch (const std::exception&) {
            ++res.errors;
            break;  // this connection is broken; stop the worker
          }
          auto t1 = clock::now();
          next = (next + 1) % request_lines.size();

          uint64_t us = static_cast<uint64_t>(
              std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count());
          try {
            json j = json::parse(line);
            if (j.value("type", "") == "error") {
              ++res.errors;
              continue;
            }
            res.round_trip_us.push_back(us);
            if (auto it = j.find("trace"); it != j.end() && it->is_object()) {
              for (auto p = it->begin(); p != it->end(); ++p) {
                if (p.value().is_number_unsigned()) {
                  res.trace[p.key()].push_back(p.value().get<uint64_t>());
                }
              }
            }
          } catch (const json::exception&) {
            ++res.errors;
          }
        }
      } catch (const std::exception&) {
        ++res.errors;
      }
    });
  }
  for (auto& t : workers) t.join();
  double elapsed = std::chrono::duration<double>(clock::now() - start).count();

  BenchReport report;
  report.duration_s = elapsed;
  std::map<std::string, std::vector<uint64_t>> trace_all;
  for (const WorkerResult& res : results) {
    report.errors += res.errors;
    report.raw_round_trip_us.insert(report.raw_round_trip_us.end(), res.round_trip_us.begin(),
                                    res.round_trip_us.end());
    for (const auto& [name, samples] : res.trace) {
      trace_all[name].insert(trace_all[name].end(), samples.begin(), samples.end());
    }
  }
  report.samples = report.raw_round_trip_us.size();
  if (report.samples > 0) {
    report.round_trip_us = phase_percentiles(report.raw_round_trip_us);
    report.throughput_rps = static_cast<double>(report.samples) / elapsed;
  }
  for (const auto& [name, samples] : trace_all) {
    report.trace_phases[name] = phase_percentiles(samples);
  }
  return report;
}

}  // namespace splitrank
