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

#include "splitrank/quantize.hpp"

#include <cmath>
#include <cstdlib>

#include "splitrank/error.hpp"

namespace splitrank {

QuantizedVector quantize(const std::vector<float>& v) {
  float max_abs = 0.0f;
  for (float x : v) {
    if (!std::isfinite(x)) throw InputError("quantize: non-finite input");
    max_abs = std::max(max_abs, std::fabs(x));
  }
  QuantizedVector qv;
  qv.values.resize(v.size(), 0);
  if (max_abs == 0.0f) return qv;  // scale 0, all-zero codes
  qv.scale = max_abs / 127.0f;
  for (size_t i = 0; i < v.size(); ++i) {
    float q = std::round(v[i] / qv.scale);
    if (q > 127.0f) q = 127.0f;
    if (q < -127.0f) q = -127.0f;
    qv.values[i] = static_cast<int8_t>(q);
  }
  return qv;
}

std::vector<float> dequantize(const QuantizedVector& qv) {
  std::vector<float> out(qv.values.size());
  for (size_t i = 0; i < qv.values.size(); ++i) {
    out[i] = qv.scale * static_cast<float>(qv.values[i]);
  }
  return out;
}

}  // namespace splitrank
