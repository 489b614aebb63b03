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
#include <vector>

namespace splitrank {

// Symmetric per-vector int8 compression: value = scale * int8, with
// scale = max|v_i| / 127. Round-trip error is at most scale/2 per component;
// the zero vector round-trips exactly (scale 0).
struct QuantizedVector {
  float scale = 0.0f;
  std::vector<int8_t> values;
};

QuantizedVector quantize(const std::vector<float>& v);
std::vector<float> dequantize(const QuantizedVector& qv);

}  // namespace splitrank
