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

// Independent forward-pass reimplementation used as a test oracle. Plain
// loops over raw float buffers, double accumulation, no code shared with the
// library kernels.

#pragma once

#include <cmath>
#include <vector>

#include "splitrank/nn.hpp"

namespace oracle {

inline double act(splitrank::Activation a, double x) {
  if (a == splitrank::Activation::kTanh) return std::tanh(x);
  return x > 0.0 ? x : 0.0;
}

inline std::vector<double> pool(const splitrank::Tensor& table,
                                const std::vector<uint32_t>& ids, splitrank::Pooling mode) {
  size_t dim = table.shape[1];
  std::vector<double> out(dim, 0.0);
  for (uint32_t id : ids) {
    for (size_t d = 0; d < dim; ++d) {
      out[d] += static_cast<double>(table.data[static_cast<size_t>(id) * dim + d]);
    }
  }
  if (mode == splitrank::Pooling::kMean && !ids.empty()) {
    for (size_t d = 0; d < dim; ++d) out[d] /= static_cast<double>(ids.size());
  }
  return out;
}

inline std::vector<double> dense(const splitrank::TensorStore& w, const std::string& prefix,
                                 size_t layers, splitrank::Activation a, bool linear_last,
                                 std::vector<double> x) {
  for (size_t l = 0; l < layers; ++l) {
    const splitrank::Tensor& wt = w.get(splitrank::dense_weight_name(prefix, l));
    const splitrank::Tensor& bt = w.get(splitrank::dense_bias_name(prefix, l));
    size_t rows = wt.shape[0];
    size_t cols = wt.shape[1];
    std::vector<double> y(rows, 0.0);
    for (size_t r = 0; r < rows; ++r) {
      double s = static_cast<double>(bt.data[r]);
      for (size_t c = 0; c < cols; ++c) {
        s += static_cast<double>(wt.data[r * cols + c]) * x[c];
      }
      y[r] = (linear_last && l + 1 == layers) ? s : act(a, s);
    }
    x = std::move(y);
  }
  return x;
}

inline std::vector<double> arm(const splitrank::ArmSpec& spec, const splitrank::TensorStore& w,
                               const std::string& prefix, const splitrank::FieldInputs& inputs) {
  std::vector<double> agg;
  for (const auto& f : spec.fields) {
    const splitrank::Tensor& table = w.get(splitrank::embed_tensor_name(prefix, f.field_id));
    std::vector<double> p = pool(table, inputs.at(f.field_id), f.pooling);
    agg.insert(agg.end(), p.begin(), p.end());
  }
  return dense(w, prefix, spec.hidden_dims.size(), spec.activation, false, std::move(agg));
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double cross(const splitrank::ModelSpec& spec, const splitrank::TensorStore& w,
                    const std::vector<double>& q, const std::vector<double>& m) {
  if (spec.cross.kind == splitrank::CrossKind::kCosine) return cosine(q, m);
  std::vector<double> x = q;
  x.insert(x.end(), m.begin(), m.end());
  return dense(w, "cross", spec.cross.hidden_dims.size(), spec.cross.activation, true,
               std::move(x))[0];
}

inline double score(const splitrank::Model& model, const splitrank::FieldInputs& q,
                    const splitrank::FieldInputs& m) {
  std::vector<double> qv = arm(model.spec.query_arm, model.weights, "query", q);
  std::vector<double> mv = arm(model.spec.member_arm, model.weights, "member", m);
  return cross(model.spec, model.weights, qv, mv);
}

}  // namespace oracle
