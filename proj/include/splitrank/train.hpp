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

#include "splitrank/nn.hpp"

namespace splitrank {

// One ranking triple in id space: a query with a member that should outrank
// another. positive_uid/negative_uid are carried for the invariant check
// only; the arms never see uids.
struct TrainExample {
  FieldInputs query;
  FieldInputs positive;
  FieldInputs negative;
  uint64_t positive_uid = 0;
  uint64_t negative_uid = 0;
};

enum class Objective : uint8_t {
  kPairwiseLogistic,  // log(1 + exp(-(s+ - s-)))
  kPointwiseSigmoid,  // -log σ(s+) - log(1 - σ(s-))
};

struct TrainOptions {
  float lr = 0.1f;
  int epochs = 10;
  uint64_t seed = 0;
  float margin = 0.0f;  // pairwise only: loss on (s+ - s-) - margin
  int batch_size = 32;
  Objective objective = Objective::kPairwiseLogistic;
};

struct TrainResult {
  std::vector<double> epoch_loss;  // mean training loss per epoch
};

// Mini-batch SGD over the pairwise objective. Mutates model.weights in
// place; single-threaded and bit-reproducible for a fixed seed. Throws
// TrainingError naming the epoch if the loss stops being finite.
TrainResult train(Model& model, const std::vector<TrainExample>& dataset, const TrainOptions& opts);

// Loss of one example under the current weights (no update).
double example_loss(const Model& model, const TrainExample& ex, const TrainOptions& opts);

// Fraction of examples with s(q, m+) > s(q, m-).
double pairwise_accuracy(const Model& model, const std::vector<TrainExample>& dataset);

// Compares the analytic gradient against central finite differences on a
// random sample of at least `min_samples` parameters (all of them when the
// model is smaller). The difference quotient is evaluated in double
// precision on float32-perturbed weights. Samples whose perturbations land
// on opposite sides of a relu kink are discarded (the quotient is not a
// derivative estimate there), and near-zero gradient pairs compare against
// a small floor instead of each other. Returns the max relative error,
// with 0/0 defined as 0.
double grad_check(Model& model, const TrainExample& ex, double epsilon,
                  const TrainOptions& opts = {}, size_t min_samples = 50);

}  // namespace splitrank
