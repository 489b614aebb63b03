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

#include "splitrank/train.hpp"

#include <cmath>
#include <numeric>

#include "nn_kernels.hpp"
#include "splitrank/rng.hpp"

namespace splitrank {

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {  // log(1 + exp(x)), overflow-safe
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// Captured activations of one arm pass, enough to run the backward pass.
struct ArmTrace {
  std::vector<float> aggregate;
  std::vector<std::vector<float>> pre;
  std::vector<std::vector<float>> post;
  std::vector<float> output() const { return post.empty() ? aggregate : post.back(); }
};

struct CrossTrace {
  std::vector<std::vector<float>> pre;
  std::vector<std::vector<float>> post;
};

void run_arm(const ArmRef& arm, const FieldInputs& inputs, ArmTrace& trace) {
  detail::arm_forward<float>(arm, inputs, &trace.pre, &trace.post, &trace.aggregate);
}

// d(post)/d(pre) for one unit.
float act_grad(Activation act, float pre, float post) {
  if (act == Activation::kTanh) return 1.0f - post * post;
  return pre > 0.0f ? 1.0f : 0.0f;
}

// Backward through a dense stack. d_out is the gradient at the stack output;
// returns the gradient at the stack input and accumulates into grads.
std::vector<float> dense_backward(const TensorStore& weights, TensorStore& grads,
                                  const std::string& prefix, size_t layers, Activation act,
                                  bool linear_last, const std::vector<float>& input,
                                  const std::vector<std::vector<float>>& pre,
                                  const std::vector<std::vector<float>>& post,
                                  std::vector<float> d_out) {
  for (size_t layer = layers; layer-- > 0;) {
    const Tensor& w = weights.get(dense_weight_name(prefix, layer));
    Tensor& gw = grads.get_mut(dense_weight_name(prefix, layer));
    Tensor& gb = grads.get_mut(dense_bias_name(prefix, layer));
    uint32_t out_dim = w.shape[0];
    uint32_t in_dim = w.shape[1];
    const std::vector<float>& x = layer == 0 ? input : post[layer - 1];
    bool linear = linear_last && layer + 1 == layers;

    std::vector<float> d_pre(out_dim);
    for (uint32_t o = 0; o < out_dim; ++o) {
      float g = linear ? 1.0f : act_grad(act, pre[layer][o], post[layer][o]);
      d_pre[o] = d_out[o] * g;
    }
    std::vector<float> d_in(in_dim, 0.0f);
    for (uint32_t o = 0; o < out_dim; ++o) {
      const float* wrow = w.data.data() + static_cast<size_t>(o) * in_dim;
      float* gwrow = gw.data.data() + static_cast<size_t>(o) * in_dim;
      float dp = d_pre[o];
      gb.data[o] += dp;
      for (uint32_t i = 0; i < in_dim; ++i) {
        gwrow[i] += dp * x[i];
        d_in[i] += wrow[i] * dp;
      }
    }
    d_out = std::move(d_in);
  }
  return d_out;
}

void arm_backward(const ArmRef& arm, TensorStore& grads, const FieldInputs& inputs,
                  const ArmTrace& trace, std::vector<float> d_out) {
  std::vector<float> d_agg =
      dense_backward(*arm.weights, grads, arm.prefix, arm.spec->hidden_dims.size(),
                     arm.spec->activation, /*linear_last=*/false, trace.aggregate, trace.pre,
                     trace.post, std::move(d_out));
  size_t offset = 0;
  for (const auto& f : arm.spec->fields) {
    const std::vector<uint32_t>& tokens = inputs.at(f.field_id);
    Tensor& gt = grads.get_mut(embed_tensor_name(arm.prefix, f.field_id));
    if (!tokens.empty()) {
      float scale = f.pooling == Pooling::kMean ? 1.0f / static_cast<float>(tokens.size()) : 1.0f;
      for (uint32_t tok : tokens) {
        float* grow = gt.data.data() + static_cast<size_t>(tok) * f.embed_dim;
        for (uint32_t d = 0; d < f.embed_dim; ++d) grow[d] += scale * d_agg[offset + d];
      }
    }
    offset += f.embed_dim;
  }
}

// Gradient of cosine(q, m) w.r.t. both inputs. Matches the forward's
// zero-vector convention: score 0, gradient 0.
void cosine_backward(const std::vector<float>& q, const std::vector<float>& m, float d_score,
                     std::vector<float>& dq, std::vector<float>& dm) {
  float dot = 0.0f, nq2 = 0.0f, nm2 = 0.0f;
  for (size_t i = 0; i < q.size(); ++i) {
    dot += q[i] * m[i];
    nq2 += q[i] * q[i];
    nm2 += m[i] * m[i];
  }
  dq.assign(q.size(), 0.0f);
  dm.assign(m.size(), 0.0f);
  if (nq2 == 0.0f || nm2 == 0.0f) return;
  float nq = std::sqrt(nq2), nm = std::sqrt(nm2);
  float inv = 1.0f / (nq * nm);
  float cos = dot * inv;
  for (size_t i = 0; i < q.size(); ++i) {
    dq[i] = d_score * (m[i] * inv - cos * q[i] / nq2);
    dm[i] = d_score * (q[i] * inv - cos * m[i] / nm2);
  }
}

struct PairForward {
  ArmTrace tq, tp, tn;
  std::vector<float> qvec, pvec, nvec;
  CrossTrace cp, cn;
  float s_pos = 0.0f, s_neg = 0.0f;
};

PairForward forward_pair(const Model& model, const TrainExample& ex) {
  PairForward f;
  ArmRef qa = query_arm_ref(model);
  ArmRef ma = member_arm_ref(model);
  run_arm(qa, ex.query, f.tq);
  run_arm(ma, ex.positive, f.tp);
  run_arm(ma, ex.negative, f.tn);
  f.qvec = f.tq.output();
  f.pvec = f.tp.output();
  f.nvec = f.tn.output();
  CrossRef cr = cross_ref(model);
  f.s_pos = detail::cross_score<float>(cr, f.qvec, f.pvec, &f.cp.pre, &f.cp.post);
  f.s_neg = detail::cross_score<float>(cr, f.qvec, f.nvec, &f.cn.pre, &f.cn.post);
  return f;
}

double pair_loss(float s_pos, float s_neg, const TrainOptions& opts, double& d_pos, double& d_neg) {
  if (opts.objective == Objective::kPointwiseSigmoid) {
    d_pos = -sigmoid(-static_cast<double>(s_pos));
    d_neg = sigmoid(static_cast<double>(s_neg));
    return softplus(-s_pos) + softplus(s_neg);
  }
  double d = static_cast<double>(s_pos) - static_cast<double>(s_neg) - opts.margin;
  double dd = -sigmoid(-d);
  d_pos = dd;
  d_neg = -dd;
  return softplus(-d);
}

// Backprop one (score gradient) through the cross into both arms. d_member
// goes to `member_inputs`'s trace; the query gradient accumulates into dq_sum
// because both pair scores share the query pass.
void backward_score(const Model& model, TensorStore& grads, const PairForward& f,
                    const ArmTrace& tm, const FieldInputs& member_inputs,
                    const std::vector<float>& mvec, const CrossTrace& ct, float d_score,
                    std::vector<float>& dq_sum) {
  const CrossSpec& cross = model.spec.cross;
  std::vector<float> dq, dm;
  if (cross.kind == CrossKind::kCosine) {
    cosine_backward(f.qvec, mvec, d_score, dq, dm);
  } else {
    std::vector<float> x;
    x.reserve(f.qvec.size() + mvec.size());
    x.insert(x.end(), f.qvec.begin(), f.qvec.end());
    x.insert(x.end(), mvec.begin(), mvec.end());
    std::vector<float> d_x =
        dense_backward(model.weights, grads, "cross", cross.hidden_dims.size(), cross.activation,
                       /*linear_last=*/true, x, ct.pre, ct.post, {d_score});
    dq.assign(d_x.begin(), d_x.begin() + static_cast<long>(f.qvec.size()));
    dm.assign(d_x.begin() + static_cast<long>(f.qvec.size()), d_x.end());
  }
  for (size_t i = 0; i < dq.size(); ++i) dq_sum[i] += dq[i];
  arm_backward(member_arm_ref(model), grads, member_inputs, tm, std::move(dm));
}

// Loss and gradient of one example; gradient accumulates into `grads`.
double example_backward(const Model& model, const TrainExample& ex, const TrainOptions& opts,
                        TensorStore& grads) {
  PairForward f = forward_pair(model, ex);
  double d_pos, d_neg;
  double loss = pair_loss(f.s_pos, f.s_neg, opts, d_pos, d_neg);
  std::vector<float> dq_sum(f.qvec.size(), 0.0f);
  backward_score(model, grads, f, f.tp, ex.positive, f.pvec, f.cp, static_cast<float>(d_pos), dq_sum);
  backward_score(model, grads, f, f.tn, ex.negative, f.nvec, f.cn, static_cast<float>(d_neg), dq_sum);
  arm_backward(query_arm_ref(model), grads, ex.query, f.tq, std::move(dq_sum));
  return loss;
}

}  // namespace

double example_loss(const Model& model, const TrainExample& ex, const TrainOptions& opts) {
  PairForward f = forward_pair(model, ex);
  double d_pos, d_neg;
  return pair_loss(f.s_pos, f.s_neg, opts, d_pos, d_neg);
}

double pairwise_accuracy(const Model& model, const std::vector<TrainExample>& dataset) {
  if (dataset.empty()) return 0.0;
  size_t correct = 0;
  for (const auto& ex : dataset) {
    PairForward f = forward_pair(model, ex);
    if (f.s_pos > f.s_neg) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

TrainResult train(Model& model, const std::vector<TrainExample>& dataset, const TrainOptions& opts) {
  if (dataset.empty()) throw InputError("train: dataset is empty");
  if (opts.lr < 0.0f) throw InputError("train: lr must be >= 0");
  if (opts.batch_size < 1) throw InputError("train: batch_size must be >= 1");

  Rng rng(opts.seed);
  std::vector<size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), size_t{0});

  TrainResult result;
  TensorStore grads = make_zero_weights(model.spec);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(opts.batch_size)) {
      size_t end = std::min(order.size(), start + static_cast<size_t>(opts.batch_size));
      for (auto& t : grads.tensors_mut()) std::fill(t.data.begin(), t.data.end(), 0.0f);
      for (size_t i = start; i < end; ++i) {
        epoch_loss += example_backward(model, dataset[order[i]], opts, grads);
      }
      float step = opts.lr / static_cast<float>(end - start);
      for (size_t t = 0; t < grads.tensors().size(); ++t) {
        const auto& g = grads.tensors()[t].data;
        auto& w = model.weights.tensors_mut()[t].data;
        for (size_t i = 0; i < g.size(); ++i) w[i] -= step * g[i];
      }
    }
    epoch_loss /= static_cast<double>(dataset.size());
    if (!std::isfinite(epoch_loss)) {
      throw TrainingError("non-finite loss at epoch " + std::to_string(epoch));
    }
    result.epoch_loss.push_back(epoch_loss);
  }
  return result;
}

namespace {

// Gradients smaller than this are below what float32 backprop can resolve
// (round-off from ~0.1-scale intermediates is ~1e-8 absolute); comparing
// them to the difference quotient measures noise, not correctness.
constexpr double kGradDenomFloor = 1e-5;

}  // namespace

double grad_check(Model& model, const TrainExample& ex, double epsilon, const TrainOptions& opts,
                  size_t min_samples) {
  if (epsilon < 1e-6 || epsilon > 1e-3) throw InputError("grad_check: epsilon outside [1e-6, 1e-3]");

  TensorStore grads = make_zero_weights(model.spec);
  example_backward(model, ex, opts, grads);

  bool relu_arms = model.spec.query_arm.activation == Activation::kRelu ||
                   model.spec.member_arm.activation == Activation::kRelu;
  bool relu_cross = model.spec.cross.kind == CrossKind::kDenseCross &&
                    model.spec.cross.activation == Activation::kRelu &&
                    model.spec.cross.hidden_dims.size() > 1;
  bool watch_kinks = relu_arms || relu_cross;

  // Double-precision loss for the difference quotient. When the model has
  // relu layers, also capture the sign pattern of their preactivations: a
  // quotient whose two evaluations land on opposite sides of a kink does
  // not estimate the derivative and must be discarded.
  auto loss_fp64 = [&](const Model& mdl, std::vector<uint8_t>* signs) -> double {
    ArmRef qa = query_arm_ref(mdl);
    ArmRef ma = member_arm_ref(mdl);
    std::vector<std::vector<double>> pre_q, pre_p, pre_n, pre_cp, pre_cn;
    std::vector<double> q = detail::arm_forward<double>(qa, ex.query, signs ? &pre_q : nullptr);
    std::vector<double> p = detail::arm_forward<double>(ma, ex.positive, signs ? &pre_p : nullptr);
    std::vector<double> n = detail::arm_forward<double>(ma, ex.negative, signs ? &pre_n : nullptr);
    CrossRef cr = cross_ref(mdl);
    double sp = detail::cross_score<double>(cr, q, p, signs ? &pre_cp : nullptr);
    double sn = detail::cross_score<double>(cr, q, n, signs ? &pre_cn : nullptr);
    if (signs) {
      auto push = [&](const std::vector<std::vector<double>>& pres, Activation act,
                      bool skip_last_linear) {
        if (act != Activation::kRelu) return;
        size_t layers = pres.size() - (skip_last_linear && !pres.empty() ? 1 : 0);
        for (size_t l = 0; l < layers; ++l) {
          for (double v : pres[l]) signs->push_back(v > 0.0 ? 1 : 0);
        }
      };
      push(pre_q, mdl.spec.query_arm.activation, false);
      push(pre_p, mdl.spec.member_arm.activation, false);
      push(pre_n, mdl.spec.member_arm.activation, false);
      push(pre_cp, mdl.spec.cross.activation, true);
      push(pre_cn, mdl.spec.cross.activation, true);
    }
    if (opts.objective == Objective::kPointwiseSigmoid) return softplus(-sp) + softplus(sn);
    return softplus(-(sp - sn - opts.margin));
  };

  size_t total = model.weights.total_params();
  size_t samples = std::min(total, std::max(min_samples, size_t{50}));
  Rng rng(0x6ad5eedULL);

  double max_rel = 0.0;
  std::vector<uint8_t> signs_plus, signs_minus;
  for (size_t s = 0; s < samples; ++s) {
    size_t flat = total == samples ? s : rng.below(total);
    size_t t = 0;
    while (flat >= model.weights.tensors()[t].data.size()) {
      flat -= model.weights.tensors()[t].data.size();
      ++t;
    }
    float& w = model.weights.tensors_mut()[t].data[flat];
    float saved = w;
    float wp = static_cast<float>(static_cast<double>(saved) + epsilon);
    float wm = static_cast<float>(static_cast<double>(saved) - epsilon);
    signs_plus.clear();
    signs_minus.clear();
    w = wp;
    double lp = loss_fp64(model, watch_kinks ? &signs_plus : nullptr);
    w = wm;
    double lm = loss_fp64(model, watch_kinks ? &signs_minus : nullptr);
    w = saved;
    if (watch_kinks && signs_plus != signs_minus) continue;
    double numeric = (lp - lm) / (static_cast<double>(wp) - static_cast<double>(wm));
    double analytic = static_cast<double>(grads.tensors()[t].data[flat]);
    double denom = std::max({std::abs(analytic), std::abs(numeric), kGradDenomFloor});
    double rel = std::abs(analytic - numeric) / denom;
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace splitrank
