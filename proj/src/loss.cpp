// Copyright 2026 The Causal Retrieval Authors
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

#include "causal/loss.hpp"

#include <algorithm>
#include <cmath>

#include "causal/error.hpp"

namespace causal {

std::string to_string(Similarity s) { return s == Similarity::kDot ? "dot" : "cosine"; }

Similarity parse_similarity(std::string_view s) {
  if (s == "dot") return Similarity::kDot;
  if (s == "cosine") return Similarity::kCosine;
  throw ConfigError("unknown similarity '" + std::string(s) + "' (dot|cosine)");
}

double similarity(Similarity kind, std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ConfigError("similarity: dimension mismatch");
  const double uv = dot(u, v);
  if (kind == Similarity::kDot) return uv;
  const double nu = l2_norm(u);
  const double nv = l2_norm(v);
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return uv / (nu * nv);
}

void add_similarity_grad(Similarity kind, std::span<const double> u, std::span<const double> v,
                         double scale, std::span<double> out) {
  if (kind == Similarity::kDot) {
    for (std::size_t i = 0; i < u.size(); ++i) out[i] += scale * v[i];
    return;
  }
  const double nu = l2_norm(u);
  const double nv = l2_norm(v);
  if (nu == 0.0 || nv == 0.0) return;
  // d/du [u.v / (|u||v|)] = v / (|u||v|) - s * u / |u|^2
  const double s = dot(u, v) / (nu * nv);
  const double a = scale / (nu * nv);
  const double b = scale * s / (nu * nu);
  for (std::size_t i = 0; i < u.size(); ++i) out[i] += a * v[i] - b * u[i];
}

LossOutput inbatch_softmax_loss(const Matrix& queries, const Matrix& keys, Similarity kind) {
  const std::size_t batch = queries.rows();
  if (batch == 0) throw ConfigError("in-batch loss needs at least one row");
  if (keys.rows() != batch || keys.cols() != queries.cols()) {
    throw ConfigError("in-batch loss: queries and keys must have the same shape");
  }
  if (!all_finite(queries.flat()) || !all_finite(keys.flat())) {
    throw NumericError("in-batch loss: non-finite input");
  }

  LossOutput out;
  out.grad_q = Matrix(batch, queries.cols());
  out.per_example.resize(batch);
  std::vector<double> logits(batch);
  const double inv_batch = 1.0 / static_cast<double>(batch);
  double total = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    const auto q = queries.row(i);
    for (std::size_t j = 0; j < batch; ++j) logits[j] = similarity(kind, q, keys.row(j));
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < batch; ++j) sum += std::exp(logits[j] - max_logit);
    const double log_z = max_logit + std::log(sum);
    out.per_example[i] = log_z - logits[i];
    total += out.per_example[i];

    // d loss_i / d q_i = sum_j (p_ij - [i == j]) ds_ij/dq_i, scaled by 1/B
    for (std::size_t j = 0; j < batch; ++j) {
      const double p = std::exp(logits[j] - log_z);
      const double coeff = (p - (i == j ? 1.0 : 0.0)) * inv_batch;
      add_similarity_grad(kind, q, keys.row(j), coeff, out.grad_q.row(i));
    }
  }
  out.value = total * inv_batch;
  return out;
}

TotalLossOutput total_loss(const Matrix& cause_out, const Matrix& effect_out,
                           const Matrix& cause_sem, const Matrix& effect_sem,
                           const LossConfig& cfg) {
  const std::size_t batch = cause_out.rows();
  if (effect_out.rows() != batch || cause_sem.rows() != batch || effect_sem.rows() != batch) {
    throw ConfigError("total_loss: batch size mismatch");
  }
  if (!std::isfinite(cfg.beta) || cfg.beta < 0.0) throw ConfigError("beta must be finite and >= 0");

  TotalLossOutput out;
  out.causal_cause = inbatch_softmax_loss(cause_out, effect_sem, cfg.similarity);
  out.causal_effect = inbatch_softmax_loss(effect_out, cause_sem, cfg.similarity);
  out.semantic_cause = inbatch_softmax_loss(cause_out, cause_sem, cfg.similarity);
  out.semantic_effect = inbatch_softmax_loss(effect_out, effect_sem, cfg.similarity);
  out.value = out.causal_cause.value + out.causal_effect.value +
              cfg.beta * (out.semantic_cause.value + out.semantic_effect.value);

  out.grad_cause = out.causal_cause.grad_q;
  out.grad_effect = out.causal_effect.grad_q;
  auto gc = out.grad_cause.flat();
  auto ge = out.grad_effect.flat();
  const auto sc = out.semantic_cause.grad_q.flat();
  const auto se = out.semantic_effect.grad_q.flat();
  for (std::size_t i = 0; i < gc.size(); ++i) {
    gc[i] += cfg.beta * sc[i];
    ge[i] += cfg.beta * se[i];
  }
  return out;
}

}  // namespace causal
