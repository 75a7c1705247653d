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

#ifndef CAUSAL_LOSS_HPP_
#define CAUSAL_LOSS_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "causal/matrix.hpp"

namespace causal {

enum class Similarity { kDot, kCosine };

std::string to_string(Similarity s);
Similarity parse_similarity(std::string_view s);

// Weight of the two semantic-preservation terms and the similarity used by
// every term. There is no temperature: logits are raw similarities.
struct LossConfig {
  double beta = 1.0;
  Similarity similarity = Similarity::kDot;
};

struct LossOutput {
  double value = 0.0;               // mean of per_example
  Matrix grad_q;                    // d value / d queries
  std::vector<double> per_example;  // -log softmax at the diagonal
};

// Dot: u.v. Cosine: u.v / (|u||v|), or 0 when either vector is zero.
double similarity(Similarity kind, std::span<const double> u, std::span<const double> v);

// out += scale * d similarity(u, v) / du
void add_similarity_grad(Similarity kind, std::span<const double> u, std::span<const double> v,
                         double scale, std::span<double> out);

// In-batch softmax cross-entropy: row i of `queries` should score highest
// against row i of `keys`, every other key row acting as a negative. Keys are
// treated as constants (no key gradient).
LossOutput inbatch_softmax_loss(const Matrix& queries, const Matrix& keys, Similarity kind);

// The four-term objective over one aligned batch:
//   causal_cause   = loss(cause_out,  effect_sem)
//   causal_effect  = loss(effect_out, cause_sem)
//   semantic_cause = loss(cause_out,  cause_sem)
//   semantic_effect= loss(effect_out, effect_sem)
//   value = causal_cause + causal_effect + beta * (semantic_cause + semantic_effect)
// The *_sem batches come from the frozen encoder and receive no gradient.
struct TotalLossOutput {
  double value = 0.0;
  LossOutput causal_cause;
  LossOutput causal_effect;
  LossOutput semantic_cause;
  LossOutput semantic_effect;
  Matrix grad_cause;   // d value / d cause_out
  Matrix grad_effect;  // d value / d effect_out
};

TotalLossOutput total_loss(const Matrix& cause_out, const Matrix& effect_out,
                           const Matrix& cause_sem, const Matrix& effect_sem,
                           const LossConfig& cfg);

}  // namespace causal

#endif  // CAUSAL_LOSS_HPP_
