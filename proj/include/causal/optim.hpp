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

#ifndef CAUSAL_OPTIM_HPP_
#define CAUSAL_OPTIM_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "causal/encoder.hpp"
#include "causal/matrix.hpp"

namespace causal {

struct AdamWConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

// First/second moments for each parameter group of one encoder.
struct OptimizerState {
  Matrix m_embedding, v_embedding;
  Matrix m_projection, v_projection;
  std::vector<double> m_bias, v_bias;
  std::int64_t step = 0;

  OptimizerState() = default;
  explicit OptimizerState(const EncoderParams& shape);
};

// One decoupled-weight-decay Adam update on a flat parameter group; `step` is
// the 1-based step number used for bias correction.
void adamw_update(std::span<double> w, std::span<const double> g, std::span<double> m,
                  std::span<double> v, std::int64_t step, const AdamWConfig& cfg);

// Increments state.step and updates every group. Gradients are checked for
// NaN/Inf before anything is modified.
void adamw_step(EncoderParams& params, const ParamGrads& grads, OptimizerState& state,
                const AdamWConfig& cfg);

}  // namespace causal

#endif  // CAUSAL_OPTIM_HPP_
