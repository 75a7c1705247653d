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

#include "causal/optim.hpp"

#include <cmath>

#include "causal/error.hpp"

namespace causal {

OptimizerState::OptimizerState(const EncoderParams& shape)
    : m_embedding(shape.embedding.rows(), shape.embedding.cols()),
      v_embedding(shape.embedding.rows(), shape.embedding.cols()),
      m_projection(shape.projection.rows(), shape.projection.cols()),
      v_projection(shape.projection.rows(), shape.projection.cols()),
      m_bias(shape.bias.size()),
      v_bias(shape.bias.size()) {}

void adamw_update(std::span<double> w, std::span<const double> g, std::span<double> m,
                  std::span<double> v, std::int64_t step, const AdamWConfig& cfg) {
  const double t = static_cast<double>(step);
  const double m_correction = 1.0 - std::pow(cfg.beta1, t);
  const double v_correction = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < w.size(); ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double m_hat = m[i] / m_correction;
    const double v_hat = v[i] / v_correction;
    w[i] -= cfg.learning_rate * (m_hat / (std::sqrt(v_hat) + cfg.eps) + cfg.weight_decay * w[i]);
  }
}

void adamw_step(EncoderParams& params, const ParamGrads& grads, OptimizerState& state,
                const AdamWConfig& cfg) {
  if (grads.embedding.rows() != params.embedding.rows() ||
      grads.embedding.cols() != params.embedding.cols() ||
      grads.projection.rows() != params.projection.rows() ||
      grads.projection.cols() != params.projection.cols() ||
      grads.bias.size() != params.bias.size() ||
      state.m_embedding.size() != params.embedding.size() ||
      state.m_projection.size() != params.projection.size() ||
      state.m_bias.size() != params.bias.size()) {
    throw ConfigError("adamw_step: gradient/state shapes do not match parameters");
  }
  if (!all_finite(grads.embedding.flat())) throw NumericError("non-finite gradient in 'embedding'");
  if (!all_finite(grads.projection.flat())) throw NumericError("non-finite gradient in 'projection'");
  if (!all_finite(grads.bias)) throw NumericError("non-finite gradient in 'bias'");

  ++state.step;
  adamw_update(params.embedding.flat(), grads.embedding.flat(), state.m_embedding.flat(),
               state.v_embedding.flat(), state.step, cfg);
  adamw_update(params.projection.flat(), grads.projection.flat(), state.m_projection.flat(),
               state.v_projection.flat(), state.step, cfg);
  adamw_update(params.bias, grads.bias, state.m_bias, state.v_bias, state.step, cfg);
}

}  // namespace causal
