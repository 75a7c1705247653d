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

#ifndef CAUSAL_SRC_ENCODER_DETAIL_HPP_
#define CAUSAL_SRC_ENCODER_DETAIL_HPP_

#include <span>
#include <vector>

#include "causal/encoder.hpp"

namespace causal::detail {

struct Forward {
  std::vector<double> pooled;  // mean embedding
  std::vector<double> pre;     // before normalization
  std::vector<double> out;
  double norm = 0.0;
  std::size_t count = 0;       // non-PAD tokens
  bool normalized = false;
};

void check_tokens(const EncoderParams& params, const TokenSeq& tokens);
Forward forward(const EncoderParams& params, const TokenSeq& tokens);
std::vector<double> backward_pre(const Forward& f, std::span<const double> upstream);
std::vector<double> backward_pooled(const EncoderParams& params, std::span<const double> g_pre);

}  // namespace causal::detail

#endif  // CAUSAL_SRC_ENCODER_DETAIL_HPP_
