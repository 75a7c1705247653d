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

// OpenMP batch encoder. Rows are independent, so the parallel result is
// bit-identical to reference::encode_batch.

#include <algorithm>

#include "causal/encoder.hpp"
#include "../encoder_detail.hpp"

namespace causal {

Matrix encode_batch(const EncoderParams& params, std::span<const TokenSeq> seqs) {
  for (const auto& s : seqs) detail::check_tokens(params, s);
  Matrix out(seqs.size(), params.dim());
  const auto n = static_cast<std::ptrdiff_t>(seqs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto f = detail::forward(params, seqs[static_cast<std::size_t>(i)]);
    std::copy(f.out.begin(), f.out.end(), out.row(static_cast<std::size_t>(i)).begin());
  }
  return out;
}

}  // namespace causal
