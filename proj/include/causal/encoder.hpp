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

#ifndef CAUSAL_ENCODER_HPP_
#define CAUSAL_ENCODER_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "causal/matrix.hpp"
#include "causal/text.hpp"

namespace causal {

// Cause and Effect encoders are trained; the Semantic encoder is frozen and
// supplies the targets both of them are contrasted against.
enum class EncoderRole { kCause, kEffect, kSemantic };

constexpr bool is_trainable(EncoderRole role) { return role != EncoderRole::kSemantic; }
std::string to_string(EncoderRole role);

// Mean-pooled embedding bag followed by an affine projection:
//   h = mean_{t != PAD} embedding[t]
//   z = projection^T h + bias
//   y = z / |z|   (if normalize_output and z != 0, else y = z)
struct EncoderParams {
  Matrix embedding;           // vocab_size x d_emb
  Matrix projection;          // d_emb x d
  std::vector<double> bias;   // d
  bool normalize_output = true;

  std::size_t vocab_size() const { return embedding.rows(); }
  std::size_t d_emb() const { return embedding.cols(); }
  std::size_t dim() const { return bias.size(); }

  // Throws ConfigError on inconsistent shapes or NumericError on NaN/Inf.
  void validate() const;

  bool operator==(const EncoderParams&) const = default;
};

struct EmbeddingBatch {
  Matrix vectors;
  EncoderRole source_role = EncoderRole::kSemantic;
  std::vector<std::string> pair_ids;
};

// Entries i.i.d. uniform on [-1/sqrt(d_emb), 1/sqrt(d_emb)], PAD row and bias
// zero.
EncoderParams init_params(std::size_t vocab_size, std::size_t d_emb, std::size_t d,
                          std::uint64_t seed, bool normalize_output = true);

std::vector<double> encode(const EncoderParams& params, const TokenSeq& tokens);

// Row i = encode(params, seqs[i]). Rows are computed in parallel.
Matrix encode_batch(const EncoderParams& params, std::span<const TokenSeq> seqs);

// Gradient of upstream . encode(params, tokens). Embedding rows that the
// sequence does not touch are omitted (their gradient is zero).
struct EncoderGrad {
  std::vector<std::pair<TokenId, std::vector<double>>> embedding_rows;  // ascending id
  Matrix projection;
  std::vector<double> bias;
};

EncoderGrad encode_grad(const EncoderParams& params, const TokenSeq& tokens,
                        std::span<const double> upstream);

// Dense gradient buffer with the same shapes as EncoderParams.
struct ParamGrads {
  Matrix embedding;
  Matrix projection;
  std::vector<double> bias;

  ParamGrads() = default;
  explicit ParamGrads(const EncoderParams& shape);
  void zero();
};

// grads += d (upstream . encode(params, tokens)) / d params
void accumulate_encode_grad(const EncoderParams& params, const TokenSeq& tokens,
                            std::span<const double> upstream, ParamGrads& grads);

// Self-supervised stand-in for a pretrained sentence encoder: two word-dropout
// views of each sentence are contrasted in-batch.
struct SemanticPretrainConfig {
  int epochs = 150;
  double dropout = 0.1;
  std::size_t batch_size = 64;
  double learning_rate = 1e-2;
  double weight_decay = 0.0;
  std::size_t d_emb = 64;
  std::size_t d = 64;
  std::size_t max_len = kDefaultMaxLen;
  bool normalize_output = true;
};

// Drops each token with probability `rate`, keeping at least one.
TokenSeq word_dropout(const TokenSeq& tokens, double rate, std::uint64_t seed, std::uint64_t stream);

EncoderParams pretrain_semantic(std::span<const std::string> corpus, const Vocab& vocab,
                                const SemanticPretrainConfig& cfg, std::uint64_t seed);

namespace reference {

// Serial row-by-row encode_batch.
Matrix encode_batch(const EncoderParams& params, std::span<const TokenSeq> seqs);

}  // namespace reference

}  // namespace causal

#endif  // CAUSAL_ENCODER_HPP_
