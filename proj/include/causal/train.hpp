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

#ifndef CAUSAL_TRAIN_HPP_
#define CAUSAL_TRAIN_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "causal/corpus.hpp"
#include "causal/encoder.hpp"
#include "causal/loss.hpp"
#include "causal/optim.hpp"
#include "causal/text.hpp"

namespace causal {

struct TrainConfig {
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.01;
  int epochs = 50;
  LossConfig loss;
  std::uint64_t seed = 0;
  std::size_t d_emb = 64;
  std::size_t d = 64;
  std::size_t max_len = kDefaultMaxLen;
  bool normalize_output = true;

  // Batch 64, learning rate 1e-5, 500 epochs; everything else from `base`.
  static TrainConfig paper_hparams(TrainConfig base);

  AdamWConfig adamw() const {
    return {learning_rate, adam_beta1, adam_beta2, adam_eps, weight_decay};
  }
  void validate() const;
};

struct Checkpoint {
  EncoderParams cause;
  EncoderParams effect;
  EncoderParams semantic;
  Vocab vocab;
  TrainConfig config;
  std::int64_t step = 0;
  double val_metric = 0.0;

  const EncoderParams& query_encoder(Direction d) const {
    return d == Direction::kCauseToEffect ? cause : effect;
  }
};

struct EpochStats {
  double mean_loss = 0.0;  // mean over the epoch's batches (0 if none ran)
  std::size_t steps = 0;
};

// Owns the trainable Cause/Effect encoders and their optimizer state for one
// run. The Semantic encoder is copied in and never written.
class Trainer {
 public:
  Trainer(Vocab vocab, EncoderParams semantic, TrainConfig cfg,
          std::span<const CausalPair> train);

  // Shuffles with a stream keyed on (seed, epoch_index), runs every full
  // batch, and drops the trailing remainder.
  EpochStats train_epoch(int epoch_index);

  Checkpoint snapshot(double val_metric) const;

  const EncoderParams& cause() const { return cause_; }
  const EncoderParams& effect() const { return effect_; }
  const EncoderParams& semantic() const { return semantic_; }
  std::int64_t step() const { return step_; }

 private:
  Vocab vocab_;
  EncoderParams semantic_;
  TrainConfig cfg_;
  std::vector<TokenSeq> cause_tokens_;
  std::vector<TokenSeq> effect_tokens_;
  Matrix cause_sem_;   // frozen targets, cached once
  Matrix effect_sem_;
  EncoderParams cause_;
  EncoderParams effect_;
  OptimizerState cause_state_;
  OptimizerState effect_state_;
  std::int64_t step_ = 0;
};

// Hit@1 of cause -> effect retrieval where the pool is exactly the
// validation effects (embedded by the Semantic encoder).
double validate(const Checkpoint& ckpt, std::span<const CausalPair> validation);

double validate(const EncoderParams& query_encoder, const EncoderParams& semantic,
                const Vocab& vocab, std::span<const CausalPair> validation,
                Similarity similarity, std::size_t max_len = kDefaultMaxLen);

using EpochCallback = std::function<void(int epoch, const EpochStats& stats, double val_metric)>;

// Trains cfg.epochs epochs, validating after each, and returns the snapshot
// with the highest validation Hit@1 (earliest epoch on ties). With zero
// epochs the initial snapshot is returned.
Checkpoint fit(const DatasetSplit& split, const Vocab& vocab, const EncoderParams& semantic,
               const TrainConfig& cfg, const EpochCallback& on_epoch = {});

// Texts used for the vocabulary and semantic pretraining: every cause and
// effect text of the given pairs, in order.
std::vector<std::string> pair_texts(std::span<const CausalPair> pairs);

}  // namespace causal

#endif  // CAUSAL_TRAIN_HPP_
