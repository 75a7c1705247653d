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

#include "causal/train.hpp"

#include <cmath>
#include <algorithm>
#include <numeric>

#include "causal/error.hpp"
#include "causal/index.hpp"
#include "causal/random.hpp"

namespace causal {

namespace {

constexpr std::uint64_t kCauseInitStream = 1;
constexpr std::uint64_t kEffectInitStream = 2;
constexpr std::uint64_t kEpochShuffleStream = 0x100;

std::vector<TokenSeq> tokenize(std::span<const CausalPair> pairs, const Vocab& vocab,
                               std::size_t max_len, bool cause_side) {
  std::vector<TokenSeq> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    out.push_back(encode_tokens(vocab, cause_side ? p.cause_text : p.effect_text, max_len));
  }
  return out;
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = m.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace

TrainConfig TrainConfig::paper_hparams(TrainConfig base) {
  base.batch_size = 64;
  base.learning_rate = 1e-5;
  base.epochs = 500;
  return base;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (d_emb < 1 || d < 1) throw ConfigError("encoder dimensions must be >= 1");
  if (max_len < 1) throw ConfigError("max_len must be >= 1");
  if (!std::isfinite(loss.beta) || loss.beta < 0.0) throw ConfigError("beta must be finite and >= 0");
}

std::vector<std::string> pair_texts(std::span<const CausalPair> pairs) {
  std::vector<std::string> texts;
  texts.reserve(2 * pairs.size());
  for (const auto& p : pairs) {
    texts.push_back(p.cause_text);
    texts.push_back(p.effect_text);
  }
  return texts;
}

Trainer::Trainer(Vocab vocab, EncoderParams semantic, TrainConfig cfg,
                 std::span<const CausalPair> train)
    : vocab_(std::move(vocab)), semantic_(std::move(semantic)), cfg_(cfg) {
  cfg_.validate();
  if (train.empty()) throw ConfigError("training split is empty");
  semantic_.validate();
  if (semantic_.vocab_size() != vocab_.size()) {
    throw ConfigError("semantic encoder vocabulary size does not match the vocabulary");
  }
  if (semantic_.dim() != cfg_.d) throw ConfigError("semantic encoder output dimension differs from d");

  cause_tokens_ = tokenize(train, vocab_, cfg_.max_len, true);
  effect_tokens_ = tokenize(train, vocab_, cfg_.max_len, false);
  cause_sem_ = encode_batch(semantic_, cause_tokens_);
  effect_sem_ = encode_batch(semantic_, effect_tokens_);

  cause_ = init_params(vocab_.size(), cfg_.d_emb, cfg_.d, mix_seed(cfg_.seed, kCauseInitStream),
                       cfg_.normalize_output);
  effect_ = init_params(vocab_.size(), cfg_.d_emb, cfg_.d, mix_seed(cfg_.seed, kEffectInitStream),
                        cfg_.normalize_output);
  cause_state_ = OptimizerState(cause_);
  effect_state_ = OptimizerState(effect_);
}

EpochStats Trainer::train_epoch(int epoch_index) {
  const std::size_t n = cause_tokens_.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(cfg_.seed, kEpochShuffleStream + static_cast<std::uint64_t>(epoch_index));
  shuffle(order.begin(), order.end(), rng);

  const std::size_t batch = cfg_.batch_size;
  const AdamWConfig opt = cfg_.adamw();
  ParamGrads cause_grads(cause_);
  ParamGrads effect_grads(effect_);
  std::vector<TokenSeq> cause_batch(batch), effect_batch(batch);

  EpochStats stats;
  double loss_sum = 0.0;
  for (std::size_t start = 0; start + batch <= n; start += batch) {
    const std::span<const std::size_t> rows(order.data() + start, batch);
    for (std::size_t i = 0; i < batch; ++i) {
      cause_batch[i] = cause_tokens_[rows[i]];
      effect_batch[i] = effect_tokens_[rows[i]];
    }
    const Matrix cause_out = encode_batch(cause_, cause_batch);
    const Matrix effect_out = encode_batch(effect_, effect_batch);
    const TotalLossOutput loss = total_loss(cause_out, effect_out, gather_rows(cause_sem_, rows),
                                            gather_rows(effect_sem_, rows), cfg_.loss);

    // Accumulation runs serially in batch order so the sum is reproducible.
    cause_grads.zero();
    effect_grads.zero();
    for (std::size_t i = 0; i < batch; ++i) {
      accumulate_encode_grad(cause_, cause_batch[i], loss.grad_cause.row(i), cause_grads);
      accumulate_encode_grad(effect_, effect_batch[i], loss.grad_effect.row(i), effect_grads);
    }
    adamw_step(cause_, cause_grads, cause_state_, opt);
    adamw_step(effect_, effect_grads, effect_state_, opt);
    ++step_;
    ++stats.steps;
    loss_sum += loss.value;
  }
  if (stats.steps > 0) stats.mean_loss = loss_sum / static_cast<double>(stats.steps);
  return stats;
}

Checkpoint Trainer::snapshot(double val_metric) const {
  return {cause_, effect_, semantic_, vocab_, cfg_, step_, val_metric};
}

double validate(const EncoderParams& query_encoder, const EncoderParams& semantic,
                const Vocab& vocab, std::span<const CausalPair> validation,
                Similarity similarity, std::size_t max_len) {
  if (validation.empty()) throw ConfigError("validation split is empty");
  std::vector<std::string> causes, effects, ids;
  for (const auto& p : validation) {
    causes.push_back(p.cause_text);
    effects.push_back(p.effect_text);
    ids.push_back(p.id);
  }
  const Matrix queries = embed_texts(causes, query_encoder, vocab, max_len);
  const Matrix docs = embed_texts(effects, semantic, vocab, max_len);
  VectorIndex index(semantic.dim(), similarity);
  for (std::size_t i = 0; i < ids.size(); ++i) index.add(ids[i], docs.row(i));
  const auto results = batch_top_k(index, queries, ids, 1);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].hits.empty() && results[i].hits.front().doc_id == ids[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

double validate(const Checkpoint& ckpt, std::span<const CausalPair> validation) {
  return validate(ckpt.cause, ckpt.semantic, ckpt.vocab, validation, ckpt.config.loss.similarity,
                  ckpt.config.max_len);
}

Checkpoint fit(const DatasetSplit& split, const Vocab& vocab, const EncoderParams& semantic,
               const TrainConfig& cfg, const EpochCallback& on_epoch) {
  Trainer trainer(vocab, semantic, cfg, split.train);
  if (cfg.epochs == 0) {
    const double val = split.validation.empty()
                           ? 0.0
                           : validate(trainer.cause(), semantic, vocab, split.validation,
                                      cfg.loss.similarity, cfg.max_len);
    return trainer.snapshot(val);
  }
  Checkpoint best;
  bool have_best = false;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const EpochStats stats = trainer.train_epoch(epoch);
    const double val = validate(trainer.cause(), semantic, vocab, split.validation,
                                cfg.loss.similarity, cfg.max_len);
    if (on_epoch) on_epoch(epoch, stats, val);
    if (!have_best || val > best.val_metric) {
      best = trainer.snapshot(val);
      have_best = true;
    }
  }
  return best;
}

}  // namespace causal
