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

#ifndef CAUSAL_EXPERIMENT_HPP_
#define CAUSAL_EXPERIMENT_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "causal/corpus.hpp"
#include "causal/eval.hpp"
#include "causal/train.hpp"

namespace causal {

// Which encoder embeds the queries. The pool side is always the Semantic
// encoder; kTrained picks Cause for cause2effect and Effect for effect2cause.
enum class QueryEncoder { kTrained, kSemanticOnly };

std::vector<RetrievalResult> retrieve(const Checkpoint& ckpt, std::span<const CausalPair> queries,
                                      std::span<const PoolEntry> pool, Direction direction,
                                      std::size_t k, QueryEncoder encoder = QueryEncoder::kTrained,
                                      std::size_t chunk_rows = VectorIndex::kDefaultChunkRows);

MetricsReport evaluate_retrieval(const Checkpoint& ckpt, std::span<const CausalPair> queries,
                                 std::span<const PoolEntry> pool, Direction direction,
                                 std::span<const std::size_t> ks,
                                 QueryEncoder encoder = QueryEncoder::kTrained);

// Gold side of `pairs` for `direction` plus every distractor that does not
// duplicate a gold text, shuffled with `seed`.
std::vector<PoolEntry> eval_pool(std::span<const CausalPair> pairs, Direction direction,
                                 std::span<const std::string> distractors, std::uint64_t seed);

// Vocabulary and semantic pretraining corpus come from train + validation
// texts; test texts are never looked at.
struct PipelineConfig {
  TrainConfig train;
  SemanticPretrainConfig semantic;
  int min_freq = 1;
};

Vocab training_vocab(const DatasetSplit& split, int min_freq = 1);
EncoderParams pretrain_for_split(const DatasetSplit& split, const Vocab& vocab,
                                 const PipelineConfig& cfg);

// Semantic encoder built from an embedding file of word vectors whose ids
// are vocabulary tokens: the embedding table takes those rows (missing tokens
// stay zero), the projection is the identity and the bias zero.
EncoderParams import_word_vectors(const std::filesystem::path& path, const Vocab& vocab,
                                  bool normalize_output = true);

struct AblationRow {
  double beta = 0.0;
  double val_metric = 0.0;
  MetricsReport cause2effect_in_split;
  MetricsReport cause2effect_pool;
  MetricsReport effect2cause_in_split;
  MetricsReport effect2cause_pool;
};

// One model per beta, all sharing data, vocabulary, semantic encoder and
// seed. Each is evaluated on the test split against the in-split pool and
// against the distractor-augmented pool, in both directions.
std::vector<AblationRow> beta_ablation(const DatasetSplit& split, std::span<const double> betas,
                                       const TrainConfig& base, const Vocab& vocab,
                                       const EncoderParams& semantic,
                                       std::span<const std::string> effect_distractors,
                                       std::span<const std::string> cause_distractors,
                                       std::span<const std::size_t> ks = kDefaultKs);

// Table with one row per beta and H@1 / H@10 / M@10 for each
// (direction, pool) column group.
nlohmann::ordered_json ablation_table(std::span<const AblationRow> rows);

}  // namespace causal

#endif  // CAUSAL_EXPERIMENT_HPP_
