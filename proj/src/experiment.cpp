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

#include "causal/experiment.hpp"

#include <unordered_set>

#include "causal/embedding_io.hpp"
#include "causal/error.hpp"
#include "causal/index.hpp"
#include "causal/random.hpp"

namespace causal {

std::vector<RetrievalResult> retrieve(const Checkpoint& ckpt, std::span<const CausalPair> queries,
                                      std::span<const PoolEntry> pool, Direction direction,
                                      std::size_t k, QueryEncoder encoder, std::size_t chunk_rows) {
  const EncoderParams& query_params =
      encoder == QueryEncoder::kTrained ? ckpt.query_encoder(direction) : ckpt.semantic;
  const std::size_t max_len = ckpt.config.max_len;

  VectorIndex index(ckpt.semantic.dim(), ckpt.config.loss.similarity, chunk_rows);
  embed_pool(pool, ckpt.semantic, ckpt.vocab, max_len, chunk_rows,
             [&index](const std::string& id, std::span<const double> v) { index.add(id, v); });

  std::vector<std::string> texts, ids;
  texts.reserve(queries.size());
  ids.reserve(queries.size());
  for (const auto& p : queries) {
    texts.push_back(query_text(p, direction));
    ids.push_back(p.id);
  }
  const Matrix q = embed_texts(texts, query_params, ckpt.vocab, max_len);
  return batch_top_k(index, q, ids, k);
}

MetricsReport evaluate_retrieval(const Checkpoint& ckpt, std::span<const CausalPair> queries,
                                 std::span<const PoolEntry> pool, Direction direction,
                                 std::span<const std::size_t> ks, QueryEncoder encoder) {
  std::size_t k = 1;
  for (std::size_t c : ks) k = std::max(k, c);
  const auto results = retrieve(ckpt, queries, pool, direction, k, encoder);
  std::vector<QueryJudgment> judgments;
  judgments.reserve(queries.size());
  for (const auto& p : queries) judgments.push_back({p.id, {gold_doc_id(p, direction)}, std::nullopt});
  return evaluate_run(results, judgments, ks);
}

std::vector<PoolEntry> eval_pool(std::span<const CausalPair> pairs, Direction direction,
                                 std::span<const std::string> distractors, std::uint64_t seed) {
  const auto gold = gold_entries(pairs, direction);
  std::unordered_set<std::string> gold_texts;
  for (const auto& g : gold) gold_texts.insert(normalize(g.text));
  std::size_t usable = 0;
  for (const auto& s : distractors) usable += gold_texts.contains(normalize(s)) ? 0 : 1;
  return build_pool(gold, distractors, gold.size() + usable, seed);
}

Vocab training_vocab(const DatasetSplit& split, int min_freq) {
  auto texts = pair_texts(split.train);
  const auto val = pair_texts(split.validation);
  texts.insert(texts.end(), val.begin(), val.end());
  return Vocab::build(texts, min_freq);
}

EncoderParams pretrain_for_split(const DatasetSplit& split, const Vocab& vocab,
                                 const PipelineConfig& cfg) {
  auto texts = pair_texts(split.train);
  const auto val = pair_texts(split.validation);
  texts.insert(texts.end(), val.begin(), val.end());
  SemanticPretrainConfig sem = cfg.semantic;
  sem.d = cfg.train.d;
  sem.d_emb = cfg.train.d_emb;
  sem.max_len = cfg.train.max_len;
  sem.normalize_output = cfg.train.normalize_output;
  return pretrain_semantic(texts, vocab, sem, mix_seed(cfg.train.seed, 3));
}

EncoderParams import_word_vectors(const std::filesystem::path& path, const Vocab& vocab,
                                  bool normalize_output) {
  EmbeddingReader reader(path);
  const std::size_t d = reader.header().d;
  if (d == 0) throw FormatError(path.string() + ": zero-dimensional vectors");
  EncoderParams params;
  params.embedding = Matrix(vocab.size(), d);
  params.projection = Matrix(d, d);
  for (std::size_t i = 0; i < d; ++i) params.projection(i, i) = 1.0;
  params.bias.assign(d, 0.0);
  params.normalize_output = normalize_output;

  std::size_t matched = 0;
  EmbeddingChunk chunk;
  while (reader.next(4096, chunk)) {
    for (std::size_t r = 0; r < chunk.rows; ++r) {
      const std::string& token = chunk.doc_ids[r];
      const TokenId id = vocab.id_of(token);
      if (id == Vocab::kPad || (id == Vocab::kUnk && token != vocab.token(Vocab::kUnk))) continue;
      auto row = params.embedding.row(static_cast<std::size_t>(id));
      for (std::size_t c = 0; c < d; ++c) row[c] = chunk.data[r * d + c];
      ++matched;
    }
  }
  if (matched == 0) throw FormatError(path.string() + ": no vector matches a vocabulary token");
  return params;
}

std::vector<AblationRow> beta_ablation(const DatasetSplit& split, std::span<const double> betas,
                                       const TrainConfig& base, const Vocab& vocab,
                                       const EncoderParams& semantic,
                                       std::span<const std::string> effect_distractors,
                                       std::span<const std::string> cause_distractors,
                                       std::span<const std::size_t> ks) {
  if (betas.empty()) throw ConfigError("ablation needs at least one beta");
  if (split.test.empty()) throw ConfigError("ablation needs a non-empty test split");
  const auto c2e_in = gold_entries(split.test, Direction::kCauseToEffect);
  const auto e2c_in = gold_entries(split.test, Direction::kEffectToCause);
  const auto c2e_pool = eval_pool(split.test, Direction::kCauseToEffect, effect_distractors, base.seed);
  const auto e2c_pool = eval_pool(split.test, Direction::kEffectToCause, cause_distractors, base.seed);

  std::vector<AblationRow> rows;
  for (double beta : betas) {
    TrainConfig cfg = base;
    cfg.loss.beta = beta;
    const Checkpoint ckpt = fit(split, vocab, semantic, cfg);
    AblationRow row;
    row.beta = beta;
    row.val_metric = ckpt.val_metric;
    row.cause2effect_in_split = evaluate_retrieval(ckpt, split.test, c2e_in, Direction::kCauseToEffect, ks);
    row.cause2effect_pool = evaluate_retrieval(ckpt, split.test, c2e_pool, Direction::kCauseToEffect, ks);
    row.effect2cause_in_split = evaluate_retrieval(ckpt, split.test, e2c_in, Direction::kEffectToCause, ks);
    row.effect2cause_pool = evaluate_retrieval(ckpt, split.test, e2c_pool, Direction::kEffectToCause, ks);
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::ordered_json ablation_table(std::span<const AblationRow> rows) {
  auto cell = [](const MetricsReport& r) {
    nlohmann::ordered_json c;
    auto get = [](const std::map<std::size_t, double>& m, std::size_t k) {
      const auto it = m.find(k);
      return it == m.end() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(it->second);
    };
    c["hit@1"] = get(r.values.hit, 1);
    c["hit@10"] = get(r.values.hit, 10);
    c["mrr@10"] = get(r.values.mrr, 10);
    return c;
  };
  nlohmann::ordered_json table;
  table["columns"] = {"cause2effect/in_split", "cause2effect/pool", "effect2cause/in_split",
                      "effect2cause/pool"};
  nlohmann::ordered_json out_rows = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["beta"] = r.beta;
    row["val_hit@1"] = r.val_metric;
    row["cause2effect/in_split"] = cell(r.cause2effect_in_split);
    row["cause2effect/pool"] = cell(r.cause2effect_pool);
    row["effect2cause/in_split"] = cell(r.effect2cause_in_split);
    row["effect2cause/pool"] = cell(r.effect2cause_pool);
    out_rows.push_back(std::move(row));
  }
  table["rows"] = std::move(out_rows);
  return table;
}

}  // namespace causal
