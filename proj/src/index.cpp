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

#include "causal/index.hpp"

#include <algorithm>
#include <cmath>

#include "causal/error.hpp"

namespace causal {

namespace {

// Heap comparator: a "less than" b when a ranks before b, so the heap front
// holds the hit that ranks last.
bool heap_less(const Hit& a, const Hit& b) {
  return ranks_before(a.score, a.doc_id, b.score, b.doc_id);
}

}  // namespace

void BestK::offer(double score, std::string_view doc_id) {
  if (k_ == 0) return;
  if (heap_.size() < k_) {
    heap_.push_back({std::string(doc_id), score});
    std::push_heap(heap_.begin(), heap_.end(), heap_less);
    return;
  }
  const Hit& worst = heap_.front();
  if (!ranks_before(score, doc_id, worst.score, worst.doc_id)) return;
  std::pop_heap(heap_.begin(), heap_.end(), heap_less);
  heap_.back() = {std::string(doc_id), score};
  std::push_heap(heap_.begin(), heap_.end(), heap_less);
}

void BestK::merge(const BestK& other) {
  for (const auto& h : other.heap_) offer(h.score, h.doc_id);
}

std::vector<Hit> BestK::sorted() const {
  std::vector<Hit> hits = heap_;
  std::sort(hits.begin(), hits.end(), heap_less);
  return hits;
}

double score_row(Similarity kind, std::span<const double> query, double query_norm,
                 const float* row, double row_norm) {
  double s = 0.0;
  for (std::size_t i = 0; i < query.size(); ++i) s += query[i] * static_cast<double>(row[i]);
  if (kind == Similarity::kDot) return s;
  if (query_norm == 0.0 || row_norm == 0.0) return 0.0;
  return s / (query_norm * row_norm);
}

VectorIndex::VectorIndex(std::size_t dim, Similarity similarity, std::size_t chunk_rows)
    : dim_(dim), similarity_(similarity), chunk_rows_(chunk_rows) {
  if (dim == 0) throw ConfigError("index dimension must be >= 1");
  if (chunk_rows == 0) throw ConfigError("index chunk_rows must be >= 1");
}

VectorIndex::Chunk& VectorIndex::writable_chunk() {
  if (chunks_.empty() || chunks_.back().rows == chunk_rows_) {
    Chunk c;
    c.first_row = doc_ids_.size();
    c.data.reserve(std::min<std::size_t>(chunk_rows_, 4096) * dim_);
    chunks_.push_back(std::move(c));
  }
  return chunks_.back();
}

void VectorIndex::add(std::string doc_id, std::span<const float> vector) {
  if (vector.size() != dim_) {
    throw ConfigError("index entry '" + doc_id + "' has dimension " + std::to_string(vector.size()) +
                      ", expected " + std::to_string(dim_));
  }
  double sq = 0.0;
  for (float x : vector) {
    if (!std::isfinite(x)) throw NumericError("index entry '" + doc_id + "' is not finite");
    sq += static_cast<double>(x) * static_cast<double>(x);
  }
  if (!id_set_.insert(doc_id).second) throw FormatError("duplicate doc_id '" + doc_id + "'");
  Chunk& c = writable_chunk();
  c.data.insert(c.data.end(), vector.begin(), vector.end());
  c.norms.push_back(std::sqrt(sq));
  ++c.rows;
  doc_ids_.push_back(std::move(doc_id));
}

void VectorIndex::add(std::string doc_id, std::span<const double> vector) {
  std::vector<float> f(vector.begin(), vector.end());
  add(std::move(doc_id), std::span<const float>(f));
}

VectorIndex build_index(std::span<const std::pair<std::string, std::vector<double>>> entries,
                        std::size_t dim, Similarity similarity, std::size_t chunk_rows) {
  VectorIndex index(dim, similarity, chunk_rows);
  for (const auto& [id, v] : entries) index.add(id, std::span<const double>(v));
  return index;
}

namespace reference {

RetrievalResult top_k(const VectorIndex& index, std::span<const double> query, std::size_t k,
                      std::string query_id) {
  if (query.size() != index.dim()) throw ConfigError("query dimension does not match index");
  if (!all_finite(query)) throw NumericError("query vector is not finite");
  const double qn = l2_norm(query);
  std::vector<Hit> all;
  all.reserve(index.size());
  for (const auto& chunk : index.chunks()) {
    for (std::size_t r = 0; r < chunk.rows; ++r) {
      all.push_back({index.doc_id(chunk.first_row + r),
                     score_row(index.similarity(), query, qn, chunk.data.data() + r * index.dim(),
                               chunk.norms[r])});
    }
  }
  std::sort(all.begin(), all.end(), [](const Hit& a, const Hit& b) {
    return ranks_before(a.score, a.doc_id, b.score, b.doc_id);
  });
  if (all.size() > k) all.resize(k);
  return {std::move(query_id), std::move(all)};
}

std::vector<RetrievalResult> batch_top_k(const VectorIndex& index, const Matrix& queries,
                                         std::span<const std::string> query_ids, std::size_t k) {
  if (query_ids.size() != queries.rows()) throw ConfigError("one query id per query row required");
  std::vector<RetrievalResult> out;
  out.reserve(queries.rows());
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    out.push_back(reference::top_k(index, queries.row(q), k, query_ids[q]));
  }
  return out;
}

}  // namespace reference

void embed_pool(std::span<const PoolEntry> pool, const EncoderParams& params, const Vocab& vocab,
                std::size_t max_len, std::size_t chunk_rows, const EmbeddingSink& sink) {
  if (chunk_rows == 0) throw ConfigError("embed_pool chunk_rows must be >= 1");
  std::vector<TokenSeq> seqs;
  for (std::size_t start = 0; start < pool.size(); start += chunk_rows) {
    const std::size_t end = std::min(pool.size(), start + chunk_rows);
    seqs.clear();
    for (std::size_t i = start; i < end; ++i) seqs.push_back(encode_tokens(vocab, pool[i].text, max_len));
    const Matrix vectors = encode_batch(params, seqs);
    for (std::size_t i = start; i < end; ++i) sink(pool[i].doc_id, vectors.row(i - start));
  }
}

Matrix embed_texts(std::span<const std::string> texts, const EncoderParams& params,
                   const Vocab& vocab, std::size_t max_len) {
  std::vector<TokenSeq> seqs;
  seqs.reserve(texts.size());
  for (const auto& t : texts) seqs.push_back(encode_tokens(vocab, t, max_len));
  return encode_batch(params, seqs);
}

}  // namespace causal
