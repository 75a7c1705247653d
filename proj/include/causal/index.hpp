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

#ifndef CAUSAL_INDEX_HPP_
#define CAUSAL_INDEX_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "causal/corpus.hpp"
#include "causal/encoder.hpp"
#include "causal/loss.hpp"
#include "causal/matrix.hpp"
#include "causal/text.hpp"

namespace causal {

struct Hit {
  std::string doc_id;
  double score = 0.0;

  bool operator==(const Hit&) const = default;
};

// Ranked hits, best first. Equal scores are ordered by ascending doc_id.
struct RetrievalResult {
  std::string query_id;
  std::vector<Hit> hits;

  bool operator==(const RetrievalResult&) const = default;
};

// Strict ranking order: higher score first, then smaller doc_id.
inline bool ranks_before(double score_a, std::string_view id_a, double score_b,
                         std::string_view id_b) {
  return score_a > score_b || (score_a == score_b && id_a < id_b);
}

// Bounded best-k set under ranks_before. Feeding the same candidates in any
// order yields the same final ranking.
class BestK {
 public:
  explicit BestK(std::size_t k) : k_(k) {}

  // Cheap pre-check so callers can skip building the id string.
  bool admits(double score) const {
    return k_ > 0 && (heap_.size() < k_ || score >= heap_.front().score);
  }
  void offer(double score, std::string_view doc_id);
  void merge(const BestK& other);
  std::vector<Hit> sorted() const;

 private:
  std::size_t k_;
  std::vector<Hit> heap_;  // heap_.front() is the worst retained hit
};

// Scoring kernel shared by every scan path. Query and row norms are passed in
// so cosine scoring does not recompute them per pair.
double score_row(Similarity kind, std::span<const double> query, double query_norm,
                 const float* row, double row_norm);

// A contiguous block of stored rows with their ids, as seen by the kernels.
struct ChunkView {
  const float* data = nullptr;
  const double* norms = nullptr;
  const std::string* doc_ids = nullptr;
  std::size_t rows = 0;
  std::size_t dim = 0;
};

// Exact brute-force index. Rows are stored as 32-bit floats in fixed-size
// chunks; scans walk the chunks one at a time.
class VectorIndex {
 public:
  static constexpr std::size_t kDefaultChunkRows = 65536;

  struct Chunk {
    std::size_t first_row = 0;
    std::size_t rows = 0;
    std::vector<float> data;    // rows x dim
    std::vector<double> norms;  // L2 norm of each stored row
  };

  VectorIndex(std::size_t dim, Similarity similarity,
              std::size_t chunk_rows = kDefaultChunkRows);

  void add(std::string doc_id, std::span<const double> vector);
  void add(std::string doc_id, std::span<const float> vector);

  std::size_t size() const { return doc_ids_.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t chunk_rows() const { return chunk_rows_; }
  Similarity similarity() const { return similarity_; }
  const std::vector<Chunk>& chunks() const { return chunks_; }
  const std::string& doc_id(std::size_t row) const { return doc_ids_[row]; }
  ChunkView view(const Chunk& chunk) const {
    return {chunk.data.data(), chunk.norms.data(), doc_ids_.data() + chunk.first_row, chunk.rows, dim_};
  }

 private:
  Chunk& writable_chunk();

  std::size_t dim_;
  Similarity similarity_;
  std::size_t chunk_rows_;
  std::vector<std::string> doc_ids_;
  std::unordered_set<std::string> id_set_;
  std::vector<Chunk> chunks_;
};

VectorIndex build_index(std::span<const std::pair<std::string, std::vector<double>>> entries,
                        std::size_t dim, Similarity similarity,
                        std::size_t chunk_rows = VectorIndex::kDefaultChunkRows);

namespace kernels {

// Offers every row of `chunk` to best[q] for each query row q, in parallel
// over queries. `query_norms[q]` must equal l2_norm(queries.row(q)).
void scan_chunk_batch(const ChunkView& chunk, Similarity kind, const Matrix& queries,
                      std::span<const double> query_norms, std::span<BestK> best);

}  // namespace kernels

// Parallel scans (OpenMP). top_k splits the chunks across threads;
// batch_top_k walks the chunks once and splits the queries over threads.
RetrievalResult top_k(const VectorIndex& index, std::span<const double> query, std::size_t k,
                      std::string query_id = {});
std::vector<RetrievalResult> batch_top_k(const VectorIndex& index, const Matrix& queries,
                                         std::span<const std::string> query_ids, std::size_t k);

namespace reference {

// Serial full sort over every row; kept as the ground truth for the scans.
RetrievalResult top_k(const VectorIndex& index, std::span<const double> query, std::size_t k,
                      std::string query_id = {});
std::vector<RetrievalResult> batch_top_k(const VectorIndex& index, const Matrix& queries,
                                         std::span<const std::string> query_ids, std::size_t k);

}  // namespace reference

// Streams pool entries through the encoder `chunk_rows` at a time and hands
// each (doc_id, vector) to `sink` in pool order. At most one chunk of vectors
// is alive at any point.
using EmbeddingSink = std::function<void(const std::string& doc_id, std::span<const double> v)>;

void embed_pool(std::span<const PoolEntry> pool, const EncoderParams& params, const Vocab& vocab,
                std::size_t max_len, std::size_t chunk_rows, const EmbeddingSink& sink);

// Encodes `texts` with `params` into a matrix (parallel over rows).
Matrix embed_texts(std::span<const std::string> texts, const EncoderParams& params,
                   const Vocab& vocab, std::size_t max_len);

}  // namespace causal

#endif  // CAUSAL_INDEX_HPP_
