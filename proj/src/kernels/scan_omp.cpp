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

// OpenMP top-k scans. Every path funnels candidates through BestK, whose
// ordering is total, so results do not depend on thread count, schedule or
// chunk size.

#include "causal/error.hpp"
#include "causal/index.hpp"

namespace causal {

namespace {

void scan_rows(const ChunkView& chunk, Similarity kind, std::span<const double> query,
               double query_norm, BestK& best) {
  const float* data = chunk.data;
  for (std::size_t r = 0; r < chunk.rows; ++r) {
    const double s = score_row(kind, query, query_norm, data + r * chunk.dim, chunk.norms[r]);
    if (best.admits(s)) best.offer(s, chunk.doc_ids[r]);
  }
}

void check_query(const VectorIndex& index, std::span<const double> query) {
  if (query.size() != index.dim()) throw ConfigError("query dimension does not match index");
  if (!all_finite(query)) throw NumericError("query vector is not finite");
}

}  // namespace

namespace kernels {

void scan_chunk_batch(const ChunkView& chunk, Similarity kind, const Matrix& queries,
                      std::span<const double> query_norms, std::span<BestK> best) {
  const auto n = static_cast<std::ptrdiff_t>(queries.rows());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t q = 0; q < n; ++q) {
    const auto qi = static_cast<std::size_t>(q);
    scan_rows(chunk, kind, queries.row(qi), query_norms[qi], best[qi]);
  }
}

}  // namespace kernels

RetrievalResult top_k(const VectorIndex& index, std::span<const double> query, std::size_t k,
                      std::string query_id) {
  check_query(index, query);
  const double qn = l2_norm(query);
  const auto& chunks = index.chunks();
  const auto n_chunks = static_cast<std::ptrdiff_t>(chunks.size());
  std::vector<BestK> partial(chunks.size(), BestK(k));
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t c = 0; c < n_chunks; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    scan_rows(index.view(chunks[ci]), index.similarity(), query, qn, partial[ci]);
  }
  BestK best(k);
  for (const auto& p : partial) best.merge(p);
  return {std::move(query_id), best.sorted()};
}

std::vector<RetrievalResult> batch_top_k(const VectorIndex& index, const Matrix& queries,
                                         std::span<const std::string> query_ids, std::size_t k) {
  if (query_ids.size() != queries.rows()) throw ConfigError("one query id per query row required");
  std::vector<double> norms(queries.rows());
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    check_query(index, queries.row(q));
    norms[q] = l2_norm(queries.row(q));
  }
  std::vector<BestK> best(queries.rows(), BestK(k));
  for (const auto& chunk : index.chunks()) {
    kernels::scan_chunk_batch(index.view(chunk), index.similarity(), queries, norms, best);
  }
  std::vector<RetrievalResult> out;
  out.reserve(queries.rows());
  for (std::size_t q = 0; q < queries.rows(); ++q) out.push_back({query_ids[q], best[q].sorted()});
  return out;
}

}  // namespace causal
