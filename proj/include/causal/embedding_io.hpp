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

#ifndef CAUSAL_EMBEDDING_IO_HPP_
#define CAUSAL_EMBEDDING_IO_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "causal/index.hpp"
#include "causal/loss.hpp"

namespace causal {

// Embedding file layout:
//   "CAWEMB1\0" | u32 LE header length | JSON {"n","d","similarity"} |
//   n x (u32 LE id length | UTF-8 doc_id | d x f32 LE)
inline constexpr std::string_view kEmbeddingMagic{"CAWEMB1\0", 8};

struct EmbeddingHeader {
  std::uint64_t n = 0;
  std::size_t d = 0;
  Similarity similarity = Similarity::kDot;
};

class EmbeddingWriter {
 public:
  EmbeddingWriter(const std::filesystem::path& path, const EmbeddingHeader& header);

  void write(std::string_view doc_id, std::span<const double> vector);
  // Flushes and checks that exactly header.n records were written.
  void finish();

 private:
  std::ofstream out_;
  std::string path_;
  EmbeddingHeader header_;
  std::uint64_t written_ = 0;
  std::string buffer_;
};

struct EmbeddingChunk {
  std::vector<std::string> doc_ids;
  std::vector<float> data;
  std::vector<double> norms;
  std::size_t rows = 0;
  std::size_t dim = 0;

  ChunkView view() const { return {data.data(), norms.data(), doc_ids.data(), rows, dim}; }
};

class EmbeddingReader {
 public:
  explicit EmbeddingReader(const std::filesystem::path& path);

  const EmbeddingHeader& header() const { return header_; }
  // Reads up to max_rows records; returns false once every record was read.
  bool next(std::size_t max_rows, EmbeddingChunk& chunk);

 private:
  std::ifstream in_;
  std::string path_;
  EmbeddingHeader header_;
  std::uint64_t read_ = 0;
};

VectorIndex load_index(const std::filesystem::path& path,
                       std::size_t chunk_rows = VectorIndex::kDefaultChunkRows);

// Exact batch top-k straight from an embedding file, holding only one chunk of
// rows in memory. Same results as batch_top_k over load_index(path).
std::vector<RetrievalResult> scan_top_k(const std::filesystem::path& path, const Matrix& queries,
                                        std::span<const std::string> query_ids, std::size_t k,
                                        std::size_t chunk_rows = VectorIndex::kDefaultChunkRows);

}  // namespace causal

#endif  // CAUSAL_EMBEDDING_IO_HPP_
