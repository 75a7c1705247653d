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

#include "causal/embedding_io.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "binary_io.hpp"
#include "causal/error.hpp"

namespace causal {

EmbeddingWriter::EmbeddingWriter(const std::filesystem::path& path, const EmbeddingHeader& header)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path.string()), header_(header) {
  if (!out_) throw FormatError("cannot write " + path_);
  if (header.d == 0) throw ConfigError("embedding dimension must be >= 1");
  nlohmann::ordered_json h = {
      {"n", header.n}, {"d", header.d}, {"similarity", to_string(header.similarity)}};
  const std::string json = h.dump();
  std::string prefix(kEmbeddingMagic);
  binary::put_u32(prefix, static_cast<std::uint32_t>(json.size()));
  prefix += json;
  out_.write(prefix.data(), static_cast<std::streamsize>(prefix.size()));
}

void EmbeddingWriter::write(std::string_view doc_id, std::span<const double> vector) {
  if (vector.size() != header_.d) throw ConfigError("embedding for '" + std::string(doc_id) + "' has wrong dimension");
  if (written_ == header_.n) throw ConfigError("more embeddings written than declared");
  buffer_.clear();
  binary::put_u32(buffer_, static_cast<std::uint32_t>(doc_id.size()));
  buffer_.append(doc_id);
  for (double x : vector) binary::put_f32(buffer_, static_cast<float>(x));
  out_.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  ++written_;
}

void EmbeddingWriter::finish() {
  out_.flush();
  if (!out_) throw FormatError("write failed on " + path_);
  if (written_ != header_.n) {
    throw ConfigError(path_ + ": declared " + std::to_string(header_.n) + " embeddings, wrote " +
                      std::to_string(written_));
  }
  out_.close();
}

EmbeddingReader::EmbeddingReader(const std::filesystem::path& path)
    : in_(path, std::ios::binary), path_(path.string()) {
  if (!in_) throw FormatError("cannot open " + path_);
  char prefix[12];
  if (!in_.read(prefix, sizeof prefix)) throw TruncatedError(path_ + ": shorter than the file prefix");
  if (std::string_view(prefix, 8) != kEmbeddingMagic) throw MagicError(path_ + ": not an embedding file");
  std::string json(binary::get_u32(prefix + 8), '\0');
  if (!in_.read(json.data(), static_cast<std::streamsize>(json.size()))) {
    throw TruncatedError(path_ + ": header cut short");
  }
  try {
    const auto h = nlohmann::json::parse(json);
    header_.n = h.at("n").get<std::uint64_t>();
    header_.d = h.at("d").get<std::size_t>();
    header_.similarity = parse_similarity(h.at("similarity").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path_ + ": bad header: " + e.what());
  }
  if (header_.d == 0) throw IntegrityError(path_ + ": dimension 0");
}

bool EmbeddingReader::next(std::size_t max_rows, EmbeddingChunk& chunk) {
  chunk.doc_ids.clear();
  chunk.data.clear();
  chunk.norms.clear();
  chunk.rows = 0;
  chunk.dim = header_.d;
  if (read_ == header_.n) {
    if (in_.peek() != std::char_traits<char>::eof()) {
      throw IntegrityError(path_ + ": trailing bytes after " + std::to_string(header_.n) + " records");
    }
    return false;
  }
  std::string vec_bytes(4 * header_.d, '\0');
  while (chunk.rows < max_rows && read_ < header_.n) {
    char len_bytes[4];
    if (!in_.read(len_bytes, 4)) {
      throw TruncatedError(path_ + ": ends after " + std::to_string(read_) + " of " +
                           std::to_string(header_.n) + " records");
    }
    std::string id(binary::get_u32(len_bytes), '\0');
    if (!in_.read(id.data(), static_cast<std::streamsize>(id.size())) ||
        !in_.read(vec_bytes.data(), static_cast<std::streamsize>(vec_bytes.size()))) {
      throw TruncatedError(path_ + ": record " + std::to_string(read_) + " cut short");
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < header_.d; ++i) {
      const float x = binary::get_f32(vec_bytes.data() + 4 * i);
      if (!std::isfinite(x)) throw NumericError(path_ + ": non-finite value in '" + id + "'");
      chunk.data.push_back(x);
      sq += static_cast<double>(x) * static_cast<double>(x);
    }
    chunk.norms.push_back(std::sqrt(sq));
    chunk.doc_ids.push_back(std::move(id));
    ++chunk.rows;
    ++read_;
  }
  return true;
}

VectorIndex load_index(const std::filesystem::path& path, std::size_t chunk_rows) {
  EmbeddingReader reader(path);
  VectorIndex index(reader.header().d, reader.header().similarity, chunk_rows);
  EmbeddingChunk chunk;
  while (reader.next(chunk_rows, chunk)) {
    for (std::size_t r = 0; r < chunk.rows; ++r) {
      index.add(std::move(chunk.doc_ids[r]),
                std::span<const float>(chunk.data.data() + r * chunk.dim, chunk.dim));
    }
  }
  return index;
}

std::vector<RetrievalResult> scan_top_k(const std::filesystem::path& path, const Matrix& queries,
                                        std::span<const std::string> query_ids, std::size_t k,
                                        std::size_t chunk_rows) {
  if (chunk_rows == 0) throw ConfigError("chunk_rows must be >= 1");
  if (query_ids.size() != queries.rows()) throw ConfigError("one query id per query row required");
  EmbeddingReader reader(path);
  if (queries.cols() != reader.header().d) throw ConfigError("query dimension does not match " + path.string());
  std::vector<double> norms(queries.rows());
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    if (!all_finite(queries.row(q))) throw NumericError("query vector is not finite");
    norms[q] = l2_norm(queries.row(q));
  }
  std::vector<BestK> best(queries.rows(), BestK(k));
  EmbeddingChunk chunk;
  while (reader.next(chunk_rows, chunk)) {
    kernels::scan_chunk_batch(chunk.view(), reader.header().similarity, queries, norms, best);
  }
  std::vector<RetrievalResult> out;
  out.reserve(queries.rows());
  for (std::size_t q = 0; q < queries.rows(); ++q) out.push_back({query_ids[q], best[q].sorted()});
  return out;
}

}  // namespace causal
