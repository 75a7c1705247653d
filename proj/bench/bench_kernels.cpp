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

// OpenMP kernels against their serial reference versions.

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "causal/encoder.hpp"
#include "causal/index.hpp"

using namespace causal;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0, 1);
  Matrix m(rows, cols);
  for (double& v : m.flat()) v = n(rng);
  return m;
}

VectorIndex make_index(std::size_t n, std::size_t d) {
  const Matrix docs = random_matrix(n, d, 1);
  VectorIndex idx(d, Similarity::kDot);
  for (std::size_t i = 0; i < n; ++i) idx.add("d" + std::to_string(i), docs.row(i));
  return idx;
}

std::vector<std::string> query_ids(std::size_t q) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < q; ++i) ids.push_back("q" + std::to_string(i));
  return ids;
}

template <bool kParallel>
void BM_TopK(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto idx = make_index(n, 64);
  const Matrix q = random_matrix(1, 64, 2);
  for (auto _ : state) {
    auto r = kParallel ? top_k(idx, q.row(0), 10) : reference::top_k(idx, q.row(0), 10);
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

template <bool kParallel>
void BM_BatchTopK(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto idx = make_index(n, 64);
  const Matrix qs = random_matrix(64, 64, 3);
  const auto ids = query_ids(64);
  for (auto _ : state) {
    auto r = kParallel ? batch_top_k(idx, qs, ids, 10) : reference::batch_top_k(idx, qs, ids, 10);
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * 64));
}

template <bool kParallel>
void BM_EncodeBatch(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const EncoderParams p = init_params(5000, 64, 64, 4);
  std::mt19937_64 rng(5);
  std::vector<TokenSeq> seqs(rows);
  for (auto& s : seqs) {
    s.original_length = 3 + rng() % 10;
    for (std::size_t i = 0; i < s.original_length; ++i) s.ids.push_back(static_cast<TokenId>(2 + rng() % 4998));
  }
  for (auto _ : state) {
    Matrix out = kParallel ? encode_batch(p, seqs) : reference::encode_batch(p, seqs);
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * rows));
}

}  // namespace

BENCHMARK(BM_TopK<true>)->Name("top_k/omp")->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TopK<false>)->Name("top_k/reference")->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchTopK<true>)->Name("batch_top_k/omp")->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchTopK<false>)->Name("batch_top_k/reference")->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EncodeBatch<true>)->Name("encode_batch/omp")->Arg(4096)->Arg(65536)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EncodeBatch<false>)->Name("encode_batch/reference")->Arg(4096)->Arg(65536)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
