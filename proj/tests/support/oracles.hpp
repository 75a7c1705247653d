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

// Brute-force reference computations used by the tests. Nothing here calls
// into the library's math; each quantity is recomputed from its definition.

#ifndef CAUSAL_TESTS_ORACLES_HPP_
#define CAUSAL_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "causal/loss.hpp"
#include "causal/matrix.hpp"

namespace oracle {

using causal::Matrix;
using causal::Similarity;

inline long double sim(Similarity kind, const Matrix& a, std::size_t i, const Matrix& b,
                       std::size_t j) {
  long double uv = 0, uu = 0, vv = 0;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    uv += static_cast<long double>(a(i, c)) * b(j, c);
    uu += static_cast<long double>(a(i, c)) * a(i, c);
    vv += static_cast<long double>(b(j, c)) * b(j, c);
  }
  if (kind == Similarity::kDot) return uv;
  if (uu == 0 || vv == 0) return 0;
  return uv / (std::sqrt(uu) * std::sqrt(vv));
}

// -log softmax_j(s_ij) at j = i, written as log(1 + sum_{j != i} exp(s_ij - s_ii)).
inline std::vector<double> inbatch_losses(const Matrix& q, const Matrix& k, Similarity kind) {
  std::vector<double> out(q.rows());
  for (std::size_t i = 0; i < q.rows(); ++i) {
    const long double sii = sim(kind, q, i, k, i);
    long double rest = 0;
    for (std::size_t j = 0; j < k.rows(); ++j) {
      if (j != i) rest += std::exp(sim(kind, q, i, k, j) - sii);
    }
    out[i] = static_cast<double>(std::log1p(rest));
  }
  return out;
}

inline double mean(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : static_cast<double>(s / v.size());
}

inline double total_loss(const Matrix& e1p, const Matrix& e2p, const Matrix& e1pp,
                         const Matrix& e2pp, double beta, Similarity kind) {
  const double c = mean(inbatch_losses(e1p, e2pp, kind));
  const double e = mean(inbatch_losses(e2p, e1pp, kind));
  const double sc = mean(inbatch_losses(e1p, e1pp, kind));
  const double se = mean(inbatch_losses(e2p, e2pp, kind));
  return c + e + beta * (sc + se);
}

// Full ranking of every document: score descending, then id ascending.
inline std::vector<std::size_t> full_sort(const std::vector<double>& scores,
                                          const std::vector<std::string>& ids) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  });
  return order;
}

// Metrics from a complete ranking given as doc ids in rank order.
struct Metrics {
  double hit = 0, mrr = 0, ndcg = 0;
};

inline Metrics metrics_from_ranking(const std::vector<std::string>& ranked,
                                    const std::vector<std::string>& gold, std::size_t k) {
  Metrics m;
  double dcg = 0;
  bool first = true;
  for (std::size_t r = 0; r < ranked.size() && r < k; ++r) {
    if (std::find(gold.begin(), gold.end(), ranked[r]) == gold.end()) continue;
    dcg += 1.0 / std::log2(static_cast<double>(r + 2));
    if (first) {
      m.hit = 1;
      m.mrr = 1.0 / static_cast<double>(r + 1);
      first = false;
    }
  }
  double idcg = 0;
  for (std::size_t r = 0; r < std::min(k, gold.size()); ++r) {
    idcg += 1.0 / std::log2(static_cast<double>(r + 2));
  }
  m.ndcg = idcg > 0 ? dcg / idcg : 0.0;
  return m;
}

// Central difference of f along every coordinate of x.
inline std::vector<double> numeric_grad(std::vector<double>& x,
                                        const std::function<double()>& f, double h = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f();
    x[i] = saved - h;
    const double down = f();
    x[i] = saved;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

// ||a - b|| / max(||a||, ||b||), or 0 when both are zero.
inline double rel_err(const std::vector<double>& a, const std::vector<double>& b) {
  long double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (static_cast<long double>(a[i]) - b[i]) * (static_cast<long double>(a[i]) - b[i]);
    na += static_cast<long double>(a[i]) * a[i];
    nb += static_cast<long double>(b[i]) * b[i];
  }
  const long double scale = std::sqrt(std::max(na, nb));
  return scale == 0 ? 0.0 : static_cast<double>(std::sqrt(diff) / scale);
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                            double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (double& v : m.flat()) v = n(rng);
  return m;
}

}  // namespace oracle

#endif  // CAUSAL_TESTS_ORACLES_HPP_
