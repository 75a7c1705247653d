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

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "causal/error.hpp"
#include "causal/loss.hpp"
#include "support/oracles.hpp"

using namespace causal;

namespace {

Matrix from_rows(std::initializer_list<std::vector<double>> rows) {
  Matrix m(rows.size(), rows.begin()->size());
  std::size_t r = 0;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) m(r, c) = row[c];
    ++r;
  }
  return m;
}

std::vector<double> flat(const Matrix& m) { return {m.flat().begin(), m.flat().end()}; }

}  // namespace

TEST_CASE("similarity kinds and the cosine zero fallback") {
  const std::vector<double> e1{1, 0}, e2{0, 1}, zero{0, 0}, v{3, 4};
  CHECK(similarity(Similarity::kDot, e1, e1) == 1.0);
  CHECK(similarity(Similarity::kCosine, e1, e2) == 0.0);
  CHECK(similarity(Similarity::kCosine, v, zero) == 0.0);
  CHECK(similarity(Similarity::kCosine, v, v) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(similarity(Similarity::kDot, v, e2) == 4.0);
  CHECK_THROWS_AS(similarity(Similarity::kDot, e1, std::vector<double>{1, 2, 3}), ConfigError);
  CHECK(parse_similarity("cosine") == Similarity::kCosine);
  CHECK(to_string(Similarity::kDot) == "dot");
  CHECK_THROWS_AS(parse_similarity("l2"), ConfigError);
}

TEST_CASE("single-row batch has zero loss and zero gradient") {
  const Matrix q = from_rows({{0.3, -2.0}});
  const Matrix k = from_rows({{1.0, 5.0}});
  const auto out = inbatch_softmax_loss(q, k, Similarity::kDot);
  CHECK(out.value == 0.0);
  CHECK(out.per_example == std::vector<double>{0.0});
  for (double g : out.grad_q.flat()) CHECK(g == 0.0);
}

TEST_CASE("identity batch gives log(1 + e^-1) per example") {
  const Matrix eye = from_rows({{1, 0}, {0, 1}});
  const auto out = inbatch_softmax_loss(eye, eye, Similarity::kDot);
  const double expected = 0.31326168751822286;  // log(1 + exp(-1))
  CHECK(std::abs(out.per_example[0] - expected) < 1e-15);
  CHECK(std::abs(out.per_example[1] - expected) < 1e-15);
  CHECK(std::abs(out.value - expected) < 1e-15);
}

TEST_CASE("duplicate keys force a uniform softmax") {
  const Matrix q = from_rows({{0.2, 0.7}, {-1.0, 0.4}});
  const Matrix k = from_rows({{0.5, 0.5}, {0.5, 0.5}});
  const auto out = inbatch_softmax_loss(q, k, Similarity::kDot);
  CHECK(out.per_example[0] == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(out.per_example[1] == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("inbatch loss rejects non-finite input and shape mismatch") {
  Matrix q = from_rows({{1, 0}, {0, 1}});
  Matrix k = q;
  k(1, 1) = std::nan("");
  CHECK_THROWS_AS(inbatch_softmax_loss(q, k, Similarity::kDot), NumericError);
  q(0, 0) = INFINITY;
  CHECK_THROWS_AS(inbatch_softmax_loss(q, q, Similarity::kDot), NumericError);
  CHECK_THROWS_AS(inbatch_softmax_loss(from_rows({{1, 0}}), from_rows({{1, 0}, {0, 1}}), Similarity::kDot),
                  ConfigError);
  CHECK_THROWS_AS(total_loss(from_rows({{1, 0}}), from_rows({{1, 0}, {0, 1}}), from_rows({{1, 0}}),
                             from_rows({{1, 0}}), {}),
                  ConfigError);
}

TEST_CASE("total loss matches the brute-force four-term oracle") {
  std::mt19937_64 rng(17);
  for (Similarity kind : {Similarity::kDot, Similarity::kCosine}) {
    for (double beta : {0.0, 0.1, 1.0, 2.0, 5.0}) {
      const auto a = oracle::random_matrix(4, 8, rng), b = oracle::random_matrix(4, 8, rng);
      const auto c = oracle::random_matrix(4, 8, rng), d = oracle::random_matrix(4, 8, rng);
      const auto out = total_loss(a, b, c, d, {beta, kind});
      const double ref = oracle::total_loss(a, b, c, d, beta, kind);
      CHECK(std::abs(out.value - ref) <= 1e-10 * std::abs(ref));
    }
  }
}

TEST_CASE("beta = 0 reduces exactly to the causal terms; B = 1 gives 0") {
  std::mt19937_64 rng(3);
  const auto a = oracle::random_matrix(6, 5, rng), b = oracle::random_matrix(6, 5, rng);
  const auto c = oracle::random_matrix(6, 5, rng), d = oracle::random_matrix(6, 5, rng);
  const auto out = total_loss(a, b, c, d, {0.0, Similarity::kDot});
  CHECK(out.value == out.causal_cause.value + out.causal_effect.value);
  CHECK(out.grad_cause == out.causal_cause.grad_q);
  CHECK(out.grad_effect == out.causal_effect.grad_q);

  const auto one = total_loss(oracle::random_matrix(1, 5, rng), oracle::random_matrix(1, 5, rng),
                              oracle::random_matrix(1, 5, rng), oracle::random_matrix(1, 5, rng),
                              {3.0, Similarity::kCosine});
  CHECK(one.value == 0.0);
}

TEST_CASE("loss and gradient terms use the documented query/key pairing") {
  std::mt19937_64 rng(8);
  const auto a = oracle::random_matrix(5, 4, rng), b = oracle::random_matrix(5, 4, rng);
  const auto c = oracle::random_matrix(5, 4, rng), d = oracle::random_matrix(5, 4, rng);
  const auto out = total_loss(a, b, c, d, {1.0, Similarity::kDot});
  CHECK(out.causal_cause.per_example == inbatch_softmax_loss(a, d, Similarity::kDot).per_example);
  CHECK(out.causal_effect.per_example == inbatch_softmax_loss(b, c, Similarity::kDot).per_example);
  CHECK(out.semantic_cause.per_example == inbatch_softmax_loss(a, c, Similarity::kDot).per_example);
  CHECK(out.semantic_effect.per_example == inbatch_softmax_loss(b, d, Similarity::kDot).per_example);
}

TEST_CASE("per-example losses are non-negative and permute with the batch") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 7;
    const auto q = oracle::random_matrix(n, 6, rng, 3.0), k = oracle::random_matrix(n, 6, rng, 3.0);
    const auto out = inbatch_softmax_loss(q, k, Similarity::kDot);
    for (double v : out.per_example) CHECK(v >= 0.0);

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = (i + 1) % n;
    Matrix qp(n, 6), kp(n, 6);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < 6; ++c) {
        qp(i, c) = q(perm[i], c);
        kp(i, c) = k(perm[i], c);
      }
    }
    const auto pout = inbatch_softmax_loss(qp, kp, Similarity::kDot);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(pout.per_example[i] == doctest::Approx(out.per_example[perm[i]]).epsilon(1e-12));
    }
    CHECK(pout.value == doctest::Approx(out.value).epsilon(1e-12));
  }
}

TEST_CASE("adding a constant to a similarity row leaves that row's loss unchanged") {
  std::mt19937_64 rng(4);
  const std::size_t n = 6, d = 5;
  const auto q = oracle::random_matrix(n, d, rng), k = oracle::random_matrix(n, d, rng);
  // Extra coordinate: every key holds 1, query i holds its own shift.
  Matrix qs(n, d + 1), ks(n, d + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      qs(i, c) = q(i, c);
      ks(i, c) = k(i, c);
    }
    qs(i, d) = 50.0 * (static_cast<double>(i) - 2.5);
    ks(i, d) = 1.0;
  }
  const auto base = inbatch_softmax_loss(q, k, Similarity::kDot);
  const auto shifted = inbatch_softmax_loss(qs, ks, Similarity::kDot);
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(base.per_example[i] - shifted.per_example[i]) <= 1e-12);
}

TEST_CASE("huge logits stay finite") {
  const Matrix q = from_rows({{1000, 0}, {0, 1000}});
  const Matrix k = from_rows({{1, 0}, {0, 1}});
  const auto out = inbatch_softmax_loss(q, k, Similarity::kDot);
  CHECK(std::isfinite(out.value));
  CHECK(out.value == doctest::Approx(0.0));
  const auto rev = inbatch_softmax_loss(q, from_rows({{0, 1}, {1, 0}}), Similarity::kDot);
  CHECK(rev.value == doctest::Approx(1000.0));
}

TEST_CASE("analytic gradients match central differences for every term") {
  std::mt19937_64 rng(12);
  for (Similarity kind : {Similarity::kDot, Similarity::kCosine}) {
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t n = 2 + rng() % 5, d = 2 + rng() % 6;
      auto a = oracle::random_matrix(n, d, rng), b = oracle::random_matrix(n, d, rng);
      const auto c = oracle::random_matrix(n, d, rng), e = oracle::random_matrix(n, d, rng);
      const LossConfig cfg{0.7, kind};
      const auto out = total_loss(a, b, c, e, cfg);

      std::vector<double> xa = flat(a), xb = flat(b);
      auto f = [&]() {
        Matrix ma(n, d), mb(n, d);
        std::copy(xa.begin(), xa.end(), ma.flat().begin());
        std::copy(xb.begin(), xb.end(), mb.flat().begin());
        return total_loss(ma, mb, c, e, cfg).value;
      };
      CHECK(oracle::rel_err(flat(out.grad_cause), oracle::numeric_grad(xa, f)) <= 1e-4);
      CHECK(oracle::rel_err(flat(out.grad_effect), oracle::numeric_grad(xb, f)) <= 1e-4);

      std::vector<double> xq = flat(a);
      auto g = [&]() {
        Matrix mq(n, d);
        std::copy(xq.begin(), xq.end(), mq.flat().begin());
        return inbatch_softmax_loss(mq, c, kind).value;
      };
      CHECK(oracle::rel_err(flat(inbatch_softmax_loss(a, c, kind).grad_q), oracle::numeric_grad(xq, g)) <= 1e-4);
    }
  }
}
