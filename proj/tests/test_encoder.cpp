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
#include <string>
#include <vector>

#include "causal/corpus.hpp"
#include "causal/encoder.hpp"
#include "causal/error.hpp"
#include "causal/index.hpp"
#include "causal/text.hpp"
#include "support/oracles.hpp"

using namespace causal;

namespace {

TokenSeq seq(std::vector<TokenId> ids) { return {ids, ids.size()}; }

EncoderParams random_params(std::size_t v, std::size_t de, std::size_t d, std::uint64_t seed,
                            bool normalize) {
  EncoderParams p = init_params(v, de, d, seed, normalize);
  std::mt19937_64 rng(seed + 100);
  std::normal_distribution<double> n(0.0, 0.3);
  for (double& b : p.bias) b = n(rng);
  return p;
}

}  // namespace

TEST_CASE("init_params: range, PAD row, zero bias, determinism") {
  const auto p = init_params(50, 16, 8, 42);
  CHECK(p == init_params(50, 16, 8, 42));
  CHECK(!(p == init_params(50, 16, 8, 43)));
  for (double v : p.embedding.row(Vocab::kPad)) CHECK(v == 0.0);
  for (double b : p.bias) CHECK(b == 0.0);
  const double bound = 1.0 / std::sqrt(16.0);
  for (double v : p.embedding.flat()) CHECK(std::abs(v) <= bound);
  for (double v : p.projection.flat()) CHECK(std::abs(v) <= bound);
  CHECK(p.vocab_size() == 50);
  CHECK(p.d_emb() == 16);
  CHECK(p.dim() == 8);
}

TEST_CASE("encode: zero parameters give the zero vector") {
  EncoderParams p = init_params(5, 3, 3, 1);
  p.embedding.fill(0.0);
  const auto out = encode(p, seq({2, 3}));
  for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("encode: identity projection returns the token row") {
  EncoderParams p = init_params(6, 4, 4, 2, false);
  p.projection.fill(0.0);
  for (int i = 0; i < 4; ++i) p.projection(i, i) = 1.0;
  const auto out = encode(p, seq({3}));
  for (int c = 0; c < 4; ++c) CHECK(out[c] == p.embedding(3, c));
}

TEST_CASE("encode: mean pooling, permutation invariance, PAD ignored") {
  const auto p = random_params(20, 6, 5, 3, true);
  CHECK(encode(p, seq({4, 4})) == encode(p, seq({4})));
  const auto a = encode(p, seq({2, 7, 9}));
  const auto b = encode(p, seq({9, 2, 7}));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-14));
  const auto c = encode(p, seq({2, 0, 7, 9, 0}));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(c[i]).epsilon(1e-14));
}

TEST_CASE("encode: unit norm output, zero fallback, bad ids") {
  const auto p = random_params(20, 6, 5, 4, true);
  const auto out = encode(p, seq({3, 5}));
  CHECK(l2_norm(out) == doctest::Approx(1.0).epsilon(1e-14));
  EncoderParams z = p;
  z.embedding.fill(0.0);
  std::fill(z.bias.begin(), z.bias.end(), 0.0);
  for (double v : encode(z, seq({3}))) CHECK(v == 0.0);
  CHECK_THROWS_AS(encode(p, seq({20})), ConfigError);
  CHECK_THROWS_AS(encode(p, seq({-1})), ConfigError);
}

TEST_CASE("validate catches shape and finiteness problems") {
  auto p = init_params(5, 3, 2, 0);
  CHECK_NOTHROW(p.validate());
  p.bias.push_back(0.0);
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = init_params(5, 3, 2, 0);
  p.projection(0, 0) = std::nan("");
  CHECK_THROWS_AS(p.validate(), NumericError);
}

TEST_CASE("encode_batch matches the serial reference and per-row encode") {
  const auto p = random_params(40, 8, 6, 5, true);
  std::mt19937_64 rng(1);
  std::vector<TokenSeq> seqs;
  for (int i = 0; i < 300; ++i) {
    std::vector<TokenId> ids(1 + rng() % 6);
    for (auto& t : ids) t = static_cast<TokenId>(rng() % 40);
    seqs.push_back(seq(ids));
  }
  const Matrix fast = encode_batch(p, seqs);
  const Matrix slow = reference::encode_batch(p, seqs);
  CHECK(fast == slow);
  for (std::size_t i = 0; i < seqs.size(); i += 37) {
    const auto row = encode(p, seqs[i]);
    for (std::size_t c = 0; c < row.size(); ++c) CHECK(fast(i, c) == row[c]);
  }
}

TEST_CASE("encode_grad closed forms") {
  auto p = random_params(8, 3, 3, 6, false);
  const std::vector<double> zero(3, 0.0);
  const auto g0 = encode_grad(p, seq({2, 3}), zero);
  for (double v : g0.projection.flat()) CHECK(v == 0.0);
  for (double v : g0.bias) CHECK(v == 0.0);
  for (const auto& [id, row] : g0.embedding_rows) {
    for (double v : row) CHECK(v == 0.0);
  }

  const std::vector<double> up{0.5, -1.0, 2.0};
  const auto g = encode_grad(p, seq({4}), up);
  CHECK(g.bias == up);
  REQUIRE(g.embedding_rows.size() == 1);
  CHECK(g.embedding_rows[0].first == 4);
  for (std::size_t r = 0; r < 3; ++r) {
    double expect = 0;
    for (std::size_t c = 0; c < 3; ++c) expect += p.projection(r, c) * up[c];
    CHECK(g.embedding_rows[0].second[r] == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("encode_grad matches central differences with and without normalization") {
  std::mt19937_64 rng(7);
  for (bool normalize : {false, true}) {
    for (int trial = 0; trial < 15; ++trial) {
      const std::size_t v = 10, de = 2 + rng() % 5, d = 2 + rng() % 5;
      auto p = random_params(v, de, d, 50 + trial, normalize);
      std::vector<TokenId> ids(1 + rng() % 4);
      for (auto& t : ids) t = static_cast<TokenId>(1 + rng() % (v - 1));
      const TokenSeq tokens = seq(ids);
      std::vector<double> up(d);
      for (auto& u : up) u = std::normal_distribution<double>(0, 1)(rng);
      const auto g = encode_grad(p, tokens, up);
      auto f = [&]() { return dot(up, encode(p, tokens)); };

      std::vector<double> emb(p.embedding.flat().begin(), p.embedding.flat().end());
      auto f_emb = [&]() {
        std::copy(emb.begin(), emb.end(), p.embedding.flat().begin());
        return f();
      };
      const auto num_emb = oracle::numeric_grad(emb, f_emb);
      std::copy(emb.begin(), emb.end(), p.embedding.flat().begin());
      std::vector<double> dense(emb.size(), 0.0);
      for (const auto& [id, row] : g.embedding_rows) {
        for (std::size_t c = 0; c < de; ++c) dense[id * de + c] = row[c];
      }
      CHECK(oracle::rel_err(dense, num_emb) <= 1e-4);

      std::vector<double> proj(p.projection.flat().begin(), p.projection.flat().end());
      auto f_proj = [&]() {
        std::copy(proj.begin(), proj.end(), p.projection.flat().begin());
        return f();
      };
      const auto num_proj = oracle::numeric_grad(proj, f_proj);
      std::copy(proj.begin(), proj.end(), p.projection.flat().begin());
      CHECK(oracle::rel_err({g.projection.flat().begin(), g.projection.flat().end()}, num_proj) <= 1e-4);

      std::vector<double> bias = p.bias;
      auto f_bias = [&]() {
        p.bias = bias;
        return f();
      };
      const auto num_bias = oracle::numeric_grad(bias, f_bias);
      p.bias = bias;
      CHECK(oracle::rel_err(g.bias, num_bias) <= 1e-4);
    }
  }
}

TEST_CASE("accumulate_encode_grad adds into dense buffers") {
  const auto p = random_params(8, 3, 4, 9, true);
  const std::vector<double> up{1, 2, 3, 4};
  ParamGrads acc(p);
  accumulate_encode_grad(p, seq({2, 5}), up, acc);
  accumulate_encode_grad(p, seq({2, 5}), up, acc);
  const auto g = encode_grad(p, seq({2, 5}), up);
  for (std::size_t i = 0; i < acc.bias.size(); ++i) CHECK(acc.bias[i] == doctest::Approx(2 * g.bias[i]));
  for (const auto& [id, row] : g.embedding_rows) {
    for (std::size_t c = 0; c < row.size(); ++c) CHECK(acc.embedding(id, c) == doctest::Approx(2 * row[c]));
  }
  for (double v : acc.embedding.row(7)) CHECK(v == 0.0);
}

TEST_CASE("word_dropout keeps at least one token and is deterministic") {
  const TokenSeq t = seq({2, 3, 4, 5});
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto d = word_dropout(t, 0.9, 3, s);
    CHECK(!d.ids.empty());
    CHECK(d.ids == word_dropout(t, 0.9, 3, s).ids);
  }
  CHECK(word_dropout(t, 0.0, 1, 1).ids == t.ids);
}

TEST_CASE("pretrain_semantic: zero epochs, determinism") {
  const std::vector<std::string> corpus{"a b c", "d e f", "a d", "b e"};
  const Vocab v = Vocab::build(corpus);
  SemanticPretrainConfig cfg;
  cfg.d_emb = 8;
  cfg.d = 8;
  cfg.batch_size = 2;
  cfg.epochs = 0;
  CHECK(pretrain_semantic(corpus, v, cfg, 5) == init_params(v.size(), 8, 8, 5));
  cfg.epochs = 3;
  const auto a = pretrain_semantic(corpus, v, cfg, 5);
  CHECK(a == pretrain_semantic(corpus, v, cfg, 5));
  CHECK(!(a == init_params(v.size(), 8, 8, 5)));
  CHECK_THROWS_AS(pretrain_semantic(std::vector<std::string>{}, v, cfg, 5), ConfigError);
}

TEST_CASE("pretrained semantic views retrieve each other on held-out sentences") {
  SyntheticWorld world({120, 120}, 13);
  const auto pairs = world.pairs(800);
  std::vector<std::string> train_texts;
  for (std::size_t i = 0; i < 600; ++i) {
    train_texts.push_back(pairs[i].cause_text);
    train_texts.push_back(pairs[i].effect_text);
  }
  const Vocab vocab = Vocab::build(train_texts);
  const SemanticPretrainConfig cfg;
  const auto params = pretrain_semantic(train_texts, vocab, cfg, 21);

  // 100 held-out sentences; view A of each is the query, view B the pool.
  std::vector<TokenSeq> a, b;
  for (std::size_t i = 600; i < 700; ++i) {
    const auto t = encode_tokens(vocab, pairs[i].cause_text);
    a.push_back(word_dropout(t, cfg.dropout, 77, 2 * i));
    b.push_back(word_dropout(t, cfg.dropout, 77, 2 * i + 1));
  }
  const Matrix qa = encode_batch(params, a), kb = encode_batch(params, b);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    std::size_t best = 0;
    double best_s = -1e300;
    for (std::size_t j = 0; j < 100; ++j) {
      const double s = dot(qa.row(i), kb.row(j));
      if (s > best_s) {
        best_s = s;
        best = j;
      }
    }
    correct += best == i;
  }
  MESSAGE("view retrieval top-1: " << correct << "/100");
  CHECK(correct >= 90);
}
