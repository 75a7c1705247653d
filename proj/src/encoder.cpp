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

#include "causal/encoder.hpp"

#include <cmath>
#include <numeric>

#include "causal/error.hpp"
#include "causal/loss.hpp"
#include "causal/optim.hpp"
#include "causal/random.hpp"
#include "encoder_detail.hpp"

namespace causal {

std::string to_string(EncoderRole role) {
  switch (role) {
    case EncoderRole::kCause: return "cause";
    case EncoderRole::kEffect: return "effect";
    case EncoderRole::kSemantic: return "semantic";
  }
  return "unknown";
}

void EncoderParams::validate() const {
  if (embedding.rows() < 2 || embedding.cols() < 1) {
    throw ConfigError("encoder embedding must be at least 2 x 1");
  }
  if (projection.rows() != embedding.cols() || projection.cols() != bias.size() || bias.empty()) {
    throw ConfigError("encoder projection must be d_emb x d with a d-sized bias");
  }
  if (!all_finite(embedding.flat()) || !all_finite(projection.flat()) || !all_finite(bias)) {
    throw NumericError("encoder parameters contain non-finite values");
  }
}

EncoderParams init_params(std::size_t vocab_size, std::size_t d_emb, std::size_t d,
                          std::uint64_t seed, bool normalize_output) {
  if (vocab_size < 2 || d_emb < 1 || d < 1) {
    throw ConfigError("init_params: vocab_size >= 2 and dims >= 1 required");
  }
  EncoderParams p;
  p.embedding = Matrix(vocab_size, d_emb);
  p.projection = Matrix(d_emb, d);
  p.bias.assign(d, 0.0);
  p.normalize_output = normalize_output;
  const double bound = 1.0 / std::sqrt(static_cast<double>(d_emb));
  Rng rng = make_rng(seed);
  for (std::size_t r = 0; r < vocab_size; ++r) {
    for (std::size_t c = 0; c < d_emb; ++c) {
      const double x = uniform_real(rng, -bound, bound);
      p.embedding(r, c) = r == static_cast<std::size_t>(Vocab::kPad) ? 0.0 : x;
    }
  }
  for (double& x : p.projection.flat()) x = uniform_real(rng, -bound, bound);
  return p;
}

namespace detail {

void check_tokens(const EncoderParams& params, const TokenSeq& tokens) {
  const auto v = static_cast<TokenId>(params.vocab_size());
  for (TokenId id : tokens.ids) {
    if (id < 0 || id >= v) {
      throw ConfigError("token id " + std::to_string(id) + " outside vocabulary of size " +
                        std::to_string(v));
    }
  }
}

Forward forward(const EncoderParams& params, const TokenSeq& tokens) {
  const std::size_t d_emb = params.d_emb();
  const std::size_t d = params.dim();
  Forward f;
  f.pooled.assign(d_emb, 0.0);
  for (TokenId id : tokens.ids) {
    if (id == Vocab::kPad) continue;
    const auto row = params.embedding.row(static_cast<std::size_t>(id));
    for (std::size_t k = 0; k < d_emb; ++k) f.pooled[k] += row[k];
    ++f.count;
  }
  if (f.count > 0) {
    const double inv = 1.0 / static_cast<double>(f.count);
    for (double& x : f.pooled) x *= inv;
  }
  f.pre = params.bias;
  for (std::size_t k = 0; k < d_emb; ++k) {
    const double hk = f.pooled[k];
    if (hk == 0.0) continue;
    const auto prow = params.projection.row(k);
    for (std::size_t j = 0; j < d; ++j) f.pre[j] += hk * prow[j];
  }
  f.norm = l2_norm(f.pre);
  f.out = f.pre;
  f.normalized = params.normalize_output && f.norm > 0.0;
  if (f.normalized) {
    for (double& x : f.out) x /= f.norm;
  }
  return f;
}

std::vector<double> backward_pre(const Forward& f, std::span<const double> upstream) {
  std::vector<double> g(upstream.begin(), upstream.end());
  if (!f.normalized) return g;
  // Jacobian of z/|z| is (I - y y^T) / |z|.
  const double yu = dot(f.out, upstream);
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = (g[j] - f.out[j] * yu) / f.norm;
  return g;
}

std::vector<double> backward_pooled(const EncoderParams& params, std::span<const double> g_pre) {
  std::vector<double> g(params.d_emb(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = dot(params.projection.row(k), g_pre);
  return g;
}

}  // namespace detail

std::vector<double> encode(const EncoderParams& params, const TokenSeq& tokens) {
  detail::check_tokens(params, tokens);
  return detail::forward(params, tokens).out;
}

EncoderGrad encode_grad(const EncoderParams& params, const TokenSeq& tokens,
                        std::span<const double> upstream) {
  detail::check_tokens(params, tokens);
  if (upstream.size() != params.dim()) throw ConfigError("encode_grad: upstream has wrong size");
  const auto f = detail::forward(params, tokens);
  const auto g_pre = detail::backward_pre(f, upstream);

  EncoderGrad g;
  g.bias = g_pre;
  g.projection = Matrix(params.d_emb(), params.dim());
  for (std::size_t k = 0; k < params.d_emb(); ++k) {
    for (std::size_t j = 0; j < params.dim(); ++j) g.projection(k, j) = f.pooled[k] * g_pre[j];
  }
  if (f.count == 0) return g;

  const auto g_pooled = detail::backward_pooled(params, g_pre);
  const double inv = 1.0 / static_cast<double>(f.count);
  std::vector<TokenId> ids;
  for (TokenId id : tokens.ids) {
    if (id != Vocab::kPad) ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  for (std::size_t i = 0; i < ids.size();) {
    std::size_t j = i;
    while (j < ids.size() && ids[j] == ids[i]) ++j;
    const double scale = inv * static_cast<double>(j - i);
    std::vector<double> row(g_pooled.size());
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = scale * g_pooled[k];
    g.embedding_rows.emplace_back(ids[i], std::move(row));
    i = j;
  }
  return g;
}

ParamGrads::ParamGrads(const EncoderParams& shape)
    : embedding(shape.embedding.rows(), shape.embedding.cols()),
      projection(shape.projection.rows(), shape.projection.cols()),
      bias(shape.bias.size(), 0.0) {}

void ParamGrads::zero() {
  embedding.fill(0.0);
  projection.fill(0.0);
  std::fill(bias.begin(), bias.end(), 0.0);
}

void accumulate_encode_grad(const EncoderParams& params, const TokenSeq& tokens,
                            std::span<const double> upstream, ParamGrads& grads) {
  detail::check_tokens(params, tokens);
  const auto f = detail::forward(params, tokens);
  const auto g_pre = detail::backward_pre(f, upstream);
  for (std::size_t j = 0; j < g_pre.size(); ++j) grads.bias[j] += g_pre[j];
  for (std::size_t k = 0; k < params.d_emb(); ++k) {
    const double hk = f.pooled[k];
    if (hk == 0.0) continue;
    auto row = grads.projection.row(k);
    for (std::size_t j = 0; j < g_pre.size(); ++j) row[j] += hk * g_pre[j];
  }
  if (f.count == 0) return;
  const auto g_pooled = detail::backward_pooled(params, g_pre);
  const double inv = 1.0 / static_cast<double>(f.count);
  for (TokenId id : tokens.ids) {
    if (id == Vocab::kPad) continue;
    auto row = grads.embedding.row(static_cast<std::size_t>(id));
    for (std::size_t k = 0; k < row.size(); ++k) row[k] += inv * g_pooled[k];
  }
}

TokenSeq word_dropout(const TokenSeq& tokens, double rate, std::uint64_t seed, std::uint64_t stream) {
  Rng rng = make_rng(seed, stream);
  TokenSeq view;
  view.original_length = tokens.original_length;
  for (TokenId id : tokens.ids) {
    if (uniform_real(rng, 0.0, 1.0) >= rate) view.ids.push_back(id);
  }
  if (view.ids.empty()) view.ids.push_back(tokens.ids[uniform_index(rng, tokens.ids.size())]);
  return view;
}

EncoderParams pretrain_semantic(std::span<const std::string> corpus, const Vocab& vocab,
                                const SemanticPretrainConfig& cfg, std::uint64_t seed) {
  if (corpus.empty()) throw ConfigError("semantic pretraining needs a non-empty corpus");
  if (cfg.batch_size < 2) throw ConfigError("semantic pretraining batch_size must be >= 2");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");

  EncoderParams params = init_params(vocab.size(), cfg.d_emb, cfg.d, seed, cfg.normalize_output);
  if (cfg.epochs <= 0) return params;

  std::vector<TokenSeq> seqs;
  seqs.reserve(corpus.size());
  for (const auto& s : corpus) seqs.push_back(encode_tokens(vocab, s, cfg.max_len));

  const std::size_t batch = std::min(cfg.batch_size, seqs.size());
  OptimizerState state(params);
  ParamGrads grads(params);
  const AdamWConfig opt{cfg.learning_rate, 0.9, 0.999, 1e-8, cfg.weight_decay};
  std::vector<std::size_t> order(seqs.size());
  std::vector<TokenSeq> view_a(batch), view_b(batch);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = make_rng(seed, 1000 + static_cast<std::uint64_t>(epoch));
    shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start + batch <= order.size(); start += batch) {
      for (std::size_t i = 0; i < batch; ++i) {
        const std::size_t idx = order[start + i];
        const std::uint64_t stream = (static_cast<std::uint64_t>(epoch) * seqs.size() + idx) * 2;
        view_a[i] = word_dropout(seqs[idx], cfg.dropout, seed, stream);
        view_b[i] = word_dropout(seqs[idx], cfg.dropout, seed, stream + 1);
      }
      const Matrix a = encode_batch(params, view_a);
      const Matrix b = encode_batch(params, view_b);
      // Each side is contrasted against the other with the other held fixed.
      const LossOutput la = inbatch_softmax_loss(a, b, Similarity::kDot);
      const LossOutput lb = inbatch_softmax_loss(b, a, Similarity::kDot);
      grads.zero();
      for (std::size_t i = 0; i < batch; ++i) {
        accumulate_encode_grad(params, view_a[i], la.grad_q.row(i), grads);
        accumulate_encode_grad(params, view_b[i], lb.grad_q.row(i), grads);
      }
      adamw_step(params, grads, state, opt);
    }
  }
  return params;
}

namespace reference {

Matrix encode_batch(const EncoderParams& params, std::span<const TokenSeq> seqs) {
  Matrix out(seqs.size(), params.dim());
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const auto v = encode(params, seqs[i]);
    std::copy(v.begin(), v.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace reference

}  // namespace causal
