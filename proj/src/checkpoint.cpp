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

#include "causal/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "binary_io.hpp"
#include "causal/error.hpp"

namespace causal {

namespace {

constexpr std::size_t kPrefixBytes = 12;

std::size_t floats_per_encoder(std::size_t vocab, std::size_t d_emb, std::size_t d) {
  return vocab * d_emb + d_emb * d + d;
}

void put_params(std::string& out, const EncoderParams& p) {
  for (double x : p.embedding.flat()) binary::put_f32(out, static_cast<float>(x));
  for (double x : p.projection.flat()) binary::put_f32(out, static_cast<float>(x));
  for (double x : p.bias) binary::put_f32(out, static_cast<float>(x));
}

EncoderParams get_params(const char*& p, std::size_t vocab, std::size_t d_emb, std::size_t d,
                         bool normalize) {
  EncoderParams params;
  params.embedding = Matrix(vocab, d_emb);
  params.projection = Matrix(d_emb, d);
  params.bias.resize(d);
  params.normalize_output = normalize;
  auto read = [&p](std::span<double> dst) {
    for (double& x : dst) {
      x = binary::get_f32(p);
      p += 4;
    }
  };
  read(params.embedding.flat());
  read(params.projection.flat());
  read(params.bias);
  return params;
}

nlohmann::json header_json(const Checkpoint& ckpt) {
  const auto& c = ckpt.config;
  const std::size_t payload =
      4 * 3 * floats_per_encoder(ckpt.vocab.size(), ckpt.cause.d_emb(), ckpt.cause.dim());
  return {{"vocab_size", ckpt.vocab.size()},
          {"d_emb", ckpt.cause.d_emb()},
          {"d", ckpt.cause.dim()},
          {"normalize_output", ckpt.cause.normalize_output},
          {"beta", c.loss.beta},
          {"similarity", to_string(c.loss.similarity)},
          {"step", ckpt.step},
          {"val_metric", ckpt.val_metric},
          {"seed", c.seed},
          {"max_len", c.max_len},
          {"payload_bytes", payload}};
}

void check_shape(const EncoderParams& p, const Checkpoint& ckpt, const char* name) {
  if (p.vocab_size() != ckpt.vocab.size() || p.d_emb() != ckpt.cause.d_emb() ||
      p.dim() != ckpt.cause.dim() || p.projection.rows() != p.d_emb() ||
      p.projection.cols() != p.dim()) {
    throw ConfigError(std::string("checkpoint ") + name + " encoder has inconsistent shape");
  }
}

}  // namespace

std::string checkpoint_header(const Checkpoint& ckpt) { return header_json(ckpt).dump(); }

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  check_shape(ckpt.cause, ckpt, "cause");
  check_shape(ckpt.effect, ckpt, "effect");
  check_shape(ckpt.semantic, ckpt, "semantic");
  const std::string header = checkpoint_header(ckpt);
  std::string out(kCheckpointMagic);
  binary::put_u32(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  put_params(out, ckpt.cause);
  put_params(out, ckpt.effect);
  put_params(out, ckpt.semantic);
  std::ostringstream vocab;
  ckpt.vocab.write(vocab);
  out += vocab.str();
  return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  if (bytes.size() >= kCheckpointMagic.size() &&
      bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) {
    throw MagicError("not a checkpoint (bad magic bytes)");
  }
  if (bytes.size() < kPrefixBytes) throw TruncatedError("checkpoint shorter than its prefix");
  const std::size_t header_len = binary::get_u32(bytes.data() + 8);
  if (bytes.size() - kPrefixBytes < header_len) throw TruncatedError("checkpoint header cut short");

  Checkpoint ckpt;
  std::size_t vocab_size = 0, d_emb = 0, d = 0, payload = 0;
  bool normalize = true;
  try {
    const auto h = nlohmann::json::parse(bytes.substr(kPrefixBytes, header_len));
    vocab_size = h.at("vocab_size").get<std::size_t>();
    d_emb = h.at("d_emb").get<std::size_t>();
    d = h.at("d").get<std::size_t>();
    payload = h.at("payload_bytes").get<std::size_t>();
    normalize = h.at("normalize_output").get<bool>();
    ckpt.config.loss.beta = h.at("beta").get<double>();
    ckpt.config.loss.similarity = parse_similarity(h.at("similarity").get<std::string>());
    ckpt.config.seed = h.at("seed").get<std::uint64_t>();
    ckpt.config.max_len = h.value("max_len", kDefaultMaxLen);
    ckpt.step = h.at("step").get<std::int64_t>();
    ckpt.val_metric = h.at("val_metric").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  }
  ckpt.config.d_emb = d_emb;
  ckpt.config.d = d;
  ckpt.config.normalize_output = normalize;

  if (vocab_size < 2 || d_emb < 1 || d < 1 ||
      payload != 4 * 3 * floats_per_encoder(vocab_size, d_emb, d)) {
    throw IntegrityError("checkpoint header dimensions (vocab " + std::to_string(vocab_size) +
                         ", d_emb " + std::to_string(d_emb) + ", d " + std::to_string(d) +
                         ") do not match its payload of " + std::to_string(payload) + " bytes");
  }
  const std::size_t body = kPrefixBytes + header_len;
  if (bytes.size() - body < payload) {
    throw TruncatedError("checkpoint payload cut short: " + std::to_string(bytes.size() - body) +
                         " of " + std::to_string(payload) + " bytes");
  }

  const char* p = bytes.data() + body;
  ckpt.cause = get_params(p, vocab_size, d_emb, d, normalize);
  ckpt.effect = get_params(p, vocab_size, d_emb, d, normalize);
  ckpt.semantic = get_params(p, vocab_size, d_emb, d, normalize);

  std::istringstream vocab_in(std::string(bytes.substr(body + payload)));
  ckpt.vocab = Vocab::read(vocab_in);
  if (ckpt.vocab.size() != vocab_size) {
    throw IntegrityError("checkpoint vocabulary has " + std::to_string(ckpt.vocab.size()) +
                         " entries, header says " + std::to_string(vocab_size));
  }
  if (vocab_in.peek() != std::char_traits<char>::eof()) {
    throw IntegrityError("trailing bytes after checkpoint vocabulary");
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed on " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return deserialize_checkpoint(buf.str());
  } catch (const MagicError& e) {
    throw MagicError(path.string() + ": " + e.what());
  } catch (const TruncatedError& e) {
    throw TruncatedError(path.string() + ": " + e.what());
  } catch (const IntegrityError& e) {
    throw IntegrityError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace causal
