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

#include "cli.hpp"

#include <omp.h>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "causal/checkpoint.hpp"
#include "causal/corpus.hpp"
#include "causal/digest.hpp"
#include "causal/embedding_io.hpp"
#include "causal/error.hpp"
#include "causal/eval.hpp"
#include "causal/experiment.hpp"
#include "causal/index.hpp"
#include "causal/train.hpp"

namespace causal::cli {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

// --- run manifest -----------------------------------------------------------

class Manifest {
 public:
  Manifest(std::string command, const CLI::App& app) : command_(std::move(command)) {
    for (const CLI::Option* opt : app.get_options()) {
      const std::string name = opt->get_name();
      if (name == "--help" || name == "--manifest-out") continue;
      if (opt->count() > 0) {
        const auto& values = opt->results();
        flags_[name] = values.size() == 1 ? ordered_json(values.front()) : ordered_json(values);
      } else {
        flags_[name] = opt->get_default_str();
      }
    }
  }

  void seed(std::uint64_t s) { seeds_.push_back(s); }
  void input(const fs::path& p) { inputs_[p.string()] = file_sha256(p); }
  void output(const fs::path& p) { outputs_.push_back(p.string()); }
  // Effective values after presets and adoption from --semantic-from.
  void resolved(const TrainConfig& c) {
    resolved_ = {{"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
                 {"epochs", c.epochs},         {"weight_decay", c.weight_decay},
                 {"beta", c.loss.beta},        {"similarity", to_string(c.loss.similarity)},
                 {"d_emb", c.d_emb},           {"d", c.d},
                 {"max_len", c.max_len},       {"normalize_output", c.normalize_output},
                 {"seed", c.seed}};
  }

  void write(const fs::path& path) const {
    ordered_json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["command"] = command_;
    j["flags"] = flags_;
    j["seeds"] = seeds_;
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    if (!resolved_.is_null()) j["resolved"] = resolved_;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out << j.dump(2) << '\n';
  }

 private:
  std::string command_;
  ordered_json flags_ = ordered_json::object();
  std::vector<std::uint64_t> seeds_;
  ordered_json inputs_ = ordered_json::object();
  std::vector<std::string> outputs_;
  ordered_json resolved_;
};

fs::path manifest_path(const std::string& flag, const fs::path& primary) {
  if (!flag.empty()) return flag;
  fs::path p = primary;
  p += ".manifest.json";
  return p;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// --- shared training flags --------------------------------------------------

struct TrainFlags {
  double beta = 1.0;
  std::uint64_t seed = 0;
  int epochs = 50;
  double lr = 1e-3;
  std::size_t batch = 64;
  double weight_decay = 0.01;
  std::size_t d = 64;
  std::size_t d_emb = 64;
  std::size_t max_len = kDefaultMaxLen;
  std::string similarity = "dot";
  bool no_normalize = false;
  bool paper = false;
  int min_freq = 1;
  SemanticPretrainConfig semantic;
  std::string semantic_from;
  bool verbose = false;

  CLI::Option* epochs_opt = nullptr;
  CLI::Option* lr_opt = nullptr;
  CLI::Option* batch_opt = nullptr;

  void add(CLI::App* app) {
    app->add_option("--beta", beta, "weight of the semantic-preservation terms")->capture_default_str();
    app->add_option("--seed", seed, "seed for initialization, shuffling and pretraining")->capture_default_str();
    epochs_opt = app->add_option("--epochs", epochs, "training epochs")->capture_default_str();
    lr_opt = app->add_option("--lr", lr, "AdamW learning rate")->capture_default_str();
    batch_opt = app->add_option("--batch-size", batch, "batch size (in-batch negatives)")->capture_default_str();
    app->add_option("--weight-decay", weight_decay, "decoupled weight decay")->capture_default_str();
    app->add_option("--d", d, "output dimension")->capture_default_str();
    app->add_option("--d-emb", d_emb, "token embedding dimension")->capture_default_str();
    app->add_option("--max-len", max_len, "tokens kept per text")->capture_default_str();
    app->add_option("--similarity", similarity, "dot or cosine")
        ->check(CLI::IsMember({"dot", "cosine"}))
        ->capture_default_str();
    app->add_flag("--no-normalize", no_normalize, "skip L2 normalization of encoder outputs");
    app->add_flag("--paper-hparams", paper, "batch 64, lr 1e-5, 500 epochs (explicit flags still win)");
    app->add_option("--min-freq", min_freq, "vocabulary frequency threshold")->capture_default_str();
    app->add_option("--semantic-epochs", semantic.epochs, "semantic pretraining epochs")->capture_default_str();
    app->add_option("--semantic-dropout", semantic.dropout, "word dropout for pretraining views")->capture_default_str();
    app->add_option("--semantic-lr", semantic.learning_rate, "semantic pretraining learning rate")->capture_default_str();
    app->add_option("--semantic-batch-size", semantic.batch_size, "semantic pretraining batch size")->capture_default_str();
    app->add_option("--semantic-from", semantic_from,
                    "use the semantic encoder of a checkpoint, or word vectors from an embedding file");
    app->add_flag("--verbose", verbose, "print per-epoch loss and validation Hit@1");
  }

  PipelineConfig config() const {
    PipelineConfig pc;
    TrainConfig& t = pc.train;
    if (paper) t = TrainConfig::paper_hparams(t);
    if (epochs_opt->count() > 0 || !paper) t.epochs = epochs;
    if (lr_opt->count() > 0 || !paper) t.learning_rate = lr;
    if (batch_opt->count() > 0 || !paper) t.batch_size = batch;
    t.weight_decay = weight_decay;
    t.loss.beta = beta;
    t.loss.similarity = parse_similarity(similarity);
    t.seed = seed;
    t.d = d;
    t.d_emb = d_emb;
    t.max_len = max_len;
    t.normalize_output = !no_normalize;
    pc.semantic = semantic;
    pc.min_freq = min_freq;
    t.validate();
    if (min_freq < 1) throw ConfigError("min_freq must be >= 1");
    return pc;
  }
};

bool starts_with_magic(const fs::path& path, std::string_view magic) {
  auto in = open_in(path);
  std::string head(magic.size(), '\0');
  in.read(head.data(), static_cast<std::streamsize>(head.size()));
  return in.gcount() == static_cast<std::streamsize>(magic.size()) && head == magic;
}

// Vocabulary and frozen Semantic encoder for a training run.
std::pair<Vocab, EncoderParams> semantic_setup(const TrainFlags& flags, PipelineConfig& pc,
                                               const DatasetSplit& split, Manifest& manifest) {
  if (flags.semantic_from.empty()) {
    Vocab vocab = training_vocab(split, pc.min_freq);
    EncoderParams semantic = pretrain_for_split(split, vocab, pc);
    return {std::move(vocab), std::move(semantic)};
  }
  const fs::path src = flags.semantic_from;
  manifest.input(src);
  if (starts_with_magic(src, kCheckpointMagic)) {
    Checkpoint donor = load_checkpoint(src);
    pc.train.d = donor.semantic.dim();
    pc.train.d_emb = donor.semantic.d_emb();
    pc.train.normalize_output = donor.semantic.normalize_output;
    return {std::move(donor.vocab), std::move(donor.semantic)};
  }
  if (starts_with_magic(src, kEmbeddingMagic)) {
    Vocab vocab = training_vocab(split, pc.min_freq);
    EncoderParams semantic = import_word_vectors(src, vocab, pc.train.normalize_output);
    pc.train.d = semantic.dim();
    pc.train.d_emb = semantic.d_emb();
    return {std::move(vocab), std::move(semantic)};
  }
  throw FormatError(src.string() + " is neither a checkpoint nor an embedding file");
}

EpochCallback epoch_logger(bool verbose, std::ostream& err) {
  if (!verbose) return {};
  return [&err](int epoch, const EpochStats& s, double val) {
    err << "epoch " << epoch + 1 << " loss " << s.mean_loss << " steps " << s.steps << " val_hit@1 "
        << val << '\n';
  };
}

// --- synth ------------------------------------------------------------------

struct SynthOpts {
  std::size_t n_pairs = 2000;
  std::size_t cause_vocab = 120;
  std::size_t effect_vocab = 120;
  std::uint64_t seed = 7;
  std::string out;
  std::size_t distractors = 0;
  std::string effect_distractors_out;
  std::string cause_distractors_out;
  std::string manifest;
};

void add_synth(CLI::App* app, SynthOpts& o) {
  app->add_option("--n-pairs", o.n_pairs, "number of pairs")->capture_default_str();
  app->add_option("--cause-vocab", o.cause_vocab, "cause-side vocabulary size")->capture_default_str();
  app->add_option("--effect-vocab", o.effect_vocab, "effect-side vocabulary size")->capture_default_str();
  app->add_option("--seed", o.seed, "world seed")->capture_default_str();
  app->add_option("--out", o.out, "pair JSONL output")->required();
  app->add_option("--distractors", o.distractors, "held-out sentences to write per side")->capture_default_str();
  app->add_option("--effect-distractors-out", o.effect_distractors_out, "effect-side distractor sentences");
  app->add_option("--cause-distractors-out", o.cause_distractors_out, "cause-side distractor sentences");
  app->add_option("--manifest-out", o.manifest, "run manifest path");
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  auto out = open_out(path);
  for (const auto& l : lines) out << l << '\n';
}

int cmd_synth(const SynthOpts& o, const CLI::App& app, std::ostream& out) {
  Manifest m("synth", app);
  m.seed(o.seed);
  SyntheticWorld world({o.cause_vocab, o.effect_vocab}, o.seed);
  if (o.n_pairs < 1) throw ConfigError("--n-pairs must be >= 1");
  const auto pairs = world.pairs(o.n_pairs);
  {
    auto f = open_out(o.out);
    write_pairs(f, pairs);
  }
  m.output(o.out);
  if (!o.effect_distractors_out.empty()) {
    write_lines(o.effect_distractors_out, world.held_out_sentences(o.n_pairs, o.distractors, Side::kEffect));
    m.output(o.effect_distractors_out);
  }
  if (!o.cause_distractors_out.empty()) {
    write_lines(o.cause_distractors_out, world.held_out_sentences(o.n_pairs, o.distractors, Side::kCause));
    m.output(o.cause_distractors_out);
  }
  m.write(manifest_path(o.manifest, o.out));
  out << "wrote " << pairs.size() << " pairs to " << o.out << '\n';
  return kOk;
}

// --- prepare ----------------------------------------------------------------

struct PrepareOpts {
  std::string pairs;
  std::string triplets;
  std::string ratios = "6:1:1";
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string distractors;
  std::string direction = "cause2effect";
  std::size_t pool_size = 0;
  std::string manifest;
};

void add_prepare(CLI::App* app, PrepareOpts& o) {
  auto* pairs = app->add_option("--pairs", o.pairs, "pair JSONL input");
  auto* triplets = app->add_option("--triplets", o.triplets, "triplet JSONL input (two pairs per triplet)");
  pairs->excludes(triplets);
  triplets->excludes(pairs);
  app->add_option("--ratios", o.ratios, "train:val:test weights")->capture_default_str();
  app->add_option("--seed", o.seed, "split and pool seed")->capture_default_str();
  app->add_option("--out-dir", o.out_dir, "directory for train/val/test/pool files")->required();
  app->add_option("--distractors", o.distractors, "sentence file (one per line) for the test pool");
  app->add_option("--direction", o.direction, "which side of the test pairs is gold in the pool")
      ->check(CLI::IsMember({"cause2effect", "effect2cause"}))
      ->capture_default_str();
  app->add_option("--pool-size", o.pool_size, "total pool size (default: gold plus every usable distractor)");
  app->add_option("--manifest-out", o.manifest, "run manifest path");
}

SplitRatios parse_ratios(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      throw ConfigError("bad --ratios '" + text + "' (expected a:b:c)");
    }
    parts.push_back(v);
  }
  if (parts.size() != 3) throw ConfigError("bad --ratios '" + text + "' (expected a:b:c)");
  return {parts[0], parts[1], parts[2]};
}

int cmd_prepare(const PrepareOpts& o, const CLI::App& app, std::ostream& out) {
  Manifest m("prepare", app);
  m.seed(o.seed);
  if (o.pairs.empty() == o.triplets.empty()) throw ConfigError("give exactly one of --pairs or --triplets");
  const SplitRatios ratios = parse_ratios(o.ratios);

  std::vector<CausalPair> pairs;
  if (!o.pairs.empty()) {
    pairs = load_pairs(o.pairs);
    m.input(o.pairs);
  } else {
    pairs = triplets_to_pairs(load_triplets(o.triplets));
    m.input(o.triplets);
  }
  const DatasetSplit split = grouped_split(pairs, ratios, o.seed);

  const fs::path dir = o.out_dir;
  fs::create_directories(dir);
  const std::pair<const char*, const std::vector<CausalPair>*> parts[] = {
      {"train.jsonl", &split.train}, {"val.jsonl", &split.validation}, {"test.jsonl", &split.test}};
  for (const auto& [name, bucket] : parts) {
    auto f = open_out(dir / name);
    write_pairs(f, *bucket);
    m.output(dir / name);
  }

  const Direction direction = parse_direction(o.direction);
  std::vector<std::string> distractors;
  if (!o.distractors.empty()) {
    distractors = load_sentences(o.distractors);
    m.input(o.distractors);
  }
  std::vector<PoolEntry> pool;
  if (o.pool_size > 0) {
    pool = build_pool(gold_entries(split.test, direction), distractors, o.pool_size, o.seed);
  } else {
    pool = eval_pool(split.test, direction, distractors, o.seed);
  }
  {
    auto f = open_out(dir / "pool.jsonl");
    write_pool(f, pool);
    m.output(dir / "pool.jsonl");
  }
  m.write(o.manifest.empty() ? dir / "manifest.json" : fs::path(o.manifest));
  out << "train " << split.train.size() << " val " << split.validation.size() << " test "
      << split.test.size() << " pool " << pool.size() << '\n';
  return kOk;
}

// --- train ------------------------------------------------------------------

struct TrainOpts {
  std::string train;
  std::string val;
  std::string out;
  std::string manifest;
  TrainFlags flags;
};

void add_train(CLI::App* app, TrainOpts& o) {
  app->add_option("--train", o.train, "training pairs (JSONL)")->required();
  app->add_option("--val", o.val, "validation pairs (JSONL)")->required();
  app->add_option("--out", o.out, "checkpoint output")->required();
  app->add_option("--manifest-out", o.manifest, "run manifest path");
  o.flags.add(app);
}

int cmd_train(const TrainOpts& o, const CLI::App& app, std::ostream& out, std::ostream& err) {
  Manifest m("train", app);
  PipelineConfig pc = o.flags.config();
  m.seed(pc.train.seed);
  DatasetSplit split;
  split.train = load_pairs(o.train);
  split.validation = load_pairs(o.val);
  m.input(o.train);
  m.input(o.val);
  auto [vocab, semantic] = semantic_setup(o.flags, pc, split, m);
  m.resolved(pc.train);
  const Checkpoint ckpt = fit(split, vocab, semantic, pc.train, epoch_logger(o.flags.verbose, err));
  if (fs::path(o.out).has_parent_path()) fs::create_directories(fs::path(o.out).parent_path());
  save_checkpoint(ckpt, o.out);
  m.output(o.out);
  m.write(manifest_path(o.manifest, o.out));
  out << "checkpoint " << o.out << " step " << ckpt.step << " val_hit@1 " << ckpt.val_metric << '\n';
  return kOk;
}

// --- embed / index / retrieve -----------------------------------------------

struct EmbedOpts {
  std::string checkpoint;
  std::string pool;
  std::string out;
  std::size_t chunk_rows = VectorIndex::kDefaultChunkRows;
  std::string manifest;
};

void add_embed(CLI::App* app, EmbedOpts& o) {
  app->add_option("--checkpoint", o.checkpoint, "trained checkpoint")->required();
  app->add_option("--pool", o.pool, "pool JSONL")->required();
  app->add_option("--out", o.out, "embedding file output")->required();
  app->add_option("--chunk-rows", o.chunk_rows, "rows encoded per batch")->capture_default_str();
  app->add_option("--manifest-out", o.manifest, "run manifest path");
}

int cmd_embed(const EmbedOpts& o, const CLI::App& app, std::ostream& out) {
  Manifest m("embed", app);
  const Checkpoint ckpt = load_checkpoint(o.checkpoint);
  const auto pool = load_pool(o.pool);
  m.input(o.checkpoint);
  m.input(o.pool);
  if (o.chunk_rows < 1) throw ConfigError("--chunk-rows must be >= 1");
  if (fs::path(o.out).has_parent_path()) fs::create_directories(fs::path(o.out).parent_path());
  EmbeddingWriter writer(o.out, {pool.size(), ckpt.semantic.dim(), ckpt.config.loss.similarity});
  embed_pool(pool, ckpt.semantic, ckpt.vocab, ckpt.config.max_len, o.chunk_rows,
             [&writer](const std::string& id, std::span<const double> v) { writer.write(id, v); });
  writer.finish();
  m.output(o.out);
  m.write(manifest_path(o.manifest, o.out));
  out << "embedded " << pool.size() << " documents to " << o.out << '\n';
  return kOk;
}

struct IndexOpts {
  std::string embeddings;
  std::string out;
  std::size_t chunk_rows = VectorIndex::kDefaultChunkRows;
  std::string manifest;
};

void add_index(CLI::App* app, IndexOpts& o) {
  app->add_option("--embeddings", o.embeddings, "embedding file")->required();
  app->add_option("--out", o.out, "index summary JSON")->required();
  app->add_option("--chunk-rows", o.chunk_rows, "rows per index chunk")->capture_default_str();
  app->add_option("--manifest-out", o.manifest, "run manifest path");
}

int cmd_index(const IndexOpts& o, const CLI::App& app, std::ostream& out) {
  Manifest m("index", app);
  if (o.chunk_rows < 1) throw ConfigError("--chunk-rows must be >= 1");
  const VectorIndex index = load_index(o.embeddings, o.chunk_rows);
  m.input(o.embeddings);
  ordered_json j;
  j["n"] = index.size();
  j["d"] = index.dim();
  j["similarity"] = to_string(index.similarity());
  j["chunk_rows"] = index.chunk_rows();
  j["chunks"] = index.chunks().size();
  j["embeddings_sha256"] = file_sha256(o.embeddings);
  {
    auto f = open_out(o.out);
    f << j.dump(2) << '\n';
  }
  m.output(o.out);
  m.write(manifest_path(o.manifest, o.out));
  out << "indexed " << index.size() << " vectors in " << index.chunks().size() << " chunks\n";
  return kOk;
}

struct RetrieveOpts {
  std::string checkpoint;
  std::string queries;
  std::string embeddings;
  std::string direction;
  std::size_t k = 20;
  std::string encoder = "trained";
  std::string out;
  std::size_t chunk_rows = VectorIndex::kDefaultChunkRows;
  std::string manifest;
};

void add_retrieve(CLI::App* app, RetrieveOpts& o) {
  app->add_option("--checkpoint", o.checkpoint, "trained checkpoint")->required();
  app->add_option("--queries", o.queries, "pair JSONL whose query side is retrieved for")->required();
  app->add_option("--embeddings", o.embeddings, "pool embedding file")->required();
  app->add_option("--direction", o.direction, "cause2effect or effect2cause")
      ->required()
      ->check(CLI::IsMember({"cause2effect", "effect2cause"}));
  app->add_option("--k", o.k, "hits per query")->capture_default_str();
  app->add_option("--encoder", o.encoder, "trained (Cause/Effect) or semantic query encoder")
      ->check(CLI::IsMember({"trained", "semantic"}))
      ->capture_default_str();
  app->add_option("--out", o.out, "ranked results JSONL")->required();
  app->add_option("--chunk-rows", o.chunk_rows, "rows held in memory while scanning")->capture_default_str();
  app->add_option("--manifest-out", o.manifest, "run manifest path");
}

int cmd_retrieve(const RetrieveOpts& o, const CLI::App& app, std::ostream& out) {
  Manifest m("retrieve", app);
  if (o.k < 1) throw ConfigError("--k must be >= 1");
  if (o.chunk_rows < 1) throw ConfigError("--chunk-rows must be >= 1");
  const Checkpoint ckpt = load_checkpoint(o.checkpoint);
  const auto queries = load_pairs(o.queries);
  m.input(o.checkpoint);
  m.input(o.queries);
  m.input(o.embeddings);
  const Direction direction = parse_direction(o.direction);
  const EncoderParams& encoder = o.encoder == "semantic" ? ckpt.semantic : ckpt.query_encoder(direction);
  {
    EmbeddingReader reader(o.embeddings);
    if (reader.header().d != encoder.dim()) {
      throw ConfigError("embedding dimension " + std::to_string(reader.header().d) +
                        " does not match the checkpoint (" + std::to_string(encoder.dim()) + ")");
    }
    if (reader.header().similarity != ckpt.config.loss.similarity) {
      throw ConfigError("embedding file similarity differs from the checkpoint's");
    }
  }
  std::vector<std::string> texts, ids;
  texts.reserve(queries.size());
  ids.reserve(queries.size());
  for (const auto& p : queries) {
    texts.push_back(query_text(p, direction));
    ids.push_back(p.id);
  }
  const Matrix q = embed_texts(texts, encoder, ckpt.vocab, ckpt.config.max_len);
  const auto results = scan_top_k(o.embeddings, q, ids, o.k, o.chunk_rows);
  {
    auto f = open_out(o.out);
    write_results(f, results);
  }
  m.output(o.out);
  m.write(manifest_path(o.manifest, o.out));
  out << "retrieved top-" << o.k << " for " << results.size() << " queries\n";
  return kOk;
}

// --- eval -------------------------------------------------------------------

struct EvalOpts {
  std::vector<std::string> results;
  std::string pool;
  std::vector<std::uint64_t> seeds;
  std::vector<std::size_t> ks = kDefaultKs;
  std::vector<std::string> checkpoints;
  double fuzzy_recall = kDefaultFuzzyRecall;
  CLI::Option* fuzzy_opt = nullptr;
  std::string out;
  std::string manifest;
};

void add_eval(CLI::App* app, EvalOpts& o) {
  app->add_option("--results", o.results, "ranked results JSONL (one per seed)")->required();
  app->add_option("--pool", o.pool, "pool JSONL carrying the gold judgments")->required();
  app->add_option("--seeds", o.seeds, "seed of each results file, in order")->delimiter(',');
  app->add_option("--ks", o.ks, "cutoffs")->delimiter(',')->capture_default_str();
  app->add_option("--checkpoint", o.checkpoints, "checkpoint(s) behind the results, for the fingerprint");
  o.fuzzy_opt = app->add_option("--fuzzy-recall", o.fuzzy_recall,
                                "also report relaxed fuzzy-match hit rates at this token recall");
  app->add_option("--out", o.out, "metrics JSON output")->required();
  app->add_option("--manifest-out", o.manifest, "run manifest path");
}

int cmd_eval(const EvalOpts& o, const CLI::App& app, std::ostream& out) {
  Manifest m("eval", app);
  if (o.ks.empty()) throw ConfigError("--ks must list at least one cutoff");
  for (std::size_t k : o.ks) {
    if (k < 1) throw ConfigError("cutoffs must be >= 1");
  }
  if (o.results.size() > 1 && o.seeds.size() != o.results.size()) {
    throw ConfigError("--seeds must give one seed per --results file");
  }
  if (!o.seeds.empty() && o.seeds.size() != o.results.size()) {
    throw ConfigError("--seeds must give one seed per --results file");
  }
  if (!o.checkpoints.empty() && o.checkpoints.size() != 1 && o.checkpoints.size() != o.results.size()) {
    throw ConfigError("give one --checkpoint, or one per --results file");
  }
  for (auto s : o.seeds) m.seed(s);

  const auto pool = load_pool(o.pool);
  m.input(o.pool);
  const auto judgments = judgments_from_pool(pool);
  std::unordered_map<std::string, std::string> doc_text;
  if (o.fuzzy_opt->count() > 0) {
    for (const auto& e : pool) doc_text.emplace(e.doc_id, e.text);
  }

  std::string material;
  for (const auto& c : o.checkpoints) {
    material += checkpoint_header(load_checkpoint(c));
    material += '\n';
    m.input(c);
  }
  material += "pool:" + file_sha256(o.pool) + '\n';
  for (auto s : o.seeds) material += "seed:" + std::to_string(s) + '\n';
  const std::string fingerprint = sha256_hex(material);

  std::vector<std::pair<std::uint64_t, MetricsReport>> runs;
  std::map<std::size_t, double> fuzzy;
  for (std::size_t i = 0; i < o.results.size(); ++i) {
    auto in = open_in(o.results[i]);
    const auto results = read_results(in);
    m.input(o.results[i]);
    const auto unjoined = unjoined_queries(results, judgments);
    if (!unjoined.empty()) {
      std::string msg = o.results[i] + ": " + std::to_string(unjoined.size()) +
                        " query id(s) without a judgment in the pool, e.g. '" + unjoined.front() + "'";
      throw FormatError(msg);
    }
    runs.emplace_back(o.seeds.empty() ? 0 : o.seeds[i], evaluate_run(results, judgments, o.ks, fingerprint));
    if (o.fuzzy_opt->count() > 0) {
      for (std::size_t k : o.ks) {
        fuzzy[k] += fuzzy_hit_rate(results, judgments, doc_text, k, o.fuzzy_recall) /
                    static_cast<double>(o.results.size());
      }
    }
  }
  const MetricsReport report =
      o.seeds.empty() ? runs.front().second : average_over_seeds(runs, fingerprint);
  ordered_json j = report.to_json();
  if (o.fuzzy_opt->count() > 0) {
    ordered_json f = ordered_json::object();
    for (const auto& [k, v] : fuzzy) f[std::to_string(k)] = v;
    j["fuzzy_hit"] = f;
  }
  {
    auto f = open_out(o.out);
    f << j.dump(2) << '\n';
  }
  m.output(o.out);
  m.write(manifest_path(o.manifest, o.out));
  out << "queries " << report.n_queries;
  for (const auto& [k, v] : report.values.hit) out << " hit@" << k << ' ' << v;
  out << '\n';
  return kOk;
}

// --- ablate -----------------------------------------------------------------

struct AblateOpts {
  std::string train;
  std::string val;
  std::string test;
  std::string effect_distractors;
  std::string cause_distractors;
  std::vector<double> betas{0.0, 0.1, 1.0, 2.0, 5.0};
  std::vector<std::size_t> ks = kDefaultKs;
  std::string out;
  std::string manifest;
  TrainFlags flags;
};

void add_ablate(CLI::App* app, AblateOpts& o) {
  app->add_option("--train", o.train, "training pairs")->required();
  app->add_option("--val", o.val, "validation pairs")->required();
  app->add_option("--test", o.test, "test pairs")->required();
  app->add_option("--effect-distractors", o.effect_distractors, "sentences added to the cause2effect pool");
  app->add_option("--cause-distractors", o.cause_distractors, "sentences added to the effect2cause pool");
  app->add_option("--betas", o.betas, "semantic-loss weights to sweep")->delimiter(',')->capture_default_str();
  app->add_option("--ks", o.ks, "cutoffs")->delimiter(',')->capture_default_str();
  app->add_option("--out", o.out, "ablation table JSON")->required();
  app->add_option("--manifest-out", o.manifest, "run manifest path");
  o.flags.add(app);
}

int cmd_ablate(const AblateOpts& o, const CLI::App& app, std::ostream& out, std::ostream& err) {
  Manifest m("ablate", app);
  PipelineConfig pc = o.flags.config();
  m.seed(pc.train.seed);
  DatasetSplit split;
  split.train = load_pairs(o.train);
  split.validation = load_pairs(o.val);
  split.test = load_pairs(o.test);
  m.input(o.train);
  m.input(o.val);
  m.input(o.test);
  std::vector<std::string> effect_d, cause_d;
  if (!o.effect_distractors.empty()) {
    effect_d = load_sentences(o.effect_distractors);
    m.input(o.effect_distractors);
  }
  if (!o.cause_distractors.empty()) {
    cause_d = load_sentences(o.cause_distractors);
    m.input(o.cause_distractors);
  }
  auto [vocab, semantic] = semantic_setup(o.flags, pc, split, m);
  m.resolved(pc.train);
  if (o.flags.verbose) err << "vocab " << vocab.size() << ", semantic encoder ready\n";
  const auto rows = beta_ablation(split, o.betas, pc.train, vocab, semantic, effect_d, cause_d, o.ks);
  const ordered_json table = ablation_table(rows);
  {
    auto f = open_out(o.out);
    f << table.dump(2) << '\n';
  }
  m.output(o.out);
  m.write(manifest_path(o.manifest, o.out));
  out << "beta\tc2e_pool_hit@1\te2c_pool_hit@1\n";
  for (const auto& r : rows) {
    const auto h1 = [](const MetricsReport& rep) {
      const auto it = rep.values.hit.find(1);
      return it == rep.values.hit.end() ? 0.0 : it->second;
    };
    out << shortest(r.beta) << '\t' << h1(r.cause2effect_pool) << '\t' << h1(r.effect2cause_pool) << '\n';
  }
  return kOk;
}

// --- export-embeddings ------------------------------------------------------

struct ExportOpts {
  std::string checkpoint;
  std::string pairs;
  std::string out;
  std::string manifest;
};

void add_export(CLI::App* app, ExportOpts& o) {
  app->add_option("--checkpoint", o.checkpoint, "trained checkpoint")->required();
  app->add_option("--pairs", o.pairs, "pairs to embed")->required();
  app->add_option("--out", o.out, "TSV output")->required();
  app->add_option("--manifest-out", o.manifest, "run manifest path");
}

int cmd_export(const ExportOpts& o, const CLI::App& app, std::ostream& out) {
  Manifest m("export-embeddings", app);
  const Checkpoint ckpt = load_checkpoint(o.checkpoint);
  const auto pairs = load_pairs(o.pairs);
  m.input(o.checkpoint);
  m.input(o.pairs);
  std::vector<std::string> causes, effects;
  for (const auto& p : pairs) {
    causes.push_back(p.cause_text);
    effects.push_back(p.effect_text);
  }
  const std::size_t max_len = ckpt.config.max_len;
  const std::pair<const char*, Matrix> blocks[] = {
      {"cause", embed_texts(causes, ckpt.cause, ckpt.vocab, max_len)},
      {"effect", embed_texts(effects, ckpt.effect, ckpt.vocab, max_len)},
      {"semantic_cause", embed_texts(causes, ckpt.semantic, ckpt.vocab, max_len)},
      {"semantic_effect", embed_texts(effects, ckpt.semantic, ckpt.vocab, max_len)},
  };
  auto f = open_out(o.out);
  f << "id\trole";
  for (std::size_t c = 0; c < ckpt.semantic.dim(); ++c) f << "\tv" << c + 1;
  f << '\n';
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (const auto& [role, mat] : blocks) {
      f << pairs[i].id << '\t' << role;
      for (double v : mat.row(i)) f << '\t' << shortest(v);
      f << '\n';
    }
  }
  f.close();
  m.output(o.out);
  m.write(manifest_path(o.manifest, o.out));
  out << "exported " << 4 * pairs.size() << " rows to " << o.out << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Causal dense retrieval: data preparation, training, indexing and evaluation"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)");

  SynthOpts synth;
  PrepareOpts prepare;
  TrainOpts train;
  EmbedOpts embed;
  IndexOpts index;
  RetrieveOpts retrieve;
  EvalOpts eval;
  AblateOpts ablate;
  ExportOpts exp;
  auto* s_synth = app.add_subcommand("synth", "generate a synthetic disjoint-vocabulary corpus");
  auto* s_prepare = app.add_subcommand("prepare", "split pairs and build the test pool");
  auto* s_train = app.add_subcommand("train", "pretrain the semantic encoder and train Cause/Effect encoders");
  auto* s_embed = app.add_subcommand("embed", "embed a pool with the frozen semantic encoder");
  auto* s_index = app.add_subcommand("index", "load an embedding file into a chunked index and summarize it");
  auto* s_retrieve = app.add_subcommand("retrieve", "exact top-k retrieval for a query set");
  auto* s_eval = app.add_subcommand("eval", "Hit/MRR/nDCG for ranked results");
  auto* s_ablate = app.add_subcommand("ablate", "sweep the semantic-loss weight");
  auto* s_export = app.add_subcommand("export-embeddings", "dump encoder outputs as TSV");
  add_synth(s_synth, synth);
  add_prepare(s_prepare, prepare);
  add_train(s_train, train);
  add_embed(s_embed, embed);
  add_index(s_index, index);
  add_retrieve(s_retrieve, retrieve);
  add_eval(s_eval, eval);
  add_ablate(s_ablate, ablate);
  add_export(s_export, exp);

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back(kToolName);
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (s_synth->parsed()) return cmd_synth(synth, *s_synth, out);
    if (s_prepare->parsed()) return cmd_prepare(prepare, *s_prepare, out);
    if (s_train->parsed()) return cmd_train(train, *s_train, out, err);
    if (s_embed->parsed()) return cmd_embed(embed, *s_embed, out);
    if (s_index->parsed()) return cmd_index(index, *s_index, out);
    if (s_retrieve->parsed()) return cmd_retrieve(retrieve, *s_retrieve, out);
    if (s_eval->parsed()) return cmd_eval(eval, *s_eval, out);
    if (s_ablate->parsed()) return cmd_ablate(ablate, *s_ablate, out, err);
    if (s_export->parsed()) return cmd_export(exp, *s_export, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDataFormat;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kDataFormat;
  }
  return kUsage;
}

}  // namespace causal::cli
