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

#ifndef CAUSAL_CORPUS_HPP_
#define CAUSAL_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace causal {

// One cause/effect example. Pairs derived from the same source record share
// a group_id and must never be split across train/validation/test.
struct CausalPair {
  std::string id;
  std::string cause_text;
  std::string effect_text;
  std::string group_id;

  bool operator==(const CausalPair&) const = default;
};

// <cause, premise, effect> record as distributed by triplet-style corpora.
struct TripletRecord {
  std::string id;
  std::string cause;
  std::string premise;
  std::string effect;
};

struct DatasetSplit {
  std::vector<CausalPair> train;
  std::vector<CausalPair> validation;
  std::vector<CausalPair> test;
};

struct SplitRatios {
  double train = 6.0;
  double validation = 1.0;
  double test = 1.0;
};

struct PoolEntry {
  std::string doc_id;
  std::string text;
  std::optional<std::string> gold_for;  // query id this document answers

  bool operator==(const PoolEntry&) const = default;
};

// Pair JSONL: {"id", "cause", "effect", "group"?}; group defaults to id.
// Errors name the 1-based line number; duplicate ids name the id.
std::vector<CausalPair> read_pairs(std::istream& in);
std::vector<CausalPair> load_pairs(const std::filesystem::path& path);
void write_pairs(std::ostream& out, std::span<const CausalPair> pairs);
void save_pairs(const std::filesystem::path& path, std::span<const CausalPair> pairs);

// Triplet JSONL: {"id", "cause", "premise", "effect"}.
std::vector<TripletRecord> read_triplets(std::istream& in);
std::vector<TripletRecord> load_triplets(const std::filesystem::path& path);

// Pool JSONL: {"doc_id", "text", "gold_for"?}.
std::vector<PoolEntry> read_pool(std::istream& in);
std::vector<PoolEntry> load_pool(const std::filesystem::path& path);
void write_pool(std::ostream& out, std::span<const PoolEntry> pool);
void save_pool(const std::filesystem::path& path, std::span<const PoolEntry> pool);

// Plain text, one sentence per line; blank lines are skipped.
std::vector<std::string> load_sentences(const std::filesystem::path& path);

// Each triplet (c, p, e) becomes (c -> p) and (p -> e), both grouped under the
// triplet id. Pair ids are "<id>:cp" and "<id>:pe".
std::vector<CausalPair> triplets_to_pairs(std::span<const TripletRecord> triplets);

// Group-level split. Groups (in first-appearance order) are shuffled with the
// seeded engine and each is assigned to the split with the largest remaining
// deficit (target pairs minus assigned pairs); ties go to the earlier split.
// Within a split, pairs keep their input order.
DatasetSplit grouped_split(std::span<const CausalPair> pairs, const SplitRatios& ratios,
                           std::uint64_t seed);

// All gold entries plus (pool_size - |gold|) distractors sampled without
// replacement from `distractors`, skipping any whose normalized text equals a
// gold text. Distractor ids are "distractor/<source line index>". Sampling is
// prefix-stable: growing pool_size with the same seed only adds entries.
std::vector<PoolEntry> build_pool(std::span<const PoolEntry> gold,
                                  std::span<const std::string> distractors,
                                  std::size_t pool_size, std::uint64_t seed);

// Gold pool entries for a set of pairs: the effect side (cause2effect) or the
// cause side (effect2cause), ids "<pair id>/effect" or "<pair id>/cause".
enum class Direction { kCauseToEffect, kEffectToCause };

std::string to_string(Direction d);
Direction parse_direction(std::string_view s);
std::string gold_doc_id(const CausalPair& pair, Direction d);
std::vector<PoolEntry> gold_entries(std::span<const CausalPair> pairs, Direction d);
const std::string& query_text(const CausalPair& pair, Direction d);

// --- Synthetic cause/effect world ------------------------------------------
//
// Cause and effect sentences are built from lexically disjoint vocabularies.
// Each sentence fills three slots (agent, action, object), each slot drawing
// from its own third of the side's vocabulary. A fixed per-slot bijection maps
// cause words to effect words, so a cause template determines its effect
// template while sharing no tokens with it.
struct VocabSplit {
  std::size_t cause = 120;
  std::size_t effect = 120;
};

enum class Side { kCause, kEffect };

class SyntheticWorld {
 public:
  SyntheticWorld(VocabSplit split, std::uint64_t seed);

  std::size_t words_per_slot() const { return words_per_slot_; }
  std::size_t template_count() const { return template_order_.size(); }

  // The first n templates of the seeded template order, one pair each.
  std::vector<CausalPair> pairs(std::size_t n) const;

  // Sentences rendered from templates that pairs(n_used) never touches.
  std::vector<std::string> held_out_sentences(std::size_t n_used, std::size_t n, Side side) const;

  // Random bags of side-vocabulary words (3 to 6 tokens); not tied to any
  // template, suitable for very large distractor sources.
  std::vector<std::string> random_sentences(std::size_t n, Side side, std::uint64_t seed) const;

  const std::vector<std::string>& words(Side side) const {
    return side == Side::kCause ? cause_words_ : effect_words_;
  }

 private:
  std::string render(std::size_t template_index, Side side) const;

  std::size_t words_per_slot_;
  std::vector<std::string> cause_words_;
  std::vector<std::string> effect_words_;
  std::vector<std::vector<std::size_t>> slot_maps_;  // cause index -> effect index
  std::vector<std::uint32_t> template_order_;
};

std::vector<CausalPair> synth_causal_dataset(std::size_t n_pairs, VocabSplit split,
                                             std::uint64_t seed);

}  // namespace causal

#endif  // CAUSAL_CORPUS_HPP_
