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

#include "causal/corpus.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "causal/error.hpp"
#include "causal/random.hpp"
#include "causal/text.hpp"

namespace causal {

namespace {

using nlohmann::json;

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  return out;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

// Calls fn(json, line_number) for every non-blank line, wrapping JSON errors
// with the line number.
template <typename Fn>
void for_each_json_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    try {
      fn(json::parse(line), line_no);
    } catch (const json::exception& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::string required_text(const json& obj, const char* key, std::size_t line_no) {
  std::string value = obj.at(key).get<std::string>();
  if (blank(value)) {
    throw FormatError("line " + std::to_string(line_no) + ": field '" + key + "' is empty");
  }
  return value;
}

}  // namespace

std::vector<CausalPair> read_pairs(std::istream& in) {
  std::vector<CausalPair> pairs;
  std::unordered_set<std::string> seen;
  for_each_json_line(in, [&](const json& obj, std::size_t line_no) {
    CausalPair p;
    p.id = obj.at("id").get<std::string>();
    if (p.id.empty()) throw FormatError("line " + std::to_string(line_no) + ": empty id");
    p.cause_text = required_text(obj, "cause", line_no);
    p.effect_text = required_text(obj, "effect", line_no);
    p.group_id = obj.contains("group") ? obj.at("group").get<std::string>() : p.id;
    if (!seen.insert(p.id).second) {
      throw FormatError("line " + std::to_string(line_no) + ": duplicate pair id '" + p.id + "'");
    }
    pairs.push_back(std::move(p));
  });
  return pairs;
}

std::vector<CausalPair> load_pairs(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return read_pairs(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_pairs(std::ostream& out, std::span<const CausalPair> pairs) {
  for (const auto& p : pairs) {
    nlohmann::ordered_json obj = {
        {"id", p.id}, {"cause", p.cause_text}, {"effect", p.effect_text}, {"group", p.group_id}};
    out << obj.dump() << '\n';
  }
}

void save_pairs(const std::filesystem::path& path, std::span<const CausalPair> pairs) {
  auto out = open_output(path);
  write_pairs(out, pairs);
}

std::vector<TripletRecord> read_triplets(std::istream& in) {
  std::vector<TripletRecord> triplets;
  std::unordered_set<std::string> seen;
  for_each_json_line(in, [&](const json& obj, std::size_t line_no) {
    TripletRecord t;
    t.id = obj.at("id").get<std::string>();
    t.cause = required_text(obj, "cause", line_no);
    t.premise = required_text(obj, "premise", line_no);
    t.effect = required_text(obj, "effect", line_no);
    if (!seen.insert(t.id).second) {
      throw FormatError("line " + std::to_string(line_no) + ": duplicate triplet id '" + t.id + "'");
    }
    triplets.push_back(std::move(t));
  });
  return triplets;
}

std::vector<TripletRecord> load_triplets(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return read_triplets(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<PoolEntry> read_pool(std::istream& in) {
  std::vector<PoolEntry> pool;
  std::unordered_set<std::string> seen;
  for_each_json_line(in, [&](const json& obj, std::size_t line_no) {
    PoolEntry e;
    e.doc_id = obj.at("doc_id").get<std::string>();
    e.text = obj.at("text").get<std::string>();
    if (obj.contains("gold_for") && !obj.at("gold_for").is_null()) {
      e.gold_for = obj.at("gold_for").get<std::string>();
    }
    if (!seen.insert(e.doc_id).second) {
      throw FormatError("line " + std::to_string(line_no) + ": duplicate doc_id '" + e.doc_id + "'");
    }
    pool.push_back(std::move(e));
  });
  return pool;
}

std::vector<PoolEntry> load_pool(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return read_pool(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_pool(std::ostream& out, std::span<const PoolEntry> pool) {
  for (const auto& e : pool) {
    nlohmann::ordered_json obj = {{"doc_id", e.doc_id}, {"text", e.text}};
    if (e.gold_for) obj["gold_for"] = *e.gold_for;
    out << obj.dump() << '\n';
  }
}

void save_pool(const std::filesystem::path& path, std::span<const PoolEntry> pool) {
  auto out = open_output(path);
  write_pool(out, pool);
}

std::vector<std::string> load_sentences(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::string> sentences;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!blank(line)) sentences.push_back(std::move(line));
  }
  return sentences;
}

std::vector<CausalPair> triplets_to_pairs(std::span<const TripletRecord> triplets) {
  std::vector<CausalPair> pairs;
  pairs.reserve(triplets.size() * 2);
  for (const auto& t : triplets) {
    pairs.push_back({t.id + ":cp", t.cause, t.premise, t.id});
    pairs.push_back({t.id + ":pe", t.premise, t.effect, t.id});
  }
  return pairs;
}

DatasetSplit grouped_split(std::span<const CausalPair> pairs, const SplitRatios& ratios,
                           std::uint64_t seed) {
  const double weights[3] = {ratios.train, ratios.validation, ratios.test};
  double total_weight = 0.0;
  std::size_t active_buckets = 0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("split ratios must be finite and >= 0");
    total_weight += w;
    if (w > 0.0) ++active_buckets;
  }
  if (total_weight <= 0.0) throw ConfigError("split ratios must sum to a positive value");
  if (pairs.empty()) throw ConfigError("cannot split an empty corpus");

  std::vector<std::string> group_order;
  std::unordered_map<std::string, std::size_t> group_size;
  for (const auto& p : pairs) {
    if (group_size[p.group_id]++ == 0) group_order.push_back(p.group_id);
  }
  if (group_order.size() < active_buckets) {
    throw ConfigError("split needs at least " + std::to_string(active_buckets) + " groups, corpus has " +
                      std::to_string(group_order.size()));
  }

  Rng rng = make_rng(seed);
  shuffle(group_order.begin(), group_order.end(), rng);

  const auto n = static_cast<double>(pairs.size());
  double deficit[3];
  for (int s = 0; s < 3; ++s) deficit[s] = weights[s] / total_weight * n;

  std::unordered_map<std::string, int> assignment;
  for (const auto& g : group_order) {
    int best = -1;
    for (int s = 0; s < 3; ++s) {
      if (weights[s] <= 0.0) continue;
      if (best < 0 || deficit[s] > deficit[best]) best = s;
    }
    assignment.emplace(g, best);
    deficit[best] -= static_cast<double>(group_size[g]);
  }

  DatasetSplit split;
  std::vector<CausalPair>* buckets[3] = {&split.train, &split.validation, &split.test};
  for (const auto& p : pairs) buckets[assignment.at(p.group_id)]->push_back(p);
  return split;
}

std::vector<PoolEntry> build_pool(std::span<const PoolEntry> gold,
                                  std::span<const std::string> distractors,
                                  std::size_t pool_size, std::uint64_t seed) {
  if (pool_size < gold.size()) {
    throw ConfigError("pool_size " + std::to_string(pool_size) + " is smaller than the gold set (" +
                      std::to_string(gold.size()) + ")");
  }
  std::unordered_set<std::string> gold_texts;
  std::unordered_set<std::string> ids;
  for (const auto& g : gold) {
    gold_texts.insert(normalize(g.text));
    if (!ids.insert(g.doc_id).second) throw FormatError("duplicate gold doc_id '" + g.doc_id + "'");
  }

  const std::size_t need = pool_size - gold.size();
  std::vector<std::uint32_t> candidates;
  if (need > 0) {
    candidates.reserve(distractors.size());
    for (std::size_t i = 0; i < distractors.size(); ++i) {
      if (!gold_texts.contains(normalize(distractors[i]))) {
        candidates.push_back(static_cast<std::uint32_t>(i));
      }
    }
    if (candidates.size() < need) {
      throw ConfigError("distractor source too small: need " + std::to_string(need) + ", have " +
                        std::to_string(candidates.size()) + " after removing gold duplicates (short by " +
                        std::to_string(need - candidates.size()) + ")");
    }
  }

  Rng sample_rng = make_rng(seed, 0);
  shuffle(candidates.begin(), candidates.end(), sample_rng);

  std::vector<PoolEntry> pool(gold.begin(), gold.end());
  pool.reserve(pool_size);
  for (std::size_t i = 0; i < need; ++i) {
    const std::uint32_t src = candidates[i];
    PoolEntry e{"distractor/" + std::to_string(src), distractors[src], std::nullopt};
    if (!ids.insert(e.doc_id).second) throw FormatError("doc_id collision on '" + e.doc_id + "'");
    pool.push_back(std::move(e));
  }
  Rng order_rng = make_rng(seed, 1);
  shuffle(pool.begin(), pool.end(), order_rng);
  return pool;
}

std::string to_string(Direction d) {
  return d == Direction::kCauseToEffect ? "cause2effect" : "effect2cause";
}

Direction parse_direction(std::string_view s) {
  if (s == "cause2effect") return Direction::kCauseToEffect;
  if (s == "effect2cause") return Direction::kEffectToCause;
  throw ConfigError("unknown direction '" + std::string(s) + "' (cause2effect|effect2cause)");
}

std::string gold_doc_id(const CausalPair& pair, Direction d) {
  return pair.id + (d == Direction::kCauseToEffect ? "/effect" : "/cause");
}

const std::string& query_text(const CausalPair& pair, Direction d) {
  return d == Direction::kCauseToEffect ? pair.cause_text : pair.effect_text;
}

std::vector<PoolEntry> gold_entries(std::span<const CausalPair> pairs, Direction d) {
  std::vector<PoolEntry> gold;
  gold.reserve(pairs.size());
  for (const auto& p : pairs) {
    gold.push_back({gold_doc_id(p, d),
                    d == Direction::kCauseToEffect ? p.effect_text : p.cause_text, p.id});
  }
  return gold;
}

// --- synthetic world --------------------------------------------------------

namespace {

constexpr std::size_t kSlots = 3;
constexpr std::size_t kMaxTemplates = std::size_t{1} << 24;

// First letters are disjoint between the two tables, so no cause word can
// ever equal an effect word.
constexpr const char* kCauseSyllables[10] = {"ba", "ko", "ri", "mu", "te",
                                             "sa", "lo", "ni", "pe", "du"};
constexpr const char* kEffectSyllables[10] = {"zu", "fa", "xi", "go", "ve",
                                              "ha", "jo", "wy", "qe", "cy"};

std::vector<std::string> make_words(std::size_t count, const char* const (&syllables)[10]) {
  if (count > 1000) throw ConfigError("synthetic vocabularies are limited to 1000 words per side");
  std::vector<std::string> words;
  words.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    words.push_back(std::string(syllables[w / 100]) + syllables[(w / 10) % 10] + syllables[w % 10]);
  }
  return words;
}

}  // namespace

SyntheticWorld::SyntheticWorld(VocabSplit split, std::uint64_t seed) {
  if (split.cause < 8 || split.effect < 8) throw ConfigError("synthetic vocab sizes must be >= 8");
  words_per_slot_ = std::min(split.cause, split.effect) / kSlots;
  std::size_t templates = 1;
  for (std::size_t s = 0; s < kSlots; ++s) templates *= words_per_slot_;
  if (templates > kMaxTemplates) throw ConfigError("synthetic template space too large");

  Rng rng = make_rng(seed, 0);
  cause_words_ = make_words(split.cause, kCauseSyllables);
  effect_words_ = make_words(split.effect, kEffectSyllables);
  shuffle(cause_words_.begin(), cause_words_.end(), rng);
  shuffle(effect_words_.begin(), effect_words_.end(), rng);

  slot_maps_.resize(kSlots);
  for (auto& map : slot_maps_) {
    map.resize(words_per_slot_);
    for (std::size_t i = 0; i < words_per_slot_; ++i) map[i] = i;
    shuffle(map.begin(), map.end(), rng);
  }

  template_order_.resize(templates);
  for (std::size_t t = 0; t < templates; ++t) template_order_[t] = static_cast<std::uint32_t>(t);
  shuffle(template_order_.begin(), template_order_.end(), rng);
}

std::string SyntheticWorld::render(std::size_t template_index, Side side) const {
  const auto& words = this->words(side);
  const std::size_t n = words_per_slot_;
  std::vector<std::string_view> tokens;
  std::size_t rest = template_index;
  for (std::size_t s = 0; s < kSlots; ++s) {
    std::size_t i = rest % n;
    rest /= n;
    if (side == Side::kEffect) i = slot_maps_[s][i];
    tokens.push_back(words[s * n + i]);
  }
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::vector<CausalPair> SyntheticWorld::pairs(std::size_t n) const {
  std::vector<CausalPair> out;
  out.reserve(n);
  char id[32];
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = template_order_[k % template_order_.size()];
    std::snprintf(id, sizeof id, "syn-%05zu", k);
    out.push_back({id, render(t, Side::kCause), render(t, Side::kEffect), id});
  }
  return out;
}

std::vector<std::string> SyntheticWorld::held_out_sentences(std::size_t n_used, std::size_t n,
                                                            Side side) const {
  if (n_used + n > template_order_.size()) {
    throw ConfigError("only " + std::to_string(template_order_.size() - std::min(n_used, template_order_.size())) +
                      " held-out templates available, " + std::to_string(n) + " requested");
  }
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t k = n_used; k < n_used + n; ++k) {
    out.push_back(render(template_order_[k], side));
  }
  return out;
}

std::vector<std::string> SyntheticWorld::random_sentences(std::size_t n, Side side,
                                                          std::uint64_t seed) const {
  const auto& words = this->words(side);
  Rng rng = make_rng(seed, side == Side::kCause ? 11 : 12);
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t len = 3 + uniform_index(rng, 4);
    std::string s;
    for (std::size_t i = 0; i < len; ++i) {
      if (i > 0) s += ' ';
      s += words[uniform_index(rng, words.size())];
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<CausalPair> synth_causal_dataset(std::size_t n_pairs, VocabSplit split,
                                             std::uint64_t seed) {
  if (n_pairs < 1) throw ConfigError("n_pairs must be >= 1");
  return SyntheticWorld(split, seed).pairs(n_pairs);
}

}  // namespace causal
