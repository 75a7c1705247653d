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

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "causal/corpus.hpp"
#include "causal/error.hpp"
#include "causal/text.hpp"

using namespace causal;

namespace {

std::vector<CausalPair> parse(const std::string& text) {
  std::stringstream ss(text);
  return read_pairs(ss);
}

std::vector<CausalPair> uniform_corpus(std::size_t groups, std::size_t per_group) {
  std::vector<CausalPair> pairs;
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t i = 0; i < per_group; ++i) {
      const std::string id = "g" + std::to_string(g) + "-" + std::to_string(i);
      pairs.push_back({id, "c " + id, "e " + id, "g" + std::to_string(g)});
    }
  }
  return pairs;
}

std::set<std::string> groups_of(const std::vector<CausalPair>& ps) {
  std::set<std::string> out;
  for (const auto& p : ps) out.insert(p.group_id);
  return out;
}

}  // namespace

TEST_CASE("load_pairs applies the default group and keeps order") {
  const auto ps = parse("{\"id\":\"p1\",\"cause\":\"A\",\"effect\":\"B\"}\n"
                        "{\"id\":\"p2\",\"cause\":\"C\",\"effect\":\"D\",\"group\":\"g\"}\n");
  REQUIRE(ps.size() == 2);
  CHECK(ps[0].id == "p1");
  CHECK(ps[0].group_id == "p1");
  CHECK(ps[0].cause_text == "A");
  CHECK(ps[1].group_id == "g");
  CHECK(parse("").empty());
}

TEST_CASE("load_pairs errors name the line or the id") {
  const std::string ok = "{\"id\":\"p1\",\"cause\":\"A\",\"effect\":\"B\"}\n";
  try {
    parse(ok + ok);
    FAIL("duplicate id accepted");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("p1") != std::string::npos);
  }
  try {
    parse(ok + "{broken\n");
    FAIL("malformed line accepted");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("{\"id\":\"p\",\"cause\":\"  \\t \",\"effect\":\"B\"}\n"), FormatError);
  CHECK_THROWS_AS(parse("{\"id\":\"p\",\"cause\":\"A\"}\n"), FormatError);
}

TEST_CASE("pair file round-trips") {
  const auto ps = uniform_corpus(3, 2);
  std::stringstream ss;
  write_pairs(ss, ps);
  CHECK(read_pairs(ss) == ps);
}

TEST_CASE("triplets_to_pairs yields cause->premise and premise->effect") {
  const std::vector<TripletRecord> one{{"t", "c", "p", "e"}};
  const auto ps = triplets_to_pairs(one);
  REQUIRE(ps.size() == 2);
  CHECK(ps[0].cause_text == "c");
  CHECK(ps[0].effect_text == "p");
  CHECK(ps[1].cause_text == "p");
  CHECK(ps[1].effect_text == "e");
  CHECK(ps[0].group_id == "t");
  CHECK(ps[1].group_id == "t");
  CHECK(ps[0].id != ps[1].id);
  CHECK(triplets_to_pairs(std::vector<TripletRecord>{}).empty());

  std::vector<TripletRecord> many;
  for (int i = 0; i < 500; ++i) {
    const auto s = std::to_string(i);
    many.push_back({"t" + s, "c" + s, "p" + s, "e" + s});
  }
  const auto out = triplets_to_pairs(many);
  CHECK(out.size() == 1000);
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i].group_id == many[i / 2].id);
}

TEST_CASE("read_triplets rejects empty fields") {
  std::stringstream ss("{\"id\":\"t\",\"cause\":\"a\",\"premise\":\"\",\"effect\":\"c\"}\n");
  CHECK_THROWS_AS(read_triplets(ss), FormatError);
}

TEST_CASE("grouped_split exact sizes, leakage and determinism") {
  const auto ps = uniform_corpus(8, 1);
  const auto s = grouped_split(ps, {6, 1, 1}, 123);
  CHECK(s.train.size() == 6);
  CHECK(s.validation.size() == 1);
  CHECK(s.test.size() == 1);

  // A lone group cannot fill two buckets; a second group makes it splittable.
  const std::vector<CausalPair> g1{{"a", "x", "y", "g1"}, {"b", "x2", "y2", "g1"}};
  CHECK_THROWS_AS(grouped_split(g1, {1, 1, 0}, 3), ConfigError);
  auto g12 = g1;
  g12.push_back({"c", "x3", "y3", "g2"});
  const auto s2 = grouped_split(g12, {1, 1, 0}, 3);
  const bool ab_train = s2.train.size() == 2 && s2.train[0].group_id == "g1" && s2.train[1].group_id == "g1";
  const bool ab_val = s2.validation.size() == 2 && s2.validation[0].group_id == "g1";
  CHECK((ab_train || ab_val));
  CHECK(s2.test.empty());

  const auto again = grouped_split(ps, {6, 1, 1}, 123);
  CHECK(again.train == s.train);
  CHECK(again.validation == s.validation);
  CHECK(again.test == s.test);
}

TEST_CASE("grouped_split errors") {
  CHECK_THROWS_AS(grouped_split(uniform_corpus(2, 1), {6, 1, 1}, 0), ConfigError);
  CHECK_THROWS_AS(grouped_split(std::vector<CausalPair>{}, {6, 1, 1}, 0), ConfigError);
  CHECK_THROWS_AS(grouped_split(uniform_corpus(4, 1), {0, 0, 0}, 0), ConfigError);
  CHECK_NOTHROW(grouped_split(uniform_corpus(2, 1), {1, 1, 0}, 0));
  CHECK_THROWS_AS(grouped_split(uniform_corpus(1, 2), {1, 1, 0}, 0), ConfigError);
}

TEST_CASE("grouped_split property: groups never straddle splits, ratios within one group") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t groups = 3 + rng() % 200;
    const bool uniform = trial % 2 == 0;
    std::vector<CausalPair> ps;
    const std::size_t fixed = 1 + rng() % 3;
    for (std::size_t g = 0; g < groups; ++g) {
      const std::size_t n = uniform ? fixed : 1 + rng() % 4;
      for (std::size_t i = 0; i < n; ++i) {
        const auto id = std::to_string(g) + "/" + std::to_string(i);
        ps.push_back({id, "c", "e", "g" + std::to_string(g)});
      }
    }
    const auto s = grouped_split(ps, {6, 1, 1}, rng());
    const auto a = groups_of(s.train), b = groups_of(s.validation), c = groups_of(s.test);
    for (const auto& g : a) CHECK((!b.contains(g) && !c.contains(g)));
    for (const auto& g : b) CHECK(!c.contains(g));
    CHECK(s.train.size() + s.validation.size() + s.test.size() == ps.size());
    if (uniform) {
      const double target[3] = {6.0 / 8 * groups, 1.0 / 8 * groups, 1.0 / 8 * groups};
      const double got[3] = {double(a.size()), double(b.size()), double(c.size())};
      for (int i = 0; i < 3; ++i) CHECK(std::abs(got[i] - target[i]) < 1.0);
    }
  }
}

TEST_CASE("build_pool contains all gold, has the requested size and no gold duplicates") {
  std::vector<PoolEntry> gold;
  for (int i = 0; i < 5; ++i) gold.push_back({"g" + std::to_string(i), "gold " + std::to_string(i), "q" + std::to_string(i)});
  std::vector<std::string> src;
  for (int i = 0; i < 50; ++i) src.push_back("distractor " + std::to_string(i));
  src.push_back("GOLD 3!");  // normalizes to a gold text

  const auto pool = build_pool(gold, src, 30, 4);
  CHECK(pool.size() == 30);
  std::unordered_set<std::string> ids, texts;
  for (const auto& e : pool) {
    CHECK(ids.insert(e.doc_id).second);
    texts.insert(normalize(e.text));
  }
  for (const auto& g : gold) CHECK(ids.contains(g.doc_id));
  std::size_t gold_texts = 0;
  for (const auto& e : pool) gold_texts += e.text.rfind("gold", 0) == 0 || e.text == "GOLD 3!";
  CHECK(gold_texts == gold.size());

  CHECK(build_pool(gold, src, 30, 4) == pool);
  const auto exact = build_pool(gold, src, gold.size(), 9);
  CHECK(exact.size() == gold.size());
  CHECK(std::is_permutation(exact.begin(), exact.end(), gold.begin()));
}

TEST_CASE("build_pool shortfall and larger pools extend smaller ones") {
  std::vector<PoolEntry> gold{{"g", "gold", "q"}};
  std::vector<std::string> src{"a", "b", "gold", "c"};
  try {
    build_pool(gold, src, 5, 0);
    FAIL("shortfall accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("short by 1") != std::string::npos);
  }
  std::vector<std::string> many;
  for (int i = 0; i < 200; ++i) many.push_back("s" + std::to_string(i));
  const auto small = build_pool(gold, many, 21, 8);
  const auto big = build_pool(gold, many, 101, 8);
  std::unordered_set<std::string> big_ids;
  for (const auto& e : big) big_ids.insert(e.doc_id);
  for (const auto& e : small) CHECK(big_ids.contains(e.doc_id));
}

TEST_CASE("build_pool with a two-million sentence source keeps every gold entry") {
  std::vector<PoolEntry> gold;
  for (int i = 0; i < 2136; ++i) gold.push_back({"gold/" + std::to_string(i), "gold sentence " + std::to_string(i), "q" + std::to_string(i)});
  std::vector<std::string> src;
  src.reserve(2'000'000);
  for (int i = 0; i < 2'000'000; ++i) src.push_back("w" + std::to_string(i));
  const auto pool = build_pool(gold, src, 2'002'136, 1);
  CHECK(pool.size() == 2'002'136);
  std::size_t golds = 0;
  for (const auto& e : pool) golds += e.gold_for.has_value();
  CHECK(golds == gold.size());
}

TEST_CASE("pool file round-trips including optional gold_for") {
  const std::vector<PoolEntry> pool{{"a", "text a", "q1"}, {"b", "text b", std::nullopt}};
  std::stringstream ss;
  write_pool(ss, pool);
  CHECK(read_pool(ss) == pool);
}

TEST_CASE("synthetic corpus: determinism, disjoint vocabularies, uniqueness") {
  const auto a = synth_causal_dataset(2000, {120, 120}, 7);
  const auto b = synth_causal_dataset(2000, {120, 120}, 7);
  CHECK(a == b);
  REQUIRE(a.size() == 2000);
  std::unordered_set<std::string> ids, effects, causes;
  for (const auto& p : a) {
    CHECK(p.group_id == p.id);
    ids.insert(p.id);
    effects.insert(p.effect_text);
    causes.insert(p.cause_text);
    const auto ct = split_tokens(normalize(p.cause_text));
    const auto et = split_tokens(normalize(p.effect_text));
    for (const auto& t : ct) CHECK(std::find(et.begin(), et.end(), t) == et.end());
  }
  CHECK(ids.size() == 2000);
  CHECK(effects.size() == 2000);
  CHECK(causes.size() == 2000);
  CHECK(synth_causal_dataset(50, {120, 120}, 8) != synth_causal_dataset(50, {120, 120}, 7));
}

TEST_CASE("synthetic world: cause template determines effect template") {
  SyntheticWorld w({24, 24}, 3);
  const auto ps = w.pairs(300);
  std::map<std::string, std::string> word_map;
  for (const auto& p : ps) {
    const auto c = split_tokens(p.cause_text);
    const auto e = split_tokens(p.effect_text);
    REQUIRE(c.size() == 3);
    REQUIRE(e.size() == 3);
    for (int s = 0; s < 3; ++s) {
      auto [it, fresh] = word_map.emplace(c[s], e[s]);
      CHECK(it->second == e[s]);
    }
  }
}

TEST_CASE("held-out sentences never coincide with pair texts") {
  SyntheticWorld w({60, 60}, 11);
  const auto ps = w.pairs(500);
  std::unordered_set<std::string> effects;
  for (const auto& p : ps) effects.insert(p.effect_text);
  for (const auto& s : w.held_out_sentences(500, 2000, Side::kEffect)) CHECK(!effects.contains(s));
  CHECK_THROWS_AS(w.held_out_sentences(500, w.template_count(), Side::kEffect), ConfigError);
  CHECK_THROWS_AS(SyntheticWorld({4, 120}, 1), ConfigError);
}
