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

#ifndef CAUSAL_EVAL_HPP_
#define CAUSAL_EVAL_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "causal/corpus.hpp"
#include "causal/index.hpp"

namespace causal {

struct QueryJudgment {
  std::string query_id;
  std::vector<std::string> gold_doc_ids;  // binary relevance
  std::optional<std::string> answer_text;
};

// 1 if any gold id is among the first k hits.
int hit_at_k(const RetrievalResult& result, const QueryJudgment& judgment, std::size_t k);
// 1/rank of the first gold id within the first k hits, else 0.
double mrr_at_k(const RetrievalResult& result, const QueryJudgment& judgment, std::size_t k);
// Binary-relevance nDCG with log2(rank + 1) discounts; the ideal ordering puts
// min(|gold|, k) relevant documents first.
double ndcg_at_k(const RetrievalResult& result, const QueryJudgment& judgment, std::size_t k);

inline constexpr double kDefaultFuzzyRecall = 0.8;

// Relaxed answer match: the normalized answer occurs in the normalized
// passage, or at least `min_recall` of the answer tokens occur as passage
// tokens.
bool fuzzy_match(std::string_view answer, std::string_view passage,
                 double min_recall = kDefaultFuzzyRecall);

// Fraction of judged queries whose answer text fuzzy-matches the text of at
// least one of the first k hits. Judgments without an answer count as misses.
double fuzzy_hit_rate(std::span<const RetrievalResult> results,
                      std::span<const QueryJudgment> judgments,
                      const std::unordered_map<std::string, std::string>& doc_text, std::size_t k,
                      double min_recall = kDefaultFuzzyRecall);

struct MetricValues {
  std::map<std::size_t, double> hit;
  std::map<std::size_t, double> mrr;
  std::map<std::size_t, double> ndcg;

  bool operator==(const MetricValues&) const = default;
};

struct SeedMetrics {
  std::uint64_t seed = 0;
  MetricValues values;
};

struct MetricsReport {
  std::size_t n_queries = 0;
  MetricValues values;
  std::vector<SeedMetrics> seeds;  // per-seed values when averaged over runs
  std::string fingerprint;

  nlohmann::ordered_json to_json() const;
};

inline const std::vector<std::size_t> kDefaultKs{1, 5, 10, 20};

// Means over `judgments`. A judged query with no result scores zero on every
// metric; results for unjudged queries are ignored. Throws FormatError on a
// duplicate query id among results.
MetricsReport evaluate_run(std::span<const RetrievalResult> results,
                           std::span<const QueryJudgment> judgments,
                           std::span<const std::size_t> ks, std::string fingerprint = {});

// Arithmetic mean of per-seed reports (which must share ks and n_queries);
// each input is kept in `seeds`.
MetricsReport average_over_seeds(std::span<const std::pair<std::uint64_t, MetricsReport>> runs,
                                 std::string fingerprint = {});

// One judgment per distinct gold_for value in the pool, in first-appearance
// order. The answer text is the text of the first gold document.
std::vector<QueryJudgment> judgments_from_pool(std::span<const PoolEntry> pool);

// Query ids present in `results` without a judgment.
std::vector<std::string> unjoined_queries(std::span<const RetrievalResult> results,
                                          std::span<const QueryJudgment> judgments);

// Ranked-results JSONL: {"query_id": ..., "hits": [{"doc_id": ..., "score": ...}]}.
void write_results(std::ostream& out, std::span<const RetrievalResult> results);
std::vector<RetrievalResult> read_results(std::istream& in);

}  // namespace causal

#endif  // CAUSAL_EVAL_HPP_
