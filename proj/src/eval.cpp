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

#include "causal/eval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "causal/error.hpp"
#include "causal/text.hpp"

namespace causal {

namespace {

// 1-based rank of the first gold hit within the first k hits, 0 if none.
std::size_t first_gold_rank(const RetrievalResult& result, const QueryJudgment& judgment,
                            std::size_t k) {
  const std::size_t n = std::min(k, result.hits.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = result.hits[i].doc_id;
    if (std::find(judgment.gold_doc_ids.begin(), judgment.gold_doc_ids.end(), id) !=
        judgment.gold_doc_ids.end()) {
      return i + 1;
    }
  }
  return 0;
}

nlohmann::ordered_json metric_map(const std::map<std::size_t, double>& m) {
  nlohmann::ordered_json obj = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m) obj[std::to_string(k)] = v;
  return obj;
}

}  // namespace

int hit_at_k(const RetrievalResult& result, const QueryJudgment& judgment, std::size_t k) {
  return first_gold_rank(result, judgment, k) > 0 ? 1 : 0;
}

double mrr_at_k(const RetrievalResult& result, const QueryJudgment& judgment, std::size_t k) {
  const std::size_t rank = first_gold_rank(result, judgment, k);
  return rank == 0 ? 0.0 : 1.0 / static_cast<double>(rank);
}

double ndcg_at_k(const RetrievalResult& result, const QueryJudgment& judgment, std::size_t k) {
  const std::unordered_set<std::string> gold(judgment.gold_doc_ids.begin(),
                                             judgment.gold_doc_ids.end());
  double dcg = 0.0;
  const std::size_t n = std::min(k, result.hits.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (gold.contains(result.hits[i].doc_id)) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  double idcg = 0.0;
  const std::size_t ideal = std::min(k, gold.size());
  for (std::size_t i = 0; i < ideal; ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return idcg == 0.0 ? 0.0 : dcg / idcg;
}

bool fuzzy_match(std::string_view answer, std::string_view passage, double min_recall) {
  const std::string a = normalize(answer);
  const std::string p = normalize(passage);
  if (a.empty()) return false;
  if (p.find(a) != std::string::npos) return true;
  const auto answer_tokens = split_tokens(a);
  const auto passage_tokens = split_tokens(p);
  const std::unordered_set<std::string> present(passage_tokens.begin(), passage_tokens.end());
  std::size_t found = 0;
  for (const auto& t : answer_tokens) found += present.contains(t) ? 1 : 0;
  return static_cast<double>(found) / static_cast<double>(answer_tokens.size()) >= min_recall;
}

double fuzzy_hit_rate(std::span<const RetrievalResult> results,
                      std::span<const QueryJudgment> judgments,
                      const std::unordered_map<std::string, std::string>& doc_text, std::size_t k,
                      double min_recall) {
  if (judgments.empty()) return 0.0;
  std::unordered_map<std::string_view, const RetrievalResult*> by_id;
  for (const auto& r : results) by_id.emplace(r.query_id, &r);
  std::size_t hits = 0;
  for (const auto& j : judgments) {
    const auto it = by_id.find(j.query_id);
    if (it == by_id.end() || !j.answer_text || j.answer_text->empty()) continue;
    const auto& ranked = it->second->hits;
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
      const auto text = doc_text.find(ranked[i].doc_id);
      if (text != doc_text.end() && fuzzy_match(*j.answer_text, text->second, min_recall)) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(judgments.size());
}

nlohmann::ordered_json MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["n_queries"] = n_queries;
  j["hit"] = metric_map(values.hit);
  j["mrr"] = metric_map(values.mrr);
  j["ndcg"] = metric_map(values.ndcg);
  nlohmann::ordered_json seed_list = nlohmann::ordered_json::array();
  for (const auto& s : seeds) {
    nlohmann::ordered_json e;
    e["seed"] = s.seed;
    e["hit"] = metric_map(s.values.hit);
    e["mrr"] = metric_map(s.values.mrr);
    e["ndcg"] = metric_map(s.values.ndcg);
    seed_list.push_back(std::move(e));
  }
  j["seeds"] = std::move(seed_list);
  j["fingerprint"] = fingerprint;
  return j;
}

MetricsReport evaluate_run(std::span<const RetrievalResult> results,
                           std::span<const QueryJudgment> judgments,
                           std::span<const std::size_t> ks, std::string fingerprint) {
  std::unordered_map<std::string_view, const RetrievalResult*> by_id;
  for (const auto& r : results) {
    if (!by_id.emplace(r.query_id, &r).second) {
      throw FormatError("duplicate query_id '" + r.query_id + "' in results");
    }
  }
  MetricsReport report;
  report.n_queries = judgments.size();
  report.fingerprint = std::move(fingerprint);
  for (std::size_t k : ks) {
    if (k == 0) throw ConfigError("metric cutoffs must be >= 1");
    report.values.hit[k] = 0.0;
    report.values.mrr[k] = 0.0;
    report.values.ndcg[k] = 0.0;
  }
  if (judgments.empty()) return report;

  for (const auto& j : judgments) {
    if (j.gold_doc_ids.empty()) throw FormatError("query '" + j.query_id + "' has no gold documents");
    const auto it = by_id.find(j.query_id);
    if (it == by_id.end()) continue;
    for (std::size_t k : ks) {
      report.values.hit[k] += hit_at_k(*it->second, j, k);
      report.values.mrr[k] += mrr_at_k(*it->second, j, k);
      report.values.ndcg[k] += ndcg_at_k(*it->second, j, k);
    }
  }
  const double n = static_cast<double>(judgments.size());
  for (auto* m : {&report.values.hit, &report.values.mrr, &report.values.ndcg}) {
    for (auto& [k, v] : *m) v /= n;
  }
  return report;
}

MetricsReport average_over_seeds(std::span<const std::pair<std::uint64_t, MetricsReport>> runs,
                                 std::string fingerprint) {
  if (runs.empty()) throw ConfigError("average_over_seeds needs at least one run");
  MetricsReport out;
  out.n_queries = runs.front().second.n_queries;
  out.fingerprint = std::move(fingerprint);
  for (const auto& [seed, report] : runs) {
    if (report.n_queries != out.n_queries) throw ConfigError("seed runs cover different query sets");
    out.seeds.push_back({seed, report.values});
  }
  auto average = [&](auto member) {
    std::map<std::size_t, double> acc;
    for (const auto& [seed, report] : runs) {
      const auto& m = report.values.*member;
      if (!acc.empty() && acc.size() != m.size()) throw ConfigError("seed runs use different cutoffs");
      for (const auto& [k, v] : m) acc[k] += v;
    }
    for (auto& [k, v] : acc) v /= static_cast<double>(runs.size());
    return acc;
  };
  out.values.hit = average(&MetricValues::hit);
  out.values.mrr = average(&MetricValues::mrr);
  out.values.ndcg = average(&MetricValues::ndcg);
  return out;
}

std::vector<QueryJudgment> judgments_from_pool(std::span<const PoolEntry> pool) {
  std::vector<QueryJudgment> out;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& e : pool) {
    if (!e.gold_for) continue;
    auto [it, inserted] = index.emplace(*e.gold_for, out.size());
    if (inserted) out.push_back({*e.gold_for, {}, e.text});
    out[it->second].gold_doc_ids.push_back(e.doc_id);
  }
  return out;
}

std::vector<std::string> unjoined_queries(std::span<const RetrievalResult> results,
                                          std::span<const QueryJudgment> judgments) {
  std::unordered_set<std::string_view> judged;
  for (const auto& j : judgments) judged.insert(j.query_id);
  std::vector<std::string> out;
  for (const auto& r : results) {
    if (!judged.contains(r.query_id)) out.push_back(r.query_id);
  }
  return out;
}

void write_results(std::ostream& out, std::span<const RetrievalResult> results) {
  for (const auto& r : results) {
    nlohmann::ordered_json hits = nlohmann::ordered_json::array();
    for (const auto& h : r.hits) hits.push_back({{"doc_id", h.doc_id}, {"score", h.score}});
    nlohmann::ordered_json line = {{"query_id", r.query_id}, {"hits", std::move(hits)}};
    out << line.dump() << '\n';
  }
}

std::vector<RetrievalResult> read_results(std::istream& in) {
  std::vector<RetrievalResult> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      RetrievalResult r;
      r.query_id = j.at("query_id").get<std::string>();
      for (const auto& h : j.at("hits")) {
        r.hits.push_back({h.at("doc_id").get<std::string>(), h.at("score").get<double>()});
      }
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("results line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace causal
