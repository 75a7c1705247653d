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

#include "causal/text.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <memory>
#include <ostream>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <nlohmann/json.hpp>

#include "causal/error.hpp"

namespace causal {

namespace {

const icu::Normalizer2& nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || n == nullptr) {
    throw ConfigError("ICU NFC normalizer unavailable");
  }
  return *n;
}

bool is_separator(UChar32 c) {
  return u_ispunct(c) || u_isUWhiteSpace(c) || u_iscntrl(c);
}

}  // namespace

std::string normalize(std::string_view text) {
  if (text.empty()) return {};
  icu::UnicodeString ustr = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  // Lowercasing can decompose (e.g. U+0130), so compose afterwards.
  ustr.toLower(icu::Locale::getRoot());
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString composed = nfc().normalize(ustr, status);
  if (U_FAILURE(status)) throw FormatError("NFC normalization failed");

  icu::UnicodeString cleaned;
  bool pending_space = false;
  for (int32_t i = 0; i < composed.length();) {
    const UChar32 c = composed.char32At(i);
    i += U16_LENGTH(c);
    if (is_separator(c)) {
      pending_space = !cleaned.isEmpty();
      continue;
    }
    if (pending_space) cleaned.append(static_cast<UChar>(u' '));
    pending_space = false;
    cleaned.append(c);
  }
  std::string out;
  cleaned.toUTF8String(out);
  return out;
}

std::vector<std::string> split_tokens(std::string_view normalized) {
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < normalized.size()) {
    const std::size_t space = normalized.find(' ', pos);
    const std::size_t end = space == std::string_view::npos ? normalized.size() : space;
    if (end > pos) tokens.emplace_back(normalized.substr(pos, end - pos));
    pos = end + 1;
  }
  return tokens;
}

Vocab::Vocab() : tokens_{"<pad>", "<unk>"} {}

Vocab Vocab::build(std::span<const std::string> corpus, int min_freq) {
  if (min_freq < 1) throw ConfigError("min_freq must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& sentence : corpus) {
    for (auto& tok : split_tokens(normalize(sentence))) ++counts[std::move(tok)];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, n] : counts) {
    if (n >= static_cast<std::size_t>(min_freq)) kept.emplace_back(tok, n);
  }
  // std::map iteration is already lexicographic; stable sort keeps that order
  // among equal counts.
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens;
  tokens.reserve(kept.size());
  for (auto& [tok, n] : kept) tokens.push_back(std::move(tok));
  return from_tokens(std::move(tokens));
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  Vocab v;
  v.tokens_.reserve(tokens.size() + 2);
  for (auto& tok : tokens) {
    if (tok.empty()) throw FormatError("vocab token must be non-empty");
    const auto id = static_cast<TokenId>(v.tokens_.size());
    if (!v.ids_.emplace(tok, id).second) throw FormatError("duplicate vocab token '" + tok + "'");
    v.tokens_.push_back(std::move(tok));
  }
  return v;
}

TokenId Vocab::id_of(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

void Vocab::write(std::ostream& out) const {
  nlohmann::ordered_json header = {{"pad", kPad}, {"unk", kUnk}, {"size", size()}};
  out << header.dump() << '\n';
  for (std::size_t id = 2; id < tokens_.size(); ++id) {
    nlohmann::ordered_json line = {{"token", tokens_[id]}, {"id", id}};
    out << line.dump() << '\n';
  }
}

Vocab Vocab::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw TruncatedError("vocab section missing header line");
  std::size_t size = 0;
  try {
    const auto header = nlohmann::json::parse(line);
    if (header.at("pad").get<int>() != kPad || header.at("unk").get<int>() != kUnk) {
      throw FormatError("vocab header reserves unexpected pad/unk ids");
    }
    size = header.at("size").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("vocab header: ") + e.what());
  }
  if (size < 2) throw FormatError("vocab size must be >= 2");
  std::vector<std::string> tokens;
  tokens.reserve(size - 2);
  for (std::size_t expected = 2; expected < size; ++expected) {
    if (!std::getline(in, line)) {
      throw TruncatedError("vocab section ends after " + std::to_string(expected) + " of " +
                           std::to_string(size) + " entries");
    }
    try {
      const auto entry = nlohmann::json::parse(line);
      if (entry.at("id").get<std::size_t>() != expected) {
        throw FormatError("vocab ids must be contiguous; expected " + std::to_string(expected));
      }
      tokens.push_back(entry.at("token").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("vocab line " + std::to_string(expected) + ": " + e.what());
    }
  }
  return from_tokens(std::move(tokens));
}

TokenSeq encode_tokens(const Vocab& vocab, std::string_view text, std::size_t max_len) {
  if (max_len < 1) throw ConfigError("max_len must be >= 1");
  const auto tokens = split_tokens(normalize(text));
  TokenSeq seq;
  seq.original_length = tokens.size();
  const std::size_t n = std::min(tokens.size(), max_len);
  seq.ids.reserve(std::max<std::size_t>(n, 1));
  for (std::size_t i = 0; i < n; ++i) seq.ids.push_back(vocab.id_of(tokens[i]));
  if (seq.ids.empty()) seq.ids.push_back(Vocab::kUnk);
  return seq;
}

}  // namespace causal
