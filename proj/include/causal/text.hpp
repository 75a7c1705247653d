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

#ifndef CAUSAL_TEXT_HPP_
#define CAUSAL_TEXT_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace causal {

// Lowercase, NFC-compose, turn punctuation into spaces, collapse runs of
// whitespace and trim. Invalid UTF-8 sequences are replaced by U+FFFD.
std::string normalize(std::string_view text);

// Whitespace split of an already normalized string.
std::vector<std::string> split_tokens(std::string_view normalized);

using TokenId = std::int32_t;

// Token to id map. Ids 0 and 1 are reserved for padding and unknown tokens;
// the rest are ordered by descending corpus frequency, ties broken by
// lexicographic token order.
class Vocab {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;

  Vocab();

  static Vocab build(std::span<const std::string> corpus, int min_freq = 1);
  // `tokens` lists the non-reserved tokens in id order (first one gets id 2).
  static Vocab from_tokens(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  TokenId id_of(std::string_view token) const;
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }

  // JSONL: a {"pad":0,"unk":1,"size":V} header line, then one
  // {"token":...,"id":...} line per non-reserved token.
  void write(std::ostream& out) const;
  static Vocab read(std::istream& in);

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

struct TokenSeq {
  std::vector<TokenId> ids;
  std::size_t original_length = 0;  // token count before truncation
};

inline constexpr std::size_t kDefaultMaxLen = 64;

// Normalize, split, map OOV to UNK, truncate to max_len. An empty result
// becomes a single UNK.
TokenSeq encode_tokens(const Vocab& vocab, std::string_view text,
                       std::size_t max_len = kDefaultMaxLen);

}  // namespace causal

#endif  // CAUSAL_TEXT_HPP_
