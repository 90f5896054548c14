// Copyright (c) 2026 The tcpgen-lab Authors
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

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tcpgen/error.hpp"

namespace tcpgen {

using TokenId = std::int32_t;

// U+2581, prefixed to every word-initial character token.
inline constexpr std::string_view kBoundaryMark = "\xE2\x96\x81";
inline constexpr std::string_view kEosToken = "</s>";

// Splits a UTF-8 string into code points, each returned as its byte string.
inline std::vector<std::string> Utf8Chars(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto lead = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if (lead >= 0xF0) {
      len = 4;
    } else if (lead >= 0xE0) {
      len = 3;
    } else if (lead >= 0xC0) {
      len = 2;
    } else if (lead >= 0x80) {
      throw Error("invalid UTF-8 lead byte in \"" + std::string(s) + "\"");
    }
    if (i + len > s.size()) {
      throw Error("truncated UTF-8 sequence in \"" + std::string(s) + "\"");
    }
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) {
        throw Error("invalid UTF-8 continuation in \"" + std::string(s) +
                    "\"");
      }
    }
    out.emplace_back(s.substr(i, len));
    i += len;
  }
  return out;
}

// ASCII lowercasing; multi-byte code points pass through unchanged.
inline std::string ToLower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

// Character-level token inventory. Ids are assigned boundary-marked tokens
// first (sorted by character), then word-internal tokens (sorted), then EOS,
// so the same source words always give the same ids.
class Vocab {
 public:
  Vocab() = default;

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  TokenId eos() const { return eos_; }
  bool is_boundary(TokenId id) const { return boundary_.at(id); }

  // Character without the boundary mark; empty for EOS.
  std::string_view surface(TokenId id) const {
    if (id == eos_) return {};
    std::string_view t = tokens_.at(id);
    if (boundary_[id]) t.remove_prefix(kBoundaryMark.size());
    return t;
  }

  std::optional<TokenId> Find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool operator==(const Vocab& other) const {
    return tokens_ == other.tokens_;
  }

 private:
  friend Vocab BuildVocab(std::span<const std::string> corpus_words);

  std::vector<std::string> tokens_;
  std::vector<bool> boundary_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId eos_ = -1;
};

inline Vocab BuildVocab(std::span<const std::string> corpus_words) {
  if (corpus_words.empty()) throw Error("empty vocabulary source");
  std::set<std::string> initial;
  std::set<std::string> internal;
  for (const auto& word : corpus_words) {
    if (word.empty()) throw Error("empty word in vocabulary source");
    const auto chars = Utf8Chars(word);
    for (std::size_t i = 0; i < chars.size(); ++i) {
      const auto& ch = chars[i];
      if (ch == " " || ch == "\t" || ch == "\n" || ch == "\r") {
        throw Error("whitespace inside word \"" + word + "\"");
      }
      (i == 0 ? initial : internal).insert(ch);
    }
  }
  Vocab v;
  for (const auto& ch : initial) {
    v.tokens_.push_back(std::string(kBoundaryMark) + ch);
    v.boundary_.push_back(true);
  }
  for (const auto& ch : internal) {
    v.tokens_.push_back(ch);
    v.boundary_.push_back(false);
  }
  v.eos_ = static_cast<TokenId>(v.tokens_.size());
  v.tokens_.emplace_back(kEosToken);
  v.boundary_.push_back(false);
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    v.index_.emplace(v.tokens_[i], static_cast<TokenId>(i));
  }
  return v;
}

// Vocabulary in which every character of `alphabet` exists both as a
// word-initial and a word-internal token.
inline Vocab AlphabetVocab(std::string_view alphabet) {
  const auto chars = Utf8Chars(alphabet);
  if (chars.empty()) throw Error("empty vocabulary source");
  std::vector<std::string> words;
  for (const auto& c : chars) words.push_back(c + std::string(alphabet));
  return BuildVocab(words);
}

struct WordSpan {
  std::size_t word_index = 0;
  std::size_t token_start = 0;
  std::size_t token_end = 0;  // exclusive

  bool operator==(const WordSpan&) const = default;
};

// Token sequence of an utterance. `tokens` always ends with EOS, so its
// length U counts the EOS step; word spans partition [0, U - 1).
struct TokenizedUtterance {
  std::vector<WordSpan> word_spans;
  std::vector<TokenId> tokens;

  std::size_t length() const { return tokens.size(); }
};

inline std::vector<TokenId> TokenizeWord(const Vocab& vocab,
                                         std::string_view word) {
  const auto chars = Utf8Chars(word);
  if (chars.empty()) throw Error("cannot tokenize an empty word");
  std::vector<TokenId> ids;
  ids.reserve(chars.size());
  for (std::size_t i = 0; i < chars.size(); ++i) {
    const std::string key =
        i == 0 ? std::string(kBoundaryMark) + chars[i] : chars[i];
    const auto id = vocab.Find(key);
    if (!id) {
      throw Error("character '" + chars[i] + "' of word \"" +
                  std::string(word) + "\" is not in the vocabulary");
    }
    ids.push_back(*id);
  }
  return ids;
}

inline TokenizedUtterance Tokenize(const Vocab& vocab,
                                   std::span<const std::string> words) {
  TokenizedUtterance out;
  for (std::size_t w = 0; w < words.size(); ++w) {
    const auto ids = TokenizeWord(vocab, words[w]);
    const std::size_t start = out.tokens.size();
    out.tokens.insert(out.tokens.end(), ids.begin(), ids.end());
    out.word_spans.push_back({w, start, out.tokens.size()});
  }
  out.tokens.push_back(vocab.eos());
  return out;
}

// Placeholder emitted for a word-internal fragment with no word start.
inline constexpr std::string_view kMalformedWord = "<malformed>";

struct Detokenized {
  std::vector<std::string> words;
  std::size_t malformed = 0;
};

// Inverse of Tokenize. A boundary-marked token opens a new word; EOS ends
// the stream. Internal tokens before any word start become one placeholder.
inline Detokenized Detokenize(const Vocab& vocab,
                              std::span<const TokenId> tokens) {
  Detokenized out;
  bool orphan = false;
  for (TokenId t : tokens) {
    if (t < 0 || static_cast<std::size_t>(t) >= vocab.size()) {
      throw Error("token id out of range: " + std::to_string(t));
    }
    if (t == vocab.eos()) break;
    if (vocab.is_boundary(t)) {
      out.words.emplace_back(vocab.surface(t));
      orphan = false;
    } else if (out.words.empty() || orphan) {
      if (!orphan) {
        out.words.emplace_back(kMalformedWord);
        ++out.malformed;
        orphan = true;
      }
    } else {
      out.words.back() += vocab.surface(t);
    }
  }
  return out;
}

// One word per line, UTF-8. Blank lines are skipped; surrounding whitespace
// is trimmed and text lowercased.
inline std::vector<std::string> ReadWordList(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open word list: " + path);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r\n");
    words.push_back(ToLower(line.substr(b, e - b + 1)));
  }
  return words;
}

}  // namespace tcpgen
