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
#include <string>
#include <vector>

#include "tcpgen/simulator.hpp"

namespace tcpgen::toy {

// Frequent English words used as the common inventory and common-word list.
inline const std::vector<std::string>& CommonWords() {
  static const std::vector<std::string> words = {
      "the",    "of",     "and",    "to",     "in",     "is",     "you",
      "that",   "it",     "he",     "was",    "for",    "on",     "are",
      "as",     "with",   "his",    "they",   "at",     "be",     "this",
      "have",   "from",   "or",     "one",    "had",    "by",     "word",
      "but",    "not",    "what",   "all",    "were",   "we",     "when",
      "your",   "can",    "said",   "there",  "use",    "an",     "each",
      "which",  "she",    "do",     "how",    "their",  "if",     "will",
      "up",     "other",  "about",  "out",    "many",   "then",   "them",
      "these",  "so",     "some",   "her",    "would",  "make",   "like",
      "him",    "into",   "time",   "has",    "look",   "two",    "more",
      "go",     "see",    "number", "no",     "way",    "could",  "people",
      "my",     "than",   "first",  "been",   "call",   "who",    "now",
      "find",   "long",   "down",   "day",    "did",    "get",    "come",
      "made",   "may",    "part",   "name",   "road",   "street", "take",
      "turn",   "left",   "right",  "near",   "where",  "please", "next",
      "after",  "before", "here",   "want",   "need",   "station", "bus",
      "stop",   "walk",   "drive",  "far",    "ask",    "much",   "meet"};
  return words;
}

// Place and person names standing in for rare words. The list is split into
// disjoint training and test inventories (see TrainRareWords/TestRareWords),
// so test-time bias words never occur in training.
inline const std::vector<std::string>& RareWords() {
  static const std::vector<std::string> words = {
      "tampines", "jurong", "serangoon", "bedok", "pasir", "woodlands",
      "yishun", "sembawang", "punggol", "sengkang", "hougang", "bishan",
      "payoh", "clementi", "bukit", "batok", "timah", "panjang", "choa",
      "kranji", "changi", "simei", "eunos", "kembangan", "geylang",
      "aljunied", "kallang", "lavender", "bugis", "rochor", "novena",
      "tanglin", "holland", "buona", "pioneer", "tuas", "lakeside", "dover",
      "redhill", "tiong", "bahru", "outram", "tanjong", "pagar", "raffles",
      "marina", "bayfront", "telok",
      "kerry", "sentosa", "keppel", "pandan", "yuhua", "teban", "ridge",
      "mandai", "seletar", "lentor", "thomson", "marymount", "caldecott",
      "braddell", "potong", "kovan", "lorong", "chuan", "defu", "lebar",
      "siglap", "katong", "parade", "upper", "changkat", "jalan", "kampong",
      "sims", "ubi", "macpherson", "mattar", "boon", "keng", "bendemeer",
      "farrer", "kent", "haw", "pasarbella", "gombak", "cashew", "hillview",
      "beauty", "senja", "fajar", "segar", "jelapang", "bangkit", "petir"};
  return words;
}

namespace detail {
// Splits the rare inventory into two disjoint halves by alternating over the
// alphabetically sorted list, so both halves cover similar initial letters.
inline std::vector<std::string> RareHalf(std::size_t parity) {
  auto all = RareWords();
  std::sort(all.begin(), all.end());
  std::vector<std::string> half;
  for (std::size_t i = parity; i < all.size(); i += 2) half.push_back(all[i]);
  return half;
}
}  // namespace detail

inline std::vector<std::string> TrainRareWords() { return detail::RareHalf(0); }

inline std::vector<std::string> TestRareWords() { return detail::RareHalf(1); }

// Common part of the toy setup: rare words are misrecognised as generated
// confusables, decoder states carry a 0.3 domain shift.
inline SimConfig BaseConfig() {
  SimConfig c;
  c.encoder_seed = 2024;
  c.min_words = 4;
  c.max_words = 10;
  c.common_words = CommonWords();
  c.rare_word_rate = 0.2;
  c.base_accuracy_common = 0.9;
  c.base_accuracy_rare = 0.6;
  c.confused_gold_share = 0.5;
  c.auto_confusions = true;
  c.d_h = 64;
  c.domain_shift = 0.3;
  return c;
}

inline SimConfig TrainConfig(std::uint64_t seed = 3, std::size_t n = 500) {
  SimConfig c = BaseConfig();
  c.seed = seed;
  c.n_utterances = n;
  c.rare_words = TrainRareWords();
  c.id_prefix = "train";
  return c;
}

inline SimConfig TestConfig(std::uint64_t seed = 4, std::size_t n = 200) {
  SimConfig c = BaseConfig();
  c.seed = seed;
  c.n_utterances = n;
  c.rare_words = TestRareWords();
  c.id_prefix = "test";
  return c;
}

// Base model that already transcribes its training references perfectly.
inline SimConfig AlreadyFitConfig(std::uint64_t seed = 5, std::size_t n = 500) {
  SimConfig c = TrainConfig(seed, n);
  c.base_accuracy_common = 1.0;
  c.base_accuracy_rare = 1.0;
  c.auto_confusions = false;
  c.confusion_map.clear();
  return c;
}

}  // namespace tcpgen::toy
