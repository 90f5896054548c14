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
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tcpgen/rng.hpp"
#include "tcpgen/simulator.hpp"

namespace tcpgen {

// Words of the references that are not on the common-word list, sorted.
inline std::vector<std::string> ExtractRarewords(
    std::span<const std::vector<std::string>> references,
    const std::set<std::string>& common_words) {
  std::set<std::string> rare;
  for (const auto& ref : references) {
    for (const auto& w : ref) {
      if (!common_words.count(w)) rare.insert(w);
    }
  }
  return {rare.begin(), rare.end()};
}

inline std::vector<std::string> ExtractRarewords(
    const Corpus& corpus, const std::set<std::string>& common_words) {
  std::vector<std::vector<std::string>> refs;
  refs.reserve(corpus.size());
  for (const auto& u : corpus) refs.push_back(u.ref_words);
  return ExtractRarewords(refs, common_words);
}

// Rare words of one utterance in order of first appearance.
inline std::vector<std::string> UtteranceRarewords(
    std::span<const std::string> ref_words,
    const std::set<std::string>& common_words) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& w : ref_words) {
    if (!common_words.count(w) && seen.insert(w).second) out.push_back(w);
  }
  return out;
}

struct BiasList {
  std::string id;
  std::vector<std::string> words;  // own rarewords first, then distractors
  std::size_t n_own = 0;
  bool exhausted = false;  // fewer than N distractor candidates existed
};

// The utterance's own rarewords plus `n_distractors` distinct words sampled
// without replacement from all_rarewords minus the own ones. The sample
// depends only on (seed, utterance id).
inline BiasList BuildUtteranceList(const std::string& utt_id,
                                   std::span<const std::string> own_rarewords,
                                   std::span<const std::string> all_rarewords,
                                   std::size_t n_distractors,
                                   std::uint64_t seed) {
  BiasList list;
  list.id = utt_id;
  std::set<std::string> own;
  for (const auto& w : own_rarewords) {
    if (own.insert(w).second) list.words.push_back(w);
  }
  list.n_own = list.words.size();
  std::set<std::string> pool_set;
  for (const auto& w : all_rarewords) {
    if (!own.count(w)) pool_set.insert(w);
  }
  std::vector<std::string> pool(pool_set.begin(), pool_set.end());
  if (pool.size() <= n_distractors) {
    list.exhausted = pool.size() < n_distractors;
    list.words.insert(list.words.end(), pool.begin(), pool.end());
    return list;
  }
  Rng rng(SubSeed(seed, "biaslist:" + utt_id));
  // Partial Fisher-Yates.
  for (std::size_t k = 0; k < n_distractors; ++k) {
    const std::size_t j = k + rng.Index(pool.size() - k);
    std::swap(pool[k], pool[j]);
    list.words.push_back(pool[k]);
  }
  return list;
}

inline std::vector<BiasList> BuildBiasLists(
    const Corpus& corpus, const std::set<std::string>& common_words,
    std::size_t n_distractors, std::uint64_t seed) {
  const auto all_rare = ExtractRarewords(corpus, common_words);
  std::vector<BiasList> lists;
  lists.reserve(corpus.size());
  for (const auto& utt : corpus) {
    lists.push_back(BuildUtteranceList(
        utt.id, UtteranceRarewords(utt.ref_words, common_words), all_rare,
        n_distractors, seed));
  }
  return lists;
}

}  // namespace tcpgen
