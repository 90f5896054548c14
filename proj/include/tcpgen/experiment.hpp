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

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tcpgen/biaslist.hpp"
#include "tcpgen/biastrie.hpp"
#include "tcpgen/decoder.hpp"
#include "tcpgen/io.hpp"
#include "tcpgen/losses.hpp"
#include "tcpgen/metrics.hpp"
#include "tcpgen/parallel.hpp"
#include "tcpgen/toy.hpp"
#include "tcpgen/trainer.hpp"

namespace tcpgen {

inline std::vector<Hypothesis> DecodeCorpus(
    const Corpus& corpus, const Vocab& vocab, const PgParams* params,
    std::span<const std::vector<std::string>> bias_lists, DecodeMode mode,
    int jobs = 1) {
  if (bias_lists.size() != corpus.size()) {
    throw ConfigError("bias list count does not match corpus size");
  }
  if (params && params->vocab_size() != vocab.size()) {
    throw ConfigError("checkpoint vocabulary size does not match the corpus");
  }
  std::vector<Hypothesis> hyps(corpus.size());
  ParallelFor(corpus.size(), jobs, [&](std::size_t i) {
    DecodeResult r;
    if (mode == DecodeMode::kNone) {
      r = GreedyDecode(corpus[i], vocab, nullptr, nullptr, mode);
    } else {
      const PrefixTree tree = BuildTrie(vocab, bias_lists[i]);
      r = GreedyDecode(corpus[i], vocab, params, &tree, mode);
    }
    hyps[i] = {corpus[i].id, std::move(r.hyp_words), std::move(r.trace)};
  });
  return hyps;
}

// Scores hypotheses against the corpus references. Gate positions are
// matched to reference token positions by step index.
inline ScoreReport ScoreCorpus(
    const Corpus& corpus, std::span<const Hypothesis> hyps,
    std::span<const std::vector<std::string>> bias_lists,
    bool per_utterance = false) {
  if (hyps.size() != corpus.size() || bias_lists.size() != corpus.size()) {
    throw ConfigError("reference, hypothesis and bias list counts differ");
  }
  std::vector<UtteranceScoreInput> inputs(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (hyps[i].id != corpus[i].id) {
      throw ConfigError("hypothesis id " + hyps[i].id +
                        " does not match reference id " + corpus[i].id);
    }
    auto& in = inputs[i];
    in.id = corpus[i].id;
    in.alignment = Align(corpus[i].ref_words, hyps[i].hyp_words);
    in.bias_words = {bias_lists[i].begin(), bias_lists[i].end()};
    in.gates = hyps[i].trace;
    in.mask = BiasPositions(corpus[i].ref, corpus[i].ref_words, in.bias_words);
  }
  return Score(inputs, per_utterance);
}

struct AlphaPoint {
  double alpha = 0.0;
  std::uint64_t seed = 0;
  ScoreReport report;
};

// Trains in two-loss mode at the given alpha and scores unscaled biased
// decoding on the test corpus.
inline AlphaPoint RunAlphaPoint(
    const Corpus& train_corpus,
    std::span<const std::vector<std::string>> train_lists,
    const Corpus& test_corpus,
    std::span<const std::vector<std::string>> test_lists, const Vocab& vocab,
    TrainConfig cfg) {
  cfg.mode = LossMode::kTwoLoss;
  const auto trained = Train(train_corpus, train_lists, vocab, cfg);
  const auto hyps = DecodeCorpus(test_corpus, vocab, &trained.params,
                                 test_lists, DecodeMode::kUnscaled, cfg.jobs);
  return {cfg.alpha, cfg.seed, ScoreCorpus(test_corpus, hyps, test_lists)};
}

inline std::vector<std::vector<std::string>> ListWords(
    std::span<const BiasList> lists) {
  std::vector<std::vector<std::string>> words;
  words.reserve(lists.size());
  for (const auto& l : lists) words.push_back(l.words);
  return words;
}

// The built-in toy experiment: a train corpus and a test corpus rendered
// under the test condition, with disjoint rare-word inventories and
// per-utterance bias lists of own rare words plus distractors.
struct ToyExperiment {
  SimConfig train_config;
  SimConfig test_config;
  Vocab vocab;
  Corpus train;
  Corpus test;
  std::vector<std::vector<std::string>> train_lists;
  std::vector<std::vector<std::string>> test_lists;
};

inline constexpr std::size_t kToyDistractors = 10;
inline constexpr std::uint64_t kToyTrainListSeed = 7;
inline constexpr std::uint64_t kToyTestListSeed = 8;

inline ToyExperiment MakeToyExperiment(int jobs = 1) {
  ToyExperiment e;
  e.train_config = ResolveSimConfig(toy::TrainConfig());
  e.test_config = ResolveSimConfig(toy::TestConfig());
  e.vocab = SimVocab(e.train_config);
  e.train = GenCorpus(e.train_config, jobs);
  e.test = RenderCondition(GenCorpus(e.test_config, jobs), Condition::kTest,
                           e.test_config, jobs);
  const auto& cw = toy::CommonWords();
  const std::set<std::string> common(cw.begin(), cw.end());
  e.train_lists = ListWords(
      BuildBiasLists(e.train, common, kToyDistractors, kToyTrainListSeed));
  e.test_lists = ListWords(
      BuildBiasLists(e.test, common, kToyDistractors, kToyTestListSeed));
  return e;
}

}  // namespace tcpgen
