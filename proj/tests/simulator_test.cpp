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

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "tcpgen/simulator.hpp"
#include "tcpgen/toy.hpp"
#include "test_util.hpp"

namespace tcpgen {
namespace {

using testing::SmallConfig;

TokenId Argmax(std::span<const double> row) {
  return static_cast<TokenId>(std::max_element(row.begin(), row.end()) - row.begin());
}

TEST(SimulatorTest, PosteriorsAreRowStochastic) {
  const auto cfg = ResolveSimConfig(SmallConfig(1, 30));
  const auto vocab = SimVocab(cfg);
  for (const auto& u : GenCorpus(cfg)) {
    ASSERT_EQ(u.p_mdl_seq.rows(), u.ref.length());
    ASSERT_EQ(u.p_mdl_seq.cols(), vocab.size());
    ASSERT_EQ(u.h_dec_seq.rows(), u.ref.length());
    ASSERT_EQ(u.h_dec_seq.cols(), cfg.d_h);
    for (std::size_t i = 0; i < u.p_mdl_seq.rows(); ++i) {
      double total = 0.0;
      for (double p : u.p_mdl_seq.row(i)) {
        EXPECT_GE(p, 0.0);
        total += p;
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
    EXPECT_EQ(u.ref.tokens.back(), vocab.eos());
    EXPECT_GE(u.ref_words.size(), cfg.min_words);
    EXPECT_LE(u.ref_words.size(), cfg.max_words);
  }
}

TEST(SimulatorTest, ZeroRareRateGivesNoRareWords) {
  auto c = SmallConfig(2, 50);
  c.rare_word_rate = 0.0;
  const auto cfg = ResolveSimConfig(c);
  const std::set<std::string> rare(cfg.rare_words.begin(), cfg.rare_words.end());
  for (const auto& u : GenCorpus(cfg)) {
    for (const auto& w : u.ref_words) EXPECT_FALSE(rare.count(w)) << w;
  }
}

TEST(SimulatorTest, PerfectAccuracyReproducesReferences) {
  auto c = SmallConfig(3, 40);
  c.base_accuracy_common = 1.0;
  c.base_accuracy_rare = 1.0;
  const auto cfg = ResolveSimConfig(c);
  for (const auto& u : GenCorpus(cfg)) {
    for (std::size_t i = 0; i < u.ref.length(); ++i) {
      EXPECT_EQ(Argmax(u.p_mdl_seq.row(i)), u.ref.tokens[i]);
      EXPECT_EQ(u.p_mdl_seq(i, u.ref.tokens[i]), 1.0);
    }
  }
}

TEST(SimulatorTest, TopTokenIsGoldWithoutConfusions) {
  const auto cfg = ResolveSimConfig(SmallConfig(4, 40));
  for (const auto& u : GenCorpus(cfg)) {
    for (std::size_t i = 0; i < u.ref.length(); ++i) {
      EXPECT_EQ(Argmax(u.p_mdl_seq.row(i)), u.ref.tokens[i]);
    }
  }
}

TEST(SimulatorTest, DeterministicAndThreadIndependent) {
  const auto cfg = ResolveSimConfig(SmallConfig(5, 25));
  const auto a = GenCorpus(cfg, 1);
  const auto b = GenCorpus(cfg, 1);
  const auto c = GenCorpus(cfg, 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].id, b[k].id);
    EXPECT_EQ(a[k].ref_words, b[k].ref_words);
    EXPECT_EQ(a[k].p_mdl_seq, b[k].p_mdl_seq);
    EXPECT_EQ(a[k].h_dec_seq, b[k].h_dec_seq);
    EXPECT_EQ(a[k].p_mdl_seq, c[k].p_mdl_seq);
    EXPECT_EQ(a[k].h_dec_seq, c[k].h_dec_seq);
  }
}

TEST(SimulatorTest, DifferentSeedsDiffer) {
  const auto a = GenCorpus(ResolveSimConfig(SmallConfig(6, 10)));
  const auto b = GenCorpus(ResolveSimConfig(SmallConfig(7, 10)));
  bool differs = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    differs = differs || a[k].ref_words != b[k].ref_words;
  }
  EXPECT_TRUE(differs);
}

TEST(SimulatorTest, ConfusedWordsPreferTheConfusable) {
  auto c = SmallConfig(8, 200);
  c.rare_word_rate = 0.5;
  c.base_accuracy_rare = 0.6;
  c.confusion_map = {{"kerry", "garry"}};
  const auto cfg = ResolveSimConfig(c);
  const auto vocab = SimVocab(cfg);
  const auto garry = TokenizeWord(vocab, "garry");
  std::size_t rows = 0, hits = 0;
  for (const auto& u : GenCorpus(cfg)) {
    for (const auto& span : u.ref.word_spans) {
      if (u.ref_words[span.word_index] != "kerry") continue;
      for (auto p = span.token_start; p < span.token_end; ++p) {
        ++rows;
        const auto top = Argmax(u.p_mdl_seq.row(p));
        if (top == garry[p - span.token_start]) ++hits;
        // Gold keeps a share of the remaining mass.
        if (u.ref.tokens[p] != garry[p - span.token_start]) {
          EXPECT_NEAR(u.p_mdl_seq(p, u.ref.tokens[p]), 0.4 * 0.5, 1e-12);
        }
      }
    }
  }
  ASSERT_GT(rows, 20u);
  EXPECT_GE(hits, rows * 99 / 100);
}

TEST(SimulatorTest, GeneratedConfusionsPreserveTokenLength) {
  const auto cfg = ResolveSimConfig(toy::TrainConfig(3, 1));
  const auto vocab = SimVocab(cfg);
  ASSERT_EQ(cfg.confusion_map.size(), cfg.rare_words.size());
  std::set<std::string> targets;
  for (const auto& [from, to] : cfg.confusion_map) {
    EXPECT_NE(from, to);
    EXPECT_EQ(TokenizeWord(vocab, from).size(), TokenizeWord(vocab, to).size());
    EXPECT_TRUE(targets.insert(to).second) << "duplicate confusable " << to;
  }
  EXPECT_FALSE(cfg.auto_confusions);
}

TEST(SimulatorTest, ZeroShiftRendersIdentically) {
  auto c = SmallConfig(9, 10);
  c.domain_shift = 0.0;
  const auto cfg = ResolveSimConfig(c);
  const auto corpus = GenCorpus(cfg);
  const auto test = RenderCondition(corpus, Condition::kTest, cfg);
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    EXPECT_EQ(corpus[k].h_dec_seq, test[k].h_dec_seq);
    EXPECT_EQ(corpus[k].p_mdl_seq, test[k].p_mdl_seq);
  }
}

TEST(SimulatorTest, ShiftedRenderIsDeterministicAndDistinct) {
  auto c = SmallConfig(10, 10);
  c.domain_shift = 0.5;
  const auto cfg = ResolveSimConfig(c);
  const auto corpus = GenCorpus(cfg);
  const auto t1 = RenderCondition(corpus, Condition::kTest, cfg, 1);
  const auto t2 = RenderCondition(corpus, Condition::kTest, cfg, 4);
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    EXPECT_EQ(t1[k].h_dec_seq, t2[k].h_dec_seq);
    EXPECT_NE(t1[k].h_dec_seq, corpus[k].h_dec_seq);
    EXPECT_EQ(t1[k].p_mdl_seq, corpus[k].p_mdl_seq);
  }
}

TEST(SimulatorTest, RareCueSeparatesRarePositions) {
  // The mean projection on the rare direction is larger on rare positions.
  auto c = SmallConfig(11, 200);
  c.d_h = 32;
  c.rare_cue = 1.0;
  const auto cfg = ResolveSimConfig(c);
  const auto sig = detail::Signature(cfg.encoder_seed, "rare", cfg.d_h);
  const std::set<std::string> rare(cfg.rare_words.begin(), cfg.rare_words.end());
  double in_sum = 0, out_sum = 0;
  std::size_t in_n = 0, out_n = 0;
  for (const auto& u : GenCorpus(cfg)) {
    for (const auto& span : u.ref.word_spans) {
      const bool r = rare.count(u.ref_words[span.word_index]) > 0;
      for (auto p = span.token_start; p < span.token_end; ++p) {
        const double proj = Dot(u.h_dec_seq.row(p), sig);
        (r ? in_sum : out_sum) += proj;
        ++(r ? in_n : out_n);
      }
    }
  }
  ASSERT_GT(in_n, 0u);
  ASSERT_GT(out_n, 0u);
  EXPECT_GT(in_sum / in_n, out_sum / out_n);
}

TEST(SimulatorConfigTest, RareRateWithEmptyInventory) {
  auto c = SmallConfig();
  c.rare_words.clear();
  EXPECT_THROW(ResolveSimConfig(c), ConfigError);
}

TEST(SimulatorConfigTest, OverlappingInventories) {
  auto c = SmallConfig();
  c.rare_words.push_back("bus");
  try {
    ResolveSimConfig(c);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bus"), std::string::npos);
  }
}

TEST(SimulatorConfigTest, ConfusionMustKeepTokenLength) {
  auto c = SmallConfig();
  c.confusion_map = {{"kerry", "gary"}};
  EXPECT_THROW(ResolveSimConfig(c), ConfigError);
}

TEST(SimulatorConfigTest, ConfusionNeedsAccuracyMargin) {
  auto c = SmallConfig();
  c.base_accuracy_rare = 0.3;
  c.confusion_map = {{"kerry", "garry"}};
  EXPECT_THROW(ResolveSimConfig(c), ConfigError);
}

TEST(SimulatorConfigTest, OutOfRangeValues) {
  for (auto mutate : std::vector<void (*)(SimConfig&)>{
           [](SimConfig& c) { c.rare_word_rate = 1.5; },
           [](SimConfig& c) { c.base_accuracy_common = -0.1; },
           [](SimConfig& c) { c.domain_shift = 2.0; },
           [](SimConfig& c) { c.d_h = 0; },
           [](SimConfig& c) { c.min_words = 6; },
           [](SimConfig& c) { c.common_words.push_back("héllo"); }}) {
    auto c = SmallConfig();
    mutate(c);
    EXPECT_THROW(ResolveSimConfig(c), ConfigError);
  }
}

TEST(SimulatorConfigTest, JsonRoundTrip) {
  auto c = ResolveSimConfig(SmallConfig(12, 7));
  c.confusion_map = {{"kerry", "garry"}};
  c.domain_shift = 0.25;
  nlohmann::ordered_json j = c;
  const auto back = SimConfigFromJson(nlohmann::json::parse(j.dump()));
  nlohmann::ordered_json j2 = back;
  EXPECT_EQ(j.dump(), j2.dump());
}

TEST(SimulatorConfigTest, UnknownKeyRejected) {
  EXPECT_THROW(SimConfigFromJson(nlohmann::json{{"sede", 1}}), ConfigError);
  EXPECT_THROW(SimConfigFromJson(nlohmann::json{{"words_per_utterance", {1}}}),
               ConfigError);
  EXPECT_THROW(SimConfigFromJson(nlohmann::json{{"seed", "x"}}), ConfigError);
}

TEST(SimulatorConfigTest, ParseCondition) {
  EXPECT_EQ(ParseCondition("train"), Condition::kTrain);
  EXPECT_EQ(ParseCondition("test"), Condition::kTest);
  EXPECT_THROW(ParseCondition("dev"), ConfigError);
}

TEST(ToySetupTest, RareInventoriesAreDisjointHalves) {
  const auto train = toy::TrainRareWords();
  const auto test = toy::TestRareWords();
  std::set<std::string> a(train.begin(), train.end());
  for (const auto& w : test) EXPECT_FALSE(a.count(w)) << w;
  EXPECT_EQ(train.size() + test.size(), toy::RareWords().size());
  const std::set<std::string> common(toy::CommonWords().begin(),
                                     toy::CommonWords().end());
  for (const auto& w : toy::RareWords()) EXPECT_FALSE(common.count(w)) << w;
}

}  // namespace
}  // namespace tcpgen
