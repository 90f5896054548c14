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

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "tcpgen/experiment.hpp"
#include "test_util.hpp"

namespace tcpgen {
namespace {

using testing::TempDir;

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void Spit(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

TEST(IoTest, CorpusRoundTripIsExact) {
  TempDir dir("io");
  const auto cfg = ResolveSimConfig(testing::SmallConfig(51, 12));
  const auto corpus = GenCorpus(cfg);
  WriteCorpus(dir.file("c.jsonl"), corpus);
  const auto back = ReadCorpus(dir.file("c.jsonl"), SimVocab(cfg));
  ASSERT_EQ(back.size(), corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    EXPECT_EQ(back[i].id, corpus[i].id);
    EXPECT_EQ(back[i].ref_words, corpus[i].ref_words);
    EXPECT_EQ(back[i].ref.tokens, corpus[i].ref.tokens);
    EXPECT_EQ(back[i].p_mdl_seq, corpus[i].p_mdl_seq);
    EXPECT_EQ(back[i].h_dec_seq, corpus[i].h_dec_seq);
  }
  WriteCorpus(dir.file("c2.jsonl"), back);
  EXPECT_EQ(Slurp(dir.file("c.jsonl")), Slurp(dir.file("c2.jsonl")));
}

TEST(IoTest, CorpusWidthMismatchIsReported) {
  TempDir dir("io");
  const auto cfg = ResolveSimConfig(testing::SmallConfig(52, 2));
  WriteCorpus(dir.file("c.jsonl"), GenCorpus(cfg));
  try {
    ReadCorpus(dir.file("c.jsonl"), AlphabetVocab("abcdefghijklmnopqrstuvwxyzé"));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("vocabulary size"), std::string::npos);
  }
}

TEST(IoTest, MalformedLineNamesFileAndLine) {
  TempDir dir("io");
  Spit(dir.file("bad.jsonl"), "{\"id\":\"a\",\"words\":[]}\n{not json\n");
  try {
    ReadBiasLists(dir.file("bad.jsonl"));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("bad.jsonl:2"), std::string::npos);
  }
}

TEST(IoTest, MissingFileIsConfigError) {
  EXPECT_THROW(ReadBiasLists("/nonexistent/lists.jsonl"), ConfigError);
  EXPECT_THROW(ReadJsonFile("/nonexistent/sim.json"), ConfigError);
}

TEST(IoTest, BiasListsRoundTripAndAlign) {
  TempDir dir("io");
  const auto cfg = ResolveSimConfig(testing::SmallConfig(53, 10));
  const auto corpus = GenCorpus(cfg);
  const std::set<std::string> common(cfg.common_words.begin(),
                                     cfg.common_words.end());
  const auto lists = BuildBiasLists(corpus, common, 2, 9);
  WriteBiasLists(dir.file("b.jsonl"), lists);
  const auto aligned = AlignBiasLists(corpus, ReadBiasLists(dir.file("b.jsonl")));
  EXPECT_EQ(aligned, ListWords(lists));
}

TEST(IoTest, BiasListsMustCoverCorpus) {
  TempDir dir("io");
  const auto cfg = ResolveSimConfig(testing::SmallConfig(54, 3));
  const auto corpus = GenCorpus(cfg);
  Spit(dir.file("b.jsonl"), "{\"id\":\"" + corpus[0].id + "\",\"words\":[\"Kerry\"]}\n");
  const auto lists = ReadBiasLists(dir.file("b.jsonl"));
  EXPECT_EQ(lists.at(corpus[0].id), std::vector<std::string>{"kerry"});
  EXPECT_THROW(AlignBiasLists(corpus, lists), ConfigError);
}

TEST(IoTest, DuplicateIdsRejected) {
  TempDir dir("io");
  Spit(dir.file("b.jsonl"),
       "{\"id\":\"a\",\"words\":[]}\n{\"id\":\"a\",\"words\":[]}\n");
  EXPECT_THROW(ReadBiasLists(dir.file("b.jsonl")), Error);
}

TEST(IoTest, HypothesesRoundTrip) {
  TempDir dir("io");
  std::vector<Hypothesis> hyps(2);
  hyps[0] = {"u0", {"my", "name"}, {{0, 0.25, true, 3}, {1, 0.0, false, 52}}};
  hyps[1] = {"u1", {}, {}};
  WriteHypotheses(dir.file("h.jsonl"), hyps);
  const auto back = ReadHypotheses(dir.file("h.jsonl"));
  ASSERT_EQ(back.size(), 2u);
  const auto& h = back.at("u0");
  EXPECT_EQ(h.hyp_words, hyps[0].hyp_words);
  ASSERT_EQ(h.trace.size(), 2u);
  EXPECT_EQ(h.trace[0].p_gen, 0.25);
  EXPECT_TRUE(h.trace[0].m_nonempty);
  EXPECT_EQ(h.trace[1].emitted, 52);
  EXPECT_TRUE(back.at("u1").hyp_words.empty());
}

TEST(IoTest, TrainLogHasExpectedColumns) {
  TempDir dir("io");
  EpochLog row;
  row.epoch = 1;
  row.l_gen = 0.5;
  row.dev_tar = 50.0;
  row.lr = 0.7;
  WriteTrainLog(dir.file("log.csv"), {row});
  std::istringstream in(Slurp(dir.file("log.csv")));
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  EXPECT_EQ(header.rfind("epoch,l_gen,l_ptr,l_asr,dev_far,dev_tar,lr", 0), 0u);
  EXPECT_EQ(line, "1,0.5,0,0,nan,50,0.7,0,0");
}

TEST(IoTest, NumberFormatting) {
  EXPECT_EQ(FormatNumber(0.1), "0.1");
  EXPECT_EQ(FormatNumber(100.0), "100");
  EXPECT_EQ(FormatOptional(std::nullopt), "nan");
}

}  // namespace
}  // namespace tcpgen
