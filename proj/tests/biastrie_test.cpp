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

#include <set>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "tcpgen/biastrie.hpp"
#include "tcpgen/rng.hpp"
#include "trie_oracle.hpp"

namespace tcpgen {
namespace {

const std::string B = std::string(kBoundaryMark);

class TrieTest : public ::testing::Test {
 protected:
  Vocab vocab_ = AlphabetVocab("abcdefghijklmnopqrstuvwxyz");
  TokenId Tok(const std::string& s) const { return *vocab_.Find(s); }

  TrieCursor Consume(const PrefixTree& tree, const std::vector<std::string>& toks) {
    TrieCursor c;
    for (const auto& t : toks) c = AdvanceCursor(tree, c, Tok(t));
    return c;
  }
};

TEST_F(TrieTest, EmptyList) {
  const auto tree = BuildTrie(vocab_, std::vector<std::string>{});
  EXPECT_EQ(tree.word_count(), 0u);
  EXPECT_EQ(tree.node_count(), 1u);
  EXPECT_TRUE(ValidSet(tree, TrieCursor{}).empty());
  EXPECT_TRUE(ValidSet(tree, Consume(tree, {B + "k", "e"})).empty());
}

TEST_F(TrieTest, SingleWordPath) {
  const auto tree = BuildTrie(vocab_, std::vector<std::string>{"tom"});
  EXPECT_EQ(tree.word_count(), 1u);
  auto n1 = tree.Child(PrefixTree::kRoot, Tok(B + "t"));
  ASSERT_TRUE(n1);
  auto n2 = tree.Child(*n1, Tok("o"));
  ASSERT_TRUE(n2);
  auto n3 = tree.Child(*n2, Tok("m"));
  ASSERT_TRUE(n3);
  EXPECT_TRUE(tree.node(*n3).terminal);
  EXPECT_FALSE(tree.node(*n2).terminal);
}

TEST_F(TrieTest, TwoWordsDepthsAndRootChildren) {
  const auto tree = BuildTrie(vocab_, std::vector<std::string>{"kerry", "tom"});
  EXPECT_EQ(tree.word_count(), 2u);
  EXPECT_EQ(tree.node_count(), 1u + 5u + 3u);
  EXPECT_EQ(ValidSet(tree, TrieCursor{}),
            (std::vector<TokenId>{Tok(B + "k"), Tok(B + "t")}));
}

TEST_F(TrieTest, DuplicatesMerged) {
  const auto tree = BuildTrie(vocab_, std::vector<std::string>{"tom", "tom"});
  EXPECT_EQ(tree.word_count(), 1u);
  EXPECT_EQ(tree.node_count(), 4u);
}

TEST_F(TrieTest, UntokenizableWordNamed) {
  try {
    BuildTrie(vocab_, std::vector<std::string>{"tom", "t0m"});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("t0m"), std::string::npos);
  }
}

TEST_F(TrieTest, ValidSetMidWord) {
  const auto tree = BuildTrie(vocab_, std::vector<std::string>{"kerry", "tom"});
  const auto c = Consume(tree, {B + "k", "e", "r", "r"});
  std::vector<TokenId> expect{Tok("y"), Tok(B + "k"), Tok(B + "t")};
  std::sort(expect.begin(), expect.end());
  EXPECT_EQ(ValidSet(tree, c), expect);
}

TEST_F(TrieTest, AdvanceFromRoot) {
  const auto tree = BuildTrie(vocab_, std::vector<std::string>{"tom"});
  const auto c = AdvanceCursor(tree, TrieCursor{}, Tok(B + "t"));
  EXPECT_EQ(c.active(), (std::vector<PrefixTree::NodeIndex>{
                            *tree.Child(PrefixTree::kRoot, Tok(B + "t"))}));
}

TEST_F(TrieTest, CompletedWordRetiresPath) {
  const auto tree = BuildTrie(vocab_, std::vector<std::string>{"tom"});
  const auto c = Consume(tree, {B + "t", "o", "m"});
  EXPECT_TRUE(c.active().empty());
  EXPECT_EQ(ValidSet(tree, c), (std::vector<TokenId>{Tok(B + "t")}));
}

TEST_F(TrieTest, NonMatchingTokenLeavesOnlyRoot) {
  const auto tree = BuildTrie(vocab_, std::vector<std::string>{"tom"});
  EXPECT_TRUE(AdvanceCursor(tree, TrieCursor{}, Tok("o")).active().empty());
}

TEST_F(TrieTest, MismatchAbandonsPartialMatch) {
  const auto tree = BuildTrie(vocab_, std::vector<std::string>{"tom"});
  const auto c = Consume(tree, {B + "t", "a"});
  EXPECT_TRUE(c.active().empty());
}

TEST_F(TrieTest, CompletedWordThatPrefixesLongerWordKeepsPath) {
  // "to" is complete, but "tom" still continues with "m".
  const auto tree = BuildTrie(vocab_, std::vector<std::string>{"to", "tom"});
  const auto c = Consume(tree, {B + "t", "o"});
  std::vector<TokenId> expect{Tok("m"), Tok(B + "t")};
  std::sort(expect.begin(), expect.end());
  EXPECT_EQ(ValidSet(tree, c), expect);
}

TEST_F(TrieTest, AdvanceIsPure) {
  const auto tree = BuildTrie(vocab_, std::vector<std::string>{"kerry", "tom"});
  const auto c0 = Consume(tree, {B + "k", "e"});
  const auto copy = c0;
  const auto a = AdvanceCursor(tree, c0, Tok("r"));
  const auto b = AdvanceCursor(tree, c0, Tok("r"));
  EXPECT_EQ(c0, copy);
  EXPECT_EQ(a, b);
}

TEST_F(TrieTest, OracleAgreesOnHandExample) {
  const auto words = std::vector<std::string>{"kerry", "tom", "to"};
  std::vector<std::vector<TokenId>> seqs;
  for (const auto& w : words) seqs.push_back(TokenizeWord(vocab_, w));
  const auto tree = BuildTrie(vocab_, words);
  const std::vector<TokenId> stream{Tok(B + "t"), Tok("o")};
  TrieCursor c;
  for (TokenId t : stream) c = AdvanceCursor(tree, c, t);
  EXPECT_EQ(ValidSet(tree, c), testing::BruteForceValidSet(seqs, stream));
}

TEST_F(TrieTest, MatchesBruteForceOracle) {
  Rng rng(SubSeed(3, "trie-oracle"));
  for (int trial = 0; trial < 200; ++trial) {
    ASSERT_EQ(testing::RunTrieOracleInstance(vocab_, rng), "") << "trial " << trial;
  }
}

}  // namespace
}  // namespace tcpgen
