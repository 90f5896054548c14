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
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "tcpgen/metrics.hpp"
#include "tcpgen/rng.hpp"
#include "scoring_fixtures.hpp"

namespace tcpgen {
namespace {

using testing::SplitWords;
using Words = std::vector<std::string>;

std::vector<EditKind> Kinds(const Alignment& a) {
  std::vector<EditKind> k;
  for (const auto& op : a.ops) k.push_back(op.kind);
  return k;
}

TEST(AlignTest, IdenticalIsAllMatches) {
  const Words w{"go", "to", "bedok"};
  const auto a = Align(w, w);
  EXPECT_EQ(Kinds(a), std::vector<EditKind>(3, EditKind::kMatch));
  EXPECT_EQ(a.errors(), 0u);
}

TEST(AlignTest, SingleSubstitution) {
  const auto a = Align(SplitWords("my name is kerry"), SplitWords("my name is gary"));
  EXPECT_EQ(Kinds(a), (std::vector<EditKind>{EditKind::kMatch, EditKind::kMatch,
                                             EditKind::kMatch,
                                             EditKind::kSubstitution}));
  EXPECT_EQ(*a.ops[3].ref_word, "kerry");
  EXPECT_EQ(*a.ops[3].hyp_word, "gary");
}

TEST(AlignTest, EmptyReference) {
  const auto a = Align(Words{}, Words{"a"});
  ASSERT_EQ(a.ops.size(), 1u);
  EXPECT_EQ(a.ops[0].kind, EditKind::kInsertion);
  EXPECT_FALSE(a.ops[0].ref_word.has_value());
  EXPECT_TRUE(Align(Words{}, Words{}).ops.empty());
}

TEST(AlignTest, TiePrefersSubstitutionThenDeletion) {
  // ref [a b], hyp [c]: sub+del and del+sub both cost 2; the earliest op is a
  // substitution.
  const auto a = Align(Words{"a", "b"}, Words{"c"});
  EXPECT_EQ(Kinds(a), (std::vector<EditKind>{EditKind::kSubstitution,
                                             EditKind::kDeletion}));
  // ref [a], hyp [b a]: insertion of b then match is the only cost-1 path.
  EXPECT_EQ(Kinds(Align(Words{"a"}, Words{"b", "a"})),
            (std::vector<EditKind>{EditKind::kInsertion, EditKind::kMatch}));
}

// Independent oracle: enumerate every alignment path, keep the cheapest, and
// break ties by the lexicographically smallest op sequence with
// match/substitution < deletion < insertion.
struct Path {
  std::size_t cost = 0;
  std::vector<int> rank;
  std::vector<EditOp> ops;
};

void Enumerate(const Words& ref, const Words& hyp, std::size_t i, std::size_t j,
               Path& cur, std::optional<Path>& best) {
  if (i == ref.size() && j == hyp.size()) {
    if (!best || cur.cost < best->cost ||
        (cur.cost == best->cost && cur.rank < best->rank)) {
      best = cur;
    }
    return;
  }
  auto step = [&](int rank, EditOp op, std::size_t di, std::size_t dj) {
    const std::size_t add = op.kind == EditKind::kMatch ? 0 : 1;
    cur.cost += add;
    cur.rank.push_back(rank);
    cur.ops.push_back(op);
    Enumerate(ref, hyp, i + di, j + dj, cur, best);
    cur.ops.pop_back();
    cur.rank.pop_back();
    cur.cost -= add;
  };
  if (i < ref.size() && j < hyp.size()) {
    step(0, {ref[i] == hyp[j] ? EditKind::kMatch : EditKind::kSubstitution, ref[i],
             hyp[j]},
         1, 1);
  }
  if (i < ref.size()) step(1, {EditKind::kDeletion, ref[i], std::nullopt}, 1, 0);
  if (j < hyp.size()) step(2, {EditKind::kInsertion, std::nullopt, hyp[j]}, 0, 1);
}

ScoreCounts OracleCounts(const Words& ref, const Words& hyp,
                         const std::set<std::string>& bias) {
  Path cur;
  std::optional<Path> best;
  Enumerate(ref, hyp, 0, 0, cur, best);
  ScoreCounts c;
  c.ref_words = ref.size();
  for (const auto& w : ref) c.ref_bias_words += bias.count(w);
  const auto& ops = best->ops;
  auto is_bias_error = [&](const EditOp& op) {
    if (op.kind == EditKind::kMatch) return false;
    const auto& w = op.kind == EditKind::kInsertion ? *op.hyp_word : *op.ref_word;
    return bias.count(w) > 0;
  };
  for (std::size_t k = 0; k < ops.size(); ++k) {
    const auto& op = ops[k];
    if (op.kind == EditKind::kMatch) continue;
    if (op.kind == EditKind::kSubstitution) ++c.substitutions;
    if (op.kind == EditKind::kDeletion) ++c.deletions;
    if (op.kind == EditKind::kInsertion) ++c.insertions;
    if (is_bias_error(op)) {
      ++c.bias_errors;
    } else {
      ++c.unbias_errors;
      const bool near = (k > 0 && is_bias_error(ops[k - 1])) ||
                        (k + 1 < ops.size() && is_bias_error(ops[k + 1]));
      if (near) ++c.u_we_b;
    }
  }
  return c;
}

Words RandomWords(Rng& rng, std::size_t max_len) {
  static const Words pool{"a", "b", "c", "kerry", "tuas"};
  Words w(rng.Index(max_len + 1));
  for (auto& x : w) x = pool[rng.Index(pool.size())];
  return w;
}

TEST(AlignTest, MatchesBruteForceOracle) {
  Rng rng(404);
  const std::set<std::string> bias{"kerry", "tuas"};
  for (int trial = 0; trial < 500; ++trial) {
    const auto ref = RandomWords(rng, 5);
    const auto hyp = RandomWords(rng, 5);
    const auto a = Align(ref, hyp);
    // Replaying the ops reconstructs both sequences.
    Words r2, h2;
    for (const auto& op : a.ops) {
      if (op.ref_word) r2.push_back(*op.ref_word);
      if (op.hyp_word) h2.push_back(*op.hyp_word);
    }
    ASSERT_EQ(r2, ref);
    ASSERT_EQ(h2, hyp);
    UtteranceScoreInput in;
    in.alignment = a;
    in.bias_words = bias;
    ASSERT_EQ(CountUtterance(in), OracleCounts(ref, hyp, bias))
        << "trial " << trial;
  }
}

TEST(ScoreTest, HandScoredFixtures) {
  ASSERT_GE(testing::ScoringFixtures().size(), 10u);
  for (const auto& fx : testing::ScoringFixtures()) {
    EXPECT_EQ(testing::CheckFixture(fx), "") << fx.name;
  }
}

TEST(ScoreTest, SubstitutedBiasWordRates) {
  UtteranceScoreInput in = testing::FixtureInput(testing::ScoringFixtures()[0]);
  const std::vector<UtteranceScoreInput> inputs{in};
  const auto r = Score(inputs);
  EXPECT_EQ(*r.wer, 25.0);
  EXPECT_EQ(*r.b_wer, 100.0);
  EXPECT_EQ(*r.u_wer, 0.0);
}

TEST(ScoreTest, PerfectHypothesisIsZero) {
  UtteranceScoreInput in;
  in.alignment = Align(SplitWords("go to kerry"), SplitWords("go to kerry"));
  in.bias_words = {"kerry"};
  const std::vector<UtteranceScoreInput> inputs{in};
  const auto r = Score(inputs);
  EXPECT_EQ(*r.wer, 0.0);
  EXPECT_EQ(*r.b_wer, 0.0);
  EXPECT_EQ(*r.u_wer, 0.0);
}

BiasMask Mask(std::size_t n, std::set<std::size_t> k) {
  BiasMask m;
  m.in_k.assign(n, 0);
  for (auto i : k) {
    m.in_k[i] = 1;
    m.k_positions.push_back(i);
  }
  return m;
}

std::vector<GateRecord> Gates(std::vector<double> p, std::vector<bool> nonempty) {
  std::vector<GateRecord> g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    g[i].step = i;
    g[i].p_gen = p[i];
    g[i].m_nonempty = nonempty.empty() || nonempty[i];
  }
  return g;
}

TEST(ScoreTest, GateRatesAtHalfThreshold) {
  UtteranceScoreInput in;
  in.gates = Gates({0.6, 0.7, 0.2, 0.1}, {});
  in.mask = Mask(4, {1, 2});
  const std::vector<UtteranceScoreInput> inputs{in};
  const auto r = Score(inputs);
  EXPECT_EQ(*r.tar, 50.0);
  EXPECT_EQ(*r.far, 50.0);
  EXPECT_EQ(r.counts.gate_tp, 1u);
  EXPECT_EQ(r.counts.gate_fn, 1u);
  EXPECT_EQ(r.counts.gate_fp, 1u);
  EXPECT_EQ(r.counts.gate_tn, 1u);
  EXPECT_EQ(r.counts.n_gate_positions(), 4u);
}

TEST(ScoreTest, EmptyValidSetPositionsExcluded) {
  UtteranceScoreInput in;
  in.gates = Gates({0.9, 0.0, 0.0, 0.8}, {true, false, false, true});
  in.mask = Mask(4, {0});
  const std::vector<UtteranceScoreInput> inputs{in};
  const auto r = Score(inputs);
  EXPECT_EQ(r.counts.n_gate_positions(), 2u);
  EXPECT_EQ(*r.tar, 100.0);
  EXPECT_EQ(*r.far, 100.0);
}

TEST(ScoreTest, ThresholdIsInclusive) {
  UtteranceScoreInput in;
  in.gates = Gates({0.5, 0.4999999}, {});
  in.mask = Mask(2, {0, 1});
  const std::vector<UtteranceScoreInput> inputs{in};
  EXPECT_EQ(*Score(inputs).tar, 50.0);
}

TEST(ScoreTest, DecompositionAndPermutationInvariance) {
  Rng rng(505);
  const std::set<std::string> bias{"kerry", "tuas"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<UtteranceScoreInput> inputs(1 + rng.Index(8));
    for (auto& in : inputs) {
      in.alignment = Align(RandomWords(rng, 6), RandomWords(rng, 6));
      in.bias_words = bias;
      const std::size_t n = rng.Index(8);
      std::vector<double> p(n);
      std::vector<bool> ne(n);
      std::set<std::size_t> k;
      for (std::size_t i = 0; i < n; ++i) {
        p[i] = rng.Uniform();
        ne[i] = rng.Bernoulli(0.8);
        if (rng.Bernoulli(0.4)) k.insert(i);
      }
      in.gates = Gates(p, ne);
      in.mask = Mask(n, k);
    }
    const auto r = Score(inputs);
    const auto& c = r.counts;
    EXPECT_EQ(c.bias_errors + c.unbias_errors, c.errors());
    EXPECT_LE(c.u_we_b, c.unbias_errors);
    auto shuffled = inputs;
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1], shuffled[rng.Index(i)]);
    }
    const auto s = Score(shuffled);
    EXPECT_EQ(s.counts, r.counts);
    EXPECT_EQ(s.far, r.far);
    EXPECT_EQ(s.tar, r.tar);
  }
}

TEST(ScoreTest, PerUtteranceBreakdownSumsToTotal) {
  std::vector<UtteranceScoreInput> inputs;
  for (const auto& fx : testing::ScoringFixtures()) {
    inputs.push_back(testing::FixtureInput(fx));
  }
  const auto r = Score(inputs, true);
  ASSERT_EQ(r.per_utterance.size(), inputs.size());
  ScoreCounts sum;
  for (const auto& u : r.per_utterance) sum.Add(u.counts);
  EXPECT_EQ(sum, r.counts);
  const auto j = ReportToJson(r);
  EXPECT_EQ(j["per_utterance"].size(), inputs.size());
  EXPECT_EQ(j["counts"]["errors"].get<std::size_t>(), r.counts.errors());
}

TEST(PercentTest, Conventions) {
  EXPECT_EQ(Percent(0, 0), 0.0);
  EXPECT_FALSE(Percent(3, 0).has_value());
  EXPECT_EQ(*Percent(1, 4), 25.0);
}

TEST(ScoreTest, UndefinedBiasRateReportedAsNull) {
  // Bias-word insertions in a corpus without reference bias words.
  UtteranceScoreInput in = testing::FixtureInput(testing::ScoringFixtures()[4]);
  const std::vector<UtteranceScoreInput> inputs{in};
  const auto r = Score(inputs);
  EXPECT_FALSE(r.b_wer.has_value());
  EXPECT_EQ(r.counts.bias_errors, 1u);
  EXPECT_TRUE(ReportToJson(r)["b_wer"].is_null());
}

}  // namespace
}  // namespace tcpgen
