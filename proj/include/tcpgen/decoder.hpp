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

#include <cstddef>
#include <string>
#include <vector>

#include "tcpgen/biastrie.hpp"
#include "tcpgen/error.hpp"
#include "tcpgen/pointer_module.hpp"
#include "tcpgen/simulator.hpp"
#include "tcpgen/tokenizer.hpp"

namespace tcpgen {

enum class DecodeMode { kNone, kScaled, kUnscaled };

inline std::string ToString(DecodeMode m) {
  switch (m) {
    case DecodeMode::kNone:
      return "none";
    case DecodeMode::kScaled:
      return "scaled";
    case DecodeMode::kUnscaled:
      return "unscaled";
  }
  return "?";
}

inline DecodeMode ParseDecodeMode(const std::string& s) {
  if (s == "none") return DecodeMode::kNone;
  if (s == "scaled") return DecodeMode::kScaled;
  if (s == "unscaled") return DecodeMode::kUnscaled;
  throw ConfigError("unknown decode mode \"" + s +
                    "\" (expected none|scaled|unscaled)");
}

struct GateRecord {
  std::size_t step = 0;
  double p_gen = 0.0;
  bool m_nonempty = false;
  TokenId emitted = 0;
};

struct DecodeResult {
  std::vector<std::string> hyp_words;
  std::vector<TokenId> tokens;
  std::vector<GateRecord> trace;
  std::size_t malformed = 0;
};

// Greedy decoding over the utterance's posterior rows. Ties in the argmax go
// to the lowest token id.
inline DecodeResult GreedyDecode(const SimUtterance& utt, const Vocab& vocab,
                                 const PgParams* params, const PrefixTree* tree,
                                 DecodeMode mode) {
  if (utt.p_mdl_seq.cols() != vocab.size()) {
    throw Error("utterance " + utt.id + ": posterior width does not match V");
  }
  if (mode != DecodeMode::kNone && (params == nullptr || tree == nullptr)) {
    throw ConfigError("biased decoding needs parameters and a bias trie");
  }
  const auto interp = mode == DecodeMode::kUnscaled
                          ? InterpolationMode::kUnscaled
                          : InterpolationMode::kScaled;
  DecodeResult out;
  TrieCursor cursor;
  const std::size_t U = utt.p_mdl_seq.rows();
  for (std::size_t i = 0; i < U; ++i) {
    const auto p_mdl = utt.p_mdl_seq.row(i);
    std::vector<double> scores;
    GateRecord rec;
    rec.step = i;
    if (mode == DecodeMode::kNone) {
      scores.assign(p_mdl.begin(), p_mdl.end());
    } else {
      const auto m_i = ValidSet(*tree, cursor);
      const StepOutput step = ForwardStep(*params, utt.h_dec_seq.row(i), m_i);
      scores = Interpolate(p_mdl, step, interp);
      rec.p_gen = step.p_gen;
      rec.m_nonempty = !m_i.empty();
    }
    TokenId best = 0;
    for (std::size_t c = 1; c < scores.size(); ++c) {
      if (scores[c] > scores[best]) best = static_cast<TokenId>(c);
    }
    rec.emitted = best;
    out.trace.push_back(rec);
    out.tokens.push_back(best);
    if (best == vocab.eos()) break;
    if (mode != DecodeMode::kNone) cursor = AdvanceCursor(*tree, cursor, best);
  }
  auto words = Detokenize(vocab, out.tokens);
  out.hyp_words = std::move(words.words);
  out.malformed = words.malformed;
  return out;
}

}  // namespace tcpgen
