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
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "tcpgen/error.hpp"
#include "tcpgen/matrix.hpp"
#include "tcpgen/parallel.hpp"
#include "tcpgen/rng.hpp"
#include "tcpgen/tokenizer.hpp"

namespace tcpgen {

// Synthetic stand-in for a frozen ASR model and its training/test audio.
//
// Each reference token position gets
//  * a base-model posterior row P_mdl: `accuracy` mass on the top token (the
//    gold token, or the aligned token of the confusable word), the rest
//    spread with bounded random weights so the top token stays the argmax;
//  * a decoder state h_dec = (1 - shift) * enc + shift * noise, where
//      enc = sig(gold) + rare_cue * [word is rare] * sig(rare)
//            + parity_scale * (+-1) * sig(parity) + utterance_noise * u_utt
//    and `noise` is drawn per render condition. The signatures sig(.) depend
//    only on encoder_seed, so corpora generated from different configs that
//    share encoder_seed live in the same decoder-state space.
struct SimConfig {
  std::uint64_t seed = 1;
  std::uint64_t encoder_seed = 2024;
  std::size_t n_utterances = 100;
  std::size_t min_words = 4;
  std::size_t max_words = 10;
  std::vector<std::string> common_words;
  std::vector<std::string> rare_words;
  double rare_word_rate = 0.2;
  double base_accuracy_common = 0.9;
  double base_accuracy_rare = 0.9;
  // Share of the non-top mass given to the gold token at confused positions.
  double confused_gold_share = 0.5;
  std::map<std::string, std::string> confusion_map;
  // Adds a generated confusable for every rare word not in confusion_map.
  bool auto_confusions = false;
  std::size_t d_h = 32;
  double domain_shift = 0.0;
  double rare_cue = 0.5;
  double utterance_noise = 0.3;
  double parity_scale = 0.2;
  std::string alphabet = "abcdefghijklmnopqrstuvwxyz";
  std::string id_prefix = "utt";
};

enum class Condition { kTrain, kTest };

inline std::string ToString(Condition c) {
  return c == Condition::kTrain ? "train" : "test";
}

inline Condition ParseCondition(const std::string& s) {
  if (s == "train") return Condition::kTrain;
  if (s == "test") return Condition::kTest;
  throw ConfigError("unknown condition \"" + s + "\" (expected train|test)");
}

struct SimUtterance {
  std::string id;
  std::vector<std::string> ref_words;
  TokenizedUtterance ref;
  Matrix p_mdl_seq;  // U x V, row-stochastic
  Matrix h_dec_seq;  // U x d_h
};

using Corpus = std::vector<SimUtterance>;

inline Vocab SimVocab(const SimConfig& cfg) { return AlphabetVocab(cfg.alphabet); }

// Deterministic confusable for each word: the first character is replaced
// and, for longer words, sometimes one internal character too. Token length
// is preserved. Confusables never collide with `avoid` or with each other.
inline std::map<std::string, std::string> MakeConfusions(
    const std::vector<std::string>& words, const std::string& alphabet,
    std::uint64_t seed, const std::set<std::string>& avoid) {
  const auto letters = Utf8Chars(alphabet);
  if (letters.size() < 2) throw ConfigError("alphabet too small for confusions");
  std::map<std::string, std::string> out;
  std::set<std::string> used(avoid.begin(), avoid.end());
  for (const auto& w : words) {
    Rng rng(SubSeed(seed, "confuse:" + w));
    const auto chars = Utf8Chars(w);
    std::string best;
    for (int attempt = 0; attempt < 64; ++attempt) {
      auto c = chars;
      do {
        c[0] = letters[rng.Index(letters.size())];
      } while (c[0] == chars[0]);
      if (c.size() >= 3 && rng.Bernoulli(0.5)) {
        const std::size_t k = 1 + rng.Index(c.size() - 1);
        do {
          c[k] = letters[rng.Index(letters.size())];
        } while (c[k] == chars[k]);
      }
      std::string cand;
      for (const auto& s : c) cand += s;
      if (!used.count(cand)) {
        best = cand;
        break;
      }
    }
    if (best.empty()) {
      throw ConfigError("could not find a confusable for \"" + w + "\"");
    }
    used.insert(best);
    out.emplace(w, best);
  }
  return out;
}

// Checks the config and returns it with generated confusions made explicit.
inline SimConfig ResolveSimConfig(SimConfig cfg) {
  auto in_unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ConfigError(std::string(name) + " must lie in [0, 1]");
    }
  };
  in_unit(cfg.rare_word_rate, "rare_word_rate");
  in_unit(cfg.base_accuracy_common, "base_accuracy_common");
  in_unit(cfg.base_accuracy_rare, "base_accuracy_rare");
  in_unit(cfg.confused_gold_share, "confused_gold_share");
  in_unit(cfg.domain_shift, "domain_shift");
  if (cfg.d_h == 0) throw ConfigError("d_h must be positive");
  if (cfg.min_words > cfg.max_words) {
    throw ConfigError("words_per_utterance: min exceeds max");
  }
  if (cfg.rare_word_rate > 0.0 && cfg.rare_words.empty()) {
    throw ConfigError("rare_word_rate > 0 but the rare inventory is empty");
  }
  if (cfg.rare_word_rate < 1.0 && cfg.common_words.empty() &&
      cfg.max_words > 0) {
    throw ConfigError("rare_word_rate < 1 but the common inventory is empty");
  }
  for (auto& w : cfg.common_words) w = ToLower(w);
  for (auto& w : cfg.rare_words) w = ToLower(w);
  const std::set<std::string> common(cfg.common_words.begin(),
                                     cfg.common_words.end());
  const std::set<std::string> rare(cfg.rare_words.begin(),
                                   cfg.rare_words.end());
  for (const auto& w : rare) {
    if (common.count(w)) {
      throw ConfigError("word \"" + w + "\" is in both inventories");
    }
  }
  const Vocab vocab = SimVocab(cfg);
  try {
    for (const auto& w : common) TokenizeWord(vocab, w);
    for (const auto& w : rare) TokenizeWord(vocab, w);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  if (cfg.auto_confusions) {
    std::vector<std::string> todo;
    for (const auto& w : rare) {
      if (!cfg.confusion_map.count(w)) todo.push_back(w);
    }
    std::set<std::string> avoid = common;
    avoid.insert(rare.begin(), rare.end());
    for (const auto& [_, v] : cfg.confusion_map) avoid.insert(v);
    auto generated = MakeConfusions(todo, cfg.alphabet,
                                    SubSeed(cfg.encoder_seed, "confusions"),
                                    avoid);
    cfg.confusion_map.insert(generated.begin(), generated.end());
    cfg.auto_confusions = false;
  }
  if (!cfg.confusion_map.empty()) {
    for (double acc : {cfg.base_accuracy_common, cfg.base_accuracy_rare}) {
      if (acc <= (1.0 - acc) * cfg.confused_gold_share) {
        throw ConfigError(
            "base accuracy too low for confusions: the gold token would "
            "outrank the confusable");
      }
    }
  }
  for (const auto& [from, to] : cfg.confusion_map) {
    if (!common.count(from) && !rare.count(from)) {
      throw ConfigError("confusion source \"" + from +
                        "\" is not in any inventory");
    }
    if (from == to) throw ConfigError("confusion maps \"" + from + "\" to itself");
    std::size_t to_len = 0;
    try {
      to_len = TokenizeWord(vocab, to).size();
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    if (TokenizeWord(vocab, from).size() != to_len) {
      throw ConfigError("confusion \"" + from + "\" -> \"" + to +
                        "\" changes the token length");
    }
  }
  return cfg;
}

namespace detail {

inline std::vector<double> Signature(std::uint64_t seed, const std::string& key,
                                     std::size_t dim) {
  Rng rng(SubSeed(seed, key));
  std::vector<double> v(dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (double& x : v) x = rng.Normal() * scale;
  return v;
}

inline void FillPosteriorRow(std::span<double> row, TokenId top, TokenId gold,
                             double accuracy, double gold_share, Rng& rng) {
  std::fill(row.begin(), row.end(), 0.0);
  const double rest = 1.0 - accuracy;
  double spread = rest;
  row[top] = accuracy;
  if (gold != top) {
    row[gold] = rest * gold_share;
    spread -= row[gold];
  }
  // Weights in [1, 2) keep every spread entry below 2 / (n + 1) of the
  // spread mass.
  std::vector<double> w(row.size(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (static_cast<TokenId>(k) == top || static_cast<TokenId>(k) == gold) {
      continue;
    }
    w[k] = 1.0 + rng.Uniform();
    total += w[k];
  }
  if (total > 0.0) {
    for (std::size_t k = 0; k < row.size(); ++k) row[k] += spread * w[k] / total;
  } else if (gold != top) {
    row[gold] += spread;
  } else {
    row[top] += spread;
  }
}

}  // namespace detail

// Re-renders decoder states for one utterance under the given condition.
inline Matrix RenderDecoderStates(const SimUtterance& utt, const Vocab& vocab,
                                  const SimConfig& cfg, Condition condition) {
  const std::set<std::string> rare(cfg.rare_words.begin(), cfg.rare_words.end());
  const std::size_t U = utt.ref.length();
  const std::size_t dh = cfg.d_h;
  Matrix h(U, dh);
  const auto rare_sig = detail::Signature(cfg.encoder_seed, "rare", dh);
  const auto parity_sig = detail::Signature(cfg.encoder_seed, "parity", dh);
  const auto utt_vec = detail::Signature(cfg.seed, "uttvec:" + utt.id, dh);
  Rng noise(SubSeed(cfg.seed, "noise:" + ToString(condition) + ":" + utt.id));

  std::vector<bool> is_rare(U, false);
  for (const auto& span : utt.ref.word_spans) {
    if (rare.count(utt.ref_words[span.word_index])) {
      for (auto p = span.token_start; p < span.token_end; ++p) is_rare[p] = true;
    }
  }
  const double shift = cfg.domain_shift;
  const double noise_scale = 1.0 / std::sqrt(static_cast<double>(dh));
  for (std::size_t p = 0; p < U; ++p) {
    const auto tok_sig = detail::Signature(
        cfg.encoder_seed, "tok:" + vocab.token(utt.ref.tokens[p]), dh);
    const double parity = (p % 2 == 0) ? 1.0 : -1.0;
    auto row = h.row(p);
    for (std::size_t j = 0; j < dh; ++j) {
      double enc = tok_sig[j] + cfg.parity_scale * parity * parity_sig[j] +
                   cfg.utterance_noise * utt_vec[j];
      if (is_rare[p]) enc += cfg.rare_cue * rare_sig[j];
      // Draw unconditionally so the stream does not depend on shift.
      const double n = noise.Normal() * noise_scale;
      row[j] = (1.0 - shift) * enc + shift * n;
    }
  }
  return h;
}

inline std::string UtteranceId(const SimConfig& cfg, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%05zu", index);
  return cfg.id_prefix + buf;
}

inline SimUtterance GenerateUtterance(const SimConfig& cfg, const Vocab& vocab,
                                      std::size_t index) {
  SimUtterance utt;
  utt.id = UtteranceId(cfg, index);
  Rng rng(SubSeed(cfg.seed, "utt:" + utt.id));
  const std::size_t n_words =
      cfg.min_words + rng.Index(cfg.max_words - cfg.min_words + 1);
  std::vector<bool> word_is_rare;
  for (std::size_t w = 0; w < n_words; ++w) {
    const bool rare = !cfg.rare_words.empty() && rng.Bernoulli(cfg.rare_word_rate);
    const auto& inv = rare ? cfg.rare_words : cfg.common_words;
    utt.ref_words.push_back(inv[rng.Index(inv.size())]);
    word_is_rare.push_back(rare);
  }
  utt.ref = Tokenize(vocab, utt.ref_words);
  const std::size_t U = utt.ref.length();
  const std::size_t V = vocab.size();
  utt.p_mdl_seq = Matrix(U, V);
  for (const auto& span : utt.ref.word_spans) {
    const auto& word = utt.ref_words[span.word_index];
    const double acc = word_is_rare[span.word_index] ? cfg.base_accuracy_rare
                                                     : cfg.base_accuracy_common;
    std::vector<TokenId> tops(utt.ref.tokens.begin() + span.token_start,
                              utt.ref.tokens.begin() + span.token_end);
    if (auto it = cfg.confusion_map.find(word); it != cfg.confusion_map.end()) {
      tops = TokenizeWord(vocab, it->second);
    }
    for (auto p = span.token_start; p < span.token_end; ++p) {
      detail::FillPosteriorRow(utt.p_mdl_seq.row(p), tops[p - span.token_start],
                               utt.ref.tokens[p], acc, cfg.confused_gold_share,
                               rng);
    }
  }
  detail::FillPosteriorRow(utt.p_mdl_seq.row(U - 1), vocab.eos(), vocab.eos(),
                           cfg.base_accuracy_common, cfg.confused_gold_share,
                           rng);
  utt.h_dec_seq = RenderDecoderStates(utt, vocab, cfg, Condition::kTrain);
  return utt;
}

// `cfg` must already be resolved (see ResolveSimConfig).
inline Corpus GenCorpus(const SimConfig& cfg, int jobs = 1) {
  const Vocab vocab = SimVocab(cfg);
  Corpus corpus(cfg.n_utterances);
  ParallelFor(cfg.n_utterances, jobs, [&](std::size_t i) {
    corpus[i] = GenerateUtterance(cfg, vocab, i);
  });
  return corpus;
}

inline Corpus RenderCondition(const Corpus& corpus, Condition condition,
                              const SimConfig& cfg, int jobs = 1) {
  const Vocab vocab = SimVocab(cfg);
  Corpus out = corpus;
  ParallelFor(out.size(), jobs, [&](std::size_t i) {
    out[i].h_dec_seq = RenderDecoderStates(out[i], vocab, cfg, condition);
  });
  return out;
}

inline void to_json(nlohmann::ordered_json& j, const SimConfig& c) {
  j = nlohmann::ordered_json{
      {"seed", c.seed},
      {"encoder_seed", c.encoder_seed},
      {"n_utterances", c.n_utterances},
      {"words_per_utterance", {c.min_words, c.max_words}},
      {"common_words", c.common_words},
      {"rare_words", c.rare_words},
      {"rare_word_rate", c.rare_word_rate},
      {"base_accuracy_common", c.base_accuracy_common},
      {"base_accuracy_rare", c.base_accuracy_rare},
      {"confused_gold_share", c.confused_gold_share},
      {"confusion_map", c.confusion_map},
      {"auto_confusions", c.auto_confusions},
      {"d_h", c.d_h},
      {"domain_shift", c.domain_shift},
      {"rare_cue", c.rare_cue},
      {"utterance_noise", c.utterance_noise},
      {"parity_scale", c.parity_scale},
      {"alphabet", c.alphabet},
      {"id_prefix", c.id_prefix}};
}

// Missing keys keep their defaults; unknown keys are rejected.
inline SimConfig SimConfigFromJson(const nlohmann::json& j) {
  static const std::set<std::string> known = {
      "seed", "encoder_seed", "n_utterances", "words_per_utterance",
      "common_words", "rare_words", "rare_word_rate", "base_accuracy_common",
      "base_accuracy_rare", "confused_gold_share", "confusion_map",
      "auto_confusions", "d_h", "domain_shift", "rare_cue", "utterance_noise",
      "parity_scale", "alphabet", "id_prefix"};
  if (!j.is_object()) throw ConfigError("simulator config must be a JSON object");
  for (const auto& [k, _] : j.items()) {
    if (!known.count(k)) throw ConfigError("unknown simulator config key: " + k);
  }
  SimConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.encoder_seed = j.value("encoder_seed", c.encoder_seed);
    c.n_utterances = j.value("n_utterances", c.n_utterances);
    if (j.contains("words_per_utterance")) {
      const auto& r = j.at("words_per_utterance");
      if (!r.is_array() || r.size() != 2) {
        throw ConfigError("words_per_utterance must be [min, max]");
      }
      c.min_words = r[0].get<std::size_t>();
      c.max_words = r[1].get<std::size_t>();
    }
    c.common_words = j.value("common_words", c.common_words);
    c.rare_words = j.value("rare_words", c.rare_words);
    c.rare_word_rate = j.value("rare_word_rate", c.rare_word_rate);
    c.base_accuracy_common = j.value("base_accuracy_common", c.base_accuracy_common);
    c.base_accuracy_rare = j.value("base_accuracy_rare", c.base_accuracy_rare);
    c.confused_gold_share = j.value("confused_gold_share", c.confused_gold_share);
    c.confusion_map = j.value("confusion_map", c.confusion_map);
    c.auto_confusions = j.value("auto_confusions", c.auto_confusions);
    c.d_h = j.value("d_h", c.d_h);
    c.domain_shift = j.value("domain_shift", c.domain_shift);
    c.rare_cue = j.value("rare_cue", c.rare_cue);
    c.utterance_noise = j.value("utterance_noise", c.utterance_noise);
    c.parity_scale = j.value("parity_scale", c.parity_scale);
    c.alphabet = j.value("alphabet", c.alphabet);
    c.id_prefix = j.value("id_prefix", c.id_prefix);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad simulator config: ") + e.what());
  }
  return c;
}

}  // namespace tcpgen
