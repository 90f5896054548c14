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
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tcpgen/losses.hpp"
#include "tcpgen/pointer_module.hpp"
#include "tcpgen/rng.hpp"
#include "tcpgen/simulator.hpp"
#include "tcpgen/tokenizer.hpp"

namespace tcpgen {

struct FdResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t n_params = 0;
};

// Compares the analytic gradient against central differences with step h
// for every scalar parameter. Relative error per scalar is
// |a - f| / max(|a|, |f|, 1e-8).
inline FdResult FdCheck(const PgParams& params, std::span<const TrainItem> batch,
                        const LossConfig& cfg, double h) {
  if (!(h > 0.0)) throw ConfigError("finite-difference step must be positive");
  const PgParams analytic = Grad(params, batch, cfg).gradient;
  PgParams probe = params;
  FdResult res;
  res.n_params = params.num_scalars();
  for (std::size_t k = 0; k < res.n_params; ++k) {
    double& x = probe.Scalar(k);
    const double orig = x;
    x = orig + h;
    const double up = Objective(probe, batch, cfg);
    x = orig - h;
    const double down = Objective(probe, batch, cfg);
    x = orig;
    const double numeric = (up - down) / (2.0 * h);
    const double a = analytic.Scalar(k);
    const double rel = std::abs(a - numeric) /
                       std::max({std::abs(a), std::abs(numeric), 1e-8});
    if (k == 0 || rel > res.max_rel_error) {
      res.max_rel_error = rel;
      res.worst_index = k;
      res.worst_analytic = a;
      res.worst_numeric = numeric;
    }
  }
  return res;
}

// Small self-contained problem for gradient checking: a vocabulary of size
// V, one or more utterances of exactly U tokens (EOS included) with random
// posteriors and decoder states, bias lists that hit some reference words,
// and randomly initialised parameters with an open-ish gate.
struct RandomInstance {
  Vocab vocab;
  std::vector<std::string> boundary_chars;
  std::vector<std::string> internal_chars;
  // Owned corpus; items point into it, so the instance is move-only.
  std::unique_ptr<Corpus> corpus;
  std::vector<std::vector<std::string>> bias_lists;
  std::vector<TrainItem> items;
  PgParams params;
};

inline RandomInstance MakeRandomInstance(std::uint64_t seed, std::size_t V,
                                         std::size_t d, std::size_t d_h,
                                         std::size_t U,
                                         std::size_t n_utterances = 1) {
  if (V < 3) throw ConfigError("random instance needs V >= 3");
  if (U < 2) throw ConfigError("random instance needs U >= 2");
  Rng rng(SubSeed(seed, "random-instance"));
  RandomInstance inst;
  const std::size_t nb = (V - 1) / 2;
  const std::size_t ni = V - 1 - nb;
  // Printable ASCII letters; boundary and internal sets are disjoint so the
  // vocabulary has exactly nb + ni + 1 tokens.
  for (std::size_t i = 0; i < nb; ++i) {
    inst.boundary_chars.push_back(std::string(1, static_cast<char>('a' + i)));
  }
  for (std::size_t i = 0; i < ni; ++i) {
    inst.internal_chars.push_back(
        std::string(1, static_cast<char>('a' + nb + i)));
  }
  std::vector<std::string> cover;
  for (const auto& b : inst.boundary_chars) {
    std::string w = b;
    for (const auto& c : inst.internal_chars) w += c;
    cover.push_back(w);
  }
  inst.vocab = BuildVocab(cover);

  auto random_word = [&](std::size_t len) {
    std::string w = inst.boundary_chars[rng.Index(nb)];
    for (std::size_t k = 1; k < len; ++k) {
      w += inst.internal_chars[rng.Index(ni)];
    }
    return w;
  };

  inst.corpus = std::make_unique<Corpus>();
  for (std::size_t u = 0; u < n_utterances; ++u) {
    SimUtterance utt;
    utt.id = "rand" + std::to_string(u);
    std::size_t remaining = U - 1;
    while (remaining > 0) {
      const std::size_t len = std::min<std::size_t>(remaining, 1 + rng.Index(4));
      utt.ref_words.push_back(random_word(len));
      remaining -= len;
    }
    utt.ref = Tokenize(inst.vocab, utt.ref_words);
    utt.p_mdl_seq = Matrix(U, V);
    utt.h_dec_seq = Matrix(U, d_h);
    for (std::size_t i = 0; i < U; ++i) {
      auto row = utt.p_mdl_seq.row(i);
      double z = 0.0;
      for (double& p : row) {
        p = std::exp(2.0 * rng.Normal());
        z += p;
      }
      for (double& p : row) p /= z;
      for (double& x : utt.h_dec_seq.row(i)) x = rng.Normal();
    }
    std::vector<std::string> bias;
    for (const auto& w : utt.ref_words) {
      if (rng.Bernoulli(0.5)) bias.push_back(w);
    }
    if (bias.empty()) bias.push_back(utt.ref_words[rng.Index(utt.ref_words.size())]);
    const std::size_t n_distract = rng.Index(4);
    for (std::size_t k = 0; k < n_distract; ++k) {
      bias.push_back(random_word(1 + rng.Index(4)));
    }
    inst.corpus->push_back(std::move(utt));
    inst.bias_lists.push_back(std::move(bias));
  }
  for (std::size_t u = 0; u < n_utterances; ++u) {
    inst.items.push_back(
        MakeTrainItem(inst.vocab, (*inst.corpus)[u], inst.bias_lists[u]));
  }
  inst.params = InitParams(seed, V, d, d_h);
  // Larger weights and a centred gate give the check non-trivial curvature.
  inst.params.Scale(2.0);
  inst.params.b_g = rng.Uniform(-1.0, 1.0);
  return inst;
}

}  // namespace tcpgen
