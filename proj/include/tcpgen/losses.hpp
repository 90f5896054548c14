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
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tcpgen/biastrie.hpp"
#include "tcpgen/error.hpp"
#include "tcpgen/parallel.hpp"
#include "tcpgen/pointer_module.hpp"
#include "tcpgen/simulator.hpp"
#include "tcpgen/tokenizer.hpp"

namespace tcpgen {

enum class LossMode {
  kTwoLoss,  // l_gen + l_ptr
  kAsr,      // l_asr on the scaled interpolation
};

inline std::string ToString(LossMode m) {
  return m == LossMode::kTwoLoss ? "two_loss" : "asr";
}

inline LossMode ParseLossMode(const std::string& s) {
  if (s == "two_loss") return LossMode::kTwoLoss;
  if (s == "asr") return LossMode::kAsr;
  throw ConfigError("unknown loss mode \"" + s + "\" (expected two_loss|asr)");
}

struct LossConfig {
  LossMode mode = LossMode::kTwoLoss;
  double alpha = 0.7;
};

inline void CheckAlpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
}

// Probabilities are clamped to [kProbFloor, 1 - kProbFloor] before logs.
inline constexpr double kProbFloor = 1e-12;

// Token positions (0-based) covered by reference words that are on the
// biasing list.
struct BiasMask {
  std::vector<std::size_t> k_positions;  // sorted
  std::vector<char> in_k;                // length U

  std::size_t length() const { return in_k.size(); }
  bool contains(std::size_t i) const { return i < in_k.size() && in_k[i]; }
};

inline BiasMask BiasPositions(const TokenizedUtterance& ref,
                              std::span<const std::string> ref_words,
                              const std::set<std::string>& bias_words) {
  BiasMask mask;
  mask.in_k.assign(ref.length(), 0);
  for (const auto& span : ref.word_spans) {
    if (span.word_index >= ref_words.size()) {
      throw Error("word span refers to a missing reference word");
    }
    if (!bias_words.count(ref_words[span.word_index])) continue;
    for (auto p = span.token_start; p < span.token_end; ++p) {
      mask.in_k[p] = 1;
      mask.k_positions.push_back(p);
    }
  }
  return mask;
}

inline BiasMask BiasPositions(const TokenizedUtterance& ref,
                              std::span<const std::string> ref_words,
                              std::span<const std::string> bias_words) {
  return BiasPositions(ref, ref_words,
                       std::set<std::string>(bias_words.begin(), bias_words.end()));
}

struct AsrLoss {
  double value = 0.0;
  std::size_t clamped = 0;  // positions whose gold probability hit the floor
};

// Negative log-likelihood of the reference tokens under per-step
// distributions (scaled-mode interpolation output).
inline AsrLoss LossAsr(std::span<const std::vector<double>> p_seq,
                       const TokenizedUtterance& ref) {
  if (p_seq.size() != ref.length()) {
    throw Error("loss_asr: " + std::to_string(p_seq.size()) +
                " rows for a reference of length " +
                std::to_string(ref.length()));
  }
  AsrLoss out;
  for (std::size_t i = 0; i < p_seq.size(); ++i) {
    double total = 0.0;
    for (double p : p_seq[i]) total += p;
    if (std::abs(total - 1.0) > 1e-9) {
      throw Error("loss_asr: row " + std::to_string(i) + " does not sum to 1");
    }
    double p = p_seq[i].at(ref.tokens[i]);
    if (p < kProbFloor) {
      p = kProbFloor;
      ++out.clamped;
    }
    out.value -= std::log(p);
  }
  return out;
}

namespace detail {

struct GateTerm {
  double value = 0.0;
  double d_logit = 0.0;  // derivative w.r.t. the gate pre-activation
};

inline GateTerm GenTerm(double p_gen, bool in_k, double alpha) {
  const bool clamped = p_gen < kProbFloor || p_gen > 1.0 - kProbFloor;
  const double p = std::clamp(p_gen, kProbFloor, 1.0 - kProbFloor);
  GateTerm t;
  if (in_k) {
    t.value = -alpha * std::log(p);
    if (!clamped) t.d_logit = -alpha * (1.0 - p_gen);
  } else {
    t.value = -(1.0 - alpha) * std::log1p(-p);
    if (!clamped) t.d_logit = (1.0 - alpha) * p_gen;
  }
  return t;
}

}  // namespace detail

// Weighted binary cross-entropy of the gate against membership in K.
inline double LossGen(std::span<const double> p_gen, const BiasMask& mask,
                      double alpha) {
  CheckAlpha(alpha);
  if (p_gen.size() != mask.length()) {
    throw Error("loss_gen: gate sequence and mask lengths differ");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < p_gen.size(); ++i) {
    loss += detail::GenTerm(p_gen[i], mask.contains(i), alpha).value;
  }
  return loss;
}

// Cross-entropy of p_ptr at the gold token, restricted to positions in K.
inline double LossPtr(std::span<const StepOutput> steps,
                      const TokenizedUtterance& ref, const BiasMask& mask) {
  if (steps.size() != ref.length() || mask.length() != ref.length()) {
    throw Error("loss_ptr: step, reference and mask lengths differ");
  }
  double loss = 0.0;
  for (std::size_t i : mask.k_positions) {
    const TokenId gold = ref.tokens[i];
    if (!std::binary_search(steps[i].m_i.begin(), steps[i].m_i.end(), gold)) {
      throw Error("mask/trie inconsistency at position " + std::to_string(i));
    }
    loss -= std::log(std::max(steps[i].p_ptr[gold], kProbFloor));
  }
  return loss;
}

// Valid sets along the reference with the gold prefix as decoding history.
struct TeacherForced {
  std::vector<std::vector<TokenId>> valid_sets;
};

inline TeacherForced TeacherForce(const PrefixTree& tree,
                                  const TokenizedUtterance& ref) {
  TeacherForced tf;
  tf.valid_sets.reserve(ref.length());
  TrieCursor cursor;
  for (TokenId t : ref.tokens) {
    tf.valid_sets.push_back(ValidSet(tree, cursor));
    cursor = AdvanceCursor(tree, cursor, t);
  }
  return tf;
}

// One utterance prepared for training: teacher-forced valid sets and K.
struct TrainItem {
  const SimUtterance* utt = nullptr;
  TeacherForced forced;
  BiasMask mask;
};

inline TrainItem MakeTrainItem(const Vocab& vocab, const SimUtterance& utt,
                               std::span<const std::string> bias_words) {
  TrainItem item;
  item.utt = &utt;
  const PrefixTree tree = BuildTrie(vocab, bias_words);
  item.forced = TeacherForce(tree, utt.ref);
  item.mask = BiasPositions(utt.ref, utt.ref_words, bias_words);
  return item;
}

inline std::vector<StepOutput> ForwardTeacherForced(const PgParams& params,
                                                    const TrainItem& item) {
  std::vector<StepOutput> steps;
  const std::size_t U = item.utt->ref.length();
  steps.reserve(U);
  for (std::size_t i = 0; i < U; ++i) {
    steps.push_back(ForwardStep(params, item.utt->h_dec_seq.row(i),
                                item.forced.valid_sets[i]));
  }
  return steps;
}

struct PositionLoss {
  double l_asr = 0.0;
  double l_gen = 0.0;
  double l_ptr = 0.0;
};

struct LossReport {
  double l_asr = 0.0;
  double l_gen = 0.0;
  double l_ptr = 0.0;
  double total = 0.0;
  std::size_t clamped = 0;
  std::vector<PositionLoss> per_position;

  void Accumulate(const LossReport& other) {
    l_asr += other.l_asr;
    l_gen += other.l_gen;
    l_ptr += other.l_ptr;
    total += other.total;
    clamped += other.clamped;
  }

  void Scale(double a) {
    l_asr *= a;
    l_gen *= a;
    l_ptr *= a;
    total *= a;
  }
};

namespace detail {

// Backpropagates d_logit (gate pre-activation) and d_pptr (explicit
// derivatives w.r.t. p_ptr(c), indexed like step.m_i) into `g`.
inline void BackwardStep(const PgParams& params, std::span<const double> h,
                         const StepOutput& step, double d_logit,
                         std::span<const double> d_pptr, PgParams& g) {
  if (step.m_i.empty()) return;
  const std::size_t d = params.d;
  const std::size_t dh = params.d_h;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  std::vector<double> g_ctx(d, 0.0);
  if (d_logit != 0.0) {
    for (std::size_t j = 0; j < dh; ++j) g.w_g[j] += d_logit * h[j];
    for (std::size_t j = 0; j < d; ++j) {
      g.w_g[dh + j] += d_logit * step.context[j];
      g_ctx[j] = d_logit * params.w_g[dh + j];
    }
    g.b_g += d_logit;
  }

  const std::size_t m = step.m_i.size();
  std::vector<double> dp(m);
  double weighted = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const TokenId c = step.m_i[k];
    const double p = step.p_ptr[c];
    const auto e = params.token_embed.row(c);
    dp[k] = d_pptr[k] + Dot(g_ctx, e);
    weighted += p * dp[k];
    auto ge = g.token_embed.row(c);
    for (std::size_t j = 0; j < d; ++j) ge[j] += p * g_ctx[j];
  }
  std::vector<double> g_q(d, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const TokenId c = step.m_i[k];
    const double gz = step.p_ptr[c] * (dp[k] - weighted) * inv_sqrt_d;
    if (gz == 0.0) continue;
    const auto e = params.token_embed.row(c);
    auto ge = g.token_embed.row(c);
    for (std::size_t j = 0; j < d; ++j) {
      ge[j] += gz * step.query[j];
      g_q[j] += gz * e[j];
    }
  }
  for (std::size_t r = 0; r < d; ++r) {
    if (g_q[r] == 0.0) continue;
    auto row = g.w_q.row(r);
    for (std::size_t j = 0; j < dh; ++j) row[j] += g_q[r] * h[j];
  }
}

}  // namespace detail

// Loss of one utterance; accumulates d(total)/d(params) into `grad` when
// non-null. All three losses are always reported; `total` follows the mode.
inline LossReport UtteranceLoss(const PgParams& params, const TrainItem& item,
                                const LossConfig& cfg, PgParams* grad,
                                bool per_position = false) {
  CheckAlpha(cfg.alpha);
  const SimUtterance& utt = *item.utt;
  const std::size_t U = utt.ref.length();
  if (utt.p_mdl_seq.rows() != U || utt.h_dec_seq.rows() != U ||
      item.forced.valid_sets.size() != U || item.mask.length() != U) {
    throw Error("utterance " + utt.id + ": inconsistent sequence lengths");
  }
  if (utt.p_mdl_seq.cols() != params.vocab_size()) {
    throw Error("utterance " + utt.id + ": posterior width does not match V");
  }
  LossReport report;
  if (per_position) report.per_position.resize(U);
  std::vector<double> d_pptr;
  for (std::size_t i = 0; i < U; ++i) {
    const auto h = utt.h_dec_seq.row(i);
    const StepOutput step = ForwardStep(params, h, item.forced.valid_sets[i]);
    const TokenId gold = utt.ref.tokens[i];
    const bool in_k = item.mask.contains(i);
    const auto gold_it =
        std::lower_bound(step.m_i.begin(), step.m_i.end(), gold);
    const bool gold_in_m = gold_it != step.m_i.end() && *gold_it == gold;
    const std::size_t gold_k = gold_it - step.m_i.begin();

    PositionLoss pl;
    const auto gen = detail::GenTerm(step.p_gen, in_k, cfg.alpha);
    pl.l_gen = gen.value;

    double ptr_d = 0.0;
    if (in_k) {
      if (!gold_in_m) {
        throw Error("utterance " + utt.id + ": mask/trie inconsistency at position " +
                    std::to_string(i));
      }
      const double p = step.p_ptr[gold];
      pl.l_ptr = -std::log(std::max(p, kProbFloor));
      if (p >= kProbFloor) ptr_d = -1.0 / p;
    }

    const double g = step.p_gen;
    const double p_mdl_gold = utt.p_mdl_seq(i, gold);
    double p_final = p_mdl_gold * (1.0 - g) + step.p_ptr[gold] * g;
    double asr_dp = 0.0;
    if (p_final < kProbFloor) {
      p_final = kProbFloor;
      ++report.clamped;
    } else {
      asr_dp = -1.0 / p_final;
    }
    pl.l_asr = -std::log(p_final);

    report.l_asr += pl.l_asr;
    report.l_gen += pl.l_gen;
    report.l_ptr += pl.l_ptr;
    if (per_position) report.per_position[i] = pl;

    if (grad == nullptr || step.m_i.empty()) continue;
    d_pptr.assign(step.m_i.size(), 0.0);
    double d_logit = 0.0;
    if (cfg.mode == LossMode::kTwoLoss) {
      d_logit = gen.d_logit;
      if (in_k) d_pptr[gold_k] = ptr_d;
    } else {
      d_logit = asr_dp * (step.p_ptr[gold] - p_mdl_gold) * g * (1.0 - g);
      if (gold_in_m) d_pptr[gold_k] = asr_dp * g;
    }
    detail::BackwardStep(params, h, step, d_logit, d_pptr, *grad);
  }
  report.total = cfg.mode == LossMode::kTwoLoss ? report.l_gen + report.l_ptr
                                                : report.l_asr;
  return report;
}

struct GradResult {
  PgParams gradient;  // summed over the batch
  LossReport report;  // summed over the batch
};

// Analytic gradient of the configured objective, summed over `batch`.
// Per-utterance work may run on `jobs` threads; the reduction order is fixed
// so the result does not depend on `jobs`.
inline GradResult Grad(const PgParams& params, std::span<const TrainItem> batch,
                       const LossConfig& cfg, int jobs = 1) {
  const std::size_t n = batch.size();
  std::vector<PgParams> grads(n);
  std::vector<LossReport> reports(n);
  ParallelFor(n, jobs, [&](std::size_t i) {
    grads[i] = params.ZerosLike();
    reports[i] = UtteranceLoss(params, batch[i], cfg, &grads[i]);
    if (!grads[i].IsFinite() || !std::isfinite(reports[i].total)) {
      throw Error("non-finite gradient for utterance " + batch[i].utt->id);
    }
  });
  GradResult out;
  if (n == 0) {
    out.gradient = params.ZerosLike();
    return out;
  }
  // Pairwise tree reduction.
  for (std::size_t stride = 1; stride < n; stride *= 2) {
    for (std::size_t i = 0; i + stride < n; i += 2 * stride) {
      grads[i].Axpy(1.0, grads[i + stride]);
    }
  }
  out.gradient = std::move(grads[0]);
  for (const auto& r : reports) out.report.Accumulate(r);
  return out;
}

// Objective value only (summed over the batch).
inline double Objective(const PgParams& params, std::span<const TrainItem> batch,
                        const LossConfig& cfg) {
  double total = 0.0;
  for (const auto& item : batch) {
    total += UtteranceLoss(params, item, cfg, nullptr).total;
  }
  return total;
}

}  // namespace tcpgen
