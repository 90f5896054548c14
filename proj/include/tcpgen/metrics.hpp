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
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tcpgen/decoder.hpp"
#include "tcpgen/losses.hpp"

namespace tcpgen {

enum class EditKind { kMatch, kSubstitution, kDeletion, kInsertion };

inline const char* ToString(EditKind k) {
  switch (k) {
    case EditKind::kMatch:
      return "match";
    case EditKind::kSubstitution:
      return "substitution";
    case EditKind::kDeletion:
      return "deletion";
    case EditKind::kInsertion:
      return "insertion";
  }
  return "?";
}

struct EditOp {
  EditKind kind = EditKind::kMatch;
  std::optional<std::string> ref_word;
  std::optional<std::string> hyp_word;

  bool is_error() const { return kind != EditKind::kMatch; }
};

struct Alignment {
  std::vector<EditOp> ops;

  std::size_t errors() const {
    return std::count_if(ops.begin(), ops.end(),
                         [](const EditOp& op) { return op.is_error(); });
  }
};

// Minimum edit alignment. Costs are computed over suffixes and the path is
// read front to back, so among equal-cost paths the earliest position gets
// match/substitution first, then deletion, then insertion.
inline Alignment Align(std::span<const std::string> ref,
                       std::span<const std::string> hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  std::vector<std::size_t> cost((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& {
    return cost[i * (m + 1) + j];
  };
  for (std::size_t i = n + 1; i-- > 0;) {
    for (std::size_t j = m + 1; j-- > 0;) {
      if (i == n) {
        at(i, j) = m - j;
      } else if (j == m) {
        at(i, j) = n - i;
      } else {
        at(i, j) = std::min({at(i + 1, j + 1) + (ref[i] == hyp[j] ? 0u : 1u),
                             at(i + 1, j) + 1, at(i, j + 1) + 1});
      }
    }
  }
  Alignment a;
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    if (i < n && j < m &&
        at(i, j) == at(i + 1, j + 1) + (ref[i] == hyp[j] ? 0u : 1u)) {
      a.ops.push_back({ref[i] == hyp[j] ? EditKind::kMatch
                                        : EditKind::kSubstitution,
                       ref[i], hyp[j]});
      ++i;
      ++j;
    } else if (i < n && at(i, j) == at(i + 1, j) + 1) {
      a.ops.push_back({EditKind::kDeletion, ref[i], std::nullopt});
      ++i;
    } else {
      a.ops.push_back({EditKind::kInsertion, std::nullopt, hyp[j]});
      ++j;
    }
  }
  return a;
}

struct ScoreCounts {
  std::size_t ref_words = 0;
  std::size_t ref_bias_words = 0;
  std::size_t bias_errors = 0;
  std::size_t unbias_errors = 0;
  // Unbiased errors within one alignment op of a bias-word error.
  std::size_t u_we_b = 0;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  // Gate decisions at threshold 0.5 on positions with a non-empty valid set.
  std::size_t gate_tp = 0;  // in K, fired
  std::size_t gate_fn = 0;  // in K, not fired
  std::size_t gate_fp = 0;  // outside K, fired
  std::size_t gate_tn = 0;  // outside K, not fired

  std::size_t errors() const { return substitutions + deletions + insertions; }
  std::size_t n_gate_positions() const {
    return gate_tp + gate_fn + gate_fp + gate_tn;
  }

  void Add(const ScoreCounts& o) {
    ref_words += o.ref_words;
    ref_bias_words += o.ref_bias_words;
    bias_errors += o.bias_errors;
    unbias_errors += o.unbias_errors;
    u_we_b += o.u_we_b;
    substitutions += o.substitutions;
    deletions += o.deletions;
    insertions += o.insertions;
    gate_tp += o.gate_tp;
    gate_fn += o.gate_fn;
    gate_fp += o.gate_fp;
    gate_tn += o.gate_tn;
  }

  bool operator==(const ScoreCounts&) const = default;
};

inline constexpr double kGateThreshold = 0.5;

inline void CountGates(std::span<const GateRecord> gates, const BiasMask& mask,
                       ScoreCounts& c) {
  for (const auto& g : gates) {
    if (!g.m_nonempty) continue;
    const bool fired = g.p_gen >= kGateThreshold;
    if (mask.contains(g.step)) {
      (fired ? c.gate_tp : c.gate_fn)++;
    } else {
      (fired ? c.gate_fp : c.gate_tn)++;
    }
  }
}

// Gate records for teacher-forced step outputs (training diagnostics).
inline std::vector<GateRecord> TeacherForcedGates(
    std::span<const StepOutput> steps) {
  std::vector<GateRecord> out(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    out[i].step = i;
    out[i].p_gen = steps[i].p_gen;
    out[i].m_nonempty = !steps[i].m_i.empty();
  }
  return out;
}

struct UtteranceScoreInput {
  std::string id;
  Alignment alignment;
  std::set<std::string> bias_words;
  std::vector<GateRecord> gates;
  BiasMask mask;
};

inline ScoreCounts CountUtterance(const UtteranceScoreInput& in) {
  ScoreCounts c;
  const auto& ops = in.alignment.ops;
  std::vector<int> side(ops.size(), 0);  // 0 none, 1 bias error, 2 unbias
  for (std::size_t k = 0; k < ops.size(); ++k) {
    const auto& op = ops[k];
    if (op.ref_word) {
      ++c.ref_words;
      if (in.bias_words.count(*op.ref_word)) ++c.ref_bias_words;
    }
    if (!op.is_error()) continue;
    bool biased = false;
    switch (op.kind) {
      case EditKind::kSubstitution:
        ++c.substitutions;
        biased = in.bias_words.count(*op.ref_word) > 0;
        break;
      case EditKind::kDeletion:
        ++c.deletions;
        biased = in.bias_words.count(*op.ref_word) > 0;
        break;
      case EditKind::kInsertion:
        ++c.insertions;
        biased = in.bias_words.count(*op.hyp_word) > 0;
        break;
      case EditKind::kMatch:
        break;
    }
    side[k] = biased ? 1 : 2;
    (biased ? c.bias_errors : c.unbias_errors)++;
  }
  for (std::size_t k = 0; k < ops.size(); ++k) {
    if (side[k] != 2) continue;
    const bool left = k > 0 && side[k - 1] == 1;
    const bool right = k + 1 < ops.size() && side[k + 1] == 1;
    if (left || right) ++c.u_we_b;
  }
  CountGates(in.gates, in.mask, c);
  return c;
}

// Percentage; 0/0 is 0, x/0 with x > 0 is undefined.
inline std::optional<double> Percent(std::size_t num, std::size_t den) {
  if (den == 0) {
    if (num == 0) return 0.0;
    return std::nullopt;
  }
  return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

struct UtteranceScore {
  std::string id;
  ScoreCounts counts;
};

struct ScoreReport {
  ScoreCounts counts;
  std::optional<double> wer, b_wer, u_wer, far, tar;
  std::vector<UtteranceScore> per_utterance;
};

// Corpus-level pooled scores.
inline ScoreReport Score(std::span<const UtteranceScoreInput> inputs,
                         bool keep_per_utterance = false) {
  ScoreReport r;
  for (const auto& in : inputs) {
    const auto c = CountUtterance(in);
    r.counts.Add(c);
    if (keep_per_utterance) r.per_utterance.push_back({in.id, c});
  }
  const auto& c = r.counts;
  r.wer = Percent(c.errors(), c.ref_words);
  r.b_wer = Percent(c.bias_errors, c.ref_bias_words);
  r.u_wer = Percent(c.unbias_errors, c.ref_words - c.ref_bias_words);
  r.tar = Percent(c.gate_tp, c.gate_tp + c.gate_fn);
  r.far = Percent(c.gate_fp, c.gate_fp + c.gate_tn);
  return r;
}

inline nlohmann::ordered_json CountsToJson(const ScoreCounts& c) {
  return {{"ref_words", c.ref_words},
          {"ref_bias_words", c.ref_bias_words},
          {"errors", c.errors()},
          {"bias_errors", c.bias_errors},
          {"unbias_errors", c.unbias_errors},
          {"u_we_b", c.u_we_b},
          {"substitutions", c.substitutions},
          {"deletions", c.deletions},
          {"insertions", c.insertions},
          {"gate_tp", c.gate_tp},
          {"gate_fn", c.gate_fn},
          {"gate_fp", c.gate_fp},
          {"gate_tn", c.gate_tn},
          {"n_gate_positions", c.n_gate_positions()}};
}

inline nlohmann::ordered_json ReportToJson(const ScoreReport& r) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::ordered_json {
    if (v) return *v;
    return nullptr;
  };
  nlohmann::ordered_json j;
  j["wer"] = opt(r.wer);
  j["b_wer"] = opt(r.b_wer);
  j["u_wer"] = opt(r.u_wer);
  j["far"] = opt(r.far);
  j["tar"] = opt(r.tar);
  j["counts"] = CountsToJson(r.counts);
  j["notes"] = {
      {"far", "false-fire rate on positions outside K"},
      {"tar", "hit rate on positions in K"},
      {"u_we_b", "proxy: unbiased errors within one alignment op of a "
                 "bias-word error"}};
  if (!r.per_utterance.empty()) {
    auto& arr = j["per_utterance"] = nlohmann::ordered_json::array();
    for (const auto& u : r.per_utterance) {
      arr.push_back({{"id", u.id}, {"counts", CountsToJson(u.counts)}});
    }
  }
  return j;
}

}  // namespace tcpgen
