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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcpgen/error.hpp"
#include "tcpgen/losses.hpp"
#include "tcpgen/metrics.hpp"
#include "tcpgen/parallel.hpp"
#include "tcpgen/pointer_module.hpp"
#include "tcpgen/rng.hpp"
#include "tcpgen/simulator.hpp"

namespace tcpgen {

struct TrainConfig {
  LossMode mode = LossMode::kTwoLoss;
  double alpha = 0.7;
  double lr = 0.7;
  double lr_decay_factor = 0.5;
  std::size_t patience = 2;
  std::size_t epochs = 60;
  std::size_t batch_size = 16;
  std::uint64_t seed = 1;
  std::size_t d = 32;  // token embedding width
  int jobs = 1;
};

inline void ValidateTrainConfig(const TrainConfig& c) {
  CheckAlpha(c.alpha);
  if (!(c.lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(c.lr_decay_factor > 0.0 && c.lr_decay_factor <= 1.0)) {
    throw ConfigError("lr_decay_factor must lie in (0, 1]");
  }
  if (c.epochs < 1) throw ConfigError("epochs must be at least 1");
  if (c.batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (c.d < 1) throw ConfigError("d must be positive");
}

struct EpochLog {
  std::size_t epoch = 0;
  // Mean per-utterance training losses over the epoch's updates.
  double l_gen = 0.0;
  double l_ptr = 0.0;
  double l_asr = 0.0;
  std::optional<double> dev_far;  // percent
  std::optional<double> dev_tar;  // percent
  double lr = 0.0;                // rate used during this epoch
  double dev_loss = 0.0;          // mean per-utterance objective on dev
  // Norm of the mean per-utterance gradient over the whole training split,
  // at the parameters the epoch started from.
  double grad_norm = 0.0;
};

struct StepTrace {
  std::size_t epoch = 0;
  std::size_t step = 0;
  std::size_t batch_size = 0;
  double l_gen = 0.0;
  double l_ptr = 0.0;
  double l_asr = 0.0;
  double total = 0.0;
  double grad_norm = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  PgParams params;  // best-dev snapshot
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  bool diverged = false;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> dev_indices;
};

// Seeded shuffle, then the last 10% is the dev split. Corpora with fewer
// than 10 utterances evaluate on the training split.
inline void SplitTrainDev(std::size_t n, std::uint64_t seed,
                          std::vector<std::size_t>& train,
                          std::vector<std::size_t>& dev) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(SubSeed(seed, "split"));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.Index(i)]);
  const std::size_t n_dev = n / 10;
  train.assign(order.begin(), order.end() - n_dev);
  dev.assign(order.end() - n_dev, order.end());
  if (dev.empty()) dev = train;
}

struct Evaluation {
  double mean_loss = 0.0;
  LossReport report;  // summed
  ScoreCounts gates;
};

// Teacher-forced objective and gate statistics over a set of items.
inline Evaluation Evaluate(const PgParams& params,
                           std::span<const TrainItem> items,
                           const LossConfig& cfg, int jobs = 1) {
  std::vector<LossReport> reports(items.size());
  std::vector<ScoreCounts> counts(items.size());
  ParallelFor(items.size(), jobs, [&](std::size_t i) {
    reports[i] = UtteranceLoss(params, items[i], cfg, nullptr);
    const auto steps = ForwardTeacherForced(params, items[i]);
    CountGates(TeacherForcedGates(steps), items[i].mask, counts[i]);
  });
  Evaluation ev;
  for (std::size_t i = 0; i < items.size(); ++i) {
    ev.report.Accumulate(reports[i]);
    ev.gates.Add(counts[i]);
  }
  if (!items.empty()) ev.mean_loss = ev.report.total / items.size();
  return ev;
}

inline std::vector<TrainItem> MakeTrainItems(
    const Vocab& vocab, const Corpus& corpus,
    std::span<const std::vector<std::string>> bias_lists, int jobs = 1) {
  if (bias_lists.size() != corpus.size()) {
    throw ConfigError("every utterance needs a bias list (" +
                      std::to_string(corpus.size()) + " utterances, " +
                      std::to_string(bias_lists.size()) + " lists)");
  }
  std::vector<TrainItem> items(corpus.size());
  ParallelFor(corpus.size(), jobs, [&](std::size_t i) {
    items[i] = MakeTrainItem(vocab, corpus[i], bias_lists[i]);
  });
  return items;
}

// Mini-batch gradient descent on the configured objective with plateau
// learning-rate decay. The returned parameters are the best-dev snapshot
// (earliest epoch on ties). The corpus is never modified.
inline TrainResult Train(const Corpus& corpus,
                         std::span<const std::vector<std::string>> bias_lists,
                         const Vocab& vocab, const TrainConfig& cfg,
                         const std::function<void(const StepTrace&)>& trace = {}) {
  ValidateTrainConfig(cfg);
  if (corpus.empty()) throw ConfigError("training corpus is empty");
  const std::size_t d_h = corpus.front().h_dec_seq.cols();
  const auto items = MakeTrainItems(vocab, corpus, bias_lists, cfg.jobs);
  const LossConfig loss_cfg{cfg.mode, cfg.alpha};

  TrainResult result;
  SplitTrainDev(corpus.size(), cfg.seed, result.train_indices,
                result.dev_indices);
  std::vector<TrainItem> dev_items;
  for (auto i : result.dev_indices) dev_items.push_back(items[i]);
  std::vector<TrainItem> train_items;
  for (auto i : result.train_indices) train_items.push_back(items[i]);

  PgParams params = InitParams(cfg.seed, vocab.size(), cfg.d, d_h);
  result.params = params;
  double best_loss = std::numeric_limits<double>::infinity();
  double lr = cfg.lr;
  std::size_t since_best = 0;
  std::size_t global_step = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochLog row;
    row.epoch = epoch;
    row.lr = lr;
    {
      auto full = Grad(params, train_items, loss_cfg, cfg.jobs);
      full.gradient.Scale(1.0 / train_items.size());
      row.grad_norm = full.gradient.Norm();
    }

    std::vector<std::size_t> order(train_items.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(MixSeed(cfg.seed, epoch));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.Index(i)]);
    }

    LossReport epoch_sum;
    bool diverged = false;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<TrainItem> batch;
      for (std::size_t k = start; k < end; ++k) batch.push_back(train_items[order[k]]);
      GradResult gr;
      try {
        gr = Grad(params, batch, loss_cfg, cfg.jobs);
      } catch (const Error&) {
        diverged = true;
        break;
      }
      const double inv = 1.0 / batch.size();
      gr.gradient.Scale(inv);
      epoch_sum.Accumulate(gr.report);
      params.Axpy(-lr, gr.gradient);
      if (!params.IsFinite()) {
        diverged = true;
        break;
      }
      if (trace) {
        StepTrace st;
        st.epoch = epoch;
        st.step = ++global_step;
        st.batch_size = batch.size();
        st.l_gen = gr.report.l_gen * inv;
        st.l_ptr = gr.report.l_ptr * inv;
        st.l_asr = gr.report.l_asr * inv;
        st.total = gr.report.total * inv;
        st.grad_norm = gr.gradient.Norm();
        st.lr = lr;
        trace(st);
      }
    }
    if (diverged) {
      result.diverged = true;
      break;
    }
    const double inv_n = 1.0 / train_items.size();
    row.l_gen = epoch_sum.l_gen * inv_n;
    row.l_ptr = epoch_sum.l_ptr * inv_n;
    row.l_asr = epoch_sum.l_asr * inv_n;

    const Evaluation dev = Evaluate(params, dev_items, loss_cfg, cfg.jobs);
    row.dev_loss = dev.mean_loss;
    row.dev_far = Percent(dev.gates.gate_fp, dev.gates.gate_fp + dev.gates.gate_tn);
    row.dev_tar = Percent(dev.gates.gate_tp, dev.gates.gate_tp + dev.gates.gate_fn);
    result.log.push_back(row);
    if (!std::isfinite(dev.mean_loss)) {
      result.diverged = true;
      break;
    }

    if (dev.mean_loss < best_loss) {
      best_loss = dev.mean_loss;
      result.params = params;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      lr *= cfg.lr_decay_factor;
      since_best = 0;
    }
  }
  return result;
}

}  // namespace tcpgen
