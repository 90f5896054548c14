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

// Command-line entry point: simulate -> biaslists -> train -> decode ->
// score, plus an alpha sweep and a finite-difference gradient check.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tcpgen/tcpgen.hpp"

namespace {

using tcpgen::ConfigError;
using tcpgen::Json;

constexpr const char* kFormatsHelp = R"(File formats (all version 1):
  corpus      JSON lines: {id, ref_words, p_mdl_seq[U][V], h_dec_seq[U][d_h]}
  biaslists   JSON lines: {id, words}
  checkpoint  one JSON header line {format:"tcpgen-checkpoint", version,
              vocab_size, d, d_h, seed, blocks} followed by little-endian
              float64 parameters in block order
  hypotheses  JSON lines: {id, hyp_words, gate_trace[{step, p_gen,
              m_nonempty, emitted}]}
  train log   CSV: epoch,l_gen,l_ptr,l_asr,dev_far,dev_tar,lr,grad_norm,dev_loss
  report      JSON object with counts and percentages
  sweep       CSV: alpha,seeds,WER,FAR,U-WE-B,TAR,B-WER,U-WER (medians over seeds)
)";

std::vector<std::string> SplitComma(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double ParseDouble(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid " + what + ": " + s);
  }
}

std::uint64_t ParseUnsigned(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size() || s.front() == '-') throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid " + what + ": " + s);
  }
}

tcpgen::Corpus LoadCorpus(const std::string& path, const std::string& alphabet) {
  return tcpgen::ReadCorpus(path, tcpgen::AlphabetVocab(alphabet));
}

std::vector<std::vector<std::string>> LoadLists(const std::string& path,
                                                const tcpgen::Corpus& corpus) {
  return tcpgen::AlignBiasLists(corpus, tcpgen::ReadBiasLists(path));
}

// ---------------------------------------------------------------- simulate
struct SimulateOptions {
  std::string config;
  std::string preset;
  std::string out;
  std::string condition = "train";
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool print_config = false;
};

tcpgen::SimConfig PresetConfig(const std::string& name) {
  if (name == "toy-train") return tcpgen::toy::TrainConfig();
  if (name == "toy-test") return tcpgen::toy::TestConfig();
  if (name == "already-fit") return tcpgen::toy::AlreadyFitConfig();
  throw ConfigError("unknown preset: " + name +
                    " (expected toy-train, toy-test or already-fit)");
}

int RunSimulate(const SimulateOptions& o) {
  if (o.config.empty() == o.preset.empty()) {
    throw ConfigError("exactly one of --config and --preset is required");
  }
  tcpgen::SimConfig cfg = o.config.empty()
                              ? PresetConfig(o.preset)
                              : tcpgen::SimConfigFromJson(tcpgen::ReadJsonFile(o.config));
  if (o.seed) cfg.seed = *o.seed;
  const auto condition = tcpgen::ParseCondition(o.condition);
  cfg = tcpgen::ResolveSimConfig(cfg);
  if (o.print_config) {
    const Json j = cfg;
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  if (o.out.empty()) throw ConfigError("--out is required");
  auto corpus = tcpgen::GenCorpus(cfg, o.jobs);
  if (condition != tcpgen::Condition::kTrain) {
    corpus = tcpgen::RenderCondition(corpus, condition, cfg, o.jobs);
  }
  tcpgen::WriteCorpus(o.out, corpus);
  std::cout << "wrote " << corpus.size() << " utterances to " << o.out << '\n';
  return 0;
}

// --------------------------------------------------------------- biaslists
struct BiasListOptions {
  std::string corpus;
  std::string common;
  std::string out;
  std::string alphabet = "abcdefghijklmnopqrstuvwxyz";
  std::size_t distractors = tcpgen::kToyDistractors;
  std::uint64_t seed = 1;
  int jobs = 1;  // list construction is sequential; accepted for uniformity
  bool print_config = false;
};

int RunBiasLists(const BiasListOptions& o) {
  if (o.print_config) {
    Json j;
    j["corpus"] = o.corpus;
    j["common"] = o.common.empty() ? std::string("<built-in toy list>") : o.common;
    j["distractors"] = o.distractors;
    j["seed"] = o.seed;
    j["alphabet"] = o.alphabet;
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  if (o.corpus.empty() || o.out.empty()) {
    throw ConfigError("--corpus and --out are required");
  }
  const auto common_list =
      o.common.empty() ? tcpgen::toy::CommonWords() : tcpgen::ReadWordList(o.common);
  const std::set<std::string> common(common_list.begin(), common_list.end());
  const auto corpus = LoadCorpus(o.corpus, o.alphabet);
  const auto lists = tcpgen::BuildBiasLists(corpus, common, o.distractors, o.seed);
  std::size_t exhausted = 0;
  for (const auto& l : lists) exhausted += l.exhausted ? 1 : 0;
  if (exhausted > 0) {
    std::cerr << "warning: " << exhausted
              << " lists have fewer distractor candidates than requested\n";
  }
  tcpgen::WriteBiasLists(o.out, lists);
  std::cout << "wrote " << lists.size() << " bias lists to " << o.out << '\n';
  return 0;
}

// ------------------------------------------------------------------ train
struct TrainOptions {
  std::string corpus;
  std::string biaslists;
  std::string mode = "two_loss";
  std::string out;
  std::string log;
  std::string trace;
  std::string alphabet = "abcdefghijklmnopqrstuvwxyz";
  tcpgen::TrainConfig cfg;
  bool print_config = false;
};

Json TrainConfigToJson(const tcpgen::TrainConfig& c) {
  Json j;
  j["mode"] = tcpgen::ToString(c.mode);
  j["alpha"] = c.alpha;
  j["lr"] = c.lr;
  j["lr_decay_factor"] = c.lr_decay_factor;
  j["patience"] = c.patience;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["d"] = c.d;
  return j;
}

void AddTrainFlags(CLI::App* app, tcpgen::TrainConfig& c) {
  app->add_option("--epochs", c.epochs, "Training epochs")->capture_default_str();
  app->add_option("--lr", c.lr, "Initial learning rate")->capture_default_str();
  app->add_option("--batch-size", c.batch_size, "Utterances per update")
      ->capture_default_str();
  app->add_option("--patience", c.patience,
                  "Epochs without dev improvement before decaying lr")
      ->capture_default_str();
  app->add_option("--decay", c.lr_decay_factor, "Learning-rate decay factor")
      ->capture_default_str();
  app->add_option("--d", c.d, "Token embedding width")->capture_default_str();
}

int RunTrain(TrainOptions& o) {
  o.cfg.mode = tcpgen::ParseLossMode(o.mode);
  tcpgen::ValidateTrainConfig(o.cfg);
  if (o.print_config) {
    Json j = TrainConfigToJson(o.cfg);
    j["corpus"] = o.corpus;
    j["biaslists"] = o.biaslists;
    j["alphabet"] = o.alphabet;
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  if (o.corpus.empty() || o.biaslists.empty() || o.out.empty()) {
    throw ConfigError("--corpus, --biaslists and --out are required");
  }
  const auto vocab = tcpgen::AlphabetVocab(o.alphabet);
  const auto corpus = tcpgen::ReadCorpus(o.corpus, vocab);
  const auto lists = LoadLists(o.biaslists, corpus);

  std::optional<std::ofstream> trace_out;
  if (!o.trace.empty()) trace_out = tcpgen::OpenOut(o.trace);
  std::function<void(const tcpgen::StepTrace&)> trace;
  if (trace_out) {
    trace = [&](const tcpgen::StepTrace& t) {
      *trace_out << tcpgen::TraceToJson(t).dump() << '\n';
    };
  }
  const auto result = tcpgen::Train(corpus, lists, vocab, o.cfg, trace);
  tcpgen::SaveCheckpoint(o.out, result.params);
  if (!o.log.empty()) tcpgen::WriteTrainLog(o.log, result.log);
  const auto& last = result.log.back();
  std::cout << "trained " << result.log.size() << " epochs; best epoch "
            << result.best_epoch << "; final dev loss "
            << tcpgen::FormatNumber(last.dev_loss) << "; dev TAR "
            << tcpgen::FormatOptional(last.dev_tar) << "; dev FAR "
            << tcpgen::FormatOptional(last.dev_far) << '\n';
  if (result.diverged) {
    std::cerr << "error: training diverged after epoch " << result.log.size()
              << "; the best snapshot before divergence was saved\n";
    return 1;
  }
  return 0;
}

// ----------------------------------------------------------------- decode
struct DecodeOptions {
  std::string corpus;
  std::string ckpt;
  std::string biaslists;
  std::string mode = "unscaled";
  std::string out;
  std::string alphabet = "abcdefghijklmnopqrstuvwxyz";
  int jobs = 1;
  bool print_config = false;
};

int RunDecode(const DecodeOptions& o) {
  const auto mode = tcpgen::ParseDecodeMode(o.mode);
  if (o.print_config) {
    Json j;
    j["corpus"] = o.corpus;
    j["ckpt"] = o.ckpt;
    j["biaslists"] = o.biaslists;
    j["mode"] = tcpgen::ToString(mode);
    j["alphabet"] = o.alphabet;
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  if (o.corpus.empty() || o.out.empty()) {
    throw ConfigError("--corpus and --out are required");
  }
  const auto vocab = tcpgen::AlphabetVocab(o.alphabet);
  const auto corpus = tcpgen::ReadCorpus(o.corpus, vocab);
  std::vector<std::vector<std::string>> lists(corpus.size());
  std::optional<tcpgen::PgParams> params;
  if (mode != tcpgen::DecodeMode::kNone) {
    if (o.ckpt.empty() || o.biaslists.empty()) {
      throw ConfigError("--ckpt and --biaslists are required for biased decoding");
    }
    params = tcpgen::LoadCheckpoint(o.ckpt);
    if (params->d_h != corpus.front().h_dec_seq.cols()) {
      throw ConfigError("checkpoint decoder-state width does not match the corpus");
    }
    lists = LoadLists(o.biaslists, corpus);
  }
  const auto hyps = tcpgen::DecodeCorpus(corpus, vocab, params ? &*params : nullptr,
                                         lists, mode, o.jobs);
  tcpgen::WriteHypotheses(o.out, hyps);
  std::cout << "decoded " << hyps.size() << " utterances to " << o.out << '\n';
  return 0;
}

// ------------------------------------------------------------------ score
struct ScoreOptions {
  std::string refs;
  std::string hyps;
  std::string biaslists;
  std::string out;
  std::string alphabet = "abcdefghijklmnopqrstuvwxyz";
  bool per_utterance = false;
  int jobs = 1;  // scoring is sequential; accepted for uniformity
  bool print_config = false;
};

std::string ReportCsvHeader() { return "WER,B-WER,U-WER,FAR,TAR,U-WE-B"; }

std::string ReportCsvRow(const tcpgen::ScoreReport& r) {
  return tcpgen::FormatOptional(r.wer) + ',' + tcpgen::FormatOptional(r.b_wer) +
         ',' + tcpgen::FormatOptional(r.u_wer) + ',' +
         tcpgen::FormatOptional(r.far) + ',' + tcpgen::FormatOptional(r.tar) +
         ',' + std::to_string(r.counts.u_we_b);
}

int RunScore(const ScoreOptions& o) {
  if (o.print_config) {
    Json j;
    j["refs"] = o.refs;
    j["hyps"] = o.hyps;
    j["biaslists"] = o.biaslists;
    j["per_utt"] = o.per_utterance;
    j["alphabet"] = o.alphabet;
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  if (o.refs.empty() || o.hyps.empty() || o.biaslists.empty()) {
    throw ConfigError("--refs, --hyps and --biaslists are required");
  }
  const auto corpus = LoadCorpus(o.refs, o.alphabet);
  const auto lists = LoadLists(o.biaslists, corpus);
  const auto by_id = tcpgen::ReadHypotheses(o.hyps);
  std::vector<tcpgen::Hypothesis> hyps;
  hyps.reserve(corpus.size());
  for (const auto& u : corpus) {
    auto it = by_id.find(u.id);
    if (it == by_id.end()) throw ConfigError("no hypothesis for utterance " + u.id);
    hyps.push_back(it->second);
  }
  if (by_id.size() != corpus.size()) {
    throw ConfigError("hypothesis file has utterances missing from the references");
  }
  const auto report = tcpgen::ScoreCorpus(corpus, hyps, lists, o.per_utterance);
  if (!o.out.empty()) {
    auto out = tcpgen::OpenOut(o.out);
    out << tcpgen::ReportToJson(report).dump(2) << '\n';
  }
  std::cout << ReportCsvHeader() << '\n' << ReportCsvRow(report) << '\n';
  return 0;
}

// ------------------------------------------------------------ sweep-alpha
struct SweepOptions {
  std::string train;
  std::string train_lists;
  std::string test;
  std::string test_lists;
  std::string alphas = "0.1,0.3,0.5,0.7";
  std::string seeds = "1,2,3";
  std::string out;
  std::string runs_out;
  std::string alphabet = "abcdefghijklmnopqrstuvwxyz";
  tcpgen::TrainConfig cfg;
  bool print_config = false;
};

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Median over the seeds that produced a defined value; "nan" if none did.
std::string MedianOf(const std::vector<tcpgen::AlphaPoint>& points,
                     std::optional<double> tcpgen::ScoreReport::*field) {
  std::vector<double> v;
  for (const auto& p : points) {
    if (p.report.*field) v.push_back(*(p.report.*field));
  }
  return v.empty() ? std::string("nan") : tcpgen::FormatNumber(Median(v));
}

int RunSweep(SweepOptions& o) {
  std::vector<double> alphas;
  for (const auto& a : SplitComma(o.alphas)) {
    alphas.push_back(ParseDouble(a, "alpha"));
    tcpgen::CheckAlpha(alphas.back());
  }
  std::vector<std::uint64_t> seeds;
  for (const auto& s : SplitComma(o.seeds)) seeds.push_back(ParseUnsigned(s, "seed"));
  if (alphas.empty() || seeds.empty()) {
    throw ConfigError("--alphas and --seeds must be non-empty");
  }
  o.cfg.mode = tcpgen::LossMode::kTwoLoss;
  tcpgen::ValidateTrainConfig(o.cfg);
  const bool use_files = !o.train.empty() || !o.test.empty();
  if (o.print_config) {
    Json j = TrainConfigToJson(o.cfg);
    j.erase("alpha");
    j.erase("seed");
    j["alphas"] = alphas;
    j["seeds"] = seeds;
    j["data"] = use_files ? Json{{"train", o.train},
                                 {"train_biaslists", o.train_lists},
                                 {"test", o.test},
                                 {"test_biaslists", o.test_lists}}
                          : Json("built-in toy experiment");
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  if (o.out.empty()) throw ConfigError("--out is required");

  tcpgen::ToyExperiment e;
  if (use_files) {
    if (o.train.empty() || o.train_lists.empty() || o.test.empty() ||
        o.test_lists.empty()) {
      throw ConfigError(
          "--train, --train-biaslists, --test and --test-biaslists go together");
    }
    e.vocab = tcpgen::AlphabetVocab(o.alphabet);
    e.train = tcpgen::ReadCorpus(o.train, e.vocab);
    e.test = tcpgen::ReadCorpus(o.test, e.vocab);
    e.train_lists = LoadLists(o.train_lists, e.train);
    e.test_lists = LoadLists(o.test_lists, e.test);
  } else {
    e = tcpgen::MakeToyExperiment(o.cfg.jobs);
  }

  std::optional<std::ofstream> runs;
  if (!o.runs_out.empty()) {
    runs = tcpgen::OpenOut(o.runs_out);
    *runs << "alpha,seed," << ReportCsvHeader() << '\n';
  }
  auto out = tcpgen::OpenOut(o.out);
  out << "alpha,seeds,WER,FAR,U-WE-B,TAR,B-WER,U-WER\n";
  for (const double alpha : alphas) {
    std::vector<tcpgen::AlphaPoint> points;
    for (const auto seed : seeds) {
      auto cfg = o.cfg;
      cfg.alpha = alpha;
      cfg.seed = seed;
      points.push_back(tcpgen::RunAlphaPoint(e.train, e.train_lists, e.test,
                                             e.test_lists, e.vocab, cfg));
      if (runs) {
        *runs << tcpgen::FormatNumber(alpha) << ',' << seed << ','
              << ReportCsvRow(points.back().report) << '\n';
      }
    }
    std::vector<double> u_we_b;
    for (const auto& p : points) u_we_b.push_back(p.report.counts.u_we_b);
    const std::string row =
        tcpgen::FormatNumber(alpha) + ',' + std::to_string(seeds.size()) + ',' +
        MedianOf(points, &tcpgen::ScoreReport::wer) + ',' +
        MedianOf(points, &tcpgen::ScoreReport::far) + ',' +
        tcpgen::FormatNumber(Median(u_we_b)) + ',' +
        MedianOf(points, &tcpgen::ScoreReport::tar) + ',' +
        MedianOf(points, &tcpgen::ScoreReport::b_wer) + ',' +
        MedianOf(points, &tcpgen::ScoreReport::u_wer);
    out << row << '\n';
    std::cout << row << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- fd-check
struct FdOptions {
  std::uint64_t seed = 11;
  std::string dims = "8,4,6,7";
  std::string mode = "two_loss";
  double alpha = 0.7;
  double h = 1e-5;
  double tol = 1e-4;
  std::size_t utterances = 1;
  std::string out;
  int jobs = 1;  // the check is sequential; accepted for uniformity
  bool print_config = false;
};

int RunFdCheck(const FdOptions& o) {
  const auto dims = SplitComma(o.dims);
  if (dims.size() != 4) throw ConfigError("--dims expects V,d,d_h,U");
  const std::size_t V = ParseUnsigned(dims[0], "V");
  const std::size_t d = ParseUnsigned(dims[1], "d");
  const std::size_t d_h = ParseUnsigned(dims[2], "d_h");
  const std::size_t U = ParseUnsigned(dims[3], "U");
  const tcpgen::LossConfig cfg{tcpgen::ParseLossMode(o.mode), o.alpha};
  tcpgen::CheckAlpha(cfg.alpha);
  if (!(o.h > 0.0)) throw ConfigError("--step must be positive");
  if (o.print_config) {
    Json j;
    j["seed"] = o.seed;
    j["dims"] = {{"V", V}, {"d", d}, {"d_h", d_h}, {"U", U}};
    j["mode"] = tcpgen::ToString(cfg.mode);
    j["alpha"] = cfg.alpha;
    j["h"] = o.h;
    j["tol"] = o.tol;
    j["utterances"] = o.utterances;
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  const auto inst = tcpgen::MakeRandomInstance(o.seed, V, d, d_h, U, o.utterances);
  const auto r = tcpgen::FdCheck(inst.params, inst.items, cfg, o.h);
  const bool ok = r.max_rel_error < o.tol;
  Json j;
  j["max_rel_error"] = r.max_rel_error;
  j["worst_index"] = r.worst_index;
  j["analytic"] = r.worst_analytic;
  j["numeric"] = r.worst_numeric;
  j["n_params"] = r.n_params;
  j["tol"] = o.tol;
  j["pass"] = ok;
  if (!o.out.empty()) {
    auto out = tcpgen::OpenOut(o.out);
    out << j.dump(2) << '\n';
  }
  std::cout << "max relative error " << tcpgen::FormatNumber(r.max_rel_error)
            << " over " << r.n_params << " parameters ("
            << (ok ? "within" : "ABOVE") << " tolerance "
            << tcpgen::FormatNumber(o.tol) << ")\n";
  return ok ? 0 : 1;
}

void AddCommon(CLI::App* app, bool& print_config) {
  app->add_flag("--print-config", print_config,
                "Print the fully resolved configuration as JSON and exit");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pointer-generator contextual-biasing lab"};
  app.footer(kFormatsHelp);
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* c_sim = app.add_subcommand("simulate", "Generate a simulated corpus");
  c_sim->add_option("--config", sim.config, "Simulator JSON config");
  c_sim->add_option("--preset", sim.preset,
                    "Built-in config: toy-train, toy-test or already-fit");
  c_sim->add_option("--out", sim.out, "Output corpus (JSON lines)");
  c_sim->add_option("--condition", sim.condition, "train or test rendering")
      ->capture_default_str();
  c_sim->add_option("--seed", sim.seed, "Override the config seed");
  c_sim->add_option("--jobs", sim.jobs, "Worker threads")->capture_default_str();
  AddCommon(c_sim, sim.print_config);

  BiasListOptions bl;
  auto* c_bl = app.add_subcommand("biaslists", "Build per-utterance bias lists");
  c_bl->add_option("--corpus", bl.corpus, "Corpus (JSON lines)");
  c_bl->add_option("--common", bl.common,
                   "Common-word list, one per line (default: built-in toy list)");
  c_bl->add_option("--distractors", bl.distractors, "Distractors per list")
      ->capture_default_str();
  c_bl->add_option("--seed", bl.seed, "Sampling seed")->capture_default_str();
  c_bl->add_option("--out", bl.out, "Output bias lists (JSON lines)");
  c_bl->add_option("--alphabet", bl.alphabet, "Corpus alphabet")
      ->capture_default_str();
  c_bl->add_option("--jobs", bl.jobs,
                   "Accepted for uniformity; list construction is sequential");
  AddCommon(c_bl, bl.print_config);

  TrainOptions tr;
  auto* c_tr = app.add_subcommand("train", "Train the biasing module");
  c_tr->add_option("--corpus", tr.corpus, "Training corpus (JSON lines)");
  c_tr->add_option("--biaslists", tr.biaslists, "Bias lists (JSON lines)");
  c_tr->add_option("--mode", tr.mode, "two_loss or asr")->capture_default_str();
  c_tr->add_option("--alpha", tr.cfg.alpha, "Gate-loss weight in (0, 1)")
      ->capture_default_str();
  c_tr->add_option("--seed", tr.cfg.seed, "Initialisation and shuffling seed")
      ->capture_default_str();
  AddTrainFlags(c_tr, tr.cfg);
  c_tr->add_option("--out", tr.out, "Output checkpoint");
  c_tr->add_option("--log", tr.log, "Per-epoch CSV log");
  c_tr->add_option("--trace", tr.trace, "Per-step JSON-lines trace");
  c_tr->add_option("--jobs", tr.cfg.jobs, "Worker threads")->capture_default_str();
  c_tr->add_option("--alphabet", tr.alphabet, "Corpus alphabet")
      ->capture_default_str();
  AddCommon(c_tr, tr.print_config);

  DecodeOptions de;
  auto* c_de = app.add_subcommand("decode", "Greedy decoding");
  c_de->add_option("--corpus", de.corpus, "Corpus (JSON lines)");
  c_de->add_option("--ckpt", de.ckpt, "Checkpoint (not needed for --mode none)");
  c_de->add_option("--biaslists", de.biaslists, "Bias lists (JSON lines)");
  c_de->add_option("--mode", de.mode, "none, scaled or unscaled")
      ->capture_default_str();
  c_de->add_option("--out", de.out, "Output hypotheses (JSON lines)");
  c_de->add_option("--jobs", de.jobs, "Worker threads")->capture_default_str();
  c_de->add_option("--alphabet", de.alphabet, "Corpus alphabet")
      ->capture_default_str();
  AddCommon(c_de, de.print_config);

  ScoreOptions sc;
  auto* c_sc = app.add_subcommand("score", "Score hypotheses");
  c_sc->add_option("--refs", sc.refs, "Reference corpus (JSON lines)");
  c_sc->add_option("--hyps", sc.hyps, "Hypotheses (JSON lines)");
  c_sc->add_option("--biaslists", sc.biaslists, "Bias lists (JSON lines)");
  c_sc->add_option("--out", sc.out, "Output report (JSON)");
  c_sc->add_flag("--per-utt", sc.per_utterance, "Include per-utterance counts");
  c_sc->add_option("--alphabet", sc.alphabet, "Corpus alphabet")
      ->capture_default_str();
  c_sc->add_option("--jobs", sc.jobs, "Accepted for uniformity; scoring is sequential");
  AddCommon(c_sc, sc.print_config);

  SweepOptions sw;
  auto* c_sw = app.add_subcommand(
      "sweep-alpha",
      "Train and score across gate-loss weights (default: built-in toy data)");
  c_sw->add_option("--alphas", sw.alphas, "Comma-separated alpha values")
      ->capture_default_str();
  c_sw->add_option("--seeds", sw.seeds, "Comma-separated training seeds")
      ->capture_default_str();
  c_sw->add_option("--train", sw.train, "Training corpus");
  c_sw->add_option("--train-biaslists", sw.train_lists, "Training bias lists");
  c_sw->add_option("--test", sw.test, "Test corpus");
  c_sw->add_option("--test-biaslists", sw.test_lists, "Test bias lists");
  AddTrainFlags(c_sw, sw.cfg);
  c_sw->add_option("--out", sw.out, "Output table (CSV, medians over seeds)");
  c_sw->add_option("--runs-out", sw.runs_out, "Per-seed rows (CSV)");
  c_sw->add_option("--jobs", sw.cfg.jobs, "Worker threads")->capture_default_str();
  c_sw->add_option("--alphabet", sw.alphabet, "Corpus alphabet")
      ->capture_default_str();
  AddCommon(c_sw, sw.print_config);

  FdOptions fd;
  auto* c_fd = app.add_subcommand(
      "fd-check", "Compare analytic gradients with central finite differences");
  c_fd->add_option("--seed", fd.seed, "Instance seed")->capture_default_str();
  c_fd->add_option("--dims", fd.dims, "V,d,d_h,U")->capture_default_str();
  c_fd->add_option("--mode", fd.mode, "two_loss or asr")->capture_default_str();
  c_fd->add_option("--alpha", fd.alpha, "Gate-loss weight")->capture_default_str();
  c_fd->add_option("--step", fd.h, "Finite-difference step h")->capture_default_str();
  c_fd->add_option("--tol", fd.tol, "Maximum relative error")
      ->capture_default_str();
  c_fd->add_option("--utterances", fd.utterances, "Utterances in the batch")
      ->capture_default_str();
  c_fd->add_option("--out", fd.out, "Output result (JSON)");
  c_fd->add_option("--jobs", fd.jobs, "Accepted for uniformity; the check is sequential");
  AddCommon(c_fd, fd.print_config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*c_sim) return RunSimulate(sim);
    if (*c_bl) return RunBiasLists(bl);
    if (*c_tr) return RunTrain(tr);
    if (*c_de) return RunDecode(de);
    if (*c_sc) return RunScore(sc);
    if (*c_sw) return RunSweep(sw);
    if (*c_fd) return RunFdCheck(fd);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
