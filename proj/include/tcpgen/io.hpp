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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tcpgen/biaslist.hpp"
#include "tcpgen/decoder.hpp"
#include "tcpgen/error.hpp"
#include "tcpgen/simulator.hpp"
#include "tcpgen/trainer.hpp"

namespace tcpgen {

// File formats (all UTF-8):
//   corpus      JSON lines {id, ref_words, p_mdl_seq, h_dec_seq}
//   bias lists  JSON lines {id, words}
//   hypotheses  JSON lines {id, hyp_words, gate_trace: [{step, p_gen,
//               m_nonempty, emitted}]}
//   train log   CSV epoch,l_gen,l_ptr,l_asr,dev_far,dev_tar,lr,grad_norm,dev_loss
inline constexpr std::size_t kCorpusSizeWarning = 10000;

using Json = nlohmann::ordered_json;

inline std::ofstream OpenOut(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  return out;
}

inline std::ifstream OpenIn(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  return in;
}

template <typename Fn>
void ForEachJsonLine(const std::string& path, Fn&& fn) {
  auto in = OpenIn(path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    try {
      fn(j);
    } catch (const nlohmann::json::exception& e) {
      throw Error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline Json MatrixToJson(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (double v : m.row(r)) row.push_back(v);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix MatrixFromJson(const nlohmann::json& j) {
  if (!j.is_array()) throw Error("matrix must be an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows ? j[0].size() : 0;
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (j[r].size() != cols) throw Error("ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

inline void WriteCorpus(const std::string& path, const Corpus& corpus) {
  if (corpus.size() > kCorpusSizeWarning) {
    std::cerr << "warning: writing " << corpus.size()
              << " utterances as JSON lines; files of this size are slow\n";
  }
  auto out = OpenOut(path);
  for (const auto& u : corpus) {
    Json j;
    j["id"] = u.id;
    j["ref_words"] = u.ref_words;
    j["p_mdl_seq"] = MatrixToJson(u.p_mdl_seq);
    j["h_dec_seq"] = MatrixToJson(u.h_dec_seq);
    out << j.dump() << '\n';
  }
}

inline Corpus ReadCorpus(const std::string& path, const Vocab& vocab) {
  Corpus corpus;
  ForEachJsonLine(path, [&](const nlohmann::json& j) {
    SimUtterance u;
    u.id = j.at("id").get<std::string>();
    u.ref_words = j.at("ref_words").get<std::vector<std::string>>();
    u.ref = Tokenize(vocab, u.ref_words);
    u.p_mdl_seq = MatrixFromJson(j.at("p_mdl_seq"));
    u.h_dec_seq = MatrixFromJson(j.at("h_dec_seq"));
    if (u.p_mdl_seq.rows() != u.ref.length() ||
        u.h_dec_seq.rows() != u.ref.length()) {
      throw Error("utterance " + u.id + ": row count does not match tokens");
    }
    if (u.p_mdl_seq.cols() != vocab.size()) {
      throw Error("utterance " + u.id + ": posterior width " +
                  std::to_string(u.p_mdl_seq.cols()) +
                  " does not match vocabulary size " +
                  std::to_string(vocab.size()));
    }
    corpus.push_back(std::move(u));
  });
  return corpus;
}

inline void WriteBiasLists(const std::string& path,
                           const std::vector<BiasList>& lists) {
  auto out = OpenOut(path);
  for (const auto& l : lists) {
    Json j;
    j["id"] = l.id;
    j["words"] = l.words;
    out << j.dump() << '\n';
  }
}

inline std::map<std::string, std::vector<std::string>> ReadBiasLists(
    const std::string& path) {
  std::map<std::string, std::vector<std::string>> lists;
  ForEachJsonLine(path, [&](const nlohmann::json& j) {
    auto id = j.at("id").get<std::string>();
    auto words = j.at("words").get<std::vector<std::string>>();
    for (auto& w : words) w = ToLower(w);
    if (!lists.emplace(id, std::move(words)).second) {
      throw Error("duplicate bias list for " + id);
    }
  });
  return lists;
}

// Bias lists in corpus order; every utterance must have one.
inline std::vector<std::vector<std::string>> AlignBiasLists(
    const Corpus& corpus,
    const std::map<std::string, std::vector<std::string>>& lists) {
  std::vector<std::vector<std::string>> out;
  out.reserve(corpus.size());
  for (const auto& u : corpus) {
    auto it = lists.find(u.id);
    if (it == lists.end()) throw ConfigError("no bias list for utterance " + u.id);
    out.push_back(it->second);
  }
  return out;
}

struct Hypothesis {
  std::string id;
  std::vector<std::string> hyp_words;
  std::vector<GateRecord> trace;
};

inline void WriteHypotheses(const std::string& path,
                            const std::vector<Hypothesis>& hyps) {
  auto out = OpenOut(path);
  for (const auto& h : hyps) {
    Json j;
    j["id"] = h.id;
    j["hyp_words"] = h.hyp_words;
    Json trace = Json::array();
    for (const auto& g : h.trace) {
      trace.push_back({{"step", g.step},
                       {"p_gen", g.p_gen},
                       {"m_nonempty", g.m_nonempty},
                       {"emitted", g.emitted}});
    }
    j["gate_trace"] = std::move(trace);
    out << j.dump() << '\n';
  }
}

inline std::map<std::string, Hypothesis> ReadHypotheses(const std::string& path) {
  std::map<std::string, Hypothesis> hyps;
  ForEachJsonLine(path, [&](const nlohmann::json& j) {
    Hypothesis h;
    h.id = j.at("id").get<std::string>();
    h.hyp_words = j.at("hyp_words").get<std::vector<std::string>>();
    for (const auto& g : j.value("gate_trace", nlohmann::json::array())) {
      GateRecord r;
      r.step = g.at("step").get<std::size_t>();
      r.p_gen = g.at("p_gen").get<double>();
      r.m_nonempty = g.at("m_nonempty").get<bool>();
      r.emitted = g.at("emitted").get<TokenId>();
      h.trace.push_back(r);
    }
    const auto id = h.id;
    if (!hyps.emplace(id, std::move(h)).second) {
      throw Error("duplicate hypothesis for " + id);
    }
  });
  return hyps;
}

inline std::string FormatNumber(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline std::string FormatOptional(const std::optional<double>& v) {
  return v ? FormatNumber(*v) : std::string("nan");
}

inline void WriteTrainLog(const std::string& path,
                          const std::vector<EpochLog>& log) {
  auto out = OpenOut(path);
  out << "epoch,l_gen,l_ptr,l_asr,dev_far,dev_tar,lr,grad_norm,dev_loss\n";
  for (const auto& r : log) {
    out << r.epoch << ',' << FormatNumber(r.l_gen) << ','
        << FormatNumber(r.l_ptr) << ',' << FormatNumber(r.l_asr) << ','
        << FormatOptional(r.dev_far) << ',' << FormatOptional(r.dev_tar) << ','
        << FormatNumber(r.lr) << ',' << FormatNumber(r.grad_norm) << ','
        << FormatNumber(r.dev_loss) << '\n';
  }
}

inline Json TraceToJson(const StepTrace& t) {
  return {{"epoch", t.epoch},       {"step", t.step},
          {"batch_size", t.batch_size}, {"l_gen", t.l_gen},
          {"l_ptr", t.l_ptr},       {"l_asr", t.l_asr},
          {"total", t.total},       {"grad_norm", t.grad_norm},
          {"lr", t.lr}};
}

inline Json ReadJsonFile(const std::string& path) {
  auto in = OpenIn(path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace tcpgen
