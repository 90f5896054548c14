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
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tcpgen/error.hpp"
#include "tcpgen/matrix.hpp"
#include "tcpgen/rng.hpp"
#include "tcpgen/tokenizer.hpp"

namespace tcpgen {

// Trainable parameters of the biasing module.
//
//   q       = w_q * h_dec                           (d)
//   z_c     = <q, token_embed[c]> / sqrt(d),  c in M_i
//   p_ptr   = softmax(z) over M_i, zero elsewhere
//   context = sum_c p_ptr(c) * token_embed[c]       (d)
//   p_gen   = sigmoid(<w_g, [h_dec ; context]> + b_g)
//
// The same struct doubles as the gradient container.
struct PgParams {
  Matrix token_embed;     // V x d
  Matrix w_q;             // d x d_h
  std::vector<double> w_g;  // d_h + d
  double b_g = 0.0;
  std::size_t d = 0;
  std::size_t d_h = 0;
  std::uint64_t seed = 0;

  std::size_t vocab_size() const { return token_embed.rows(); }

  static PgParams Zeros(std::size_t vocab_size, std::size_t d,
                        std::size_t d_h) {
    PgParams p;
    p.token_embed = Matrix(vocab_size, d);
    p.w_q = Matrix(d, d_h);
    p.w_g.assign(d_h + d, 0.0);
    p.d = d;
    p.d_h = d_h;
    return p;
  }

  PgParams ZerosLike() const {
    PgParams p = Zeros(vocab_size(), d, d_h);
    p.seed = seed;
    return p;
  }

  // Flat views of every trainable scalar, in checkpoint order.
  std::array<std::span<double>, 4> Blocks() {
    return {token_embed.flat(), w_q.flat(), std::span<double>(w_g),
            std::span<double>(&b_g, 1)};
  }
  std::array<std::span<const double>, 4> Blocks() const {
    return {token_embed.flat(), w_q.flat(), std::span<const double>(w_g),
            std::span<const double>(&b_g, 1)};
  }

  std::size_t num_scalars() const {
    return token_embed.size() + w_q.size() + w_g.size() + 1;
  }

  double& Scalar(std::size_t k) {
    for (auto block : Blocks()) {
      if (k < block.size()) return block[k];
      k -= block.size();
    }
    throw Error("parameter index out of range");
  }
  double Scalar(std::size_t k) const {
    return const_cast<PgParams*>(this)->Scalar(k);
  }

  void Axpy(double a, const PgParams& x) {
    auto dst = Blocks();
    auto src = x.Blocks();
    for (std::size_t b = 0; b < dst.size(); ++b) {
      for (std::size_t i = 0; i < dst[b].size(); ++i) dst[b][i] += a * src[b][i];
    }
  }

  void Scale(double a) {
    for (auto block : Blocks()) {
      for (double& v : block) v *= a;
    }
  }

  double Norm() const {
    double s = 0.0;
    for (auto block : Blocks()) {
      for (double v : block) s += v * v;
    }
    return std::sqrt(s);
  }

  bool IsFinite() const {
    for (auto block : Blocks()) {
      if (!AllFinite(block)) return false;
    }
    return true;
  }

  bool operator==(const PgParams&) const = default;
};

// Uniform on [-s, s] with s = 1/sqrt(fan-in); b_g starts at -2 so an
// untrained gate is nearly closed.
inline PgParams InitParams(std::uint64_t seed, std::size_t vocab_size,
                           std::size_t d, std::size_t d_h) {
  if (vocab_size == 0 || d == 0 || d_h == 0) {
    throw ConfigError("parameter dimensions must be positive");
  }
  PgParams p = PgParams::Zeros(vocab_size, d, d_h);
  p.seed = seed;
  Rng rng(seed);
  const double s_embed = 1.0 / std::sqrt(static_cast<double>(d));
  for (double& v : p.token_embed.flat()) v = rng.Uniform(-s_embed, s_embed);
  const double s_q = 1.0 / std::sqrt(static_cast<double>(d_h));
  for (double& v : p.w_q.flat()) v = rng.Uniform(-s_q, s_q);
  const double s_g = 1.0 / std::sqrt(static_cast<double>(d_h + d));
  for (double& v : p.w_g) v = rng.Uniform(-s_g, s_g);
  p.b_g = -2.0;
  return p;
}

inline double Sigmoid(double a) {
  if (a >= 0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

// Per-step output of the biasing module.
struct StepOutput {
  std::vector<double> p_ptr;   // length V, zero outside m_i
  double p_gen = 0.0;
  std::vector<TokenId> m_i;    // sorted valid set used for this step
  std::vector<double> context; // length d
  // Cached for the backward pass.
  std::vector<double> query;   // length d
};

inline StepOutput ForwardStep(const PgParams& params,
                              std::span<const double> h_dec,
                              std::span<const TokenId> m_i) {
  if (h_dec.size() != params.d_h) {
    throw Error("decoder state has width " + std::to_string(h_dec.size()) +
                ", expected " + std::to_string(params.d_h));
  }
  if (!AllFinite(h_dec)) throw Error("non-finite decoder state");
  const std::size_t V = params.vocab_size();
  const std::size_t d = params.d;

  StepOutput out;
  out.p_ptr.assign(V, 0.0);
  out.m_i.assign(m_i.begin(), m_i.end());
  out.context.assign(d, 0.0);
  out.query.assign(d, 0.0);
  for (std::size_t r = 0; r < d; ++r) {
    out.query[r] = Dot(params.w_q.row(r), h_dec);
  }
  if (m_i.empty()) return out;

  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<double> logits(m_i.size());
  double max_logit = -INFINITY;
  for (std::size_t k = 0; k < m_i.size(); ++k) {
    const auto c = static_cast<std::size_t>(m_i[k]);
    if (c >= V) throw Error("valid-set token out of range");
    logits[k] = Dot(out.query, params.token_embed.row(c)) * inv_sqrt_d;
    max_logit = std::max(max_logit, logits[k]);
  }
  double z = 0.0;
  for (double& l : logits) {
    l = std::exp(l - max_logit);
    z += l;
  }
  for (std::size_t k = 0; k < m_i.size(); ++k) {
    const double p = logits[k] / z;
    out.p_ptr[m_i[k]] = p;
    const auto e = params.token_embed.row(m_i[k]);
    for (std::size_t j = 0; j < d; ++j) out.context[j] += p * e[j];
  }
  const double a =
      Dot(std::span<const double>(params.w_g).first(params.d_h), h_dec) +
      Dot(std::span<const double>(params.w_g).subspan(params.d_h),
          out.context) +
      params.b_g;
  out.p_gen = Sigmoid(a);
  return out;
}

enum class InterpolationMode {
  kScaled,    // P = P_mdl (1 - g) + P_ptr g for every token
  kUnscaled,  // same inside M_i; P_mdl unchanged outside. Not normalized.
};

inline std::vector<double> Interpolate(std::span<const double> p_mdl,
                                       const StepOutput& step,
                                       InterpolationMode mode) {
  if (p_mdl.size() != step.p_ptr.size()) {
    throw Error("interpolate: p_mdl has " + std::to_string(p_mdl.size()) +
                " entries, p_ptr has " + std::to_string(step.p_ptr.size()));
  }
  double total = 0.0;
  for (double p : p_mdl) total += p;
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error("interpolate: p_mdl does not sum to 1");
  }
  const double g = step.p_gen;
  std::vector<double> out(p_mdl.size());
  if (mode == InterpolationMode::kScaled) {
    for (std::size_t c = 0; c < out.size(); ++c) {
      out[c] = p_mdl[c] * (1.0 - g) + step.p_ptr[c] * g;
    }
  } else {
    std::copy(p_mdl.begin(), p_mdl.end(), out.begin());
    for (TokenId c : step.m_i) {
      out[c] = p_mdl[c] * (1.0 - g) + step.p_ptr[c] * g;
    }
  }
  return out;
}

// Checkpoint: one line of JSON header terminated by '\n', then the blocks
// token_embed, w_q, w_g, b_g as row-major little-endian IEEE-754 doubles.
inline constexpr int kCheckpointVersion = 1;

inline void SaveCheckpoint(const std::string& path, const PgParams& p) {
  nlohmann::ordered_json header;
  header["format"] = "tcpgen-checkpoint";
  header["version"] = kCheckpointVersion;
  header["vocab_size"] = p.vocab_size();
  header["d"] = p.d;
  header["d_h"] = p.d_h;
  header["seed"] = p.seed;
  header["blocks"] = {"token_embed", "w_q", "w_g", "b_g"};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint: " + path);
  out << header.dump() << '\n';
  for (auto block : p.Blocks()) {
    for (double v : block) {
      auto bits = std::bit_cast<std::uint64_t>(v);
      char bytes[8];
      for (int b = 0; b < 8; ++b) {
        bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
      }
      out.write(bytes, 8);
    }
  }
  if (!out) throw Error("short write on checkpoint: " + path);
}

inline PgParams LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint: " + path);
  std::string line;
  std::getline(in, line);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad checkpoint header in " + path + ": " + e.what());
  }
  if (header.value("format", "") != "tcpgen-checkpoint" ||
      header.value("version", 0) != kCheckpointVersion) {
    throw Error("unsupported checkpoint format in " + path);
  }
  PgParams p = PgParams::Zeros(header.at("vocab_size").get<std::size_t>(),
                               header.at("d").get<std::size_t>(),
                               header.at("d_h").get<std::size_t>());
  p.seed = header.at("seed").get<std::uint64_t>();
  for (auto block : p.Blocks()) {
    for (double& v : block) {
      unsigned char bytes[8];
      in.read(reinterpret_cast<char*>(bytes), 8);
      if (!in) throw Error("truncated checkpoint: " + path);
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) {
        bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
      }
      v = std::bit_cast<double>(bits);
    }
  }
  if (!p.IsFinite()) throw Error("non-finite values in checkpoint: " + path);
  return p;
}

}  // namespace tcpgen
