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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tcpgen/tokenizer.hpp"

namespace tcpgen {

// Prefix tree over the token sequences of the biasing words. Nodes live in
// an arena; node 0 is the root.
class PrefixTree {
 public:
  using NodeIndex = std::uint32_t;
  static constexpr NodeIndex kRoot = 0;

  struct Node {
    // Sorted by token id.
    std::vector<std::pair<TokenId, NodeIndex>> children;
    bool terminal = false;
  };

  PrefixTree() : nodes_(1) {}

  // Builds from already tokenized words; duplicates are merged.
  static PrefixTree FromTokenSequences(
      std::span<const std::vector<TokenId>> words) {
    PrefixTree tree;
    for (const auto& seq : words) tree.Insert(seq);
    return tree;
  }

  const Node& node(NodeIndex i) const { return nodes_.at(i); }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t word_count() const { return word_count_; }
  bool empty() const { return word_count_ == 0; }

  std::optional<NodeIndex> Child(NodeIndex parent, TokenId token) const {
    const auto& ch = nodes_[parent].children;
    auto it = std::lower_bound(
        ch.begin(), ch.end(), token,
        [](const auto& entry, TokenId t) { return entry.first < t; });
    if (it == ch.end() || it->first != token) return std::nullopt;
    return it->second;
  }

 private:
  void Insert(std::span<const TokenId> seq) {
    if (seq.empty()) return;
    NodeIndex cur = kRoot;
    for (TokenId t : seq) {
      if (auto next = Child(cur, t)) {
        cur = *next;
        continue;
      }
      const auto idx = static_cast<NodeIndex>(nodes_.size());
      nodes_.emplace_back();
      auto& ch = nodes_[cur].children;
      auto it = std::lower_bound(
          ch.begin(), ch.end(), t,
          [](const auto& entry, TokenId v) { return entry.first < v; });
      ch.insert(it, {t, idx});
      cur = idx;
    }
    if (!nodes_[cur].terminal) {
      nodes_[cur].terminal = true;
      ++word_count_;
    }
  }

  std::vector<Node> nodes_;
  std::size_t word_count_ = 0;
};

inline PrefixTree BuildTrie(const Vocab& vocab,
                            std::span<const std::string> bias_words) {
  std::vector<std::vector<TokenId>> seqs;
  seqs.reserve(bias_words.size());
  for (const auto& w : bias_words) {
    try {
      seqs.push_back(TokenizeWord(vocab, w));
    } catch (const Error& e) {
      throw Error("bias word \"" + w + "\" cannot be tokenized: " + e.what());
    }
  }
  return PrefixTree::FromTokenSequences(seqs);
}

// Set of trie nodes reached by some non-empty suffix of the consumed token
// stream. The root is implicitly always active. Nodes without children are
// never kept: they cannot contribute a continuation.
class TrieCursor {
 public:
  TrieCursor() = default;
  explicit TrieCursor(std::vector<PrefixTree::NodeIndex> active)
      : active_(std::move(active)) {
    std::sort(active_.begin(), active_.end());
    active_.erase(std::unique(active_.begin(), active_.end()), active_.end());
  }

  const std::vector<PrefixTree::NodeIndex>& active() const { return active_; }

  bool operator==(const TrieCursor&) const = default;

 private:
  std::vector<PrefixTree::NodeIndex> active_;
};

// Tokens that may continue a biasing word: children of the root and of every
// active node, sorted ascending.
inline std::vector<TokenId> ValidSet(const PrefixTree& tree,
                                     const TrieCursor& cursor) {
  std::vector<TokenId> out;
  for (const auto& [tok, _] : tree.node(PrefixTree::kRoot).children) {
    out.push_back(tok);
  }
  for (auto n : cursor.active()) {
    for (const auto& [tok, _] : tree.node(n).children) out.push_back(tok);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline TrieCursor AdvanceCursor(const PrefixTree& tree,
                                const TrieCursor& cursor, TokenId emitted) {
  std::vector<PrefixTree::NodeIndex> next;
  auto step = [&](PrefixTree::NodeIndex from) {
    if (auto child = tree.Child(from, emitted)) {
      // A completed word with no longer extension retires its path.
      if (!tree.node(*child).children.empty()) next.push_back(*child);
    }
  };
  step(PrefixTree::kRoot);
  for (auto n : cursor.active()) step(n);
  return TrieCursor(std::move(next));
}

}  // namespace tcpgen
