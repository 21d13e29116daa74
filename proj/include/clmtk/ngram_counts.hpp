// Copyright 2026 The clmtk Authors.
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

#ifndef CLMTK_NGRAM_COUNTS_HPP_
#define CLMTK_NGRAM_COUNTS_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "clmtk/char_vocab.hpp"
#include "clmtk/errors.hpp"

namespace clmtk {

// N-gram event counts over symbol sequences, stored in a trie keyed by
// history read newest symbol first. With that orientation the node for
// history h has as its trie parent the backoff history h' (h with its
// oldest symbol dropped), which makes backoff estimation a parent-first
// walk. Two invariants hold by construction and are relied on downstream:
//   * every node has at least one successor count, so c(h) >= 1;
//   * count(h, w) > 0 implies count(h', w) > 0 at the parent.
class NgramCounts {
 public:
  using NodeId = std::uint32_t;
  static constexpr NodeId kRoot = 0;

  struct Node {
    std::map<SymbolId, std::uint64_t> successors;  // w -> count(h, w)
    std::map<SymbolId, NodeId> children;           // next-older history symbol
    std::uint64_t total = 0;                       // c(h)
  };

  explicit NgramCounts(int order) : order_(order) {
    if (order < 1) throw DataError("n-gram order must be at least 1");
    nodes_.emplace_back();
  }

  int order() const { return order_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(NodeId id) const { return nodes_[id]; }

  std::uint64_t count(std::span<const SymbolId> history,
                      SymbolId predicted) const {
    NodeId id = kRoot;
    for (SymbolId h : history) {
      auto it = nodes_[id].children.find(h);
      if (it == nodes_[id].children.end()) return 0;
      id = it->second;
    }
    auto it = nodes_[id].successors.find(predicted);
    return it == nodes_[id].successors.end() ? 0 : it->second;
  }

  // Records one prediction event. `history` is newest symbol first and is
  // truncated to order-1 symbols; the event is counted at every history
  // length from 0 up to that bound.
  void add_event(std::span<const SymbolId> history, SymbolId predicted) {
    const std::size_t depth =
        std::min(history.size(), static_cast<std::size_t>(order_ - 1));
    NodeId id = kRoot;
    for (std::size_t i = 0;; ++i) {
      ++nodes_[id].successors[predicted];
      ++nodes_[id].total;
      if (i == depth) break;
      auto [it, inserted] =
          nodes_[id].children.try_emplace(history[i], NodeId{0});
      if (inserted) {
        it->second = static_cast<NodeId>(nodes_.size());
        nodes_.emplace_back();
        // emplace_back may reallocate; `it` stays valid, `nodes_[id]` does
        // not, so re-read through the map value only.
      }
      id = it->second;
    }
  }

  // Counts a full token. `symbols` is the encoded token (characters then
  // EOS); each symbol is predicted in turn against a BOS-padded window of
  // the order-1 preceding symbols.
  void add_token(std::span<const SymbolId> symbols) {
    const std::size_t pad = static_cast<std::size_t>(order_ - 1);
    std::vector<SymbolId> window(pad, kBosId);  // newest first
    std::vector<SymbolId> next(pad, kBosId);
    for (SymbolId predicted : symbols) {
      add_event(window, predicted);
      if (pad > 0) {
        next[0] = predicted;
        std::copy(window.begin(), window.end() - 1, next.begin() + 1);
        window.swap(next);
      }
    }
  }

  std::uint64_t total_events() const { return nodes_[kRoot].total; }

 private:
  int order_;
  std::vector<Node> nodes_;
};

}  // namespace clmtk

#endif  // CLMTK_NGRAM_COUNTS_HPP_
