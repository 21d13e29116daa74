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
//
// Character-level n-gram language model with interpolated Witten-Bell
// smoothing. Probabilities and backoff weights live in log base 10, the
// ARPA convention, so serialization is a plain dump of the stored values.

#ifndef CLMTK_CHAR_LM_HPP_
#define CLMTK_CHAR_LM_HPP_

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "clmtk/char_vocab.hpp"
#include "clmtk/corpus.hpp"
#include "clmtk/errors.hpp"
#include "clmtk/ngram_counts.hpp"

namespace clmtk {

struct TokenScore {
  double log10_prob = 0.0;
  std::size_t num_events = 0;  // every character plus EOS; BOS predicts nothing

  double perplexity() const {
    return std::pow(10.0, -log10_prob / static_cast<double>(num_events));
  }
};

// Immutable after construction; concurrent scoring from many threads is the
// intended batch mode.
class CharLm {
 public:
  using NodeId = NgramCounts::NodeId;

  struct Node {
    std::map<SymbolId, double> log_probs;  // log10 P(w|h), observed w only
    double log_bow = 0.0;                  // log10 bow(h)
    std::map<SymbolId, NodeId> children;   // next-older history symbol
  };

  // Interpolated Witten-Bell over the count trie:
  //   lambda(h) = c(h) / (c(h) + T(h)),  bow(h) = 1 - lambda(h)
  //   P(w|h) = lambda(h) * count(h,w)/c(h) + bow(h) * P(w|h')
  // with the base case a uniform p0 = 1/(surface chars + 2) over surface
  // characters, EOS, and UNK. The empty-history node is topped up so it
  // covers the whole predicted alphabet; deeper lookups therefore always
  // terminate at the root.
  static CharLm estimate(const NgramCounts& counts, CharVocab vocab) {
    if (counts.node(NgramCounts::kRoot).total == 0) {
      throw DataError("cannot estimate a model from empty counts");
    }
    check_order(counts.order());
    CharLm lm;
    lm.order_ = counts.order();
    lm.vocab_ = std::move(vocab);
    lm.p0_ = 1.0 / static_cast<double>(lm.vocab_.predicted_size());
    lm.nodes_.resize(counts.nodes().size());
    std::map<SymbolId, double> base;  // empty: root interpolates against p0
    lm.estimate_node(counts, NgramCounts::kRoot, base);

    Node& root = lm.nodes_[NgramCounts::kRoot];
    const double root_bow = std::pow(10.0, root.log_bow);
    auto cover = [&](SymbolId w) {
      root.log_probs.try_emplace(w, std::log10(root_bow * lm.p0_));
    };
    cover(kEosId);
    cover(kUnkId);
    for (SymbolId id = kFirstSurfaceId; id < lm.vocab_.size(); ++id) cover(id);
    return lm;
  }

  // Deserialization entry point. Node 0 must be the empty history and must
  // assign a probability to every predicted symbol.
  static CharLm from_parts(int order, CharVocab vocab,
                           std::vector<Node> nodes) {
    check_order(order);
    if (nodes.empty()) throw DataError("model has no root node");
    CharLm lm;
    lm.order_ = order;
    lm.vocab_ = std::move(vocab);
    lm.p0_ = 1.0 / static_cast<double>(lm.vocab_.predicted_size());
    lm.nodes_ = std::move(nodes);
    const auto& root = lm.nodes_[0].log_probs;
    auto require = [&](SymbolId w, const char* what) {
      if (!root.contains(w)) {
        throw DataError(std::string("model lacks a unigram probability for ") +
                        what);
      }
    };
    require(kEosId, "</s>");
    require(kUnkId, "<unk>");
    for (SymbolId id = kFirstSurfaceId; id < lm.vocab_.size(); ++id) {
      require(id, "a vocabulary character");
    }
    return lm;
  }

  int order() const { return order_; }
  const CharVocab& vocab() const { return vocab_; }
  double p0() const { return p0_; }
  const std::vector<Node>& nodes() const { return nodes_; }

  // log10 P(w | h) with h given newest symbol first. Walks to the deepest
  // stored history prefix, then backs off toward the root, accumulating
  // log bow at each level that knows h but not w. Unstored history levels
  // contribute nothing: P(w|h) = P(w|h') when h itself was never observed.
  double log10_prob(std::span<const SymbolId> history, SymbolId w) const {
    NodeId path[kMaxSupportedOrder];
    std::size_t depth = 0;
    path[depth++] = 0;
    const std::size_t limit =
        std::min(history.size(), static_cast<std::size_t>(order_ - 1));
    for (std::size_t i = 0; i < limit; ++i) {
      const auto& kids = nodes_[path[depth - 1]].children;
      auto it = kids.find(history[i]);
      if (it == kids.end()) break;
      path[depth++] = it->second;
    }
    double acc = 0.0;
    for (std::size_t i = depth; i-- > 0;) {
      const Node& node = nodes_[path[i]];
      auto it = node.log_probs.find(w);
      if (it != node.log_probs.end()) return acc + it->second;
      acc += node.log_bow;
    }
    throw DataError("symbol is outside the model's predicted alphabet");
  }

  double prob(std::span<const SymbolId> history, SymbolId w) const {
    return std::pow(10.0, log10_prob(history, w));
  }

  // Scores a token as the character sentence BOS^(n-1) c1..ck EOS.
  TokenScore score(std::string_view token) const {
    const std::vector<SymbolId> symbols = vocab_.encode(token);
    if (symbols.size() < 2) throw DataError("cannot score an empty token");
    const std::size_t pad = static_cast<std::size_t>(order_ - 1);
    std::vector<SymbolId> window(pad, kBosId);  // newest first
    TokenScore result;
    result.num_events = symbols.size();
    for (SymbolId predicted : symbols) {
      result.log10_prob += log10_prob(window, predicted);
      if (pad > 0) {
        for (std::size_t i = pad - 1; i > 0; --i) window[i] = window[i - 1];
        window[0] = predicted;
      }
    }
    return result;
  }

  static constexpr std::size_t kMaxSupportedOrder = 64;

 private:
  CharLm() = default;

  static void check_order(int order) {
    if (order < 1) throw DataError("n-gram order must be at least 1");
    if (static_cast<std::size_t>(order) > kMaxSupportedOrder) {
      throw DataError("n-gram order exceeds the supported maximum");
    }
  }

  void estimate_node(const NgramCounts& counts, NodeId id,
                     const std::map<SymbolId, double>& parent) {
    const NgramCounts::Node& cn = counts.node(id);
    const double total = static_cast<double>(cn.total);
    const double types = static_cast<double>(cn.successors.size());
    const double lambda = total / (total + types);
    const double bow = types / (total + types);
    std::map<SymbolId, double> resolved;
    for (const auto& [w, cnt] : cn.successors) {
      // Backoff target: the same symbol under the history with its oldest
      // element dropped, which is this node's trie parent. count(h,w) > 0
      // guarantees count(h',w) > 0, so the lookup always hits.
      const double lower = id == NgramCounts::kRoot ? p0_ : parent.at(w);
      const double p =
          lambda * (static_cast<double>(cnt) / total) + bow * lower;
      resolved.emplace(w, p);
    }
    Node& out = nodes_[id];
    out.log_bow = std::log10(bow);
    out.children = cn.children;
    for (const auto& [w, p] : resolved) out.log_probs.emplace(w, std::log10(p));
    for (const auto& [sym, child] : cn.children) {
      estimate_node(counts, child, resolved);
    }
  }

  int order_ = 0;
  CharVocab vocab_;
  double p0_ = 0.0;
  std::vector<Node> nodes_;
};

// Counts every token in `tokens` against an externally built vocabulary.
inline NgramCounts count_ngrams(const TokenList& tokens, int order,
                                const CharVocab& vocab) {
  NgramCounts counts(order);
  for (const auto& token : tokens.tokens) {
    counts.add_token(vocab.encode(token));
  }
  return counts;
}

// The full training path: vocabulary, counts, estimate.
inline CharLm train_char_lm(const TokenList& tokens, int order) {
  if (tokens.tokens.empty()) {
    throw DataError("cannot train a model from an empty token list");
  }
  CharVocab vocab = CharVocab::build(tokens.tokens);
  NgramCounts counts = count_ngrams(tokens, order, vocab);
  return CharLm::estimate(counts, std::move(vocab));
}

}  // namespace clmtk

#endif  // CLMTK_CHAR_LM_HPP_
