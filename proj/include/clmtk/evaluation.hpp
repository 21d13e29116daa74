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
// Token-level identification metrics with ENTITY as the positive class,
// the unseen-entity restriction, and perplexity histograms.

#ifndef CLMTK_EVALUATION_HPP_
#define CLMTK_EVALUATION_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "clmtk/char_lm.hpp"
#include "clmtk/corpus.hpp"
#include "clmtk/errors.hpp"
#include "clmtk/identifier.hpp"
#include "clmtk/parallel.hpp"

namespace clmtk {

struct TokenEvalReport {
  std::uint64_t true_pos = 0;
  std::uint64_t false_pos = 0;
  std::uint64_t false_neg = 0;
  std::uint64_t true_neg = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  bool restricted_to_unseen = false;

  std::uint64_t evaluated_tokens() const {
    return true_pos + false_pos + false_neg + true_neg;
  }
};

// How an unseen mask restricts the metrics. Symmetric restriction scores
// precision and recall over masked tokens only; the global-precision
// alternative keeps precision over every prediction and restricts recall
// alone. The stored counts always describe the precision scope, so they
// sum to the number of evaluated tokens in either mode.
enum class MaskScope : std::uint8_t { kSymmetric, kGlobalPrecision };

namespace detail {

struct Tally {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

  void add(bool gold, bool pred) {
    if (gold && pred) ++tp;
    else if (!gold && pred) ++fp;
    else if (gold && !pred) ++fn;
    else ++tn;
  }

  double precision() const {
    return tp + fp == 0 ? 0.0
                        : static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  double recall() const {
    return tp + fn == 0 ? 0.0
                        : static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
};

inline double harmonic_f1(double p, double r) {
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

}  // namespace detail

// Scores a per-token prediction sequence against gold tags reduced to
// binary (B/I are ENTITY, O is NON_ENTITY). Predictions follow corpus
// order, flattened across sentences.
inline TokenEvalReport evaluate_tokens(const LabeledCorpus& gold,
                                       std::span<const TokenLabel> predictions,
                                       const std::vector<bool>* mask = nullptr,
                                       MaskScope scope = MaskScope::kSymmetric) {
  const std::size_t count = gold.token_count();
  if (predictions.size() != count) {
    throw DataError("prediction count " + std::to_string(predictions.size()) +
                    " does not match corpus token count " +
                    std::to_string(count));
  }
  if (mask != nullptr && mask->size() != count) {
    throw DataError("mask length does not match corpus token count");
  }

  detail::Tally all;     // every token
  detail::Tally masked;  // tokens selected by the mask
  std::size_t i = 0;
  for (const auto& sentence : gold.sentences) {
    for (const auto& token : sentence) {
      const bool is_gold = token.tag.is_entity();
      const bool is_pred = predictions[i] == TokenLabel::kEntity;
      all.add(is_gold, is_pred);
      if (mask != nullptr && (*mask)[i]) masked.add(is_gold, is_pred);
      ++i;
    }
  }

  TokenEvalReport report;
  if (mask == nullptr) {
    report.true_pos = all.tp;
    report.false_pos = all.fp;
    report.false_neg = all.fn;
    report.true_neg = all.tn;
    report.precision = all.precision();
    report.recall = all.recall();
  } else if (scope == MaskScope::kSymmetric) {
    report.restricted_to_unseen = true;
    report.true_pos = masked.tp;
    report.false_pos = masked.fp;
    report.false_neg = masked.fn;
    report.true_neg = masked.tn;
    report.precision = masked.precision();
    report.recall = masked.recall();
  } else {
    report.restricted_to_unseen = true;
    report.true_pos = all.tp;
    report.false_pos = all.fp;
    report.false_neg = all.fn;
    report.true_neg = all.tn;
    report.precision = all.precision();
    report.recall = masked.recall();
  }
  report.f1 = detail::harmonic_f1(report.precision, report.recall);
  const std::uint64_t n = report.evaluated_tokens();
  report.accuracy =
      n == 0 ? 0.0
             : static_cast<double>(report.true_pos + report.true_neg) /
                   static_cast<double>(n);
  return report;
}

struct PerplexityHistogram {
  // Edges are strictly increasing. Bin 0 is (0, edges[0]); interior bin i
  // is [edges[i-1], edges[i]); the last bin is [edges.back(), +inf), the
  // overflow bin. There are edges.size() + 1 bins in total.
  std::vector<double> bin_edges;
  std::vector<double> bin_percentages;
  std::string model_tag;
  std::string tokens_tag;
};

// Logarithmically spaced edges from 1 to the 99th percentile of the
// observed perplexities. The axes of a perplexity histogram are a
// presentation choice; these defaults keep typical mass visible.
inline std::vector<double> default_bin_edges(std::vector<double> perplexities,
                                             std::size_t edge_count = 30) {
  if (perplexities.empty() || edge_count < 2) {
    throw DataError("histogram needs scores and at least two edges");
  }
  std::sort(perplexities.begin(), perplexities.end());
  const std::size_t p99_index =
      std::min(perplexities.size() - 1,
               static_cast<std::size_t>(
                   0.99 * static_cast<double>(perplexities.size())));
  const double top = std::max(perplexities[p99_index], 1.5);
  std::vector<double> edges(edge_count);
  const double hi = std::log10(top);
  for (std::size_t i = 0; i < edge_count; ++i) {
    edges[i] = std::pow(
        10.0, hi * static_cast<double>(i) / static_cast<double>(edge_count - 1));
  }
  edges.front() = 1.0;
  return edges;
}

inline PerplexityHistogram histogram_from_scores(
    const std::vector<double>& perplexities, std::vector<double> bin_edges,
    std::string model_tag, std::string tokens_tag) {
  if (perplexities.empty()) {
    throw DataError("cannot build a histogram from an empty score list");
  }
  if (bin_edges.empty()) {
    throw DataError("histogram needs at least one bin edge");
  }
  for (std::size_t i = 1; i < bin_edges.size(); ++i) {
    if (!(bin_edges[i - 1] < bin_edges[i])) {
      throw DataError("histogram bin edges must be strictly increasing");
    }
  }
  std::vector<std::uint64_t> counts(bin_edges.size() + 1, 0);
  for (double p : perplexities) {
    // Interior bins are half-open [lo, hi), so the bin index is the number
    // of edges at or below p, which is what upper_bound returns.
    const auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), p);
    ++counts[static_cast<std::size_t>(it - bin_edges.begin())];
  }
  PerplexityHistogram hist;
  hist.bin_edges = std::move(bin_edges);
  hist.model_tag = std::move(model_tag);
  hist.tokens_tag = std::move(tokens_tag);
  hist.bin_percentages.reserve(counts.size());
  const double total = static_cast<double>(perplexities.size());
  for (std::uint64_t c : counts) {
    hist.bin_percentages.push_back(100.0 * static_cast<double>(c) / total);
  }
  return hist;
}

inline std::vector<double> batch_perplexities(const CharLm& model,
                                              const TokenList& tokens,
                                              unsigned threads = 1) {
  std::vector<double> ppls(tokens.tokens.size());
  parallel_for(tokens.tokens.size(), threads, [&](std::size_t i) {
    ppls[i] = model.score(tokens.tokens[i]).perplexity();
  });
  return ppls;
}

inline PerplexityHistogram histogram(const CharLm& model,
                                     const TokenList& tokens,
                                     std::vector<double> bin_edges,
                                     unsigned threads = 1) {
  if (tokens.tokens.empty()) {
    throw DataError("cannot build a histogram from an empty token list");
  }
  return histogram_from_scores(batch_perplexities(model, tokens, threads),
                               std::move(bin_edges), "model",
                               tokens.source_tag);
}

inline PerplexityHistogram histogram(const CharLm& model,
                                     const TokenList& tokens,
                                     std::size_t edge_count = 30,
                                     unsigned threads = 1) {
  if (tokens.tokens.empty()) {
    throw DataError("cannot build a histogram from an empty token list");
  }
  const std::vector<double> ppls = batch_perplexities(model, tokens, threads);
  return histogram_from_scores(ppls, default_bin_edges(ppls, edge_count),
                               "model", tokens.source_tag);
}

}  // namespace clmtk

#endif  // CLMTK_EVALUATION_HPP_
