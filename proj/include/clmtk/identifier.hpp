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
// Token-level named-entity identification from a pair of character models,
// plus the exact-match and capitalization baselines. The decision procedure
// chains three rules in fixed order: the length-1 heuristic, the
// entity-perplexity threshold, and the two-model perplexity comparison.

#ifndef CLMTK_IDENTIFIER_HPP_
#define CLMTK_IDENTIFIER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "clmtk/char_lm.hpp"
#include "clmtk/corpus.hpp"
#include "clmtk/errors.hpp"
#include "clmtk/parallel.hpp"
#include "clmtk/text.hpp"

namespace clmtk {

enum class TokenLabel : std::uint8_t { kEntity, kNonEntity };

inline std::string_view to_string(TokenLabel label) {
  return label == TokenLabel::kEntity ? "ENTITY" : "NON_ENTITY";
}

enum class RuleFired : std::uint8_t {
  kLength1,
  kThreshold,
  kComparison,
  kTie,
};

inline std::string_view to_string(RuleFired rule) {
  switch (rule) {
    case RuleFired::kLength1:
      return "LENGTH_1";
    case RuleFired::kThreshold:
      return "THRESHOLD";
    case RuleFired::kComparison:
      return "COMPARISON";
    case RuleFired::kTie:
      return "TIE";
  }
  return "COMPARISON";
}

struct IdentifierConfig {
  // Entity-perplexity cutoff. Absent means the comparison rule alone
  // decides; there is no symmetric non-entity threshold.
  std::optional<double> threshold;
  bool min_length_rule = true;
  // Non-entities dominate real corpora, so exact perplexity ties default
  // to the majority class.
  TokenLabel tie_policy = TokenLabel::kNonEntity;
};

struct Decision {
  TokenLabel label = TokenLabel::kNonEntity;
  double entity_ppl = 0.0;
  double non_entity_ppl = 0.0;
  RuleFired rule_fired = RuleFired::kComparison;
};

namespace detail {

inline void check_config(const IdentifierConfig& config) {
  if (config.threshold &&
      (!std::isfinite(*config.threshold) || *config.threshold <= 0.0)) {
    throw DataError("threshold must be finite and positive");
  }
}

// The rule cascade over precomputed perplexities. `length` is the token's
// character count in Unicode scalar values, never bytes.
inline Decision decide(double entity_ppl, double non_entity_ppl,
                       std::size_t length, const IdentifierConfig& config) {
  Decision d;
  d.entity_ppl = entity_ppl;
  d.non_entity_ppl = non_entity_ppl;
  if (config.min_length_rule && length == 1) {
    d.label = TokenLabel::kNonEntity;
    d.rule_fired = RuleFired::kLength1;
  } else if (config.threshold && entity_ppl > *config.threshold) {
    d.label = TokenLabel::kNonEntity;
    d.rule_fired = RuleFired::kThreshold;
  } else if (entity_ppl == non_entity_ppl) {
    d.label = config.tie_policy;
    d.rule_fired = RuleFired::kTie;
  } else {
    d.label = entity_ppl < non_entity_ppl ? TokenLabel::kEntity
                                          : TokenLabel::kNonEntity;
    d.rule_fired = RuleFired::kComparison;
  }
  return d;
}

}  // namespace detail

inline Decision classify(const CharLm& entity_lm, const CharLm& non_entity_lm,
                         const IdentifierConfig& config,
                         std::string_view token) {
  detail::check_config(config);
  const std::size_t length = utf8_length(token);
  if (length == 0) throw DataError("cannot classify an empty token");
  return detail::decide(entity_lm.score(token).perplexity(),
                        non_entity_lm.score(token).perplexity(), length,
                        config);
}

// Batch form; decisions land at their token's index, so the result is
// independent of the worker count.
inline std::vector<Decision> classify_batch(
    const CharLm& entity_lm, const CharLm& non_entity_lm,
    const IdentifierConfig& config, const std::vector<std::string>& tokens,
    unsigned threads = 1) {
  detail::check_config(config);
  std::vector<Decision> decisions(tokens.size());
  parallel_for(tokens.size(), threads, [&](std::size_t i) {
    decisions[i] = classify(entity_lm, non_entity_lm, config, tokens[i]);
  });
  return decisions;
}

struct TuneResult {
  std::optional<double> threshold;  // absent: no finite cutoff helps
  double f1 = 0.0;
};

// Selects the entity-perplexity cutoff maximizing token F1 on dev under the
// full rule cascade. F1 is piecewise constant in the cutoff and changes
// only where the cutoff crosses an observed entity perplexity, so the
// midpoints between consecutive distinct observed values, plus "no
// threshold", cover every achievable labeling. Ties prefer the larger
// cutoff (less filtering).
inline TuneResult tune_threshold(const CharLm& entity_lm,
                                 const CharLm& non_entity_lm,
                                 const LabeledCorpus& dev,
                                 const IdentifierConfig& config_base,
                                 unsigned threads = 1) {
  detail::check_config(config_base);
  struct DevToken {
    double entity_ppl;
    double non_entity_ppl;
    std::size_t length;
    bool gold_entity;
  };
  const auto flat = dev.flat();
  if (flat.empty()) throw DataError("dev corpus is empty");
  std::vector<DevToken> toks(flat.size());
  parallel_for(flat.size(), threads, [&](std::size_t i) {
    toks[i] = DevToken{entity_lm.score(flat[i]->text).perplexity(),
                       non_entity_lm.score(flat[i]->text).perplexity(),
                       utf8_length(flat[i]->text), flat[i]->tag.is_entity()};
  });
  const bool has_entity =
      std::any_of(toks.begin(), toks.end(),
                  [](const DevToken& t) { return t.gold_entity; });
  const bool has_non_entity =
      std::any_of(toks.begin(), toks.end(),
                  [](const DevToken& t) { return !t.gold_entity; });
  if (!has_entity || !has_non_entity) {
    throw DataError("dev corpus must contain both entity and non-entity "
                    "tokens");
  }

  std::vector<double> ppls;
  ppls.reserve(toks.size());
  for (const DevToken& t : toks) ppls.push_back(t.entity_ppl);
  std::sort(ppls.begin(), ppls.end());
  ppls.erase(std::unique(ppls.begin(), ppls.end()), ppls.end());

  std::vector<std::optional<double>> candidates;
  for (std::size_t i = 0; i + 1 < ppls.size(); ++i) {
    candidates.emplace_back((ppls[i] + ppls[i + 1]) / 2.0);
  }
  candidates.emplace_back(std::nullopt);  // the largest candidate

  auto f1_at = [&](const std::optional<double>& tau) {
    IdentifierConfig config = config_base;
    config.threshold = tau;
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (const DevToken& t : toks) {
      const Decision d =
          detail::decide(t.entity_ppl, t.non_entity_ppl, t.length, config);
      const bool pred = d.label == TokenLabel::kEntity;
      if (pred && t.gold_entity) ++tp;
      if (pred && !t.gold_entity) ++fp;
      if (!pred && t.gold_entity) ++fn;
    }
    const double denom = static_cast<double>(2 * tp + fp + fn);
    return denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
  };

  TuneResult best;
  best.threshold = candidates.front();
  best.f1 = f1_at(candidates.front());
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double f1 = f1_at(candidates[i]);
    if (f1 >= best.f1) {  // >=: ties go to the larger candidate
      best.threshold = candidates[i];
      best.f1 = f1;
    }
  }
  return best;
}

// Tags a token as an entity iff it occurs verbatim in the training entity
// list. Case-sensitive by design: capitalization is information-bearing.
class ExactMatchClassifier {
 public:
  explicit ExactMatchClassifier(const TokenList& train_entities)
      : entities_(train_entities.tokens.begin(), train_entities.tokens.end()) {}

  TokenLabel classify(std::string_view token) const {
    return entities_.contains(std::string(token)) ? TokenLabel::kEntity
                                                  : TokenLabel::kNonEntity;
  }

 private:
  std::unordered_set<std::string> entities_;
};

inline TokenLabel exact_match_classify(const TokenList& train_entities,
                                       std::string_view token) {
  return ExactMatchClassifier(train_entities).classify(token);
}

// Tags a token as an entity iff its first character is an uppercase or
// titlecase letter. Caseless scripts therefore yield NON_ENTITY for every
// token.
inline TokenLabel capitalization_classify(std::string_view token) {
  return starts_with_capital(token) ? TokenLabel::kEntity
                                    : TokenLabel::kNonEntity;
}

}  // namespace clmtk

#endif  // CLMTK_IDENTIFIER_HPP_
