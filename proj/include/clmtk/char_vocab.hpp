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

#ifndef CLMTK_CHAR_VOCAB_HPP_
#define CLMTK_CHAR_VOCAB_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "clmtk/errors.hpp"
#include "clmtk/text.hpp"

namespace clmtk {

// Dense symbol id. Sentinels occupy the low ids; surface characters follow
// in increasing code point order, so a vocabulary is a pure function of the
// set of characters it was built from.
using SymbolId = std::uint32_t;

inline constexpr SymbolId kBosId = 0;
inline constexpr SymbolId kEosId = 1;
inline constexpr SymbolId kUnkId = 2;
inline constexpr SymbolId kFirstSurfaceId = 3;

// Maps Unicode code points to dense symbol ids and back. BOS is a pure
// context symbol: it is conditioned on but never predicted, so it carries
// no probability mass anywhere downstream.
class CharVocab {
 public:
  CharVocab() = default;

  // Builds from the set of distinct code points in `tokens`.
  static CharVocab build(const std::vector<std::string>& tokens) {
    std::map<char32_t, SymbolId> ids;  // ordered: assigns ids by code point
    for (const auto& token : tokens) {
      for (char32_t cp : utf8_decode(token)) ids.emplace(cp, 0);
    }
    CharVocab vocab;
    vocab.code_points_.reserve(ids.size());
    for (auto& [cp, id] : ids) {
      id = kFirstSurfaceId + static_cast<SymbolId>(vocab.code_points_.size());
      vocab.code_points_.push_back(cp);
    }
    vocab.by_code_point_ = std::move(ids);
    return vocab;
  }

  // Rebuilds from an explicit surface character set (ARPA deserialization).
  static CharVocab from_code_points(std::vector<char32_t> code_points) {
    std::sort(code_points.begin(), code_points.end());
    code_points.erase(
        std::unique(code_points.begin(), code_points.end()),
        code_points.end());
    CharVocab vocab;
    vocab.code_points_ = std::move(code_points);
    for (std::size_t i = 0; i < vocab.code_points_.size(); ++i) {
      vocab.by_code_point_[vocab.code_points_[i]] =
          kFirstSurfaceId + static_cast<SymbolId>(i);
    }
    return vocab;
  }

  std::size_t surface_size() const { return code_points_.size(); }

  // Total ids in play: sentinels plus surface characters.
  std::size_t size() const { return kFirstSurfaceId + code_points_.size(); }

  // Number of outcomes the base distribution ranges over: every surface
  // character, EOS, and UNK. BOS is excluded by design.
  std::size_t predicted_size() const { return code_points_.size() + 2; }

  SymbolId id_of(char32_t cp) const {
    auto it = by_code_point_.find(cp);
    return it == by_code_point_.end() ? kUnkId : it->second;
  }

  bool knows(char32_t cp) const { return by_code_point_.contains(cp); }

  char32_t code_point(SymbolId id) const {
    if (id < kFirstSurfaceId || id >= size()) {
      throw DataError("symbol id " + std::to_string(id) +
                      " has no code point");
    }
    return code_points_[id - kFirstSurfaceId];
  }

  const std::vector<char32_t>& code_points() const { return code_points_; }

  // Token text to the symbol sequence the model predicts: each character's
  // id (UNK for unknown characters) followed by EOS.
  std::vector<SymbolId> encode(std::string_view token) const {
    std::vector<SymbolId> out;
    const auto cps = utf8_decode(token);
    out.reserve(cps.size() + 1);
    for (char32_t cp : cps) out.push_back(id_of(cp));
    out.push_back(kEosId);
    return out;
  }

  bool operator==(const CharVocab& other) const {
    return code_points_ == other.code_points_;
  }

 private:
  std::vector<char32_t> code_points_;
  std::map<char32_t, SymbolId> by_code_point_;
};

}  // namespace clmtk

#endif  // CLMTK_CHAR_VOCAB_HPP_
