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
// Token lists and BIO-annotated corpora. Readers accept UTF-8 with LF or
// CRLF line endings; the BIO reader takes whitespace- or tab-separated
// columns with blank-line sentence breaks and skips -DOCSTART- lines.

#ifndef CLMTK_CORPUS_HPP_
#define CLMTK_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "clmtk/errors.hpp"
#include "clmtk/text.hpp"

namespace clmtk {

// An unordered list of training tokens. Multiplicity is preserved: duplicate
// surface forms carry weight in model estimation.
struct TokenList {
  std::vector<std::string> tokens;
  std::string source_tag;

  std::size_t size() const { return tokens.size(); }
};

enum class BioKind : std::uint8_t { kBegin, kInside, kOutside };

struct BioTag {
  BioKind kind = BioKind::kOutside;
  std::string entity_type;  // empty when the tag carries no type

  bool is_entity() const { return kind != BioKind::kOutside; }

  bool operator==(const BioTag&) const = default;

  // Accepts O, B, I, B-<type>, I-<type>. Anything else is malformed.
  static BioTag parse(std::string_view raw) {
    if (raw == "O") return BioTag{BioKind::kOutside, ""};
    if (raw.empty()) throw DataError("empty tag");
    BioKind kind;
    if (raw.front() == 'B') {
      kind = BioKind::kBegin;
    } else if (raw.front() == 'I') {
      kind = BioKind::kInside;
    } else {
      throw DataError("unparseable tag '" + std::string(raw) + "'");
    }
    if (raw.size() == 1) return BioTag{kind, ""};
    if (raw[1] != '-' || raw.size() == 2) {
      throw DataError("unparseable tag '" + std::string(raw) + "'");
    }
    return BioTag{kind, std::string(raw.substr(2))};
  }

  std::string to_string() const {
    switch (kind) {
      case BioKind::kOutside:
        return "O";
      case BioKind::kBegin:
        return entity_type.empty() ? "B" : "B-" + entity_type;
      case BioKind::kInside:
        return entity_type.empty() ? "I" : "I-" + entity_type;
    }
    return "O";
  }
};

struct TaggedToken {
  std::string text;  // normalized surface form
  BioTag tag;
};

struct LabeledCorpus {
  std::vector<std::vector<TaggedToken>> sentences;

  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.size();
    return n;
  }

  // Tokens in corpus order, flattened across sentence boundaries.
  std::vector<const TaggedToken*> flat() const {
    std::vector<const TaggedToken*> out;
    out.reserve(token_count());
    for (const auto& s : sentences)
      for (const auto& t : s) out.push_back(&t);
    return out;
  }
};

// Which columns hold the token and the gold tag. Negative indices count
// from the end of the row, so the default {0, -1} matches common CoNLL
// layouts (token first, tag last).
struct ColumnSpec {
  int token_col = 0;
  int tag_col = -1;
};

struct BioReadResult {
  LabeledCorpus corpus;
  std::vector<std::string> warnings;
};

namespace detail {

// Reads a whole file as raw lines, accepting LF and CRLF.
inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
  return lines;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

inline std::string_view pick_column(const std::vector<std::string_view>& fields,
                                    int col, std::string_view what,
                                    const std::string& where) {
  const int n = static_cast<int>(fields.size());
  const int idx = col >= 0 ? col : n + col;
  if (idx < 0 || idx >= n) {
    throw DataError(where + ": missing " + std::string(what) + " column (" +
                    std::to_string(col) + ") in a " + std::to_string(n) +
                    "-field row");
  }
  return fields[static_cast<std::size_t>(idx)];
}

inline void check_utf8(std::string_view line, const std::string& where) {
  if (auto bad = utf8_find_invalid(line)) {
    throw DataError(where + ": invalid UTF-8 byte sequence at column " +
                    std::to_string(*bad + 1));
  }
}

}  // namespace detail

// Reads a one-token-per-line list. Blank lines (after normalization) are
// skipped; duplicates are kept unless `dedup` is set, in which case the
// first occurrence of each surface form survives.
inline TokenList read_token_list(const std::filesystem::path& path,
                                 const NormalizationPolicy& policy = {},
                                 bool dedup = false) {
  TokenList list;
  list.source_tag = path.string();
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  for (const std::string& raw : detail::read_lines(path)) {
    ++line_no;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    detail::check_utf8(raw, where);
    std::string token = normalize(raw, policy);
    if (token.empty()) continue;
    if (dedup && !seen.insert(token).second) continue;
    list.tokens.push_back(std::move(token));
  }
  return list;
}

// Reads a BIO-annotated corpus. An I- tag that opens an entity (sentence
// start, after O, or after a different type) is reported as a warning, not
// an error: such sequences occur in real data and extraction is token-level.
inline BioReadResult read_bio_corpus(const std::filesystem::path& path,
                                     const ColumnSpec& columns = {},
                                     const NormalizationPolicy& policy = {}) {
  BioReadResult result;
  std::vector<TaggedToken> sentence;
  const BioTag* prev_tag = nullptr;

  auto flush = [&] {
    if (!sentence.empty()) {
      result.corpus.sentences.push_back(std::move(sentence));
      sentence.clear();
    }
    prev_tag = nullptr;
  };

  std::size_t line_no = 0;
  for (const std::string& raw : detail::read_lines(path)) {
    ++line_no;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    detail::check_utf8(raw, where);
    const auto fields = detail::split_fields(raw);
    if (fields.empty()) {
      flush();
      continue;
    }
    if (fields.front() == "-DOCSTART-") continue;

    const std::string_view token_field =
        detail::pick_column(fields, columns.token_col, "token", where);
    const std::string_view tag_field =
        detail::pick_column(fields, columns.tag_col, "tag", where);

    BioTag tag;
    try {
      tag = BioTag::parse(tag_field);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }

    std::string token = normalize(token_field, policy);
    if (token.empty()) {
      throw DataError(where + ": token is empty after normalization");
    }

    if (tag.kind == BioKind::kInside) {
      const bool continues = prev_tag != nullptr && prev_tag->is_entity() &&
                             prev_tag->entity_type == tag.entity_type;
      if (!continues) {
        result.warnings.push_back(where + ": " + tag.to_string() +
                                  " continues no open entity");
      }
    }
    sentence.push_back(TaggedToken{std::move(token), tag});
    prev_tag = &sentence.back().tag;
  }
  flush();
  return result;
}

// Partitions corpus tokens by gold tag: B/I tokens become the entity list,
// O tokens the non-entity list. Multiplicity and order are preserved, so the
// two lists together are exactly the corpus token multiset.
inline std::pair<TokenList, TokenList> extract_lists(
    const LabeledCorpus& corpus) {
  TokenList entity{{}, "entities"};
  TokenList non_entity{{}, "non-entities"};
  for (const auto& sentence : corpus.sentences) {
    for (const auto& tok : sentence) {
      (tok.tag.is_entity() ? entity : non_entity).tokens.push_back(tok.text);
    }
  }
  return {std::move(entity), std::move(non_entity)};
}

// Per-token mask over `test` in corpus order: true exactly for gold entity
// tokens whose surface form never occurs in `train_entities` (set semantics,
// case-sensitive). Both sides must share one normalization policy.
inline std::vector<bool> unseen_mask(const TokenList& train_entities,
                                     const LabeledCorpus& test) {
  std::unordered_set<std::string_view> known;
  known.reserve(train_entities.tokens.size());
  for (const auto& t : train_entities.tokens) known.insert(t);
  std::vector<bool> mask;
  mask.reserve(test.token_count());
  for (const auto& sentence : test.sentences) {
    for (const auto& tok : sentence) {
      mask.push_back(tok.tag.is_entity() && !known.contains(tok.text));
    }
  }
  return mask;
}

}  // namespace clmtk

#endif  // CLMTK_CORPUS_HPP_
