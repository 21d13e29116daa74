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
// ARPA serialization of character models. Grams are space-separated
// characters with sentinel spellings <s>, </s>, <unk>; a literal space
// character is escaped as <sp>. Doubles are written with the shortest
// representation that round-trips, so serialization is lossless and
// byte-deterministic for a given model.

#ifndef CLMTK_ARPA_HPP_
#define CLMTK_ARPA_HPP_

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "clmtk/char_lm.hpp"
#include "clmtk/char_vocab.hpp"
#include "clmtk/corpus.hpp"
#include "clmtk/errors.hpp"
#include "clmtk/text.hpp"

namespace clmtk {
namespace detail {

// History-only grams (all <s>) carry this placeholder probability; <s> is
// never predicted, so no real value exists for them.
inline constexpr std::string_view kDummyLogProb = "-99";

inline std::string format_double(double v) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

inline double parse_double(std::string_view field, const std::string& where) {
  double value = 0.0;
  const auto result =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (result.ec != std::errc{} || result.ptr != field.data() + field.size()) {
    throw DataError(where + ": cannot parse number '" + std::string(field) +
                    "'");
  }
  if (!std::isfinite(value)) {
    throw DataError(where + ": non-finite value '" + std::string(field) + "'");
  }
  return value;
}

inline std::string spell_symbol(SymbolId id, const CharVocab& vocab) {
  switch (id) {
    case kBosId:
      return "<s>";
    case kEosId:
      return "</s>";
    case kUnkId:
      return "<unk>";
    default: {
      const char32_t cp = vocab.code_point(id);
      if (cp == U' ') return "<sp>";
      std::string out;
      utf8_append(cp, out);
      return out;
    }
  }
}

inline SymbolId parse_symbol(std::string_view field, const CharVocab& vocab,
                             const std::string& where) {
  if (field == "<s>") return kBosId;
  if (field == "</s>") return kEosId;
  if (field == "<unk>") return kUnkId;
  char32_t cp;
  if (field == "<sp>") {
    cp = U' ';
  } else {
    const std::u32string cps = [&]() -> std::u32string {
      try {
        return utf8_decode(field);
      } catch (const DataError& e) {
        throw DataError(where + ": " + e.what());
      }
    }();
    if (cps.size() != 1) {
      throw DataError(where + ": gram field '" + std::string(field) +
                      "' is not a single character");
    }
    cp = cps.front();
  }
  if (!vocab.knows(cp)) {
    throw DataError(where + ": gram character '" + std::string(field) +
                    "' is missing from the unigram section");
  }
  return vocab.id_of(cp);
}

struct ArpaLine {
  std::optional<double> log_prob;
  std::optional<double> log_bow;
};

inline void collect_lines(
    const CharLm& model, CharLm::NodeId id, std::vector<SymbolId>& path,
    std::vector<std::map<std::vector<SymbolId>, ArpaLine>>& levels) {
  const CharLm::Node& node = model.nodes()[id];
  // Gram spelling is oldest symbol first; the trie path is newest first.
  std::vector<SymbolId> gram(path.rbegin(), path.rend());
  if (!path.empty()) {
    levels[path.size() - 1][gram].log_bow = node.log_bow;
  }
  gram.push_back(kBosId);
  for (const auto& [w, logp] : node.log_probs) {
    gram.back() = w;
    levels[path.size()][gram].log_prob = logp;
  }
  for (const auto& [sym, child] : node.children) {
    path.push_back(sym);
    collect_lines(model, child, path, levels);
    path.pop_back();
  }
}

}  // namespace detail

inline std::string write_arpa_string(const CharLm& model) {
  std::vector<std::map<std::vector<SymbolId>, detail::ArpaLine>> levels(
      static_cast<std::size_t>(model.order()));
  std::vector<SymbolId> path;
  detail::collect_lines(model, 0, path, levels);

  std::string out;
  out += "\\data\\\n";
  for (int n = 1; n <= model.order(); ++n) {
    out += "ngram " + std::to_string(n) + "=" +
           std::to_string(levels[static_cast<std::size_t>(n - 1)].size()) +
           "\n";
  }
  for (int n = 1; n <= model.order(); ++n) {
    out += "\n\\" + std::to_string(n) + "-grams:\n";
    for (const auto& [gram, line] : levels[static_cast<std::size_t>(n - 1)]) {
      out += line.log_prob ? detail::format_double(*line.log_prob)
                           : std::string(detail::kDummyLogProb);
      for (std::size_t g = 0; g < gram.size(); ++g) {
        out += g == 0 ? '\t' : ' ';
        out += detail::spell_symbol(gram[g], model.vocab());
      }
      if (line.log_bow) {
        out += '\t';
        out += detail::format_double(*line.log_bow);
      }
      out += '\n';
    }
  }
  out += "\n\\end\\\n";
  return out;
}

inline void write_arpa(const CharLm& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const std::string content = write_arpa_string(model);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failure on " + path.string());
}

inline CharLm read_arpa_lines(const std::vector<std::string>& lines,
                              const std::string& name) {
  std::size_t i = 0;
  auto where = [&](std::size_t line_idx) {
    return name + ":" + std::to_string(line_idx + 1);
  };
  while (i < lines.size() && lines[i].empty()) ++i;
  if (i == lines.size() || lines[i] != "\\data\\") {
    throw DataError(name + ": missing \\data\\ header");
  }
  ++i;

  std::vector<std::uint64_t> declared;  // declared[k-1] = count of k-grams
  while (i < lines.size() && !lines[i].empty()) {
    const std::string& line = lines[i];
    if (!line.starts_with("ngram ")) {
      throw DataError(where(i) + ": expected 'ngram N=count', got '" + line +
                      "'");
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError(where(i) + ": expected 'ngram N=count', got '" + line +
                      "'");
    }
    const int n = static_cast<int>(
        detail::parse_double(std::string_view(line).substr(6, eq - 6), where(i)));
    const double count =
        detail::parse_double(std::string_view(line).substr(eq + 1), where(i));
    if (n != static_cast<int>(declared.size()) + 1) {
      throw DataError(where(i) + ": ngram orders must be declared 1..N in "
                      "sequence");
    }
    declared.push_back(static_cast<std::uint64_t>(count));
    ++i;
  }
  if (declared.empty()) throw DataError(name + ": no ngram declarations");
  const int order = static_cast<int>(declared.size());

  // First pass over the unigram section builds the vocabulary; symbol ids
  // in deeper sections depend on it.
  struct RawLine {
    double log_prob;
    bool dummy_prob;
    std::vector<std::string_view> gram;
    std::optional<double> log_bow;
    std::size_t line_idx;
  };
  std::vector<std::vector<RawLine>> sections(
      static_cast<std::size_t>(order));
  for (int n = 1; n <= order; ++n) {
    while (i < lines.size() && lines[i].empty()) ++i;
    const std::string expected = "\\" + std::to_string(n) + "-grams:";
    if (i == lines.size() || lines[i] != expected) {
      throw DataError(name + ": missing section header " + expected);
    }
    ++i;
    auto& section = sections[static_cast<std::size_t>(n - 1)];
    while (i < lines.size() && !lines[i].empty() && lines[i][0] != '\\') {
      const auto fields = detail::split_fields(lines[i]);
      const std::size_t want = static_cast<std::size_t>(n);
      if (fields.size() != want + 1 && fields.size() != want + 2) {
        throw DataError(where(i) + ": expected " + std::to_string(want + 1) +
                        " or " + std::to_string(want + 2) + " fields, got " +
                        std::to_string(fields.size()));
      }
      RawLine raw;
      raw.line_idx = i;
      raw.dummy_prob = fields.front() == detail::kDummyLogProb;
      raw.log_prob =
          raw.dummy_prob ? -99.0 : detail::parse_double(fields.front(), where(i));
      raw.gram.assign(fields.begin() + 1, fields.begin() + 1 + want);
      if (fields.size() == want + 2) {
        raw.log_bow = detail::parse_double(fields.back(), where(i));
      }
      section.push_back(std::move(raw));
      ++i;
    }
    if (section.size() != declared[static_cast<std::size_t>(n - 1)]) {
      throw DataError(name + ": ngram " + std::to_string(n) +
                      " section declares " +
                      std::to_string(declared[static_cast<std::size_t>(n - 1)]) +
                      " entries but contains " +
                      std::to_string(section.size()));
    }
  }
  while (i < lines.size() && lines[i].empty()) ++i;
  if (i == lines.size() || lines[i] != "\\end\\") {
    throw DataError(name + ": missing \\end\\ terminator");
  }
  for (++i; i < lines.size(); ++i) {
    if (!lines[i].empty()) {
      throw DataError(where(i) + ": content after \\end\\");
    }
  }

  std::vector<char32_t> surface;
  for (const RawLine& raw : sections[0]) {
    const std::string_view field = raw.gram.front();
    if (field == "<s>" || field == "</s>" || field == "<unk>") continue;
    if (field == "<sp>") {
      surface.push_back(U' ');
      continue;
    }
    const std::u32string cps = [&]() -> std::u32string {
      try {
        return utf8_decode(field);
      } catch (const DataError& e) {
        throw DataError(where(raw.line_idx) + ": " + e.what());
      }
    }();
    if (cps.size() != 1) {
      throw DataError(where(raw.line_idx) + ": unigram '" +
                      std::string(field) + "' is not a single character");
    }
    surface.push_back(cps.front());
  }
  CharVocab vocab = CharVocab::from_code_points(std::move(surface));

  std::vector<CharLm::Node> nodes(1);
  auto node_for = [&](const std::vector<SymbolId>& history) -> CharLm::Node& {
    CharLm::NodeId id = 0;
    for (SymbolId sym : history) {
      auto [it, inserted] = nodes[id].children.try_emplace(sym, 0);
      if (inserted) {
        it->second = static_cast<CharLm::NodeId>(nodes.size());
        nodes.emplace_back();
      }
      id = it->second;
    }
    return nodes[id];
  };

  for (int n = 1; n <= order; ++n) {
    for (const RawLine& raw : sections[static_cast<std::size_t>(n - 1)]) {
      const std::string w = where(raw.line_idx);
      std::vector<SymbolId> gram;
      gram.reserve(raw.gram.size());
      for (std::string_view field : raw.gram) {
        gram.push_back(detail::parse_symbol(field, vocab, w));
      }
      if (!raw.dummy_prob) {
        if (gram.back() == kBosId) {
          throw DataError(w + ": <s> cannot carry a probability");
        }
        // The line's history is the gram minus its last symbol, reversed
        // into newest-first trie orientation.
        std::vector<SymbolId> history(gram.rbegin() + 1, gram.rend());
        node_for(history).log_probs[gram.back()] = raw.log_prob;
      }
      if (raw.log_bow) {
        if (n == order) {
          throw DataError(w + ": a maximal-order gram cannot carry a backoff "
                          "weight");
        }
        std::vector<SymbolId> history(gram.rbegin(), gram.rend());
        node_for(history).log_bow = *raw.log_bow;
      }
    }
  }
  return CharLm::from_parts(order, std::move(vocab), std::move(nodes));
}

inline CharLm read_arpa(const std::filesystem::path& path) {
  return read_arpa_lines(detail::read_lines(path), path.string());
}

inline CharLm read_arpa_string(std::string_view content,
                               const std::string& name) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < content.size()) {
        lines.emplace_back(content.substr(start));
      }
      break;
    }
    std::string line(content.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  return read_arpa_lines(lines, name);
}

}  // namespace clmtk

#endif  // CLMTK_ARPA_HPP_
