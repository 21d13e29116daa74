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
// CLM-derived boolean features and CoNLL annotation. Features are raw
// perplexity comparisons: no length heuristic and no threshold, strict
// less-than with ties mapping to false.

#ifndef CLMTK_FEATURES_HPP_
#define CLMTK_FEATURES_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clmtk/arpa.hpp"
#include "clmtk/char_lm.hpp"
#include "clmtk/corpus.hpp"
#include "clmtk/errors.hpp"
#include "clmtk/parallel.hpp"
#include "clmtk/text.hpp"

namespace clmtk {

inline bool is_entity_feature(const CharLm& entity_lm,
                              const CharLm& non_entity_lm,
                              std::string_view token) {
  return entity_lm.score(token).perplexity() <
         non_entity_lm.score(token).perplexity();
}

inline bool is_language_feature(const CharLm& language_lm,
                                const CharLm& non_entity_lm,
                                std::string_view token) {
  return language_lm.score(token).perplexity() <
         non_entity_lm.score(token).perplexity();
}

// A named, ordered list of feature definitions with their models. Each
// definition is either a model pair (feature model vs reference model,
// typically the non-entity CLM) or an OR over previously defined features.
// Loaded from a declarative file of lines
//   name = feature_model.arpa reference_model.arpa
//   name = or(other_name, another_name)
// with '#' comments; relative model paths resolve against the spec file's
// directory. Models referenced by several features are loaded once.
class FeatureSpec {
 public:
  static FeatureSpec load(const std::filesystem::path& path) {
    return from_lines(detail::read_lines(path), path.string(),
                      path.parent_path());
  }

  static FeatureSpec from_lines(const std::vector<std::string>& lines,
                                const std::string& name,
                                const std::filesystem::path& base_dir) {
    FeatureSpec spec;
    std::map<std::string, std::size_t, std::less<>> model_index;
    std::map<std::string, std::size_t, std::less<>> def_index;
    std::size_t line_no = 0;
    for (const std::string& raw : lines) {
      ++line_no;
      const std::string where = name + ":" + std::to_string(line_no);
      std::string_view line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw DataError(where + ": expected 'name = definition'");
      }
      const std::string feature_name(trim(line.substr(0, eq)));
      if (feature_name.empty() ||
          feature_name.find_first_of(" \t") != std::string::npos) {
        throw DataError(where + ": bad feature name '" + feature_name + "'");
      }
      if (def_index.contains(feature_name)) {
        throw DataError(where + ": duplicate feature name '" + feature_name +
                        "'");
      }
      const std::string_view value = trim(line.substr(eq + 1));

      Def def;
      def.name = feature_name;
      if (value.starts_with("or(")) {
        if (!value.ends_with(")")) {
          throw DataError(where + ": unterminated or(...)");
        }
        std::string_view inner = value.substr(3, value.size() - 4);
        while (!inner.empty()) {
          const std::size_t comma = inner.find(',');
          const std::string_view operand = trim(inner.substr(0, comma));
          inner = comma == std::string_view::npos
                      ? std::string_view{}
                      : inner.substr(comma + 1);
          auto it = def_index.find(operand);
          if (it == def_index.end()) {
            throw DataError(where + ": or() references unknown feature '" +
                            std::string(operand) + "'");
          }
          def.operands.push_back(it->second);
        }
        if (def.operands.empty()) {
          throw DataError(where + ": or() needs at least one operand");
        }
        def.kind = Def::kOr;
      } else {
        const auto fields = detail::split_fields(value);
        if (fields.size() != 2) {
          throw DataError(where +
                          ": expected two model paths or or(...), got '" +
                          std::string(value) + "'");
        }
        def.kind = Def::kPair;
        def.lhs_model = spec.intern_model(fields[0], base_dir, model_index);
        def.ref_model = spec.intern_model(fields[1], base_dir, model_index);
      }
      def_index.emplace(feature_name, spec.defs_.size());
      spec.defs_.push_back(std::move(def));
    }
    if (spec.defs_.empty()) {
      throw DataError(name + ": feature spec defines no features");
    }
    return spec;
  }

  std::size_t size() const { return defs_.size(); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(defs_.size());
    for (const Def& def : defs_) out.push_back(def.name);
    return out;
  }

  // One boolean per defined feature, in definition order.
  std::vector<bool> compute(std::string_view token) const {
    std::vector<double> ppl(models_.size());
    std::vector<bool> scored(models_.size(), false);
    auto ppl_of = [&](std::size_t model) {
      if (!scored[model]) {
        ppl[model] = models_[model].score(token).perplexity();
        scored[model] = true;
      }
      return ppl[model];
    };
    std::vector<bool> values;
    values.reserve(defs_.size());
    for (const Def& def : defs_) {
      if (def.kind == Def::kPair) {
        values.push_back(ppl_of(def.lhs_model) < ppl_of(def.ref_model));
      } else {
        bool any = false;
        for (std::size_t op : def.operands) any = any || values[op];
        values.push_back(any);
      }
    }
    return values;
  }

 private:
  struct Def {
    std::string name;
    enum Kind : std::uint8_t { kPair, kOr } kind = kPair;
    std::size_t lhs_model = 0;
    std::size_t ref_model = 0;
    std::vector<std::size_t> operands;  // indices of earlier defs (kOr)
  };

  static std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
      s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
      s.remove_suffix(1);
    }
    return s;
  }

  std::size_t intern_model(
      std::string_view path_field, const std::filesystem::path& base_dir,
      std::map<std::string, std::size_t, std::less<>>& model_index) {
    std::filesystem::path path{std::string(path_field)};
    if (path.is_relative()) path = base_dir / path;
    const std::string key = path.string();
    if (auto it = model_index.find(key); it != model_index.end()) {
      return it->second;
    }
    models_.push_back(read_arpa(path));
    model_index.emplace(key, models_.size() - 1);
    return models_.size() - 1;
  }

  std::vector<CharLm> models_;
  std::vector<Def> defs_;
};

// Appends one column per feature to a CoNLL-style file, spelled 1/0. Lines
// are reproduced byte-for-byte before the appended columns: blank sentence
// separators and -DOCSTART- lines pass through untouched. The appended
// separator matches the line's own flavor, tab when the line contains a
// tab, a single space otherwise.
inline void annotate_corpus(const std::filesystem::path& in_path,
                            const std::filesystem::path& out_path,
                            const FeatureSpec& spec,
                            const ColumnSpec& columns = {},
                            const NormalizationPolicy& policy = {},
                            unsigned threads = 1) {
  const std::vector<std::string> lines = detail::read_lines(in_path);

  struct Job {
    std::size_t line_idx;
    std::string token;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto fields = detail::split_fields(lines[i]);
    if (fields.empty() || fields.front() == "-DOCSTART-") continue;
    const std::string where = in_path.string() + ":" + std::to_string(i + 1);
    detail::check_utf8(lines[i], where);
    const std::string_view token_field =
        detail::pick_column(fields, columns.token_col, "token", where);
    std::string token = normalize(token_field, policy);
    if (token.empty()) {
      throw DataError(where + ": token is empty after normalization");
    }
    jobs.push_back(Job{i, std::move(token)});
  }

  std::vector<std::vector<bool>> values(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    values[i] = spec.compute(jobs[i].token);
  });

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError("cannot open " + out_path.string() + " for writing");
  std::size_t job = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out << lines[i];
    if (job < jobs.size() && jobs[job].line_idx == i) {
      const char sep =
          lines[i].find('\t') != std::string::npos ? '\t' : ' ';
      for (bool v : values[job]) out << sep << (v ? '1' : '0');
      ++job;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failure on " + out_path.string());
}

}  // namespace clmtk

#endif  // CLMTK_FEATURES_HPP_
