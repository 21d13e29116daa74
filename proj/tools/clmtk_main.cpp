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
// clmtk command line. One binary, one subcommand per pipeline stage.
// Machine-readable results go to --out files; human summaries go to
// standard error. Exit codes: 0 ok, 1 usage, 2 I/O, 3 data.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "clmtk/arpa.hpp"
#include "clmtk/char_lm.hpp"
#include "clmtk/corpus.hpp"
#include "clmtk/errors.hpp"
#include "clmtk/evaluation.hpp"
#include "clmtk/features.hpp"
#include "clmtk/identifier.hpp"
#include "clmtk/parallel.hpp"
#include "clmtk/report_io.hpp"
#include "clmtk/text.hpp"

namespace {

struct CommonFlags {
  int threads = 0;  // 0: CLMTK_THREADS env, then hardware concurrency
  bool no_nfc = false;
  bool no_strip = false;

  clmtk::NormalizationPolicy policy() const {
    return clmtk::NormalizationPolicy{!no_nfc, !no_strip};
  }
  unsigned thread_count() const { return clmtk::resolve_thread_count(threads); }
};

void add_common(CLI::App* cmd, CommonFlags* flags, bool with_threads = true) {
  if (with_threads) {
    cmd->add_option("--threads", flags->threads,
                    "Worker threads (0 = CLMTK_THREADS env or hardware)")
        ->check(CLI::NonNegativeNumber);
  }
  cmd->add_flag("--no-nfc", flags->no_nfc,
                "Skip Unicode canonical composition");
  cmd->add_flag("--no-strip", flags->no_strip,
                "Keep surrounding whitespace on tokens");
}

void require_input(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw clmtk::IoError("input file does not exist: " + path);
  }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw clmtk::IoError("cannot open " + path.string() +
                                 " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw clmtk::IoError("write failure on " + path.string());
}

void write_token_lines(const std::filesystem::path& path,
                       const std::vector<std::string>& tokens) {
  std::string content;
  for (const auto& token : tokens) {
    content += token;
    content += '\n';
  }
  write_file(path, content);
}

void print_warnings(const std::vector<std::string>& warnings) {
  constexpr std::size_t kShown = 10;
  for (std::size_t i = 0; i < warnings.size() && i < kShown; ++i) {
    std::cerr << "warning: " << warnings[i] << "\n";
  }
  if (warnings.size() > kShown) {
    std::cerr << "warning: " << warnings.size() - kShown
              << " further tag warnings suppressed\n";
  }
}

// Prediction files accept our label spelling plus common BIO spellings.
clmtk::TokenLabel parse_prediction(std::string_view field,
                                   const std::string& where) {
  if (field == "ENTITY" || field == "1" || field == "B" || field == "I" ||
      field.starts_with("B-") || field.starts_with("I-")) {
    return clmtk::TokenLabel::kEntity;
  }
  if (field == "NON_ENTITY" || field == "0" || field == "O") {
    return clmtk::TokenLabel::kNonEntity;
  }
  throw clmtk::DataError(where + ": unrecognized label '" +
                         std::string(field) + "'");
}

struct ThresholdFlags {
  double fixed = 0.0;
  bool has_fixed = false;
  std::string tune_dev;
};

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string in_path, out_path;
  int order = 6;
  bool dedup = false;
  CommonFlags common;
};

void cmd_train(const TrainArgs& args) {
  require_input(args.in_path);
  const clmtk::TokenList tokens =
      clmtk::read_token_list(args.in_path, args.common.policy(), args.dedup);
  const clmtk::CharLm model = clmtk::train_char_lm(tokens, args.order);
  clmtk::write_arpa(model, args.out_path);
  std::uint64_t events = 0;
  for (const auto& t : tokens.tokens) events += clmtk::utf8_length(t) + 1;
  std::cerr << "trained order-" << args.order << " model on "
            << tokens.size() << " tokens: " << model.vocab().surface_size()
            << " surface characters, " << events << " events -> "
            << args.out_path << "\n";
}

// ---------------------------------------------------------------------------
// extract

struct ExtractArgs {
  std::string in_path, entities_out, non_entities_out, stats_out;
  clmtk::ColumnSpec columns;
  CommonFlags common;
};

void cmd_extract(const ExtractArgs& args) {
  require_input(args.in_path);
  const clmtk::BioReadResult read =
      clmtk::read_bio_corpus(args.in_path, args.columns, args.common.policy());
  print_warnings(read.warnings);
  auto [entities, non_entities] = clmtk::extract_lists(read.corpus);
  write_token_lines(args.entities_out, entities.tokens);
  write_token_lines(args.non_entities_out, non_entities.tokens);
  if (!args.stats_out.empty()) {
    write_file(args.stats_out,
               "entity_tokens\tnon_entity_tokens\tsentences\n" +
                   std::to_string(entities.size()) + "\t" +
                   std::to_string(non_entities.size()) + "\t" +
                   std::to_string(read.corpus.sentences.size()) + "\n");
  }
  std::cerr << "extracted " << entities.size() << " entity tokens and "
            << non_entities.size() << " non-entity tokens from "
            << read.corpus.sentences.size() << " sentences\n";
}

// ---------------------------------------------------------------------------
// classify

struct ClassifyArgs {
  std::string entity_lm, non_entity_lm, tokens_path, out_path, audit_out;
  std::string baseline;        // "", "exact-match", "capitalization"
  std::string train_entities;  // exact-match baseline source
  ThresholdFlags threshold;
  bool no_length_rule = false;
  std::string tie_policy = "nonentity";
  clmtk::ColumnSpec dev_columns;
  CommonFlags common;
};

void cmd_classify(const ClassifyArgs& args) {
  require_input(args.tokens_path);
  const clmtk::TokenList tokens =
      clmtk::read_token_list(args.tokens_path, args.common.policy());

  std::vector<clmtk::TokenLabel> labels(tokens.size());
  std::string label_lines;
  if (!args.baseline.empty()) {
    if (args.baseline == "exact-match") {
      require_input(args.train_entities);
      const clmtk::ExactMatchClassifier baseline(clmtk::read_token_list(
          args.train_entities, args.common.policy()));
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        labels[i] = baseline.classify(tokens.tokens[i]);
      }
    } else {
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        labels[i] = clmtk::capitalization_classify(tokens.tokens[i]);
      }
    }
    for (clmtk::TokenLabel label : labels) {
      label_lines += clmtk::to_string(label);
      label_lines += '\n';
    }
    write_file(args.out_path, label_lines);
    std::cerr << "classified " << tokens.size() << " tokens with the "
              << args.baseline << " baseline\n";
    return;
  }

  require_input(args.entity_lm);
  require_input(args.non_entity_lm);
  const clmtk::CharLm entity_lm = clmtk::read_arpa(args.entity_lm);
  const clmtk::CharLm non_entity_lm = clmtk::read_arpa(args.non_entity_lm);

  clmtk::IdentifierConfig config;
  config.min_length_rule = !args.no_length_rule;
  config.tie_policy = args.tie_policy == "entity"
                          ? clmtk::TokenLabel::kEntity
                          : clmtk::TokenLabel::kNonEntity;
  if (args.threshold.has_fixed) {
    config.threshold = args.threshold.fixed;
  } else if (!args.threshold.tune_dev.empty()) {
    require_input(args.threshold.tune_dev);
    const clmtk::BioReadResult dev = clmtk::read_bio_corpus(
        args.threshold.tune_dev, args.dev_columns, args.common.policy());
    print_warnings(dev.warnings);
    const clmtk::TuneResult tuned =
        clmtk::tune_threshold(entity_lm, non_entity_lm, dev.corpus, config,
                              args.common.thread_count());
    config.threshold = tuned.threshold;
    std::cerr << "tuned threshold: "
              << (tuned.threshold
                      ? clmtk::detail::format_double(*tuned.threshold)
                      : std::string("none"))
              << " (dev F1 " << clmtk::detail::fixed4(tuned.f1) << ")\n";
  }

  const std::vector<clmtk::Decision> decisions = clmtk::classify_batch(
      entity_lm, non_entity_lm, config, tokens.tokens,
      args.common.thread_count());

  std::map<clmtk::RuleFired, std::uint64_t> by_rule;
  std::uint64_t entity_count = 0;
  std::string audit_lines =
      "token\tlabel\tentity_ppl\tnon_entity_ppl\trule\n";
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const clmtk::Decision& d = decisions[i];
    labels[i] = d.label;
    label_lines += clmtk::to_string(d.label);
    label_lines += '\n';
    ++by_rule[d.rule_fired];
    entity_count += d.label == clmtk::TokenLabel::kEntity ? 1 : 0;
    if (!args.audit_out.empty()) {
      audit_lines += tokens.tokens[i] + "\t" +
                     std::string(clmtk::to_string(d.label)) + "\t" +
                     clmtk::detail::format_double(d.entity_ppl) + "\t" +
                     clmtk::detail::format_double(d.non_entity_ppl) + "\t" +
                     std::string(clmtk::to_string(d.rule_fired)) + "\n";
    }
  }
  write_file(args.out_path, label_lines);
  if (!args.audit_out.empty()) write_file(args.audit_out, audit_lines);

  std::cerr << "classified " << tokens.size() << " tokens: " << entity_count
            << " ENTITY, " << tokens.size() - entity_count << " NON_ENTITY (";
  bool first = true;
  for (const auto& [rule, count] : by_rule) {
    if (!first) std::cerr << ", ";
    std::cerr << clmtk::to_string(rule) << " " << count;
    first = false;
  }
  std::cerr << ")\n";
}

// ---------------------------------------------------------------------------
// tune

struct TuneArgs {
  std::string entity_lm, non_entity_lm, dev_path, out_path;
  bool no_length_rule = false;
  std::string tie_policy = "nonentity";
  clmtk::ColumnSpec columns;
  CommonFlags common;
};

void cmd_tune(const TuneArgs& args) {
  require_input(args.entity_lm);
  require_input(args.non_entity_lm);
  require_input(args.dev_path);
  const clmtk::CharLm entity_lm = clmtk::read_arpa(args.entity_lm);
  const clmtk::CharLm non_entity_lm = clmtk::read_arpa(args.non_entity_lm);
  const clmtk::BioReadResult dev = clmtk::read_bio_corpus(
      args.dev_path, args.columns, args.common.policy());
  print_warnings(dev.warnings);

  clmtk::IdentifierConfig config;
  config.min_length_rule = !args.no_length_rule;
  config.tie_policy = args.tie_policy == "entity"
                          ? clmtk::TokenLabel::kEntity
                          : clmtk::TokenLabel::kNonEntity;
  const clmtk::TuneResult tuned = clmtk::tune_threshold(
      entity_lm, non_entity_lm, dev.corpus, config,
      args.common.thread_count());

  const std::string threshold_text =
      tuned.threshold ? clmtk::detail::format_double(*tuned.threshold)
                      : std::string("none");
  write_file(args.out_path, "threshold\tdev_f1\n" + threshold_text + "\t" +
                                clmtk::detail::fixed4(tuned.f1) + "\n");
  std::cerr << "tuned threshold " << threshold_text << " with dev F1 "
            << clmtk::detail::fixed4(tuned.f1) << " on "
            << dev.corpus.token_count() << " tokens\n";
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string gold_path, pred_path, unseen_against, out_path;
  std::string format = "tsv";
  bool global_precision = false;
  clmtk::ColumnSpec columns;
  CommonFlags common;
};

void cmd_eval(const EvalArgs& args) {
  require_input(args.gold_path);
  require_input(args.pred_path);
  const clmtk::BioReadResult gold = clmtk::read_bio_corpus(
      args.gold_path, args.columns, args.common.policy());
  print_warnings(gold.warnings);

  std::vector<clmtk::TokenLabel> predictions;
  {
    std::size_t line_no = 0;
    for (const std::string& raw : clmtk::detail::read_lines(args.pred_path)) {
      ++line_no;
      const auto fields = clmtk::detail::split_fields(raw);
      if (fields.empty()) continue;
      predictions.push_back(parse_prediction(
          fields.back(), args.pred_path + ":" + std::to_string(line_no)));
    }
  }

  std::optional<std::vector<bool>> mask;
  if (!args.unseen_against.empty()) {
    require_input(args.unseen_against);
    const clmtk::TokenList train_entities =
        clmtk::read_token_list(args.unseen_against, args.common.policy());
    mask = clmtk::unseen_mask(train_entities, gold.corpus);
  }

  const clmtk::TokenEvalReport report = clmtk::evaluate_tokens(
      gold.corpus, predictions, mask ? &*mask : nullptr,
      args.global_precision ? clmtk::MaskScope::kGlobalPrecision
                            : clmtk::MaskScope::kSymmetric);
  clmtk::write_report(report, args.out_path,
                      args.format == "jsonl" ? clmtk::ReportFormat::kJsonLines
                                             : clmtk::ReportFormat::kTsv);
  std::cerr << "P " << clmtk::detail::fixed4(report.precision) << ", R "
            << clmtk::detail::fixed4(report.recall) << ", F1 "
            << clmtk::detail::fixed4(report.f1) << ", accuracy "
            << clmtk::detail::fixed4(report.accuracy) << " over "
            << report.evaluated_tokens() << " tokens"
            << (report.restricted_to_unseen ? " (unseen-restricted)" : "")
            << "\n";
}

// ---------------------------------------------------------------------------
// annotate

struct AnnotateArgs {
  std::string in_path, out_path, spec_path;
  clmtk::ColumnSpec columns;
  CommonFlags common;
};

void cmd_annotate(const AnnotateArgs& args) {
  require_input(args.in_path);
  require_input(args.spec_path);
  const clmtk::FeatureSpec spec = clmtk::FeatureSpec::load(args.spec_path);
  clmtk::annotate_corpus(args.in_path, args.out_path, spec, args.columns,
                         args.common.policy(), args.common.thread_count());
  std::cerr << "annotated " << args.in_path << " with " << spec.size()
            << " feature column(s) -> " << args.out_path << "\n";
}

// ---------------------------------------------------------------------------
// histogram

struct HistogramArgs {
  std::string model_path, tokens_path, out_path;
  std::string format = "tsv";
  std::size_t bins = 30;
  CommonFlags common;
};

void cmd_histogram(const HistogramArgs& args) {
  require_input(args.model_path);
  require_input(args.tokens_path);
  const clmtk::CharLm model = clmtk::read_arpa(args.model_path);
  const clmtk::TokenList tokens =
      clmtk::read_token_list(args.tokens_path, args.common.policy());
  const clmtk::PerplexityHistogram hist = clmtk::histogram(
      model, tokens, args.bins, args.common.thread_count());
  clmtk::write_report(hist, args.out_path,
                      args.format == "jsonl" ? clmtk::ReportFormat::kJsonLines
                                             : clmtk::ReportFormat::kTsv);

  const std::vector<double> ppls = clmtk::batch_perplexities(
      model, tokens, args.common.thread_count());
  double mean = 0.0;
  for (double p : ppls) mean += p;
  mean /= static_cast<double>(ppls.size());
  double var = 0.0;
  for (double p : ppls) var += (p - mean) * (p - mean);
  var /= static_cast<double>(ppls.size());
  std::cerr << "scored " << ppls.size() << " tokens: mean perplexity "
            << clmtk::detail::fixed4(mean) << ", variance "
            << clmtk::detail::fixed4(var) << "\n";
}

void add_column_flags(CLI::App* cmd, clmtk::ColumnSpec* columns) {
  cmd->add_option("--token-col", columns->token_col,
                  "Token column index (negative counts from the end)");
  cmd->add_option("--tag-col", columns->tag_col,
                  "Tag column index (negative counts from the end)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "clmtk: character-level language models for named-entity "
      "identification"};
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand(
      "train", "Train a character LM from a token list and write ARPA");
  train->add_option("--in", train_args.in_path, "Token list, one per line")
      ->required();
  train->add_option("--out", train_args.out_path, "Output ARPA model path")
      ->required();
  train->add_option("--order", train_args.order, "N-gram order")
      ->check(CLI::Range(1, 64))
      ->capture_default_str();
  train->add_flag("--dedup", train_args.dedup,
                  "Keep only the first occurrence of each token");
  add_common(train, &train_args.common, /*with_threads=*/false);

  ExtractArgs extract_args;
  CLI::App* extract = app.add_subcommand(
      "extract", "Split a BIO corpus into entity/non-entity token lists");
  extract->add_option("--in", extract_args.in_path, "BIO-annotated corpus")
      ->required();
  extract->add_option("--entities-out", extract_args.entities_out,
                      "Entity token list output")
      ->required();
  extract->add_option("--nonentities-out", extract_args.non_entities_out,
                      "Non-entity token list output")
      ->required();
  extract->add_option("--out", extract_args.stats_out,
                      "Optional statistics TSV");
  add_column_flags(extract, &extract_args.columns);
  add_common(extract, &extract_args.common, /*with_threads=*/false);

  ClassifyArgs classify_args;
  CLI::App* classify = app.add_subcommand(
      "classify", "Label tokens as ENTITY or NON_ENTITY");
  classify->add_option("--entity-lm", classify_args.entity_lm,
                       "Entity CLM (ARPA)");
  classify->add_option("--nonentity-lm", classify_args.non_entity_lm,
                       "Non-entity CLM (ARPA)");
  classify->add_option("--tokens", classify_args.tokens_path,
                       "Token list to classify")
      ->required();
  classify->add_option("--out", classify_args.out_path,
                       "Output labels, one per line")
      ->required();
  classify->add_option("--audit-out", classify_args.audit_out,
                       "Optional per-token decision TSV");
  CLI::Option* fixed = classify->add_option(
      "--threshold", classify_args.threshold.fixed,
      "Fixed entity-perplexity cutoff");
  CLI::Option* tune_dev = classify->add_option(
      "--tune-dev", classify_args.threshold.tune_dev,
      "Tune the cutoff on this BIO dev corpus");
  fixed->excludes(tune_dev);
  classify->add_flag("--no-length-rule", classify_args.no_length_rule,
                     "Disable the length-1 heuristic");
  classify->add_option("--tie-policy", classify_args.tie_policy,
                       "Label for exact perplexity ties")
      ->check(CLI::IsMember({"entity", "nonentity"}))
      ->capture_default_str();
  classify->add_option("--baseline", classify_args.baseline,
                       "Use a baseline instead of CLMs")
      ->check(CLI::IsMember({"exact-match", "capitalization"}))
      ->excludes(fixed)
      ->excludes(tune_dev);
  classify->add_option("--train-entities", classify_args.train_entities,
                       "Entity list for the exact-match baseline");
  add_column_flags(classify, &classify_args.dev_columns);
  add_common(classify, &classify_args.common);
  classify->callback([&] {
    if (classify_args.baseline.empty()) {
      if (classify_args.entity_lm.empty() ||
          classify_args.non_entity_lm.empty()) {
        throw CLI::ValidationError(
            "classify", "--entity-lm and --nonentity-lm are required unless "
                        "--baseline is given");
      }
    } else if (classify_args.baseline == "exact-match" &&
               classify_args.train_entities.empty()) {
      throw CLI::ValidationError(
          "classify", "--baseline exact-match requires --train-entities");
    }
    classify_args.threshold.has_fixed = fixed->count() > 0;
    cmd_classify(classify_args);
  });

  TuneArgs tune_args;
  CLI::App* tune = app.add_subcommand(
      "tune", "Tune the entity-perplexity threshold on a dev corpus");
  tune->add_option("--entity-lm", tune_args.entity_lm, "Entity CLM (ARPA)")
      ->required();
  tune->add_option("--nonentity-lm", tune_args.non_entity_lm,
                   "Non-entity CLM (ARPA)")
      ->required();
  tune->add_option("--dev", tune_args.dev_path, "BIO dev corpus")->required();
  tune->add_option("--out", tune_args.out_path, "Output TSV (threshold, F1)")
      ->required();
  tune->add_flag("--no-length-rule", tune_args.no_length_rule,
                 "Disable the length-1 heuristic");
  tune->add_option("--tie-policy", tune_args.tie_policy,
                   "Label for exact perplexity ties")
      ->check(CLI::IsMember({"entity", "nonentity"}))
      ->capture_default_str();
  add_column_flags(tune, &tune_args.columns);
  add_common(tune, &tune_args.common);

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand(
      "eval", "Token-level P/R/F1 of predictions against gold BIO");
  eval->add_option("--gold", eval_args.gold_path, "Gold BIO corpus")
      ->required();
  eval->add_option("--pred", eval_args.pred_path,
                   "Predictions, one label per line")
      ->required();
  eval->add_option("--out", eval_args.out_path, "Report output path")
      ->required();
  eval->add_option("--unseen-against", eval_args.unseen_against,
                   "Restrict metrics to gold entities unseen in this token "
                   "list");
  eval->add_flag("--global-precision", eval_args.global_precision,
                 "With --unseen-against: precision over all predictions, "
                 "recall over unseen gold entities");
  eval->add_option("--format", eval_args.format, "Report format")
      ->check(CLI::IsMember({"tsv", "jsonl"}))
      ->capture_default_str();
  add_column_flags(eval, &eval_args.columns);
  add_common(eval, &eval_args.common, /*with_threads=*/false);

  AnnotateArgs annotate_args;
  CLI::App* annotate = app.add_subcommand(
      "annotate", "Append CLM feature columns to a CoNLL file");
  annotate->add_option("--in", annotate_args.in_path, "Input CoNLL file")
      ->required();
  annotate->add_option("--out", annotate_args.out_path, "Annotated output")
      ->required();
  annotate->add_option("--spec", annotate_args.spec_path,
                       "Feature spec file (name = model.arpa reference.arpa)")
      ->required();
  add_column_flags(annotate, &annotate_args.columns);
  add_common(annotate, &annotate_args.common);

  HistogramArgs histogram_args;
  CLI::App* histogram = app.add_subcommand(
      "histogram", "Perplexity histogram of a token list under a model");
  histogram->add_option("--model", histogram_args.model_path, "ARPA model")
      ->required();
  histogram->add_option("--tokens", histogram_args.tokens_path, "Token list")
      ->required();
  histogram->add_option("--out", histogram_args.out_path, "Histogram output")
      ->required();
  histogram->add_option("--bins", histogram_args.bins,
                        "Number of bin edges")
      ->check(CLI::Range(2, 10000))
      ->capture_default_str();
  histogram->add_option("--format", histogram_args.format, "Report format")
      ->check(CLI::IsMember({"tsv", "jsonl"}))
      ->capture_default_str();
  add_common(histogram, &histogram_args.common);

  train->callback([&] { cmd_train(train_args); });
  extract->callback([&] { cmd_extract(extract_args); });
  tune->callback([&] { cmd_tune(tune_args); });
  eval->callback([&] { cmd_eval(eval_args); });
  annotate->callback([&] { cmd_annotate(annotate_args); });
  histogram->callback([&] { cmd_histogram(histogram_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const clmtk::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const clmtk::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
