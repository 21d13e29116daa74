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
// Report serialization. TSV is one header row plus data rows; JSON-lines
// is one object per report. Counts are integers and survive round-trips
// exactly; rates carry fixed 4-decimal precision in both formats.

#ifndef CLMTK_REPORT_IO_HPP_
#define CLMTK_REPORT_IO_HPP_

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include <json.hpp>

#include "clmtk/errors.hpp"
#include "clmtk/evaluation.hpp"

namespace clmtk {

enum class ReportFormat : std::uint8_t { kTsv, kJsonLines };

namespace detail {

inline std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

inline double round4(double v) { return std::round(v * 10000.0) / 10000.0; }

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace detail

inline std::string report_to_string(const TokenEvalReport& report,
                                    ReportFormat format) {
  if (format == ReportFormat::kTsv) {
    std::string out =
        "true_pos\tfalse_pos\tfalse_neg\ttrue_neg\tprecision\trecall\tf1\t"
        "accuracy\trestricted_to_unseen\n";
    out += std::to_string(report.true_pos) + "\t" +
           std::to_string(report.false_pos) + "\t" +
           std::to_string(report.false_neg) + "\t" +
           std::to_string(report.true_neg) + "\t" +
           detail::fixed4(report.precision) + "\t" +
           detail::fixed4(report.recall) + "\t" + detail::fixed4(report.f1) +
           "\t" + detail::fixed4(report.accuracy) + "\t" +
           (report.restricted_to_unseen ? "true" : "false") + "\n";
    return out;
  }
  nlohmann::ordered_json j;
  j["true_pos"] = report.true_pos;
  j["false_pos"] = report.false_pos;
  j["false_neg"] = report.false_neg;
  j["true_neg"] = report.true_neg;
  j["precision"] = detail::round4(report.precision);
  j["recall"] = detail::round4(report.recall);
  j["f1"] = detail::round4(report.f1);
  j["accuracy"] = detail::round4(report.accuracy);
  j["restricted_to_unseen"] = report.restricted_to_unseen;
  return j.dump() + "\n";
}

inline std::string report_to_string(const PerplexityHistogram& hist,
                                    ReportFormat format) {
  if (format == ReportFormat::kTsv) {
    std::string out = "bin_lo\tbin_hi\tpercent\n";
    for (std::size_t i = 0; i < hist.bin_percentages.size(); ++i) {
      const std::string lo =
          i == 0 ? "0" : detail::fixed4(hist.bin_edges[i - 1]);
      const std::string hi = i == hist.bin_edges.size()
                                 ? "inf"
                                 : detail::fixed4(hist.bin_edges[i]);
      out += lo + "\t" + hi + "\t" +
             detail::fixed4(hist.bin_percentages[i]) + "\n";
    }
    return out;
  }
  nlohmann::ordered_json j;
  j["model_tag"] = hist.model_tag;
  j["tokens_tag"] = hist.tokens_tag;
  j["bin_edges"] = hist.bin_edges;
  j["bin_percentages"] = hist.bin_percentages;
  return j.dump() + "\n";
}

template <typename Report>
void write_report(const Report& report, const std::filesystem::path& path,
                  ReportFormat format) {
  detail::write_file(path, report_to_string(report, format));
}

// Round-trip reader for the JSON-lines evaluation report.
inline TokenEvalReport read_eval_report_jsonl(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  TokenEvalReport report;
  try {
    report.true_pos = j.at("true_pos").get<std::uint64_t>();
    report.false_pos = j.at("false_pos").get<std::uint64_t>();
    report.false_neg = j.at("false_neg").get<std::uint64_t>();
    report.true_neg = j.at("true_neg").get<std::uint64_t>();
    report.precision = j.at("precision").get<double>();
    report.recall = j.at("recall").get<double>();
    report.f1 = j.at("f1").get<double>();
    report.accuracy = j.at("accuracy").get<double>();
    report.restricted_to_unseen = j.at("restricted_to_unseen").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return report;
}

}  // namespace clmtk

#endif  // CLMTK_REPORT_IO_HPP_
