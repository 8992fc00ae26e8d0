// Copyright 2026 The surfdice Authors.
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

// Evaluation reports.
//
// CSV columns, one row per (patient, scan, organ, pair):
//   patient,scan,organ,pair,surface_dsc,tau_mm,tau_quantized_mm,volumetric_dsc,
//   overlap_area_1_mm2,overlap_area_2_mm2,total_area_1_mm2,total_area_2_mm2,
//   volume_1_mm3,volume_2_mm3,flags
// DSC values are fractions in [0, 1] printed with 9 decimals; lengths, areas
// and volumes use 6 decimals. Undefined values are "-". Flags are
// ';'-separated. Side 1 is the reference, side 2 the candidate, and "pair" is
// "reference:candidate".
//
// Per-patient aggregates are rows with organ "*aggregate*": surface_dsc is the
// aggregated value and the area columns hold the sums over relevant organs.
//
// Markdown renders DSC x100 with one decimal. Non-relevant organs appear in
// brackets and stay out of the aggregate.

#ifndef SURFDICE_IO_REPORT_HPP
#define SURFDICE_IO_REPORT_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "surfdice/error.hpp"

namespace surfdice::io {

inline constexpr std::string_view kReportCsvHeader =
    "patient,scan,organ,pair,surface_dsc,tau_mm,tau_quantized_mm,volumetric_dsc,"
    "overlap_area_1_mm2,overlap_area_2_mm2,total_area_1_mm2,total_area_2_mm2,"
    "volume_1_mm3,volume_2_mm3,flags";

inline constexpr std::string_view kAggregateOrgan = "*aggregate*";

namespace flag {
inline constexpr std::string_view kUndefined = "undefined";  // both masks empty
inline constexpr std::string_view kEmptyReference = "empty-reference";
inline constexpr std::string_view kEmptyCandidate = "empty-candidate";
inline constexpr std::string_view kMissingReference = "missing-reference";
inline constexpr std::string_view kMissingCandidate = "missing-candidate";
inline constexpr std::string_view kNotRelevant = "not-relevant";
inline constexpr std::string_view kAggregate = "aggregate";
inline constexpr std::string_view kError = "error";  // written as error=<code>
}  // namespace flag

struct ReportRow {
  std::string patient;
  std::string scan;
  std::string organ;
  std::string pair;
  std::optional<double> surface_dsc;
  std::optional<double> tau_mm;
  std::optional<double> tau_quantized_mm;
  std::optional<double> volumetric_dsc;
  std::optional<double> overlap_area_1_mm2;
  std::optional<double> overlap_area_2_mm2;
  std::optional<double> total_area_1_mm2;
  std::optional<double> total_area_2_mm2;
  std::optional<double> volume_1_mm3;
  std::optional<double> volume_2_mm3;
  std::vector<std::string> flags;

  bool is_aggregate() const { return organ == kAggregateOrgan; }

  bool has_flag(std::string_view f) const {
    for (const auto& x : flags)
      if (x == f || (x.size() > f.size() && x.compare(0, f.size(), f) == 0 && x[f.size()] == '='))
        return true;
    return false;
  }

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

/// Organ rows of a patient come first in organ order, then its aggregate.
inline bool report_row_less(const ReportRow& a, const ReportRow& b) {
  return std::forward_as_tuple(a.patient, a.scan, a.pair, a.is_aggregate(), a.organ) <
         std::forward_as_tuple(b.patient, b.scan, b.pair, b.is_aggregate(), b.organ);
}

struct EvaluationReport {
  std::vector<ReportRow> rows;

  void sort() { std::stable_sort(rows.begin(), rows.end(), report_row_less); }
  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

namespace detail {

inline std::string format_fixed(std::optional<double> v, int decimals) {
  if (!v || !std::isfinite(*v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, *v);
  // "-0.000000" and "0.000000" must not differ between runs.
  std::string s(buf);
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(std::move(cur));
  return fields;
}

inline std::optional<double> parse_number(const std::string& s, std::size_t line_no,
                                          const char* column) {
  if (s == "-") return std::nullopt;
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty())
    throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ", column " + column +
                                      ": not a number: \"" + s + "\"");
  return v;
}

inline std::string join_flags(const std::vector<std::string>& flags) {
  std::string out;
  for (std::size_t i = 0; i < flags.size(); ++i) out += (i ? ";" : "") + flags[i];
  return out;
}

}  // namespace detail

inline std::string report_to_csv(const EvaluationReport& report) {
  using detail::csv_field;
  using detail::format_fixed;
  std::string out(kReportCsvHeader);
  out += '\n';
  for (const auto& r : report.rows) {
    out += csv_field(r.patient) + ',' + csv_field(r.scan) + ',' + csv_field(r.organ) + ',' +
           csv_field(r.pair) + ',';
    out += format_fixed(r.surface_dsc, 9) + ',' + format_fixed(r.tau_mm, 6) + ',' +
           format_fixed(r.tau_quantized_mm, 6) + ',' + format_fixed(r.volumetric_dsc, 9) + ',';
    out += format_fixed(r.overlap_area_1_mm2, 6) + ',' + format_fixed(r.overlap_area_2_mm2, 6) +
           ',' + format_fixed(r.total_area_1_mm2, 6) + ',' + format_fixed(r.total_area_2_mm2, 6) +
           ',';
    out += format_fixed(r.volume_1_mm3, 6) + ',' + format_fixed(r.volume_2_mm3, 6) + ',';
    out += csv_field(detail::join_flags(r.flags)) + '\n';
  }
  return out;
}

inline EvaluationReport parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Parse, "empty report");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kReportCsvHeader) throw Error(ErrorCode::Parse, "unexpected report header");
  EvaluationReport report;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line, line_no);
    if (f.size() != 15)
      throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected 15 fields, got " +
                                        std::to_string(f.size()));
    ReportRow r;
    r.patient = f[0];
    r.scan = f[1];
    r.organ = f[2];
    r.pair = f[3];
    static constexpr const char* kColumns[] = {
        "surface_dsc",        "tau_mm",           "tau_quantized_mm", "volumetric_dsc",
        "overlap_area_1_mm2", "overlap_area_2_mm2", "total_area_1_mm2", "total_area_2_mm2",
        "volume_1_mm3",       "volume_2_mm3"};
    std::optional<double>* targets[] = {&r.surface_dsc,        &r.tau_mm,
                                        &r.tau_quantized_mm,   &r.volumetric_dsc,
                                        &r.overlap_area_1_mm2, &r.overlap_area_2_mm2,
                                        &r.total_area_1_mm2,   &r.total_area_2_mm2,
                                        &r.volume_1_mm3,       &r.volume_2_mm3};
    for (std::size_t i = 0; i < 10; ++i)
      *targets[i] = detail::parse_number(f[4 + i], line_no, kColumns[i]);
    if (!f[14].empty()) {
      std::string flag;
      std::istringstream fs(f[14]);
      while (std::getline(fs, flag, ';'))
        if (!flag.empty()) r.flags.push_back(flag);
    }
    report.rows.push_back(std::move(r));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Summary across patients.

struct Stat {
  std::size_t n = 0;
  std::optional<double> mean;
  std::optional<double> stddev;  // population
};

inline Stat describe(const std::vector<double>& values) {
  Stat s;
  s.n = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  s.mean = mean;
  s.stddev = std::sqrt(ss / static_cast<double>(values.size()));
  return s;
}

struct OrganSummary {
  std::string pair;
  std::string organ;  // kAggregateOrgan for the aggregate row
  Stat surface_dsc;
  Stat volumetric_dsc;
  std::optional<double> mean_area_mm2;  // mean reference surface area
};

struct ReportSummary {
  std::vector<OrganSummary> organs;  // by pair, then organ, aggregate last
};

/// Per-organ mean and stddev over every defined value, bracketed ones
/// included; the aggregate row summarises the per-patient aggregates.
inline ReportSummary summarize(const EvaluationReport& report) {
  struct Acc {
    std::vector<double> sdsc, vdsc, area;
  };
  std::map<std::tuple<std::string, bool, std::string>, Acc> acc;
  for (const auto& r : report.rows) {
    auto& a = acc[{r.pair, r.is_aggregate(), r.organ}];
    if (r.surface_dsc) a.sdsc.push_back(*r.surface_dsc);
    if (r.volumetric_dsc) a.vdsc.push_back(*r.volumetric_dsc);
    if (r.total_area_1_mm2 && !r.is_aggregate()) a.area.push_back(*r.total_area_1_mm2);
  }
  ReportSummary out;
  for (const auto& [key, a] : acc) {
    OrganSummary s;
    s.pair = std::get<0>(key);
    s.organ = std::get<2>(key);
    s.surface_dsc = describe(a.sdsc);
    s.volumetric_dsc = describe(a.vdsc);
    s.mean_area_mm2 = describe(a.area).mean;
    out.organs.push_back(std::move(s));
  }
  return out;
}

inline constexpr std::string_view kSummaryCsvHeader =
    "pair,organ,n_surface,mean_surface_dsc,stddev_surface_dsc,n_volumetric,"
    "mean_volumetric_dsc,stddev_volumetric_dsc,mean_area_1_mm2";

inline std::string summary_to_csv(const ReportSummary& summary) {
  using detail::format_fixed;
  std::string out(kSummaryCsvHeader);
  out += '\n';
  for (const auto& s : summary.organs) {
    out += detail::csv_field(s.pair) + ',' + detail::csv_field(s.organ) + ',';
    out += std::to_string(s.surface_dsc.n) + ',' + format_fixed(s.surface_dsc.mean, 9) + ',' +
           format_fixed(s.surface_dsc.stddev, 9) + ',';
    out += std::to_string(s.volumetric_dsc.n) + ',' + format_fixed(s.volumetric_dsc.mean, 9) +
           ',' + format_fixed(s.volumetric_dsc.stddev, 9) + ',';
    out += format_fixed(s.mean_area_mm2, 6) + '\n';
  }
  return out;
}

namespace detail {

inline std::string percent(std::optional<double> v) {
  if (!v) return "-";
  return format_fixed(*v * 100.0, 1);
}

inline std::string mean_pm(const Stat& s) {
  if (!s.mean) return "-";
  return percent(s.mean) + " ± " + percent(s.stddev);
}

inline std::string column_label(const ReportRow& r) {
  return r.scan == r.patient ? r.patient : r.patient + "/" + r.scan;
}

inline void markdown_table(std::string& out, const EvaluationReport& report,
                           const ReportSummary& summary, const std::string& pair, bool surface) {
  std::vector<std::string> columns;
  std::map<std::string, std::map<std::string, const ReportRow*>> cells;  // organ -> column
  std::vector<std::string> organs;
  for (const auto& r : report.rows) {
    if (r.pair != pair) continue;
    const std::string col = column_label(r);
    if (std::find(columns.begin(), columns.end(), col) == columns.end()) columns.push_back(col);
    if (!r.is_aggregate() && !cells.count(r.organ)) organs.push_back(r.organ);
    cells[r.organ][col] = &r;
  }
  std::sort(organs.begin(), organs.end());

  out += std::string("### ") + (surface ? "Surface DSC" : "Volumetric DSC") + " (" + pair + ")\n\n";
  out += "| Organ |";
  for (const auto& c : columns) out += ' ' + c + " |";
  out += " mean ± stddev |\n|---|";
  for (std::size_t i = 0; i < columns.size(); ++i) out += "---:|";
  out += "---:|\n";

  auto stats_for = [&](const std::string& organ) -> const OrganSummary* {
    for (const auto& s : summary.organs)
      if (s.pair == pair && s.organ == organ) return &s;
    return nullptr;
  };
  auto emit = [&](const std::string& organ, const std::string& label) {
    out += "| " + label + " |";
    for (const auto& c : columns) {
      auto it = cells[organ].find(c);
      std::string cell = "-";
      if (it != cells[organ].end()) {
        const ReportRow& r = *it->second;
        cell = percent(surface ? r.surface_dsc : r.volumetric_dsc);
        if (r.has_flag(flag::kNotRelevant) && cell != "-") cell = "(" + cell + ")";
      }
      out += ' ' + cell + " |";
    }
    const OrganSummary* s = stats_for(organ);
    out += ' ' + (s ? mean_pm(surface ? s->surface_dsc : s->volumetric_dsc) : std::string("-")) +
           " |\n";
  };
  for (const auto& organ : organs) {
    const OrganSummary* s = stats_for(organ);
    std::string label = organ;
    if (s && s->mean_area_mm2) label += " (" + format_fixed(s->mean_area_mm2, 1) + " mm²)";
    emit(organ, label);
  }
  if (surface && cells.count(std::string(kAggregateOrgan)))
    emit(std::string(kAggregateOrgan), "aggr. surface DSC");
  out += '\n';
}

}  // namespace detail

/// Organ x patient tables of surface and volumetric DSC per observer pair.
inline std::string report_to_markdown(const EvaluationReport& report) {
  const ReportSummary summary = summarize(report);
  std::set<std::string> pairs;
  for (const auto& r : report.rows) pairs.insert(r.pair);
  std::string out;
  for (const auto& pair : pairs) {
    detail::markdown_table(out, report, summary, pair, true);
    detail::markdown_table(out, report, summary, pair, false);
  }
  if (pairs.empty()) out += "_empty report_\n";
  else
    out += "Cells are DSC x 100. Bracketed cells are organs not relevant for the patient and are "
           "excluded from the aggregate. \"-\" marks an undefined value.\n";
  return out;
}

inline std::string summary_to_markdown(const ReportSummary& summary) {
  std::string out = "| Pair | Organ | n | surface DSC | volumetric DSC | mean area (mm²) |\n";
  out += "|---|---|---:|---:|---:|---:|\n";
  for (const auto& s : summary.organs) {
    const bool agg = s.organ == kAggregateOrgan;
    out += "| " + s.pair + " | " + (agg ? std::string("aggr. surface DSC") : s.organ) + " | " +
           std::to_string(s.surface_dsc.n) + " | " + detail::mean_pm(s.surface_dsc) + " | " +
           (agg ? std::string("-") : detail::mean_pm(s.volumetric_dsc)) + " | " +
           detail::format_fixed(s.mean_area_mm2, 1) + " |\n";
  }
  return out;
}

enum class ReportFormat { Csv, Markdown };

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_report(const EvaluationReport& report, ReportFormat format,
                         const std::filesystem::path& path) {
  write_text_file(path, format == ReportFormat::Csv ? report_to_csv(report)
                                                    : report_to_markdown(report));
}

inline EvaluationReport read_report(const std::filesystem::path& path) {
  return parse_report_csv(read_text_file(path));
}

}  // namespace surfdice::io

#endif  // SURFDICE_IO_REPORT_HPP
