// SPDX-License-Identifier: Apache-2.0
#include "lskdet/report.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

#include "json.hpp"

#include "lskdet/class_loss.hpp"
#include "lskdet/error.hpp"

namespace lskdet {
namespace {

constexpr std::array<std::string_view, 15> kAbbrev = {"Ship", "ST", "TC",     "BD", "BC", "GTF", "Bridge", "LV",
                                                      "SV",   "HC", "SP",     "RA", "SBF", "Plane", "Harbor"};

std::string canonical_name(std::string_view name) {
  std::string out;
  for (char ch : name) {
    if (ch == '-' || ch == ' ') {
      out += '_';
    } else {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
  }
  return out;
}

std::string fixed(std::optional<double> v, int decimals) {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, *v);
  return buf;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines = split(text, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::optional<double> parse_metric(std::string_view field, std::size_t line_no, std::string_view column) {
  if (field == "-") return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw IoError("line " + std::to_string(line_no) + ": column " + std::string(column) + ": malformed number '" +
                  std::string(field) + "'");
  }
  return v;
}

void expect_header(std::string_view line, std::span<const std::string_view> header) {
  const auto fields = split(line, ',');
  bool ok = fields.size() == header.size();
  for (std::size_t i = 0; ok && i < fields.size(); ++i) ok = fields[i] == header[i];
  if (!ok) {
    std::string want;
    for (std::string_view h : header) want += (want.empty() ? "" : ",") + std::string(h);
    throw IoError("line 1: expected header '" + want + "'");
  }
}

void check_label(std::string_view label, const char* what) {
  if (label.find_first_of(",\"\n") != std::string_view::npos) {
    throw IoError(std::string(what) + " '" + std::string(label) + "' contains a CSV delimiter");
  }
}

nlohmann::ordered_json metric_json(std::optional<double> v) {
  if (!v) return nullptr;
  return *v;
}

constexpr std::array<std::string_view, 5> kAblationHeader = {"Experiment", "AP", "AP_s", "AP_m", "AP_l"};

}  // namespace

std::string class_abbreviation(std::string_view class_name) {
  const std::string canon = canonical_name(class_name);
  const auto& names = isaid_class_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == canon) return std::string(kAbbrev[i]);
  }
  return {};
}

const std::array<std::string_view, 19>& results_table_header() {
  static const std::array<std::string_view, 19> header = [] {
    std::array<std::string_view, 19> h{"Data", "AP", "AP75", "AP50"};
    for (std::size_t i = 0; i < kAbbrev.size(); ++i) h[4 + i] = kAbbrev[i];
    return h;
  }();
  return header;
}

std::string results_table_csv(const std::vector<ResultsRow>& rows) {
  std::string out;
  const auto& header = results_table_header();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (const ResultsRow& row : rows) {
    check_label(row.label, "row label");
    std::array<std::optional<double>, 15> per{};
    for (const ClassAp& c : row.report.per_class) {
      const std::string abbr = class_abbreviation(c.name);
      for (std::size_t i = 0; i < kAbbrev.size(); ++i) {
        if (kAbbrev[i] == abbr) per[i] = c.ap;
      }
    }
    out += row.label;
    for (auto v : {row.report.ap, row.report.ap75, row.report.ap50}) out += ',' + fixed(v, 1);
    for (auto v : per) out += ',' + fixed(v, 1);
    out += '\n';
  }
  return out;
}

std::vector<ResultsRow> parse_results_table_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw IoError("line 1: empty results table");
  const auto& header = results_table_header();
  expect_header(lines[0], header);
  const auto& names = isaid_class_names();
  std::vector<ResultsRow> rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto fields = split(lines[li], ',');
    if (fields.size() != header.size()) {
      throw IoError("line " + std::to_string(li + 1) + ": expected " + std::to_string(header.size()) +
                    " fields, got " + std::to_string(fields.size()));
    }
    ResultsRow row;
    row.label = std::string(fields[0]);
    row.report.ap = parse_metric(fields[1], li + 1, header[1]);
    row.report.ap75 = parse_metric(fields[2], li + 1, header[2]);
    row.report.ap50 = parse_metric(fields[3], li + 1, header[3]);
    for (std::size_t i = 0; i < kAbbrev.size(); ++i) {
      row.report.per_class.push_back({names[i], parse_metric(fields[4 + i], li + 1, header[4 + i])});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

AblationRow ablation_row(std::string experiment, const EvalReport& report) {
  return {std::move(experiment), report.ap, report.ap_small, report.ap_medium, report.ap_large};
}

std::string ablation_table_csv(const std::vector<AblationRow>& rows) {
  std::string out = "Experiment,AP,AP_s,AP_m,AP_l\n";
  for (const AblationRow& r : rows) {
    check_label(r.experiment, "experiment name");
    out += r.experiment;
    for (auto v : {r.ap, r.ap_small, r.ap_medium, r.ap_large}) out += ',' + fixed(v, 2);
    out += '\n';
  }
  return out;
}

std::vector<AblationRow> parse_ablation_table_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw IoError("line 1: empty ablation table");
  expect_header(lines[0], kAblationHeader);
  std::vector<AblationRow> rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto f = split(lines[li], ',');
    if (f.size() != kAblationHeader.size()) {
      throw IoError("line " + std::to_string(li + 1) + ": expected 5 fields, got " + std::to_string(f.size()));
    }
    rows.push_back({std::string(f[0]), parse_metric(f[1], li + 1, "AP"), parse_metric(f[2], li + 1, "AP_s"),
                    parse_metric(f[3], li + 1, "AP_m"), parse_metric(f[4], li + 1, "AP_l")});
  }
  return rows;
}

std::string report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["AP"] = metric_json(report.ap);
  j["AP50"] = metric_json(report.ap50);
  j["AP75"] = metric_json(report.ap75);
  j["AP_s"] = metric_json(report.ap_small);
  j["AP_m"] = metric_json(report.ap_medium);
  j["AP_l"] = metric_json(report.ap_large);
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (const ClassAp& c : report.per_class) per[c.name] = metric_json(c.ap);
  j["per_class"] = per;
  return j.dump(2) + "\n";
}

}  // namespace lskdet
