// SPDX-License-Identifier: Apache-2.0
//
// Report serialization: JSON, the 18-metric results table (AP, AP75, AP50
// and the 15 iSAID classes) and the AP / AP_s / AP_m / AP_l ablation tables.
// Numbers are fixed-point (1 decimal for results, 2 for ablations), "-"
// marks an absent metric, lines end in '\n'.
#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "lskdet/eval.hpp"

namespace lskdet {

/// Column heading used for an iSAID class in the results table
/// (e.g. "storage_tank" -> "ST"). Names are matched case-insensitively with
/// '-' and ' ' treated as '_'. Empty when the class is not an iSAID class.
std::string class_abbreviation(std::string_view class_name);

/// "Data,AP,AP75,AP50,Ship,ST,...,Harbor".
const std::array<std::string_view, 19>& results_table_header();

struct ResultsRow {
  std::string label;
  EvalReport report;
};

/// Classes are placed by abbreviation; classes outside the iSAID set are not
/// part of this table (use the JSON report for them).
std::string results_table_csv(const std::vector<ResultsRow>& rows);

/// Inverse of results_table_csv. The per-class entries come back under the
/// canonical iSAID names in column order. Throws IoError with a line number
/// on a wrong header, a wrong field count or a malformed number.
std::vector<ResultsRow> parse_results_table_csv(std::string_view text);

struct AblationRow {
  std::string experiment;
  std::optional<double> ap;
  std::optional<double> ap_small;
  std::optional<double> ap_medium;
  std::optional<double> ap_large;

  bool operator==(const AblationRow&) const = default;
};

AblationRow ablation_row(std::string experiment, const EvalReport& report);

/// "Experiment,AP,AP_s,AP_m,AP_l". Experiment names must not contain ',' or '"'.
std::string ablation_table_csv(const std::vector<AblationRow>& rows);
std::vector<AblationRow> parse_ablation_table_csv(std::string_view text);

/// Pretty-printed JSON object with AP, AP50, AP75, AP_s, AP_m, AP_l and a
/// per_class object in class order; absent metrics are null.
std::string report_json(const EvalReport& report);

}  // namespace lskdet
