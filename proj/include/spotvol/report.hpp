#pragma once

#include <string>

#include "spotvol/harness.hpp"

namespace spotvol {

// Deterministic JSON serialization of a report: fixed key order, every float
// printed with 17 significant digits, no timing or worker-count fields, so
// identical experiments produce byte-identical files. The fully-resolved
// config text is embedded under "config".
std::string report_to_json(const ExperimentReport& report,
                           const std::string& config_text);

// Summary table (one row per estimator, 5 significant digits):
// estimator,rmse,are,re,tuning.
std::string report_summary_csv(const ExperimentReport& report);

// Formatting helpers shared by the writers.
std::string format_g17(double x);
std::string format_g5(double x);
std::string json_escape(const std::string& s);

}  // namespace spotvol
