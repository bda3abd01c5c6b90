#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "htnagent/harness.hpp"

namespace htnagent {

struct ReportFormats {
  bool csv = true;
  bool json = true;
  bool svg = true;
};

/// summary.csv: one row per cell x condition.
std::string summary_csv(const BatchResult& result);
/// runtime_pooled.csv: mean phase times per condition over all cells.
std::string runtime_csv(const BatchResult& result);
/// Grouped success bars with Wilson whiskers, one group per cell.
std::string success_svg(const BatchResult& result);
/// Stacked mean phase times, one bar per condition.
std::string runtime_svg(const BatchResult& result);

/// Writes the selected artifacts into `dir` and returns their paths.
/// Throws WorkspaceError when the directory cannot be written.
std::vector<std::filesystem::path> emit_report(const BatchResult& result,
                                               const std::filesystem::path& dir,
                                               const ReportFormats& formats = {});

/// Rebuilds a BatchResult from a batch directory (records.jsonl plus
/// spec.json for the condition order, when present).
BatchResult load_batch_dir(const std::filesystem::path& dir);

}  // namespace htnagent
