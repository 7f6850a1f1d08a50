#pragma once

#include <ostream>
#include <string>

#include "edmik/bench.hpp"

namespace edmik {

enum class ReportFormat { Table, Csv, Json };

ReportFormat report_format_from_string(const std::string& s);

/// Robot / Success (%) / Mean Runtime (ms); limited runs carry a '*'.
std::string format_table(const TrialBatchResult& result);
std::string format_csv(const TrialBatchResult& result);
std::string format_json(const TrialBatchResult& result);

/// Inverse of format_json. Unrecoverable errors are written as null and read
/// back as +inf.
TrialBatchResult parse_json_report(const std::string& text);

/// Writes to `path`, or to `out` when path is empty or "-". Throws IoError.
void emit_report(const TrialBatchResult& result, ReportFormat format, const std::string& path,
                 std::ostream& out);

}  // namespace edmik
