#pragma once

#include "darkscan/detection.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace darkscan {

enum class ReportFormat { Json, Markdown };

/// Throws InvalidArgument for anything but "json" / "md" / "markdown".
[[nodiscard]] ReportFormat parse_format(std::string_view s);

/// Formats a number as plain decimal with at most six fractional digits
/// ("0.75", "1.0", "0.002").
[[nodiscard]] std::string format_decimal(double v);

/// Deterministic pretty printer: two-space indent, keys in insertion order,
/// floating-point values through format_decimal.
[[nodiscard]] std::string dump_json(const nlohmann::ordered_json& doc);

[[nodiscard]] nlohmann::ordered_json report_to_json(const SiteReport& report);

/// Validates a document against the SiteReport schema (field names and
/// types, all eight categories, values in [0, 1]) and converts it.
/// Throws SchemaViolation with the offending path.
[[nodiscard]] SiteReport report_from_json(const nlohmann::json& doc);
[[nodiscard]] SiteReport load_report(const std::filesystem::path& path);

[[nodiscard]] std::string render_report(const SiteReport& report, ReportFormat format);
/// A JSON array (or Markdown sections) for several sites.
[[nodiscard]] std::string render_reports(const std::vector<SiteReport>& reports, ReportFormat format);

[[nodiscard]] nlohmann::ordered_json comparison_to_json(const ComparisonReport& cmp);
[[nodiscard]] std::string render_comparison(const ComparisonReport& cmp, ReportFormat format);

/// JSON Schema (draft 2020-12) describing report_to_json output.
[[nodiscard]] const std::string& site_report_schema();

}  // namespace darkscan
