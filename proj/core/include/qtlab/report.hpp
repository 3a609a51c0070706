#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace qtlab {

enum class Format { Json, Csv, Dot };

/// "json", "csv" or "dot"; anything else throws UnsupportedFormat.
Format parse_format(std::string_view s);
const char* extension(Format f);

/// One named report. JSON is always present; CSV and DOT only where the
/// report has a natural tabular or graph form.
struct Report {
  std::string name;
  nlohmann::json json;
  std::optional<std::string> csv;
  std::optional<std::string> dot;
};

/// Tags stamped on every JSON report.
nlohmann::json model_tags();

/// Sorted keys, two-space indent, trailing newline.
std::string canonical_json(const nlohmann::json& j);

/// Text of `r` in format `f`, with model tags added to JSON. Throws
/// UnsupportedFormat when the report has no such form.
std::string render(const Report& r, Format f);

/// Writes `<dir>/<name>.json` and, when `f` is not JSON and the report has
/// that form, `<dir>/<name>.<ext>`. Returns the file names written.
std::vector<std::string> emit(const Report& r, Format f, const std::filesystem::path& dir);

void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace qtlab
