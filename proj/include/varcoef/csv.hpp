#pragma once

// Minimal CSV helpers shared by the file formats and the CLI.

#include <string>
#include <string_view>
#include <vector>

namespace varcoef::csv {

/// Shortest decimal text that reads back to the same double ("nan", "inf"
/// and "-inf" for non-finite values).
std::string format_number(double value);

/// Strict numeric field parse; throws ValidationError on trailing garbage.
double parse_number(std::string_view text);

std::string_view trim(std::string_view text);

std::vector<std::string> split(std::string_view line, char sep = ',');

std::string join(const std::vector<std::string>& fields, char sep = ',');

/// A numeric table: one header row then rows of numbers. Lines starting
/// with '#' and blank lines are skipped.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> comments;
};

/// `has_header = false` reads purely numeric rows.
Table parse_table(std::string_view text, bool has_header = true);

std::string read_file(const std::string& path);

/// Writes `contents` to a sibling temporary file and renames it over `path`,
/// so `path` never holds a partial result.
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace varcoef::csv
