#pragma once

#include <string>
#include <vector>

namespace deriloss::io {

/// Shortest round-trip decimal form, independent of the C locale.
std::string num(double v);

/// One comma-separated line with a trailing newline.
std::string csv_row(const std::vector<std::string>& cells);

/// Writes `content` to a sibling temp file and renames it over `path`.
/// Throws Error(Io) on failure.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace deriloss::io
