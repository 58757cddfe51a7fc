#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace lscd::text {

/// Shortest representation that parses back to the same double.
std::string format_double(double value);

/// Like format_double but never uses exponent notation.
std::string format_fixed(double value);

double parse_double(std::string_view s);
long long parse_int(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);

std::string_view trim(std::string_view s);

/// Writes to a sibling temporary file and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace lscd::text
