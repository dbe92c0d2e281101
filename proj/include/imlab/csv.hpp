#pragma once

// Minimal CSV plumbing shared by the file formats: '.' decimal separator,
// ',' field separator, LF line endings.

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace imlab::csv {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

/// Parses a complete field as a double; throws ParseError otherwise.
double parse_double(std::string_view field);
long long parse_integer(std::string_view field);

std::vector<std::string_view> split_fields(std::string_view line);

/// Opens `path` for writing or throws std::runtime_error naming the path.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace imlab::csv
