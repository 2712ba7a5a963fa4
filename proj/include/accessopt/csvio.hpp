#pragma once

#include <optional>
#include <string>
#include <vector>

namespace accessopt::csvio {

// Minimal comma-separated handling for the documented schemas: fields never
// contain commas or quotes, so no quoting/escaping layer is needed.
std::vector<std::string> split(const std::string& line, char sep = ',');
std::string join(const std::vector<std::string>& fields, char sep = ',');

// Whole-file line reader; strips trailing '\r'. Throws IoError.
std::vector<std::string> read_lines(const std::string& path);

// Atomic-ish text write (temp file + rename). Throws IoError.
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

// Full-string numeric parses; nullopt on trailing garbage or empty input.
std::optional<double> parse_double(const std::string& text);
std::optional<long long> parse_int(const std::string& text);

// Shortest exact decimal form: round-trips the double bit-for-bit.
std::string format_double(double v);

}  // namespace accessopt::csvio
