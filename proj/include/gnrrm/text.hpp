#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gnrrm {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split_whitespace(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::string to_lower(std::string_view s);

// Full string must be consumed.
std::optional<double> parse_real(std::string_view s);
std::optional<long long> parse_integer(std::string_view s);

// Shortest-safe round-trip form: 17 significant digits.
std::string format_real(double v);

std::string read_file(const std::filesystem::path& path);
// Writes atomically enough for batch use: whole buffer, then close.
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace gnrrm
