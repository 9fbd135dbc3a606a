#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ocpls::csv {

// Locale-independent. significant = 0 selects the shortest round-trip form.
// Non-finite values print as nan / inf / -inf.
std::string format_number(double value, int significant = 0);

// Accepts what format_number emits; empty field -> NaN. Throws std::invalid_argument.
double parse_number(std::string_view field);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

// Reads all lines; throws std::runtime_error naming the path on failure.
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Truncates and writes; errors name the path.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace ocpls::csv
