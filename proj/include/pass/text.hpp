#pragma once

// Small helpers shared by the CSV readers and writers.

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pass::text {

// Shortest representation that round-trips every finite double.
std::string format_double(double value);
// Six significant digits, for console output.
std::string format_short(double value);

std::vector<std::string_view> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

}  // namespace pass::text
