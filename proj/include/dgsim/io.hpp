#ifndef DGSIM_IO_HPP
#define DGSIM_IO_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dgsim {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);
/// Empty string for a missing value.
std::string format_optional(const std::optional<double>& v);

double parse_double(std::string_view text);
std::optional<double> parse_optional(std::string_view text);

/// Splits one CSV line on commas. Fields never contain commas or quotes in the
/// files this project writes.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace dgsim

#endif  // DGSIM_IO_HPP
