#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace remse {

/// Shortest decimal form that parses back to the identical bits.
std::string format_double(double v);

/// Strict full-string parse; throws DataError with the offending text.
double parse_double(std::string_view text);
long parse_long(std::string_view text);

std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace remse
