#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace optomech {

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

// Strict full-string parse: decimal point only, no locale, no whitespace, no
// trailing characters, finite result required. nullopt on any violation.
std::optional<double> parse_double(std::string_view s);

}  // namespace optomech
