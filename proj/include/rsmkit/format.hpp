#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace rsmkit {

// Shortest decimal that parses back to the identical double ('.' separator,
// locale independent).
std::string format_double(double value);

// Strict locale-independent parse: the whole text must be one number.
// Returns nullopt on any syntax problem; non-finite spellings parse through.
std::optional<double> parse_double(std::string_view text);

}  // namespace rsmkit
