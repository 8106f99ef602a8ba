#pragma once

#include <string>
#include <string_view>

namespace bcoint {

// Locale-independent decimal text with 17 significant digits ("inf", "-inf",
// "nan" for non-finite values).
std::string format_double(double value);

// Locale-independent parse of a full token; returns false on any trailing text.
bool parse_double(std::string_view text, double& out);

}  // namespace bcoint
