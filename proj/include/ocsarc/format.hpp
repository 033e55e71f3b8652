#pragma once

#include <string>
#include <string_view>

namespace ocsarc {

/// Shortest decimal form that parses back to exactly `v` ("inf", "-inf",
/// "nan" for non-finite values).
std::string format_double(double v);

/// Parses a full token as a double; accepts "inf"/"-inf". Returns false on
/// trailing garbage or an empty token.
bool parse_double(std::string_view token, double& out);

}  // namespace ocsarc
