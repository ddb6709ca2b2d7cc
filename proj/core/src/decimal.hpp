#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace handemb::detail {

/// Parses a decimal number and scales it by 10^exponent_shift without an
/// intermediate rounding step: the shift is applied to the decimal exponent
/// before conversion. Returns nullopt for anything that is not a plain
/// decimal literal.
std::optional<double> parse_scaled_decimal(std::string_view text, int exponent_shift);

/// Shortest decimal text that parse_scaled_decimal(text, -exponent_shift)
/// maps back to `value` exactly. Fixed notation, no exponent.
std::string format_scaled_decimal(double value, int exponent_shift);

/// Shortest round-trip text for a double.
std::string format_double(double value);

}  // namespace handemb::detail
