#include "decimal.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace handemb::detail {

std::optional<double> parse_scaled_decimal(std::string_view text, int exponent_shift) {
  std::size_t i = 0;
  std::string mantissa;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
    if (text[i] == '-') mantissa.push_back('-');
    ++i;
  }
  bool digits = false;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    mantissa.push_back(text[i++]);
    digits = true;
  }
  if (i < text.size() && text[i] == '.') {
    mantissa.push_back(text[i++]);
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      mantissa.push_back(text[i++]);
      digits = true;
    }
  }
  if (!digits) return std::nullopt;

  long exponent = 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    const char* begin = text.data() + i;
    const char* end = text.data() + text.size();
    if (begin != end && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, exponent);
    if (ec != std::errc{} || ptr == begin) return std::nullopt;
    i = static_cast<std::size_t>(ptr - text.data());
  }
  if (i != text.size()) return std::nullopt;

  const std::string literal = mantissa + "e" + std::to_string(exponent + exponent_shift);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(literal.data(), literal.data() + literal.size(), value);
  if (ec != std::errc{} || ptr != literal.data() + literal.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::string format_scaled_decimal(double value, int exponent_shift) {
  if (value == 0.0) return std::signbit(value) ? "-0" : "0";
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                 std::chars_format::scientific);
  std::string_view sci(buffer, static_cast<std::size_t>(end - buffer));

  std::string sign;
  if (sci.front() == '-') {
    sign = "-";
    sci.remove_prefix(1);
  }
  const std::size_t e_pos = sci.find('e');
  std::string digits;
  for (char c : sci.substr(0, e_pos)) {
    if (c != '.') digits.push_back(c);
  }
  const int exponent = std::atoi(std::string(sci.substr(e_pos + 1)).c_str()) + exponent_shift;

  // value = 0.d1 d2 ... dn * 10^(exponent + 1)
  const int point = exponent + 1;
  std::string out = sign;
  if (point <= 0) {
    out += "0.";
    out.append(static_cast<std::size_t>(-point), '0');
    out += digits;
  } else if (static_cast<std::size_t>(point) >= digits.size()) {
    out += digits;
    out.append(static_cast<std::size_t>(point) - digits.size(), '0');
  } else {
    out += digits.substr(0, static_cast<std::size_t>(point));
    out += '.';
    out += digits.substr(static_cast<std::size_t>(point));
  }
  return out;
}

std::string format_double(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

}  // namespace handemb::detail
