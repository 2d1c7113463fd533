#include "tourexp/money.hpp"

#include <cctype>

namespace tourexp {

std::optional<Cents> parse_usd(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::size_t i = 0;
  std::int64_t whole = 0;
  bool any_digit = false;
  for (; i < text.size() && text[i] != '.'; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) return std::nullopt;
    if (whole > (INT64_MAX - 9) / 10) return std::nullopt;  // overflow guard
    whole = whole * 10 + (text[i] - '0');
    any_digit = true;
  }
  if (!any_digit) return std::nullopt;
  std::int64_t frac = 0;
  if (i < text.size()) {  // fractional part after '.'
    ++i;
    int digits = 0;
    for (; i < text.size(); ++i, ++digits) {
      if (!std::isdigit(static_cast<unsigned char>(text[i])) || digits >= 2)
        return std::nullopt;
      frac = frac * 10 + (text[i] - '0');
    }
    if (digits == 0) return std::nullopt;  // "12."
    if (digits == 1) frac *= 10;
  }
  if (whole > (INT64_MAX - frac) / 100) return std::nullopt;
  return whole * 100 + frac;
}

std::string format_usd(Cents cents) {
  bool neg = cents < 0;
  std::uint64_t a = neg ? static_cast<std::uint64_t>(-(cents + 1)) + 1
                        : static_cast<std::uint64_t>(cents);
  std::string frac = std::to_string(a % 100);
  if (frac.size() < 2) frac.insert(frac.begin(), '0');
  return (neg ? "-" : "") + std::to_string(a / 100) + "." + frac;
}

}  // namespace tourexp
