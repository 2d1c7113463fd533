#include "tourexp/quarter.hpp"

#include <cctype>

namespace tourexp {

std::string Quarter::str() const {
  return std::to_string(year) + "Q" + std::to_string(q);
}

std::optional<Quarter> parse_quarter(const std::string& text) {
  // YYYYQn, n in 1..4
  if (text.size() != 6 || (text[4] != 'Q' && text[4] != 'q')) return std::nullopt;
  for (int i = 0; i < 4; ++i)
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) return std::nullopt;
  if (text[5] < '1' || text[5] > '4') return std::nullopt;
  Quarter r;
  r.year = std::stoi(text.substr(0, 4));
  r.q = text[5] - '0';
  return r;
}

std::optional<QuarterWindow> parse_quarter_window(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) return std::nullopt;
  auto a = parse_quarter(text.substr(0, colon));
  auto b = parse_quarter(text.substr(colon + 1));
  if (!a || !b || *b < *a) return std::nullopt;
  return QuarterWindow{*a, *b};
}

}  // namespace tourexp
