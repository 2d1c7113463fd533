#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace tourexp {

/// Calendar quarter. Files carry the "YYYYQn" form; internally a quarter is
/// an ordinal so windows and arithmetic stay trivial.
struct Quarter {
  int year = 0;
  int q = 1;  // 1..4

  int ordinal() const { return year * 4 + (q - 1); }
  static Quarter from_ordinal(int ord) {
    Quarter r;
    r.year = ord / 4;
    r.q = ord % 4 + 1;
    if (r.q < 1) {  // negative ordinals round toward zero
      r.q += 4;
      r.year -= 1;
    }
    return r;
  }

  Quarter next() const { return from_ordinal(ordinal() + 1); }

  std::string str() const;  // "2013Q2"

  friend auto operator<=>(const Quarter& a, const Quarter& b) {
    return a.ordinal() <=> b.ordinal();
  }
  friend bool operator==(const Quarter& a, const Quarter& b) {
    return a.ordinal() == b.ordinal();
  }
};

/// Parses "YYYYQn". Returns nullopt on malformed input.
std::optional<Quarter> parse_quarter(const std::string& text);

/// Inclusive observation window.
struct QuarterWindow {
  Quarter first;
  Quarter last;
  bool contains(const Quarter& x) const { return first <= x && x <= last; }
};

/// Parses "2011Q4:2014Q3".
std::optional<QuarterWindow> parse_quarter_window(const std::string& text);

}  // namespace tourexp
