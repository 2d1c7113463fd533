#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace tourexp {

/// USD amounts are fixed-point with two fractional digits while data is
/// ingested and aggregated, so additivity checks are exact. Numerical
/// modules convert to double at their boundary.
using Cents = std::int64_t;

/// Parses a non-negative decimal like "100", "100.5", "100.50".
/// More than two fractional digits, signs, or exponents are rejected.
std::optional<Cents> parse_usd(const std::string& text);

/// "1234.56"
std::string format_usd(Cents cents);

inline double usd(Cents cents) { return static_cast<double>(cents) / 100.0; }

}  // namespace tourexp
