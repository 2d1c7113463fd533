#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tourexp/cube.hpp"

namespace tourexp {

struct RankEntry {
  std::string key;
  Cents usd = 0;
  double share = 0;
};

/// Shares sorted descending. For the industry axis the ATM row is reported
/// against the country total while every other industry is reported against
/// the non-ATM total; the note strings record which denominator applies.
struct RankedShares {
  std::string axis;  // "municipality" | "origin" | "industry"
  std::string denominator_note;
  std::vector<RankEntry> entries;
  std::optional<std::string> atm_key;  // set for the industry axis when present
  Cents total = 0;
  Cents non_atm_total = 0;  // equals total outside the industry axis
};

RankedShares share_ranking(const ExpenditureCube& cube, Dim axis, const std::string& dest,
                           const std::string& atm_industry = "ATMs");

/// Expenditures ranked descending and normalized by the maximum, plus the
/// p75/p25 expenditure ratio (linear interpolation between order
/// statistics; needs at least 4 entities).
struct RankDistribution {
  std::vector<double> curve;  // first value is exactly 1
  std::optional<double> p75_p25_ratio;
  std::string percentile_method = "linear-interpolation";
};

RankDistribution rank_distribution(const ExpenditureCube& cube, Dim axis,
                                   const std::string& dest);

/// One total per quarter of the window (min..max observed when no window is
/// given), zeros included. No seasonal adjustment.
std::map<Quarter, std::int64_t> quarterly_timeline(
    const ExpenditureCube& cube, const std::optional<std::string>& dest, Measure measure,
    const std::optional<QuarterWindow>& window = std::nullopt);

struct SeasonalEntry {
  std::string municipality_id;
  Cents q1 = 0;  // pooled across years
  Cents q3 = 0;
  double balance = 0;  // (q3 - q1) / (q3 + q1), +1 all summer, -1 all winter
  bool gray = false;   // |balance| below the threshold
};

struct SeasonalBalance {
  std::vector<SeasonalEntry> entries;  // sorted by municipality
  double threshold = 0.1;
  long omitted = 0;  // municipalities with zero Q1+Q3 spend
};

SeasonalBalance seasonal_balance(const ExpenditureCube& cube, const std::string& dest,
                                 double threshold = 0.1);

}  // namespace tourexp
