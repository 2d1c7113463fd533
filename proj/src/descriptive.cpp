#include "tourexp/descriptive.hpp"

#include <algorithm>
#include <cmath>

#include "tourexp/errors.hpp"

namespace tourexp {

namespace {

Dim check_axis(Dim axis) {
  if (axis != Dim::Municipality && axis != Dim::Origin && axis != Dim::Industry)
    throw Error("rankings support the municipality, origin and industry axes");
  return axis;
}

std::string axis_name(Dim axis) {
  switch (axis) {
    case Dim::Municipality: return "municipality";
    case Dim::Origin: return "origin";
    default: return "industry";
  }
}

std::map<std::string, Cents> totals_by_axis(const ExpenditureCube& cube, Dim axis,
                                            const std::string& dest) {
  std::map<std::string, Cents> out;
  for (const auto& r : cube.records()) {
    if (r.dest_country != dest) continue;
    const std::string& key = axis == Dim::Municipality ? r.municipality_id
                             : axis == Dim::Origin     ? r.origin
                                                       : r.industry;
    out[key] += r.usd;
  }
  if (out.empty()) throw Error("no expenditure for destination " + dest);
  return out;
}

// Percentile with linear interpolation between order statistics
// (values ascending).
double percentile(const std::vector<double>& ascending, double p) {
  const std::size_t n = ascending.size();
  const double h = (static_cast<double>(n) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, n - 1);
  return ascending[lo] + (h - std::floor(h)) * (ascending[hi] - ascending[lo]);
}

}  // namespace

RankedShares share_ranking(const ExpenditureCube& cube, Dim axis, const std::string& dest,
                           const std::string& atm_industry) {
  check_axis(axis);
  const auto totals = totals_by_axis(cube, axis, dest);

  RankedShares out;
  out.axis = axis_name(axis);
  for (const auto& [key, cents] : totals) out.total += cents;
  out.non_atm_total = out.total;

  if (axis == Dim::Industry && totals.count(atm_industry)) {
    out.atm_key = atm_industry;
    out.non_atm_total = out.total - totals.at(atm_industry);
    out.denominator_note =
        "ATM share of the country total; other industries share of the non-ATM total";
  } else {
    out.denominator_note = "share of the country total";
  }

  for (const auto& [key, cents] : totals) {
    RankEntry e;
    e.key = key;
    e.usd = cents;
    const Cents denom = (out.atm_key && key == *out.atm_key) ? out.total : out.non_atm_total;
    e.share = denom > 0 ? static_cast<double>(cents) / static_cast<double>(denom) : 0.0;
    out.entries.push_back(std::move(e));
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const RankEntry& a, const RankEntry& b) {
    if (a.share != b.share) return a.share > b.share;
    return a.key < b.key;
  });
  return out;
}

RankDistribution rank_distribution(const ExpenditureCube& cube, Dim axis,
                                   const std::string& dest) {
  check_axis(axis);
  const auto totals = totals_by_axis(cube, axis, dest);
  std::vector<double> values;
  values.reserve(totals.size());
  for (const auto& [key, cents] : totals) values.push_back(usd(cents));
  std::sort(values.begin(), values.end(), std::greater<>());

  RankDistribution out;
  const double max = values.front();
  if (max <= 0) throw Error("rank distribution: no positive expenditure for " + dest);
  for (double v : values) out.curve.push_back(v / max);
  out.curve.front() = 1.0;

  if (values.size() >= 4) {
    std::vector<double> ascending(values.rbegin(), values.rend());
    const double p25 = percentile(ascending, 0.25);
    const double p75 = percentile(ascending, 0.75);
    if (p25 > 0) out.p75_p25_ratio = p75 / p25;
  }
  return out;
}

std::map<Quarter, std::int64_t> quarterly_timeline(
    const ExpenditureCube& cube, const std::optional<std::string>& dest, Measure measure,
    const std::optional<QuarterWindow>& window) {
  std::map<Quarter, std::int64_t> out;
  QuarterWindow span{};
  if (window) {
    span = *window;
  } else {
    if (cube.quarters().empty()) return out;
    span = {cube.quarters().front(), cube.quarters().back()};
  }
  for (Quarter q = span.first; q <= span.last; q = q.next()) out[q] = 0;
  for (const auto& r : cube.records()) {
    if (dest && r.dest_country != *dest) continue;
    if (!span.contains(r.quarter)) continue;
    out[r.quarter] += measure == Measure::Usd ? r.usd : r.txn_count;
  }
  return out;
}

SeasonalBalance seasonal_balance(const ExpenditureCube& cube, const std::string& dest,
                                 double threshold) {
  bool has_q1 = false, has_q3 = false;
  for (const auto& q : cube.quarters()) {
    has_q1 = has_q1 || q.q == 1;
    has_q3 = has_q3 || q.q == 3;
  }
  if (!has_q1 || !has_q3)
    throw Error("seasonal balance needs at least one Q1 and one Q3 in the window");

  std::map<std::string, std::pair<Cents, Cents>> pooled;  // muni -> (q1, q3)
  for (const auto& r : cube.records()) {
    if (r.dest_country != dest) continue;
    if (r.quarter.q == 1) pooled[r.municipality_id].first += r.usd;
    else if (r.quarter.q == 3) pooled[r.municipality_id].second += r.usd;
    else pooled.try_emplace(r.municipality_id, 0, 0);
  }

  SeasonalBalance out;
  out.threshold = threshold;
  for (const auto& [muni, q13] : pooled) {
    const auto [q1, q3] = q13;
    if (q1 + q3 == 0) {
      ++out.omitted;
      continue;
    }
    SeasonalEntry e;
    e.municipality_id = muni;
    e.q1 = q1;
    e.q3 = q3;
    e.balance = static_cast<double>(q3 - q1) / static_cast<double>(q3 + q1);
    e.gray = std::abs(e.balance) < threshold;
    out.entries.push_back(std::move(e));
  }
  return out;
}

}  // namespace tourexp
