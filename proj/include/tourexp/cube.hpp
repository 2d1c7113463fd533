#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tourexp/money.hpp"
#include "tourexp/quarter.hpp"

namespace tourexp {

/// One aggregated cell of the foreign card feed:
/// (origin country, destination country, municipality, industry, quarter).
struct TransactionAggregate {
  std::string origin;         // ISO-3166 alpha-3 of the card-issuing country
  std::string dest_country;   // ISO-3166 alpha-3 of the destination country
  std::string municipality_id;
  std::string industry;
  Quarter quarter;
  Cents usd = 0;
  std::int64_t txn_count = 0;
};

/// The five cube dimensions, in canonical order.
enum class Dim { Origin = 0, DestCountry = 1, Municipality = 2, Industry = 3, QuarterDim = 4 };

enum class Measure { Usd, TxnCount };

/// Ingestion bookkeeping: what was kept, merged and rejected.
struct ParseReport {
  std::int64_t rows_read = 0;
  std::int64_t rows_kept = 0;
  std::int64_t merged_duplicates = 0;
  std::int64_t rejected_domestic = 0;       // origin == dest_country
  std::int64_t rejected_out_of_window = 0;
  std::vector<std::string> warnings;
};

/// Validated, indexed collection of TransactionAggregate records.
/// Immutable after construction; concurrent reads are safe.
class ExpenditureCube {
 public:
  ExpenditureCube() = default;

  /// Validates, merges duplicate keys by summation and builds the indexes.
  /// Throws ParseError on invariant violations that are not row-level
  /// rejections (bad codes, negative amounts, municipality mapped to two
  /// destination countries).
  static ExpenditureCube from_records(std::vector<TransactionAggregate> records,
                                      ParseReport* report = nullptr);

  const std::vector<TransactionAggregate>& records() const { return records_; }
  bool empty() const { return records_.empty(); }
  std::size_t size() const { return records_.size(); }

  Cents total_usd() const { return total_usd_; }
  std::int64_t total_txn() const { return total_txn_; }

  /// Sorted unique values per dimension.
  const std::vector<std::string>& origins() const { return origins_; }
  const std::vector<std::string>& dest_countries() const { return dest_countries_; }
  const std::vector<std::string>& municipalities() const { return municipalities_; }
  const std::vector<std::string>& industries() const { return industries_; }
  const std::vector<Quarter>& quarters() const { return quarters_; }

  /// Destination country a municipality belongs to.
  const std::string& country_of(const std::string& municipality_id) const;

  /// Municipalities of one destination country, sorted.
  std::vector<std::string> municipalities_of(const std::string& dest_country) const;

  /// Sub-cube with records of one destination country.
  ExpenditureCube restrict_dest(const std::string& dest_country) const;

  /// Sub-cube with records inside the window.
  ExpenditureCube restrict_window(const QuarterWindow& window) const;

 private:
  std::vector<TransactionAggregate> records_;  // sorted by full key
  Cents total_usd_ = 0;
  std::int64_t total_txn_ = 0;
  std::vector<std::string> origins_, dest_countries_, municipalities_, industries_;
  std::vector<Quarter> quarters_;
  std::map<std::string, std::string> muni_country_;
};

/// Values of the kept dimensions, in canonical dimension order. Quarters are
/// rendered as "YYYYQn" so one key type covers every grouping.
using GroupKey = std::vector<std::string>;

/// Grouped totals of a measure over any non-empty dimension subset.
/// Totals are exact: cents for Usd, counts for TxnCount.
std::map<GroupKey, std::int64_t> aggregate(const ExpenditureCube& cube,
                                           const std::set<Dim>& keep, Measure measure);

/// Reads the transactions CSV (`origin,dest_country,municipality_id,
/// industry,quarter,usd,txn_count`). Rows with origin == dest_country or
/// outside the window are rejected and counted; malformed rows raise
/// ParseError with the line number.
ExpenditureCube parse_transactions(const std::filesystem::path& path,
                                   const std::optional<QuarterWindow>& window = std::nullopt,
                                   ParseReport* report = nullptr);

/// Writes the same format back out (records in canonical key order).
void write_transactions(std::ostream& out, const ExpenditureCube& cube);

/// Per-destination-country PPP scaling. Every destination present in the
/// cube must have a factor. Amounts are rescaled and re-rounded to cents.
ExpenditureCube apply_ppp(const ExpenditureCube& cube,
                          const std::map<std::string, double>& factor_by_country);

/// Reads `iso3,factor` for apply_ppp.
std::map<std::string, double> parse_ppp_factors(const std::filesystem::path& path);

}  // namespace tourexp
