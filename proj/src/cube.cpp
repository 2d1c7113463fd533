#include "tourexp/cube.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <tuple>

#include "tourexp/csv.hpp"
#include "tourexp/errors.hpp"

namespace tourexp {

namespace {

bool valid_iso3(const std::string& s) {
  if (s.size() != 3) return false;
  for (char c : s)
    if (c < 'A' || c > 'Z') return false;
  return true;
}

auto key_of(const TransactionAggregate& r) {
  return std::tie(r.origin, r.dest_country, r.municipality_id, r.industry);
}

bool key_less(const TransactionAggregate& a, const TransactionAggregate& b) {
  if (key_of(a) != key_of(b)) return key_of(a) < key_of(b);
  return a.quarter < b.quarter;
}

bool key_equal(const TransactionAggregate& a, const TransactionAggregate& b) {
  return key_of(a) == key_of(b) && a.quarter == b.quarter;
}

template <typename T>
std::vector<T> sorted_unique(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

ExpenditureCube ExpenditureCube::from_records(std::vector<TransactionAggregate> records,
                                              ParseReport* report) {
  ParseReport local;
  ParseReport& rep = report ? *report : local;

  for (const auto& r : records) {
    if (!valid_iso3(r.origin))
      throw ParseError("invalid origin country code: '" + r.origin + "'");
    if (!valid_iso3(r.dest_country))
      throw ParseError("invalid destination country code: '" + r.dest_country + "'");
    if (r.origin == r.dest_country)
      throw ParseError("domestic record (origin == dest_country): " + r.origin);
    if (r.usd < 0) throw ParseError("negative usd amount for origin " + r.origin);
    if (r.txn_count < 0) throw ParseError("negative txn_count for origin " + r.origin);
    if (r.municipality_id.empty()) throw ParseError("empty municipality_id");
    if (r.industry.empty()) throw ParseError("empty industry");
  }

  std::sort(records.begin(), records.end(), key_less);

  ExpenditureCube cube;
  cube.records_.reserve(records.size());
  for (auto& r : records) {
    if (!cube.records_.empty() && key_equal(cube.records_.back(), r)) {
      cube.records_.back().usd += r.usd;
      cube.records_.back().txn_count += r.txn_count;
      ++rep.merged_duplicates;
    } else {
      cube.records_.push_back(std::move(r));
    }
  }
  if (rep.merged_duplicates > 0)
    rep.warnings.push_back(std::to_string(rep.merged_duplicates) +
                           " duplicate keys merged by summation");

  std::vector<std::string> origins, dests, munis, industries;
  std::vector<Quarter> quarters;
  for (const auto& r : cube.records_) {
    cube.total_usd_ += r.usd;
    cube.total_txn_ += r.txn_count;
    origins.push_back(r.origin);
    dests.push_back(r.dest_country);
    munis.push_back(r.municipality_id);
    industries.push_back(r.industry);
    quarters.push_back(r.quarter);
    auto [it, inserted] = cube.muni_country_.emplace(r.municipality_id, r.dest_country);
    if (!inserted && it->second != r.dest_country)
      throw ParseError("municipality '" + r.municipality_id +
                       "' mapped to two destination countries: " + it->second + ", " +
                       r.dest_country);
  }
  cube.origins_ = sorted_unique(std::move(origins));
  cube.dest_countries_ = sorted_unique(std::move(dests));
  cube.municipalities_ = sorted_unique(std::move(munis));
  cube.industries_ = sorted_unique(std::move(industries));
  std::sort(quarters.begin(), quarters.end());
  quarters.erase(std::unique(quarters.begin(), quarters.end()), quarters.end());
  cube.quarters_ = std::move(quarters);
  return cube;
}

const std::string& ExpenditureCube::country_of(const std::string& municipality_id) const {
  auto it = muni_country_.find(municipality_id);
  if (it == muni_country_.end())
    throw Error("unknown municipality: '" + municipality_id + "'");
  return it->second;
}

std::vector<std::string> ExpenditureCube::municipalities_of(
    const std::string& dest_country) const {
  std::vector<std::string> out;
  for (const auto& [muni, country] : muni_country_)
    if (country == dest_country) out.push_back(muni);
  return out;  // map iteration order is already sorted
}

ExpenditureCube ExpenditureCube::restrict_dest(const std::string& dest_country) const {
  std::vector<TransactionAggregate> keep;
  for (const auto& r : records_)
    if (r.dest_country == dest_country) keep.push_back(r);
  return from_records(std::move(keep));
}

ExpenditureCube ExpenditureCube::restrict_window(const QuarterWindow& window) const {
  std::vector<TransactionAggregate> keep;
  for (const auto& r : records_)
    if (window.contains(r.quarter)) keep.push_back(r);
  return from_records(std::move(keep));
}

std::map<GroupKey, std::int64_t> aggregate(const ExpenditureCube& cube,
                                           const std::set<Dim>& keep, Measure measure) {
  if (keep.empty()) throw Error("aggregate: empty dimension subset");
  std::map<GroupKey, std::int64_t> out;
  for (const auto& r : cube.records()) {
    GroupKey key;
    key.reserve(keep.size());
    for (Dim d : keep) {  // std::set iterates in canonical Dim order
      switch (d) {
        case Dim::Origin: key.push_back(r.origin); break;
        case Dim::DestCountry: key.push_back(r.dest_country); break;
        case Dim::Municipality: key.push_back(r.municipality_id); break;
        case Dim::Industry: key.push_back(r.industry); break;
        case Dim::QuarterDim: key.push_back(r.quarter.str()); break;
      }
    }
    out[key] += measure == Measure::Usd ? r.usd : r.txn_count;
  }
  return out;
}

ExpenditureCube parse_transactions(const std::filesystem::path& path,
                                   const std::optional<QuarterWindow>& window,
                                   ParseReport* report) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open transactions file: " + path.string());

  ParseReport local;
  ParseReport& rep = report ? *report : local;

  csv::Reader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row)) throw ParseError("empty transactions file: " + path.string());
  const std::vector<std::string> expected = {"origin",  "dest_country", "municipality_id",
                                             "industry", "quarter",     "usd",
                                             "txn_count"};
  if (row != expected)
    throw ParseError("transactions header mismatch in " + path.string() +
                     " (expected origin,dest_country,municipality_id,industry,quarter,usd,txn_count)");

  std::vector<TransactionAggregate> records;
  while (reader.next(row)) {
    const std::string at = path.filename().string() + ":" + std::to_string(reader.line_number());
    if (row.size() != 7) throw ParseError(at + ": expected 7 fields, got " + std::to_string(row.size()));
    ++rep.rows_read;

    TransactionAggregate r;
    r.origin = row[0];
    r.dest_country = row[1];
    r.municipality_id = row[2];
    r.industry = row[3];
    auto q = parse_quarter(row[4]);
    if (!q) throw ParseError(at + ": unknown quarter format '" + row[4] + "'");
    r.quarter = *q;
    auto cents = parse_usd(row[5]);
    if (!cents) throw ParseError(at + ": malformed usd amount '" + row[5] + "'");
    r.usd = *cents;
    try {
      std::size_t pos = 0;
      r.txn_count = std::stoll(row[6], &pos);
      if (pos != row[6].size() || r.txn_count < 0) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ParseError(at + ": malformed txn_count '" + row[6] + "'");
    }
    if (!valid_iso3(r.origin)) throw ParseError(at + ": invalid origin code '" + r.origin + "'");
    if (!valid_iso3(r.dest_country))
      throw ParseError(at + ": invalid dest_country code '" + r.dest_country + "'");

    if (r.origin == r.dest_country) {
      ++rep.rejected_domestic;
      continue;
    }
    if (window && !window->contains(r.quarter)) {
      ++rep.rejected_out_of_window;
      continue;
    }
    ++rep.rows_kept;
    records.push_back(std::move(r));
  }
  if (rep.rejected_domestic > 0)
    rep.warnings.push_back(std::to_string(rep.rejected_domestic) +
                           " domestic rows rejected (origin == dest_country)");
  if (rep.rejected_out_of_window > 0)
    rep.warnings.push_back(std::to_string(rep.rejected_out_of_window) +
                           " rows outside the observation window rejected");
  return ExpenditureCube::from_records(std::move(records), &rep);
}

void write_transactions(std::ostream& out, const ExpenditureCube& cube) {
  out << "origin,dest_country,municipality_id,industry,quarter,usd,txn_count\n";
  for (const auto& r : cube.records()) {
    out << csv::join_row({r.origin, r.dest_country, r.municipality_id, r.industry,
                          r.quarter.str(), format_usd(r.usd), std::to_string(r.txn_count)})
        << "\n";
  }
}

ExpenditureCube apply_ppp(const ExpenditureCube& cube,
                          const std::map<std::string, double>& factor_by_country) {
  std::string missing;
  for (const auto& dest : cube.dest_countries())
    if (!factor_by_country.count(dest)) missing += (missing.empty() ? "" : ", ") + dest;
  if (!missing.empty())
    throw Error("ppp factors missing for destination countries: " + missing);

  std::vector<TransactionAggregate> records = cube.records();
  for (auto& r : records) {
    double f = factor_by_country.at(r.dest_country);
    r.usd = static_cast<Cents>(std::llround(static_cast<double>(r.usd) * f));
  }
  return ExpenditureCube::from_records(std::move(records));
}

std::map<std::string, double> parse_ppp_factors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open ppp factor file: " + path.string());
  csv::Reader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row) || row != std::vector<std::string>{"iso3", "factor"})
    throw ParseError("ppp factor header mismatch in " + path.string() + " (expected iso3,factor)");
  std::map<std::string, double> out;
  while (reader.next(row)) {
    const std::string at = path.filename().string() + ":" + std::to_string(reader.line_number());
    if (row.size() != 2) throw ParseError(at + ": expected 2 fields");
    double f = 0;
    try {
      f = std::stod(row[1]);
    } catch (const std::exception&) {
      throw ParseError(at + ": malformed factor '" + row[1] + "'");
    }
    if (!(f > 0)) throw ParseError(at + ": factor must be positive");
    if (!out.emplace(row[0], f).second) throw ParseError(at + ": duplicate country " + row[0]);
  }
  return out;
}

}  // namespace tourexp
