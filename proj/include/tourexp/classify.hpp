#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tourexp/cube.hpp"
#include "tourexp/stats.hpp"

namespace tourexp {

/// Per-industry ln(1+USD) over pooled (destination country, municipality,
/// quarter) cells across every destination in the cube. Cells that are zero
/// for all industries are dropped.
struct IndustrySeries {
  std::vector<std::string> industries;          // sorted
  std::vector<std::string> cell_keys;           // "dest|municipality|YYYYQn", sorted
  std::vector<std::vector<double>> log1p_usd;   // [industry][cell]
  long dropped_cells = 0;

  std::size_t industry_index(const std::string& key) const;
};

/// Requires the anchor industry to be present and the cube to span at least
/// two destination countries.
IndustrySeries build_industry_series(const ExpenditureCube& cube,
                                     const std::string& anchor = "Accommodations");

enum class IndustryClass { Tourism, Commuting, Other };

std::string class_name(IndustryClass c);
std::optional<IndustryClass> class_from_name(const std::string& name);

struct IndustryRow {
  std::string industry;
  IndustryClass cls = IndustryClass::Other;
  std::optional<CorrResult> pearson;   // vs the anchor industry
  std::optional<CorrResult> spearman;
  std::optional<double> combined_p;    // max of the two p-values (or Fisher)
};

struct IndustryClassification {
  std::vector<IndustryRow> rows;  // sorted by combined p ascending, key on ties
  std::string anchor;
  std::string atm;
  std::vector<std::string> warnings;

  const IndustryRow& row(const std::string& industry) const;
  std::map<std::string, IndustryClass> by_industry() const;
};

struct ClassifyOptions {
  /// Combine the two p-values with Fisher's method instead of the max.
  bool fisher_combination = false;
};

/// Sort-and-threshold rule: the lowest-p third of industries is tourism,
/// anything at or above the ATM anchor's p is commuting, the rest is other.
/// The anchor is always tourism and the ATM key always commuting.
IndustryClassification classify_industries(const IndustrySeries& series,
                                           const std::string& anchor,
                                           const std::string& atm,
                                           const ClassifyOptions& opts = {});

/// Whole country when municipalities is empty; otherwise the given cluster
/// of municipalities.
struct ShareScope {
  std::string dest_country;
  std::set<std::string> municipalities;
};

struct ClassShares {
  double tourism = 0, commuting = 0, other = 0;  // sum to 1
  Cents total = 0;
  std::vector<std::string> warnings;
};

ClassShares class_shares(const ExpenditureCube& cube,
                         const IndustryClassification& classification,
                         const ShareScope& scope);

/// `industry,class,pearson_r,pearson_p,spearman_r,spearman_p,combined_p`.
/// Numeric fields are empty for rows without computed statistics (such as
/// the shipped reference fixture), and write/read round-trips exactly.
void write_classification_csv(std::ostream& out, const IndustryClassification& c);
IndustryClassification read_classification_csv(const std::filesystem::path& path);

}  // namespace tourexp
