#include "tourexp/classify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "tourexp/csv.hpp"
#include "tourexp/errors.hpp"

namespace tourexp {

namespace {

// %.12g: enough digits that rewriting a parsed value reproduces the bytes.
std::string fmt_stat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

std::size_t IndustrySeries::industry_index(const std::string& key) const {
  auto it = std::lower_bound(industries.begin(), industries.end(), key);
  if (it == industries.end() || *it != key)
    throw Error("industry series: unknown industry '" + key + "'");
  return static_cast<std::size_t>(it - industries.begin());
}

IndustrySeries build_industry_series(const ExpenditureCube& cube, const std::string& anchor) {
  if (cube.dest_countries().size() < 2)
    throw Error("industry series needs at least 2 destination countries, got " +
                std::to_string(cube.dest_countries().size()));
  const auto& industries = cube.industries();
  if (!std::binary_search(industries.begin(), industries.end(), anchor))
    throw Error("anchor industry '" + anchor + "' absent from the cube");

  IndustrySeries out;
  out.industries = industries;

  // Cell = (dest_country, municipality, quarter); totals pooled over origins.
  const auto totals =
      aggregate(cube, {Dim::DestCountry, Dim::Municipality, Dim::Industry, Dim::QuarterDim},
                Measure::Usd);
  std::map<std::string, std::map<std::string, Cents>> cells;  // cell key -> industry -> cents
  for (const auto& [key, cents] : totals) {
    const std::string cell = key[0] + "|" + key[1] + "|" + key[3];
    cells[cell][key[2]] += cents;
  }

  for (const auto& [cell, by_industry] : cells) {
    Cents cell_total = 0;
    for (const auto& [industry, cents] : by_industry) cell_total += cents;
    if (cell_total == 0) {
      ++out.dropped_cells;
      continue;
    }
    out.cell_keys.push_back(cell);
  }

  out.log1p_usd.assign(out.industries.size(),
                       std::vector<double>(out.cell_keys.size(), 0.0));
  for (std::size_t c = 0; c < out.cell_keys.size(); ++c) {
    const auto& by_industry = cells.at(out.cell_keys[c]);
    for (const auto& [industry, cents] : by_industry)
      out.log1p_usd[out.industry_index(industry)][c] = std::log1p(usd(cents));
  }
  return out;
}

std::string class_name(IndustryClass c) {
  switch (c) {
    case IndustryClass::Tourism: return "tourism";
    case IndustryClass::Commuting: return "commuting";
    case IndustryClass::Other: return "other";
  }
  return "other";
}

std::optional<IndustryClass> class_from_name(const std::string& name) {
  if (name == "tourism") return IndustryClass::Tourism;
  if (name == "commuting") return IndustryClass::Commuting;
  if (name == "other") return IndustryClass::Other;
  return std::nullopt;
}

const IndustryRow& IndustryClassification::row(const std::string& industry) const {
  for (const auto& r : rows)
    if (r.industry == industry) return r;
  throw Error("no classification row for industry '" + industry + "'");
}

std::map<std::string, IndustryClass> IndustryClassification::by_industry() const {
  std::map<std::string, IndustryClass> out;
  for (const auto& r : rows) out[r.industry] = r.cls;
  return out;
}

IndustryClassification classify_industries(const IndustrySeries& series,
                                           const std::string& anchor, const std::string& atm,
                                           const ClassifyOptions& opts) {
  series.industry_index(anchor);  // throws when absent
  series.industry_index(atm);
  if (anchor == atm) throw Error("anchor and ATM industries must differ");
  if (series.cell_keys.size() < 3)
    throw NumericError("classification needs at least 3 cells, got " +
                       std::to_string(series.cell_keys.size()));

  IndustryClassification out;
  out.anchor = anchor;
  out.atm = atm;

  const auto& anchor_series = series.log1p_usd[series.industry_index(anchor)];
  std::vector<IndustryRow> scored, unscored;
  for (std::size_t i = 0; i < series.industries.size(); ++i) {
    IndustryRow row;
    row.industry = series.industries[i];
    if (row.industry == anchor) {
      // Self-correlation: exact by definition, no estimation involved.
      row.pearson = CorrResult{1.0, 0.0, static_cast<long>(series.cell_keys.size())};
      row.spearman = row.pearson;
      row.combined_p = 0.0;
      scored.push_back(std::move(row));
      continue;
    }
    try {
      row.pearson = pearson_corr(series.log1p_usd[i], anchor_series);
      row.spearman = spearman_corr(series.log1p_usd[i], anchor_series);
    } catch (const NumericError&) {
      out.warnings.push_back("industry '" + row.industry +
                             "' has a degenerate series; classified other");
      row.cls = IndustryClass::Other;
      unscored.push_back(std::move(row));
      continue;
    }
    if (opts.fisher_combination) {
      const double x = -2.0 * (std::log(std::max(row.pearson->p_value, 1e-300)) +
                               std::log(std::max(row.spearman->p_value, 1e-300)));
      row.combined_p = std::exp(-x / 2.0) * (1.0 + x / 2.0);  // chi^2, 4 df
    } else {
      row.combined_p = std::max(row.pearson->p_value, row.spearman->p_value);
    }
    scored.push_back(std::move(row));
  }

  std::sort(scored.begin(), scored.end(), [](const IndustryRow& a, const IndustryRow& b) {
    if (*a.combined_p != *b.combined_p) return *a.combined_p < *b.combined_p;
    return a.industry < b.industry;
  });

  const std::size_t n = scored.size();
  const std::size_t tourism_count = (n + 2) / 3;  // ceil(n/3)
  double atm_p = 0;
  std::size_t atm_rank = n;
  for (std::size_t i = 0; i < n; ++i)
    if (scored[i].industry == atm) {
      atm_p = *scored[i].combined_p;
      atm_rank = i;
    }
  if (atm_rank < tourism_count)
    throw Error("ATM industry ranks inside the lowest-p third; the tourism and "
                "commuting rules are inconsistent on this input");

  for (std::size_t i = 0; i < n; ++i) {
    IndustryRow& row = scored[i];
    if (i < tourism_count) row.cls = IndustryClass::Tourism;
    else if (*row.combined_p >= atm_p) row.cls = IndustryClass::Commuting;
    else row.cls = IndustryClass::Other;
  }
  // Anchor fixed points override the thresholds.
  for (auto& row : scored) {
    if (row.industry == anchor) row.cls = IndustryClass::Tourism;
    if (row.industry == atm) row.cls = IndustryClass::Commuting;
  }

  out.rows = std::move(scored);
  out.rows.insert(out.rows.end(), unscored.begin(), unscored.end());
  return out;
}

ClassShares class_shares(const ExpenditureCube& cube,
                         const IndustryClassification& classification,
                         const ShareScope& scope) {
  const auto classes = classification.by_industry();
  ClassShares out;
  Cents tourism = 0, commuting = 0, other = 0;
  long unclassified = 0;
  std::set<std::string> unclassified_names;
  for (const auto& r : cube.records()) {
    if (r.dest_country != scope.dest_country) continue;
    if (!scope.municipalities.empty() && !scope.municipalities.count(r.municipality_id))
      continue;
    IndustryClass cls = IndustryClass::Other;
    auto it = classes.find(r.industry);
    if (it == classes.end()) {
      ++unclassified;
      unclassified_names.insert(r.industry);
    } else {
      cls = it->second;
    }
    switch (cls) {
      case IndustryClass::Tourism: tourism += r.usd; break;
      case IndustryClass::Commuting: commuting += r.usd; break;
      case IndustryClass::Other: other += r.usd; break;
    }
    out.total += r.usd;
  }
  if (out.total == 0) throw Error("class_shares: empty scope");
  if (unclassified > 0)
    out.warnings.push_back(std::to_string(unclassified_names.size()) +
                           " industries missing from the classification treated as other");
  out.tourism = static_cast<double>(tourism) / static_cast<double>(out.total);
  out.commuting = static_cast<double>(commuting) / static_cast<double>(out.total);
  out.other = static_cast<double>(other) / static_cast<double>(out.total);
  return out;
}

void write_classification_csv(std::ostream& out, const IndustryClassification& c) {
  out << "industry,class,pearson_r,pearson_p,spearman_r,spearman_p,combined_p\n";
  for (const auto& row : c.rows) {
    std::vector<std::string> fields{row.industry, class_name(row.cls)};
    if (row.pearson) {
      fields.push_back(fmt_stat(row.pearson->coefficient));
      fields.push_back(fmt_stat(row.pearson->p_value));
    } else {
      fields.insert(fields.end(), {"", ""});
    }
    if (row.spearman) {
      fields.push_back(fmt_stat(row.spearman->coefficient));
      fields.push_back(fmt_stat(row.spearman->p_value));
    } else {
      fields.insert(fields.end(), {"", ""});
    }
    fields.push_back(row.combined_p ? fmt_stat(*row.combined_p) : "");
    out << csv::join_row(fields) << "\n";
  }
}

IndustryClassification read_classification_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open classification file: " + path.string());
  csv::Reader reader(in);
  std::vector<std::string> row;
  const std::vector<std::string> expected = {"industry",   "class",      "pearson_r",
                                             "pearson_p",  "spearman_r", "spearman_p",
                                             "combined_p"};
  if (!reader.next(row) || row != expected)
    throw ParseError("classification header mismatch in " + path.string());

  IndustryClassification out;
  while (reader.next(row)) {
    const std::string at = path.filename().string() + ":" + std::to_string(reader.line_number());
    if (row.size() != 7) throw ParseError(at + ": expected 7 fields");
    IndustryRow r;
    r.industry = row[0];
    auto cls = class_from_name(row[1]);
    if (!cls) throw ParseError(at + ": unknown class '" + row[1] + "'");
    r.cls = *cls;
    auto num = [&](const std::string& s) { return std::stod(s); };
    if (!row[2].empty() && !row[3].empty())
      r.pearson = CorrResult{num(row[2]), num(row[3]), 0};
    if (!row[4].empty() && !row[5].empty())
      r.spearman = CorrResult{num(row[4]), num(row[5]), 0};
    if (!row[6].empty()) r.combined_p = num(row[6]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

}  // namespace tourexp
