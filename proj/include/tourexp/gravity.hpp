#pragma once

#include <string>
#include <vector>

#include "tourexp/attributes.hpp"
#include "tourexp/cube.hpp"
#include "tourexp/stats.hpp"

namespace tourexp {

/// One origin's row of the gravity design for a fixed destination country.
struct GravityRow {
  std::string origin;
  double log_expenditure = 0;    // ln of total USD spent in the destination
  double log_population = 0;
  double log_gdp_per_capita = 0;
  double log_distance = 0;
  double common_language = 0;    // 0/1
  double log_flights = 0;        // ln(flight_connectivity + 1)
};

/// Which distance corrections enter the model. Models 1/3 use neither,
/// models 2/4 use both.
struct GravitySpec {
  bool include_language = false;
  bool include_flights = false;

  static GravitySpec from_model_number(int model);  // 1..4
  std::string label() const;
};

struct GravityDataset {
  std::string dest;
  std::vector<GravityRow> rows;
  long dropped_missing_attributes = 0;
  long dropped_zero_expenditure = 0;
  std::vector<std::string> warnings;
};

/// One row per origin with positive expenditure in `dest` and complete
/// country/pair attributes; incomplete origins are dropped with a warning.
/// Throws when no origin survives.
GravityDataset build_gravity_rows(const ExpenditureCube& cube, const AttributeSet& attrs,
                                  const std::string& dest);

/// ln(E) = a + b ln(POP) + c ln(GDPPC) + r ln(D) [+ language + ln(F+1)].
FitResult fit_gravity_model(const GravityDataset& data, const GravitySpec& spec);

}  // namespace tourexp
