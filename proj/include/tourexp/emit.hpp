#pragma once

#include <map>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "tourexp/attributes.hpp"
#include "tourexp/descriptive.hpp"
#include "tourexp/spaces.hpp"
#include "tourexp/stats.hpp"

namespace tourexp::emit {

/// Significance stars in the paper's reporting convention.
std::string stars(double p_value);

/// Regression table as JSON: coefficient block (estimate, std_error, t, p,
/// stars) plus the fit-statistics block and any absorbed fixed effects.
nlohmann::json fit_result_json(const FitResult& fit,
                               const std::map<std::string, std::string>& metadata = {});

/// The same table as CSV (one row per coefficient, then statistic rows).
std::string fit_result_csv(const FitResult& fit);

std::string ranked_shares_csv(const RankedShares& shares);
std::string rank_distribution_csv(const RankDistribution& dist);
nlohmann::json rank_distribution_json(const RankDistribution& dist);
std::string timeline_csv(const std::map<Quarter, std::int64_t>& totals, Measure measure);
std::string seasonal_csv(const SeasonalBalance& balance);

/// `municipality_id,cluster`
std::string partition_csv(const std::map<std::string, int>& cluster_of);

/// Cluster ORE tables shaped like the paper's characterization tables.
/// Rows with cluster spend below min_usd are filtered from the emission.
std::string cluster_origins_csv(const ClusterTable& table, double min_usd = 0);
std::string cluster_industries_csv(const ClusterTable& table, double min_usd = 0);

std::string graphml(const SpaceGraph& graph);
std::string dot(const SpaceGraph& graph);

/// Predictions per origin: `origin,expenditure_usd,predicted_usd,defined`.
std::string predictions_csv(const Panel& expenditure, const Prediction& prediction,
                            const std::string& dest);

/// FeatureCollection restricted to dest with extra per-municipality
/// properties merged in (cluster ids, seasonal balance, sector totals, ...).
nlohmann::json geojson_with_properties(
    const std::vector<MunicipalityGeo>& municipalities, const std::string& dest,
    const std::map<std::string, std::map<std::string, nlohmann::json>>& extra);

/// Canonical number rendering shared by the CSV emitters.
std::string num(double v);

}  // namespace tourexp::emit
