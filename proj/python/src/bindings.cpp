// Python bindings for the main operations: ingestion, aggregation, the
// regression core, gravity models, origin/destination spaces, community
// detection, classification, descriptive reports and the synth generator.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "tourexp/attributes.hpp"
#include "tourexp/classify.hpp"
#include "tourexp/community.hpp"
#include "tourexp/cube.hpp"
#include "tourexp/descriptive.hpp"
#include "tourexp/errors.hpp"
#include "tourexp/gravity.hpp"
#include "tourexp/manifest.hpp"
#include "tourexp/runner.hpp"
#include "tourexp/spaces.hpp"
#include "tourexp/stats.hpp"
#include "tourexp/synth.hpp"
#include "tourexp/toml.hpp"

namespace py = pybind11;
using namespace tourexp;

namespace {

std::set<Dim> dims_from_names(const std::vector<std::string>& names) {
  std::set<Dim> out;
  for (const auto& name : names) {
    if (name == "origin") out.insert(Dim::Origin);
    else if (name == "dest_country") out.insert(Dim::DestCountry);
    else if (name == "municipality") out.insert(Dim::Municipality);
    else if (name == "industry") out.insert(Dim::Industry);
    else if (name == "quarter") out.insert(Dim::QuarterDim);
    else throw Error("unknown dimension '" + name + "'");
  }
  return out;
}

Dim axis_from_name(const std::string& name) {
  if (name == "municipality") return Dim::Municipality;
  if (name == "origin") return Dim::Origin;
  if (name == "industry") return Dim::Industry;
  throw Error("unknown ranking axis '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_tourexp, m) {
  m.doc() = "Foreign card expenditure analytics: gravity models, origin and "
            "destination spaces, map-equation communities, industry classification";
  m.attr("__version__") = kToolVersion;

  py::register_exception<Error>(m, "TourexpError");

  // --- core data ---------------------------------------------------------
  py::class_<Quarter>(m, "Quarter")
      .def(py::init([](const std::string& text) {
             auto q = parse_quarter(text);
             if (!q) throw Error("malformed quarter '" + text + "'");
             return *q;
           }),
           py::arg("text"))
      .def_readonly("year", &Quarter::year)
      .def_readonly("q", &Quarter::q)
      .def("__str__", &Quarter::str)
      .def("__repr__", [](const Quarter& q) { return "Quarter('" + q.str() + "')"; })
      .def("__eq__", [](const Quarter& a, const Quarter& b) { return a == b; })
      .def("__lt__", [](const Quarter& a, const Quarter& b) { return a < b; });

  py::class_<TransactionAggregate>(m, "TransactionAggregate")
      .def_readonly("origin", &TransactionAggregate::origin)
      .def_readonly("dest_country", &TransactionAggregate::dest_country)
      .def_readonly("municipality_id", &TransactionAggregate::municipality_id)
      .def_readonly("industry", &TransactionAggregate::industry)
      .def_readonly("quarter", &TransactionAggregate::quarter)
      .def_property_readonly("usd",
                             [](const TransactionAggregate& r) { return usd(r.usd); })
      .def_readonly("txn_count", &TransactionAggregate::txn_count);

  py::class_<ParseReport>(m, "ParseReport")
      .def_readonly("rows_read", &ParseReport::rows_read)
      .def_readonly("rows_kept", &ParseReport::rows_kept)
      .def_readonly("merged_duplicates", &ParseReport::merged_duplicates)
      .def_readonly("rejected_domestic", &ParseReport::rejected_domestic)
      .def_readonly("rejected_out_of_window", &ParseReport::rejected_out_of_window)
      .def_readonly("warnings", &ParseReport::warnings);

  py::class_<ExpenditureCube>(m, "ExpenditureCube")
      .def_property_readonly("records", &ExpenditureCube::records)
      .def("__len__", &ExpenditureCube::size)
      .def_property_readonly("total_usd",
                             [](const ExpenditureCube& c) { return usd(c.total_usd()); })
      .def_property_readonly("total_txn", &ExpenditureCube::total_txn)
      .def_property_readonly("origins", &ExpenditureCube::origins)
      .def_property_readonly("dest_countries", &ExpenditureCube::dest_countries)
      .def_property_readonly("municipalities", &ExpenditureCube::municipalities)
      .def_property_readonly("industries", &ExpenditureCube::industries)
      .def_property_readonly("quarters", &ExpenditureCube::quarters)
      .def("country_of", &ExpenditureCube::country_of, py::arg("municipality_id"))
      .def("restrict_dest", &ExpenditureCube::restrict_dest, py::arg("dest_country"));

  m.def(
      "parse_transactions",
      [](const std::filesystem::path& path, const std::optional<std::string>& window) {
        std::optional<QuarterWindow> w;
        if (window) {
          w = parse_quarter_window(*window);
          if (!w) throw Error("malformed window '" + *window + "'");
        }
        ParseReport report;
        auto cube = parse_transactions(path, w, &report);
        return py::make_tuple(std::move(cube), report);
      },
      py::arg("path"), py::arg("window") = std::nullopt,
      "Parse the transactions CSV; returns (cube, report).");

  m.def(
      "aggregate",
      [](const ExpenditureCube& cube, const std::vector<std::string>& keep,
         const std::string& measure) {
        const auto totals = aggregate(cube, dims_from_names(keep),
                                      measure == "txn_count" ? Measure::TxnCount : Measure::Usd);
        py::dict out;
        for (const auto& [key, value] : totals) {
          py::tuple k(key.size());
          for (std::size_t i = 0; i < key.size(); ++i) k[i] = key[i];
          out[k] = measure == "txn_count" ? py::cast(value)
                                          : py::cast(static_cast<double>(value) / 100.0);
        }
        return out;
      },
      py::arg("cube"), py::arg("keep"), py::arg("measure") = "usd",
      "Grouped totals over a dimension subset (dims: origin, dest_country, "
      "municipality, industry, quarter).");

  py::class_<CountryAttributes>(m, "CountryAttributes")
      .def_readonly("iso3", &CountryAttributes::iso3)
      .def_readonly("population", &CountryAttributes::population)
      .def_readonly("gdp_per_capita", &CountryAttributes::gdp_per_capita)
      .def_readonly("gdp_total", &CountryAttributes::gdp_total)
      .def_readonly("continent", &CountryAttributes::continent);

  py::class_<PairAttributes>(m, "PairAttributes")
      .def_readonly("origin", &PairAttributes::origin)
      .def_readonly("dest", &PairAttributes::dest)
      .def_readonly("distance_km", &PairAttributes::distance_km)
      .def_readonly("common_language", &PairAttributes::common_language)
      .def_readonly("flight_connectivity", &PairAttributes::flight_connectivity);

  py::class_<AttributeSet>(m, "AttributeSet")
      .def_readonly("countries", &AttributeSet::countries)
      .def_readonly("unmatched_geo", &AttributeSet::unmatched_geo)
      .def_readonly("warnings", &AttributeSet::warnings);

  m.def(
      "parse_attributes",
      [](const std::filesystem::path& countries, const std::filesystem::path& pairs,
         const std::filesystem::path& geo, const ExpenditureCube* cube) {
        return parse_attributes(countries, pairs, geo, cube);
      },
      py::arg("countries"), py::arg("pairs"), py::arg("geo") = std::filesystem::path{},
      py::arg("cube") = nullptr);

  // --- stats ---------------------------------------------------------------
  py::class_<Coefficient>(m, "Coefficient")
      .def_readonly("name", &Coefficient::name)
      .def_readonly("estimate", &Coefficient::estimate)
      .def_readonly("std_error", &Coefficient::std_error)
      .def_readonly("t_value", &Coefficient::t_value)
      .def_readonly("p_value", &Coefficient::p_value);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("coefficients", &FitResult::coefficients)
      .def_readonly("r_squared", &FitResult::r_squared)
      .def_readonly("adj_r_squared", &FitResult::adj_r_squared)
      .def_readonly("residual_std_error", &FitResult::residual_std_error)
      .def_readonly("f_statistic", &FitResult::f_statistic)
      .def_readonly("f_p_value", &FitResult::f_p_value)
      .def_readonly("n_obs", &FitResult::n_obs)
      .def_readonly("df_residual", &FitResult::df_residual)
      .def_readonly("fe_absorbed", &FitResult::fe_absorbed)
      .def("coef", &FitResult::coef, py::return_value_policy::reference_internal);

  m.def(
      "ols_fit",
      [](const std::map<std::string, std::vector<double>>& columns,
         const std::vector<double>& response, bool intercept,
         const std::map<std::string, std::vector<std::string>>& fe_groups) {
        DesignMatrix d;
        d.response = response;
        for (const auto& [name, values] : columns) d.add_column(name, values);
        for (const auto& [name, labels] : fe_groups) d.fe_groups.push_back({name, labels});
        return d.fe_groups.empty() ? ols_fit(d, intercept) : fe_ols_fit(d);
      },
      py::arg("columns"), py::arg("response"), py::arg("intercept") = true,
      py::arg("fe_groups") = std::map<std::string, std::vector<std::string>>{},
      "Least squares; absorbs fixed effects when fe_groups is non-empty.");

  py::class_<CorrResult>(m, "CorrResult")
      .def_readonly("coefficient", &CorrResult::coefficient)
      .def_readonly("p_value", &CorrResult::p_value)
      .def_readonly("n", &CorrResult::n);

  m.def(
      "pearson_corr",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return pearson_corr(x, y);
      },
      py::arg("x"), py::arg("y"));
  m.def(
      "spearman_corr",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return spearman_corr(x, y);
      },
      py::arg("x"), py::arg("y"));

  // --- gravity ----------------------------------------------------------------
  py::class_<GravityDataset>(m, "GravityDataset")
      .def_readonly("dest", &GravityDataset::dest)
      .def_readonly("dropped_missing_attributes", &GravityDataset::dropped_missing_attributes)
      .def_readonly("dropped_zero_expenditure", &GravityDataset::dropped_zero_expenditure)
      .def_readonly("warnings", &GravityDataset::warnings)
      .def("__len__", [](const GravityDataset& d) { return d.rows.size(); });

  m.def("build_gravity_rows", &build_gravity_rows, py::arg("cube"), py::arg("attrs"),
        py::arg("dest"));
  m.def(
      "fit_gravity_model",
      [](const GravityDataset& data, int spec) {
        return fit_gravity_model(data, GravitySpec::from_model_number(spec));
      },
      py::arg("rows"), py::arg("spec") = 1);

  // --- spaces -------------------------------------------------------------------
  py::class_<EntityVectors>(m, "EntityVectors")
      .def_readonly("entities", &EntityVectors::entities)
      .def_readonly("categories", &EntityVectors::categories)
      .def_readonly("values", &EntityVectors::values);

  m.def(
      "build_entity_vectors",
      [](const ExpenditureCube& cube, const std::string& axis) {
        if (axis != "origin" && axis != "destination")
          throw Error("axis must be 'origin' or 'destination'");
        return build_entity_vectors(cube,
                                    axis == "origin" ? Axis::Origin : Axis::Destination);
      },
      py::arg("cube"), py::arg("axis"));

  py::class_<SimMatrix>(m, "SimMatrix")
      .def_readonly("entities", &SimMatrix::entities)
      .def_readonly("rho", &SimMatrix::rho)
      .def_readonly("excluded", &SimMatrix::excluded)
      .def("at", &SimMatrix::at, py::arg("a"), py::arg("b"));

  m.def(
      "similarity",
      [](const EntityVectors& vectors, bool log1p_transform) {
        SimilarityOptions opts;
        opts.log1p_transform = log1p_transform;
        return similarity(vectors, opts);
      },
      py::arg("vectors"), py::arg("log1p_transform") = true);

  py::class_<SpaceGraph>(m, "SpaceGraph")
      .def_property_readonly("nodes",
                             [](const SpaceGraph& g) {
                               std::vector<std::string> out;
                               for (const auto& n : g.nodes) out.push_back(n.key);
                               return out;
                             })
      .def_property_readonly("edges", [](const SpaceGraph& g) {
        std::vector<std::tuple<std::string, std::string, double>> out;
        for (const auto& e : g.edges) out.push_back({e.a, e.b, e.weight});
        return out;
      });

  m.def(
      "topk_graph",
      [](const SimMatrix& sim, int k) { return topk_graph(sim, k); }, py::arg("sim"),
      py::arg("k") = 3);

  m.def(
      "predict_expenditure",
      [](const SimMatrix& sim,
         const std::map<std::pair<std::string, std::string>, double>& expenditure,
         const std::string& dest) {
        const auto pred = predict_expenditure(sim, expenditure, dest);
        return py::make_tuple(pred.value, pred.undefined);
      },
      py::arg("sim"), py::arg("expenditure"), py::arg("dest"),
      "Returns (predictions, undefined_origins); expenditure keys are "
      "(origin, dest) tuples in USD.");

  m.def("fit_level_model", &fit_level_model, py::arg("expenditure"), py::arg("prediction"));
  m.def("fit_growth_model", &fit_growth_model, py::arg("expenditure_t"),
        py::arg("expenditure_t1"), py::arg("prediction_t"));

  py::class_<ClusterShare>(m, "ClusterShare")
      .def_readonly("cluster", &ClusterShare::cluster)
      .def_readonly("key", &ClusterShare::key)
      .def_property_readonly("usd", [](const ClusterShare& s) { return usd(s.usd); })
      .def_readonly("share", &ClusterShare::share)
      .def_readonly("usd_per_gdp", &ClusterShare::usd_per_gdp);

  py::class_<ClusterTable>(m, "ClusterTable")
      .def_readonly("dest", &ClusterTable::dest)
      .def_readonly("origin_shares", &ClusterTable::origin_shares)
      .def_readonly("industry_shares", &ClusterTable::industry_shares)
      .def_readonly("warnings", &ClusterTable::warnings);

  m.def(
      "origin_relative_expenditure",
      [](const ExpenditureCube& cube, const std::map<std::string, int>& cluster_of,
         const std::string& dest) {
        return origin_relative_expenditure(cube, cluster_of, dest);
      },
      py::arg("cube"), py::arg("cluster_of"), py::arg("dest"));

  // --- community ------------------------------------------------------------------
  py::class_<FlowGraph>(m, "FlowGraph")
      .def_static("from_similarity", &FlowGraph::from_similarity, py::arg("sim"),
                  py::arg("min_similarity") = 0.0)
      .def_readonly("node_keys", &FlowGraph::node_keys)
      .def_readonly("visit_rate", &FlowGraph::visit_rate)
      .def_readonly("total_weight", &FlowGraph::total_weight)
      .def_readonly("warnings", &FlowGraph::warnings)
      .def("__len__", &FlowGraph::node_count);

  py::class_<Partition>(m, "Partition")
      .def_readonly("module_of", &Partition::module_of)
      .def_readonly("codelength", &Partition::codelength)
      .def_readonly("module_count", &Partition::module_count)
      .def("by_key", &Partition::by_key, py::arg("graph"));

  m.def("map_equation_codelength", &map_equation_codelength, py::arg("graph"),
        py::arg("assignment"));
  m.def("detect_communities", &detect_communities, py::arg("graph"), py::arg("seed") = 1);

  // --- classify --------------------------------------------------------------------
  py::class_<IndustrySeries>(m, "IndustrySeries")
      .def_readonly("industries", &IndustrySeries::industries)
      .def_readonly("cell_keys", &IndustrySeries::cell_keys)
      .def_readonly("dropped_cells", &IndustrySeries::dropped_cells);

  m.def("build_industry_series", &build_industry_series, py::arg("cube"),
        py::arg("anchor") = "Accommodations");

  py::class_<IndustryRow>(m, "IndustryRow")
      .def_readonly("industry", &IndustryRow::industry)
      .def_property_readonly("cls",
                             [](const IndustryRow& r) { return class_name(r.cls); })
      .def_readonly("pearson", &IndustryRow::pearson)
      .def_readonly("spearman", &IndustryRow::spearman)
      .def_readonly("combined_p", &IndustryRow::combined_p);

  py::class_<IndustryClassification>(m, "IndustryClassification")
      .def_readonly("rows", &IndustryClassification::rows)
      .def_readonly("anchor", &IndustryClassification::anchor)
      .def_readonly("atm", &IndustryClassification::atm)
      .def_readonly("warnings", &IndustryClassification::warnings)
      .def("by_industry",
           [](const IndustryClassification& c) {
             std::map<std::string, std::string> out;
             for (const auto& [industry, cls] : c.by_industry())
               out[industry] = class_name(cls);
             return out;
           })
      .def("to_csv", [](const IndustryClassification& c) {
        std::ostringstream out;
        write_classification_csv(out, c);
        return out.str();
      });

  m.def(
      "classify_industries",
      [](const IndustrySeries& series, const std::string& anchor, const std::string& atm,
         bool fisher) {
        ClassifyOptions opts;
        opts.fisher_combination = fisher;
        return classify_industries(series, anchor, atm, opts);
      },
      py::arg("series"), py::arg("anchor") = "Accommodations", py::arg("atm") = "ATMs",
      py::arg("fisher") = false);

  py::class_<ClassShares>(m, "ClassShares")
      .def_readonly("tourism", &ClassShares::tourism)
      .def_readonly("commuting", &ClassShares::commuting)
      .def_readonly("other", &ClassShares::other)
      .def_property_readonly("total", [](const ClassShares& s) { return usd(s.total); })
      .def_readonly("warnings", &ClassShares::warnings);

  m.def(
      "class_shares",
      [](const ExpenditureCube& cube, const IndustryClassification& classification,
         const std::string& dest, const std::set<std::string>& municipalities) {
        return class_shares(cube, classification, {dest, municipalities});
      },
      py::arg("cube"), py::arg("classification"), py::arg("dest"),
      py::arg("municipalities") = std::set<std::string>{});

  // --- descriptive --------------------------------------------------------------------
  py::class_<RankEntry>(m, "RankEntry")
      .def_readonly("key", &RankEntry::key)
      .def_property_readonly("usd", [](const RankEntry& e) { return usd(e.usd); })
      .def_readonly("share", &RankEntry::share);

  py::class_<RankedShares>(m, "RankedShares")
      .def_readonly("axis", &RankedShares::axis)
      .def_readonly("denominator_note", &RankedShares::denominator_note)
      .def_readonly("entries", &RankedShares::entries)
      .def_readonly("atm_key", &RankedShares::atm_key);

  m.def(
      "share_ranking",
      [](const ExpenditureCube& cube, const std::string& axis, const std::string& dest,
         const std::string& atm_industry) {
        return share_ranking(cube, axis_from_name(axis), dest, atm_industry);
      },
      py::arg("cube"), py::arg("axis"), py::arg("dest"), py::arg("atm_industry") = "ATMs");

  py::class_<RankDistribution>(m, "RankDistribution")
      .def_readonly("curve", &RankDistribution::curve)
      .def_readonly("p75_p25_ratio", &RankDistribution::p75_p25_ratio)
      .def_readonly("percentile_method", &RankDistribution::percentile_method);

  m.def(
      "rank_distribution",
      [](const ExpenditureCube& cube, const std::string& axis, const std::string& dest) {
        return rank_distribution(cube, axis_from_name(axis), dest);
      },
      py::arg("cube"), py::arg("axis"), py::arg("dest"));

  m.def(
      "quarterly_timeline",
      [](const ExpenditureCube& cube, const std::optional<std::string>& dest,
         const std::string& measure) {
        const auto totals = quarterly_timeline(
            cube, dest, measure == "txn_count" ? Measure::TxnCount : Measure::Usd);
        std::map<std::string, double> out;
        for (const auto& [q, v] : totals)
          out[q.str()] = measure == "txn_count" ? static_cast<double>(v)
                                                : static_cast<double>(v) / 100.0;
        return out;
      },
      py::arg("cube"), py::arg("dest") = std::nullopt, py::arg("measure") = "usd");

  py::class_<SeasonalEntry>(m, "SeasonalEntry")
      .def_readonly("municipality_id", &SeasonalEntry::municipality_id)
      .def_readonly("balance", &SeasonalEntry::balance)
      .def_readonly("gray", &SeasonalEntry::gray);

  py::class_<SeasonalBalance>(m, "SeasonalBalance")
      .def_readonly("entries", &SeasonalBalance::entries)
      .def_readonly("threshold", &SeasonalBalance::threshold)
      .def_readonly("omitted", &SeasonalBalance::omitted);

  m.def("seasonal_balance", &seasonal_balance, py::arg("cube"), py::arg("dest"),
        py::arg("threshold") = 0.1);

  // --- synth -----------------------------------------------------------------------
  py::class_<SynthConfig>(m, "SynthConfig")
      .def_static("defaults", &SynthConfig::defaults)
      .def_static(
          "from_toml",
          [](const std::string& text) { return runner::synth_config_from_toml(toml::parse(text)); },
          py::arg("text"))
      .def_readwrite("seed", &SynthConfig::seed)
      .def_readwrite("origin_count", &SynthConfig::origin_count)
      .def_readwrite("sigma", &SynthConfig::sigma)
      .def_readwrite("alpha", &SynthConfig::alpha)
      .def_readwrite("beta_pop", &SynthConfig::beta_pop)
      .def_readwrite("beta_gdppc", &SynthConfig::beta_gdppc)
      .def_readwrite("rho_distance", &SynthConfig::rho_distance)
      .def_readwrite("beta_language", &SynthConfig::beta_language)
      .def_readwrite("beta_flights", &SynthConfig::beta_flights)
      .def_readwrite("quarter_count", &SynthConfig::quarter_count);

  py::class_<GroundTruth>(m, "GroundTruth")
      .def_readonly("seed", &GroundTruth::seed)
      .def_readonly("origin_block", &GroundTruth::origin_block)
      .def_readonly("municipality_cluster", &GroundTruth::municipality_cluster)
      .def_readonly("industry_class", &GroundTruth::industry_class)
      .def("to_json", &GroundTruth::to_json);

  py::class_<SynthOutput>(m, "SynthOutput")
      .def_readonly("cube", &SynthOutput::cube)
      .def_readonly("truth", &SynthOutput::truth);

  m.def("generate", &generate, py::arg("config"),
        "Generate a synthetic cube with planted ground truth.");
  m.def("write_synth_files", &write_synth_files, py::arg("output"), py::arg("out_dir"));

  // --- attributes loader shared with gravity ----------------------------------------
  m.def(
      "load_attributes_of",
      [](const SynthOutput& output) {
        AttributeSet attrs;
        for (const auto& c : output.countries) attrs.countries[c.iso3] = c;
        for (const auto& p : output.pairs) attrs.pairs[{p.origin, p.dest}] = p;
        return attrs;
      },
      py::arg("output"), "Attribute set view over a generated synthetic output.");
}
