#include "tourexp/runner.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tourexp/classify.hpp"
#include "tourexp/community.hpp"
#include "tourexp/csv.hpp"
#include "tourexp/descriptive.hpp"
#include "tourexp/emit.hpp"
#include "tourexp/errors.hpp"
#include "tourexp/gravity.hpp"
#include "tourexp/spaces.hpp"

namespace tourexp::runner {

namespace fs = std::filesystem;

namespace {

void write_output(const fs::path& out_dir, const fs::path& rel, const std::string& content,
                  RunManifest& manifest) {
  const fs::path full = out_dir / rel;
  atomic_write(full, content);
  manifest.add_output(out_dir, full);
}

QuarterWindow effective_window(const LoadedInputs& in) {
  if (in.window) return *in.window;
  if (in.cube.quarters().empty()) throw Error("empty cube: no quarters to analyze");
  return {in.cube.quarters().front(), in.cube.quarters().back()};
}

// Calendar years assembled from quarters: year t spans Q4 of t-1 through Q3
// of t, matching an October-September observation window.
std::vector<int> covered_years(const QuarterWindow& window) {
  std::vector<int> years;
  for (int t = window.first.year; t <= window.last.year + 1; ++t) {
    const QuarterWindow year_window{{t - 1, 4}, {t, 3}};
    if (window.contains(year_window.first) && window.contains(year_window.last))
      years.push_back(t);
  }
  return years;
}

QuarterWindow year_window(int t) { return {{t - 1, 4}, {t, 3}}; }

}  // namespace

LoadedInputs load_inputs(const InputPaths& paths, bool need_attrs) {
  LoadedInputs in;
  if (paths.transactions.empty()) throw Error("--transactions is required");
  if (!paths.window.empty()) {
    auto w = parse_quarter_window(paths.window);
    if (!w) throw Error("malformed --window '" + paths.window + "' (want e.g. 2011Q4:2014Q3)");
    in.window = *w;
  }
  in.cube = parse_transactions(paths.transactions, in.window, &in.report);
  if (!paths.ppp.empty())
    in.cube = apply_ppp(in.cube, parse_ppp_factors(paths.ppp));
  if (!paths.countries.empty() && !paths.pairs.empty()) {
    in.attrs = parse_attributes(paths.countries, paths.pairs, paths.geo, &in.cube);
    in.has_attrs = true;
  } else if (need_attrs) {
    throw Error("--countries and --pairs are required for this command");
  }
  return in;
}

void run_validate(const LoadedInputs& in, const fs::path& out_dir, RunManifest& manifest) {
  nlohmann::json j;
  j["rows_read"] = in.report.rows_read;
  j["rows_kept"] = in.report.rows_kept;
  j["merged_duplicates"] = in.report.merged_duplicates;
  j["rejected_domestic"] = in.report.rejected_domestic;
  j["rejected_out_of_window"] = in.report.rejected_out_of_window;
  j["warnings"] = in.report.warnings;
  j["records"] = in.cube.size();
  j["total_usd"] = format_usd(in.cube.total_usd());
  j["total_txn"] = in.cube.total_txn();
  j["origins"] = in.cube.origins().size();
  j["dest_countries"] = in.cube.dest_countries();
  j["municipalities"] = in.cube.municipalities().size();
  j["industries"] = in.cube.industries().size();
  std::vector<std::string> quarters;
  for (const auto& q : in.cube.quarters()) quarters.push_back(q.str());
  j["quarters"] = quarters;
  if (in.has_attrs) {
    j["attribute_countries"] = in.attrs.countries.size();
    j["attribute_pairs"] = in.attrs.pairs.size();
    j["geo_municipalities"] = in.attrs.municipalities.size();
    j["geo_unmatched"] = in.attrs.unmatched_geo;
    j["attribute_warnings"] = in.attrs.warnings;
  }
  write_output(out_dir, "validation_report.json", j.dump(2) + "\n", manifest);
}

void run_describe(const LoadedInputs& in, const DescribeOptions& opts, const fs::path& out_dir,
                  RunManifest& manifest) {
  const std::string& dest = opts.dest;
  const fs::path base = fs::path("describe") / dest;

  const auto muni_shares = share_ranking(in.cube, Dim::Municipality, dest, opts.atm_industry);
  const auto origin_shares = share_ranking(in.cube, Dim::Origin, dest, opts.atm_industry);
  const auto industry_shares = share_ranking(in.cube, Dim::Industry, dest, opts.atm_industry);
  write_output(out_dir, base / "municipality_shares.csv", emit::ranked_shares_csv(muni_shares),
               manifest);
  write_output(out_dir, base / "origin_shares.csv", emit::ranked_shares_csv(origin_shares),
               manifest);
  write_output(out_dir, base / "industry_shares.csv", emit::ranked_shares_csv(industry_shares),
               manifest);

  for (const Dim axis : {Dim::Municipality, Dim::Origin}) {
    const auto dist = rank_distribution(in.cube, axis, dest);
    const std::string name = axis == Dim::Municipality ? "municipality" : "origin";
    write_output(out_dir, base / ("rank_distribution_" + name + ".csv"),
                 emit::rank_distribution_csv(dist), manifest);
    write_output(out_dir, base / ("rank_distribution_" + name + ".json"),
                 emit::rank_distribution_json(dist).dump(2) + "\n", manifest);
  }

  for (const Measure measure : {Measure::Usd, Measure::TxnCount}) {
    const auto timeline = quarterly_timeline(in.cube, dest, measure, in.window);
    const std::string name = measure == Measure::Usd ? "usd" : "txn";
    write_output(out_dir, base / ("timeline_" + name + ".csv"),
                 emit::timeline_csv(timeline, measure), manifest);
  }

  const auto seasonal = seasonal_balance(in.cube, dest, opts.gray_threshold);
  write_output(out_dir, base / "seasonal_balance.csv", emit::seasonal_csv(seasonal), manifest);

  // Choropleth payload: totals, per-industry totals and the seasonal balance
  // merged into the municipality features.
  if (!in.attrs.municipalities.empty()) {
    std::map<std::string, std::map<std::string, nlohmann::json>> extra;
    for (const auto& e : muni_shares.entries) {
      extra[e.key]["total_usd"] = usd(e.usd);
      extra[e.key]["share"] = e.share;
    }
    const auto sector = aggregate(in.cube.restrict_dest(dest),
                                  {Dim::Municipality, Dim::Industry}, Measure::Usd);
    for (const auto& [key, cents] : sector)
      extra[key[0]]["usd_by_industry"][key[1]] = usd(cents);
    for (const auto& e : seasonal.entries) {
      extra[e.municipality_id]["seasonal_balance"] = e.balance;
      extra[e.municipality_id]["seasonal_gray"] = e.gray;
    }
    const auto doc = emit::geojson_with_properties(in.attrs.municipalities, dest, extra);
    write_output(out_dir, base / "municipalities.geojson", doc.dump(2) + "\n", manifest);
  }
}

void run_gravity(const LoadedInputs& in, const GravityOptions& opts, const fs::path& out_dir,
                 RunManifest& manifest) {
  if (!in.has_attrs) throw Error("gravity needs --countries and --pairs");
  const GravitySpec spec = GravitySpec::from_model_number(opts.spec_model);
  const auto data = build_gravity_rows(in.cube, in.attrs, opts.dest);
  const auto fit = fit_gravity_model(data, spec);

  std::map<std::string, std::string> metadata{
      {"destination", opts.dest},
      {"model", std::to_string(opts.spec_model)},
      {"specification", spec.label()},
      {"origins_dropped_missing_attributes", std::to_string(data.dropped_missing_attributes)},
      {"origins_dropped_zero_expenditure", std::to_string(data.dropped_zero_expenditure)}};
  const fs::path base = fs::path("gravity") / opts.dest;
  const std::string stem = "model" + std::to_string(opts.spec_model);
  write_output(out_dir, base / (stem + ".json"),
               emit::fit_result_json(fit, metadata).dump(2) + "\n", manifest);
  write_output(out_dir, base / (stem + ".csv"), emit::fit_result_csv(fit), manifest);
}

void run_origin_space(const LoadedInputs& in, const OriginSpaceOptions& opts,
                      const fs::path& out_dir, RunManifest& manifest) {
  const fs::path base = "origin_space";
  SimilarityOptions sim_opts;
  sim_opts.log1p_transform = !opts.raw_similarity;

  const auto vectors = build_entity_vectors(in.cube, Axis::Origin);
  const auto sim = similarity(vectors, sim_opts);

  // Node attributes: continent tags plus per-destination attractiveness.
  std::map<std::string, SpaceNode> node_attrs;
  if (in.has_attrs) {
    const auto attract = attractiveness_by_dest(in.cube, in.attrs);
    for (const auto& origin : sim.entities) {
      SpaceNode node;
      node.key = node.country = origin;
      if (const CountryAttributes* c = in.attrs.country(origin)) node.continent = c->continent;
      for (const auto& [dest, shares] : attract) {
        auto it = shares.find(origin);
        if (it != shares.end()) node.attractiveness[dest] = it->second;
      }
      node_attrs[origin] = std::move(node);
    }
  }
  const auto graph = topk_graph(sim, opts.k, node_attrs);
  write_output(out_dir, base / "graph.graphml", emit::graphml(graph), manifest);
  write_output(out_dir, base / "graph.dot", emit::dot(graph), manifest);

  const QuarterWindow window = effective_window(in);
  const Panel panel = usd_panel(in.cube, window);

  Panel prediction;
  for (const auto& dest : in.cube.dest_countries()) {
    const auto pred = predict_expenditure(sim, panel, dest);
    write_output(out_dir, base / ("predictions_" + dest + ".csv"),
                 emit::predictions_csv(panel, pred, dest), manifest);
    for (const auto& [origin, value] : pred.value) prediction[{origin, dest}] = value;
  }

  const std::map<std::string, std::string> window_note{
      {"window", window.first.str() + ":" + window.last.str()},
      {"year_definition", "year t = Q4 of t-1 through Q3 of t"}};

  const auto level = fit_level_model(panel, prediction);
  write_output(out_dir, base / "level_model.json",
               emit::fit_result_json(level, window_note).dump(2) + "\n", manifest);
  write_output(out_dir, base / "level_model.csv", emit::fit_result_csv(level), manifest);

  // Growth models per consecutive year pair; the prediction for year t uses
  // year-t data exclusively.
  const auto years = covered_years(window);
  for (std::size_t i = 0; i + 1 < years.size(); ++i) {
    const int t = years[i], t1 = years[i + 1];
    const ExpenditureCube cube_t = in.cube.restrict_window(year_window(t));
    if (cube_t.empty()) continue;
    const auto sim_t = similarity(build_entity_vectors(cube_t, Axis::Origin), sim_opts);
    const Panel panel_t = usd_panel(cube_t, year_window(t));
    const Panel panel_t1 = usd_panel(in.cube, year_window(t1));
    Panel pred_t;
    for (const auto& dest : cube_t.dest_countries()) {
      const auto pred = predict_expenditure(sim_t, panel_t, dest);
      for (const auto& [origin, value] : pred.value) pred_t[{origin, dest}] = value;
    }
    auto metadata = window_note;
    metadata["year_t"] = std::to_string(t);
    metadata["year_t1"] = std::to_string(t1);
    const auto growth = fit_growth_model(panel_t, panel_t1, pred_t);
    const std::string stem = "growth_" + std::to_string(t) + "_" + std::to_string(t1);
    write_output(out_dir, base / (stem + ".json"),
                 emit::fit_result_json(growth, metadata).dump(2) + "\n", manifest);
    write_output(out_dir, base / (stem + ".csv"), emit::fit_result_csv(growth), manifest);
  }
}

std::map<std::string, int> run_dest_space(const LoadedInputs& in, const DestSpaceOptions& opts,
                                          const fs::path& out_dir, RunManifest& manifest) {
  const fs::path base = fs::path("dest_space") / opts.dest;
  SimilarityOptions sim_opts;
  sim_opts.log1p_transform = !opts.raw_similarity;

  const ExpenditureCube sub = in.cube.restrict_dest(opts.dest);
  if (sub.empty()) throw Error("no expenditure for destination " + opts.dest);
  const auto vectors = build_entity_vectors(sub, Axis::Destination);
  const auto sim = similarity(vectors, sim_opts);
  const auto graph = FlowGraph::from_similarity(sim, opts.edge_threshold);
  const Partition partition = detect_communities(graph, opts.seed);

  // Municipalities that never made it into the graph (zero-variance
  // vectors) become their own clusters so the ORE table still covers the
  // whole country.
  std::map<std::string, int> cluster_of = partition.by_key(graph);
  int next = partition.module_count;
  for (const auto& muni : sub.municipalities())
    if (!cluster_of.count(muni)) cluster_of[muni] = next++;

  write_output(out_dir, base / "partition.csv", emit::partition_csv(cluster_of), manifest);

  nlohmann::json summary;
  summary["destination"] = opts.dest;
  summary["modules"] = partition.module_count;
  summary["codelength_bits"] = partition.codelength;
  summary["one_module_codelength_bits"] =
      map_equation_codelength(graph, std::vector<int>(graph.node_count(), 0));
  summary["edge_threshold"] = opts.edge_threshold;
  summary["seed"] = opts.seed;
  summary["graph_nodes"] = graph.node_count();
  summary["graph_edges"] = graph.edges.size();
  summary["unclustered_municipalities"] = next - partition.module_count;
  summary["warnings"] = graph.warnings;
  write_output(out_dir, base / "partition_summary.json", summary.dump(2) + "\n", manifest);

  const auto table = origin_relative_expenditure(
      in.cube, cluster_of, opts.dest, in.has_attrs ? &in.attrs.countries : nullptr);
  write_output(out_dir, base / "ore_origins.csv",
               emit::cluster_origins_csv(table, opts.min_cluster_usd), manifest);
  write_output(out_dir, base / "ore_industries.csv",
               emit::cluster_industries_csv(table, opts.min_cluster_usd), manifest);

  if (!in.attrs.municipalities.empty()) {
    std::map<std::string, std::map<std::string, nlohmann::json>> extra;
    for (const auto& [muni, cluster] : cluster_of) extra[muni]["cluster"] = cluster;
    const auto doc = emit::geojson_with_properties(in.attrs.municipalities, opts.dest, extra);
    write_output(out_dir, base / "clusters.geojson", doc.dump(2) + "\n", manifest);
  }
  return cluster_of;
}

std::map<std::string, int> read_partition_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open partition file: " + path.string());
  csv::Reader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row) || row != std::vector<std::string>{"municipality_id", "cluster"})
    throw ParseError("partition header mismatch in " + path.string());
  std::map<std::string, int> out;
  while (reader.next(row)) {
    if (row.size() != 2)
      throw ParseError(path.string() + ":" + std::to_string(reader.line_number()) +
                       ": expected 2 fields");
    out[row[0]] = std::stoi(row[1]);
  }
  return out;
}

namespace {

void write_class_shares(const ExpenditureCube& cube, const IndustryClassification& cls,
                        const fs::path& out_dir, const fs::path& rel,
                        const std::vector<std::pair<std::string, ShareScope>>& scopes,
                        RunManifest& manifest) {
  std::string csv_text = "scope,tourism,commuting,other,total_usd\n";
  for (const auto& [label, scope] : scopes) {
    const auto shares = class_shares(cube, cls, scope);
    csv_text += csv::join_row({label, emit::num(shares.tourism), emit::num(shares.commuting),
                               emit::num(shares.other), format_usd(shares.total)}) +
                "\n";
  }
  write_output(out_dir, rel, csv_text, manifest);
}

}  // namespace

void run_classify(const LoadedInputs& in, const ClassifyRunOptions& opts,
                  const fs::path& out_dir, RunManifest& manifest) {
  const fs::path base = "classify";
  const auto series = build_industry_series(in.cube, opts.anchor);
  ClassifyOptions copts;
  copts.fisher_combination = opts.fisher;
  const auto cls = classify_industries(series, opts.anchor, opts.atm, copts);

  std::ostringstream csv_out;
  write_classification_csv(csv_out, cls);
  write_output(out_dir, base / "classification.csv", csv_out.str(), manifest);

  std::vector<std::pair<std::string, ShareScope>> scopes;
  for (const auto& dest : in.cube.dest_countries())
    scopes.push_back({dest, ShareScope{dest, {}}});
  write_class_shares(in.cube, cls, out_dir, base / "class_shares_country.csv", scopes, manifest);

  if (!opts.partition_path.empty()) {
    if (opts.partition_dest.empty())
      throw Error("--dest is required together with --partition");
    const auto cluster_of = read_partition_csv(opts.partition_path);
    std::map<int, std::set<std::string>> by_cluster;
    for (const auto& [muni, cluster] : cluster_of) by_cluster[cluster].insert(muni);
    std::vector<std::pair<std::string, ShareScope>> cluster_scopes;
    for (const auto& [cluster, munis] : by_cluster) {
      ShareScope scope{opts.partition_dest, munis};
      try {
        class_shares(in.cube, cls, scope);  // skip clusters with no spend
      } catch (const Error&) {
        continue;
      }
      cluster_scopes.push_back({"cluster_" + std::to_string(cluster), std::move(scope)});
    }
    write_class_shares(in.cube, cls, out_dir,
                       base / ("class_shares_clusters_" + opts.partition_dest + ".csv"),
                       cluster_scopes, manifest);
  }
}

SynthConfig synth_config_from_toml(const toml::Table& t) {
  SynthConfig c = SynthConfig::defaults();
  c.seed = static_cast<std::uint64_t>(t.get_int("seed", static_cast<std::int64_t>(c.seed)));
  c.origin_count = static_cast<int>(t.get_int("origin_count", c.origin_count));
  if (t.has("first_quarter")) {
    auto q = parse_quarter(t.at("first_quarter").as_string());
    if (!q) throw ParseError("synth config: malformed first_quarter");
    c.first_quarter = *q;
  }
  c.quarter_count = static_cast<int>(t.get_int("quarter_count", c.quarter_count));
  c.anchor_industry = t.get_string("anchor_industry", c.anchor_industry);
  c.atm_industry = t.get_string("atm_industry", c.atm_industry);

  c.alpha = t.get_double("alpha", c.alpha);
  c.beta_pop = t.get_double("beta_pop", c.beta_pop);
  c.beta_gdppc = t.get_double("beta_gdppc", c.beta_gdppc);
  c.rho_distance = t.get_double("rho_distance", c.rho_distance);
  c.beta_language = t.get_double("beta_language", c.beta_language);
  c.beta_flights = t.get_double("beta_flights", c.beta_flights);
  c.sigma = t.get_double("sigma", c.sigma);

  c.population_median = t.get_double("population_median", c.population_median);
  c.population_log_sigma = t.get_double("population_log_sigma", c.population_log_sigma);
  c.gdppc_median = t.get_double("gdppc_median", c.gdppc_median);
  c.gdppc_log_sigma = t.get_double("gdppc_log_sigma", c.gdppc_log_sigma);
  c.distance_median = t.get_double("distance_median", c.distance_median);
  c.distance_log_sigma = t.get_double("distance_log_sigma", c.distance_log_sigma);
  c.language_probability = t.get_double("language_probability", c.language_probability);
  c.flights_zero_probability = t.get_double("flights_zero_probability", c.flights_zero_probability);
  c.flights_median = t.get_double("flights_median", c.flights_median);
  c.flights_log_sigma = t.get_double("flights_log_sigma", c.flights_log_sigma);

  c.cluster_noise = t.get_double("cluster_noise", c.cluster_noise);
  c.municipality_log_sigma = t.get_double("municipality_log_sigma", c.municipality_log_sigma);
  c.quarter_log_sigma = t.get_double("quarter_log_sigma", c.quarter_log_sigma);
  c.industry_noise = t.get_double("industry_noise", c.industry_noise);

  if (const auto* dests = t.tables("destinations")) {
    c.destinations.clear();
    for (const auto& d : *dests) {
      SynthDestination sd;
      sd.code = d.at("code").as_string();
      sd.municipality_count = static_cast<int>(d.get_int("municipalities", 12));
      if (d.has("cluster_mixing")) {
        sd.cluster_mixing.clear();
        for (const auto& row : d.at("cluster_mixing").as_array()) {
          std::vector<double> weights;
          for (const auto& v : row.as_array()) weights.push_back(v.as_double());
          sd.cluster_mixing.push_back(std::move(weights));
        }
      }
      c.destinations.push_back(std::move(sd));
    }
  }
  if (const auto* industries = t.tables("industries")) {
    c.industries.clear();
    for (const auto& ind : *industries) {
      SynthIndustry si;
      si.name = ind.at("name").as_string();
      auto cls = class_from_name(ind.get_string("class", "other"));
      if (!cls) throw ParseError("synth config: unknown industry class");
      si.planted = *cls;
      si.anchor_loading = ind.get_double("anchor_loading", 0.5);
      c.industries.push_back(std::move(si));
    }
  }
  return c;
}

void run_synth(const SynthRunOptions& opts, const fs::path& out_dir, RunManifest& manifest) {
  SynthConfig config = opts.config_path.empty()
                           ? SynthConfig::defaults()
                           : synth_config_from_toml(toml::parse_file(opts.config_path));
  if (opts.seed) config.seed = *opts.seed;
  const SynthOutput output = generate(config);
  for (const auto& file : write_synth_files(output, out_dir))
    manifest.add_output(out_dir, file);
  manifest.parameters["seed"] = std::to_string(config.seed);
}

void run_pipeline(const PipelineOptions& opts, const fs::path& out_dir, RunManifest& manifest) {
  const toml::Table config = toml::parse_file(opts.config_path);

  InputPaths paths;
  if (const toml::Table* synth = config.section("synth")) {
    SynthConfig sc = synth_config_from_toml(*synth);
    if (opts.seed) sc.seed = *opts.seed;
    manifest.parameters["seed"] = std::to_string(sc.seed);
    const SynthOutput output = generate(sc);
    const fs::path synth_dir = out_dir / "inputs";
    for (const auto& file : write_synth_files(output, synth_dir))
      manifest.add_output(out_dir, file);
    paths.transactions = (synth_dir / "transactions.csv").string();
    paths.countries = (synth_dir / "countries.csv").string();
    paths.pairs = (synth_dir / "pairs.csv").string();
    paths.geo = (synth_dir / "municipalities.geojson").string();
  } else if (const toml::Table* inputs = config.section("inputs")) {
    paths.transactions = inputs->get_string("transactions", "");
    paths.countries = inputs->get_string("countries", "");
    paths.pairs = inputs->get_string("pairs", "");
    paths.geo = inputs->get_string("geo", "");
    paths.ppp = inputs->get_string("ppp", "");
    paths.window = inputs->get_string("window", "");
  } else {
    throw Error("pipeline config needs a [synth] or an [inputs] section");
  }

  const toml::Table* params = config.section("parameters");
  const toml::Table empty;
  if (!params) params = &empty;

  LoadedInputs in = load_inputs(paths, /*need_attrs=*/true);
  run_validate(in, out_dir, manifest);

  DescribeOptions describe;
  describe.gray_threshold = params->get_double("gray_threshold", 0.1);
  describe.atm_industry = params->get_string("atm_industry", "ATMs");
  for (const auto& dest : in.cube.dest_countries()) {
    describe.dest = dest;
    run_describe(in, describe, out_dir, manifest);
    for (const int model : {1, 2}) {
      GravityOptions gravity{dest, model};
      try {
        run_gravity(in, gravity, out_dir, manifest);
      } catch (const NumericError& e) {
        // A spec-2 regressor can be constant on small synthetic data; the
        // pipeline records the failure and carries on with the other stages.
        nlohmann::json note{{"destination", dest},
                            {"model", model},
                            {"error", e.what()}};
        write_output(out_dir,
                     fs::path("gravity") / dest / ("model" + std::to_string(model) +
                                                   "_error.json"),
                     note.dump(2) + "\n", manifest);
      }
    }
  }

  OriginSpaceOptions origin_space;
  origin_space.k = static_cast<int>(params->get_int("k", 3));
  origin_space.raw_similarity = params->get_bool("raw_similarity", false);
  run_origin_space(in, origin_space, out_dir, manifest);

  const auto seed = static_cast<std::uint64_t>(params->get_int("detect_seed", 1));
  std::map<std::string, std::map<std::string, int>> partitions;
  for (const auto& dest : in.cube.dest_countries()) {
    DestSpaceOptions ds;
    ds.dest = dest;
    ds.edge_threshold = params->get_double("edge_threshold", 0.0);
    ds.seed = seed;
    ds.min_cluster_usd = params->get_double("min_cluster_usd", 0.0);
    ds.raw_similarity = origin_space.raw_similarity;
    partitions[dest] = run_dest_space(in, ds, out_dir, manifest);
  }

  ClassifyRunOptions classify;
  classify.anchor = params->get_string("anchor_industry", "Accommodations");
  classify.atm = describe.atm_industry;
  classify.fisher = params->get_bool("fisher_combination", false);
  run_classify(in, classify, out_dir, manifest);

  // Per-cluster class shares for every destination partition.
  {
    const auto series = build_industry_series(in.cube, classify.anchor);
    ClassifyOptions copts;
    copts.fisher_combination = classify.fisher;
    const auto cls = classify_industries(series, classify.anchor, classify.atm, copts);
    for (const auto& [dest, cluster_of] : partitions) {
      std::map<int, std::set<std::string>> by_cluster;
      for (const auto& [muni, cluster] : cluster_of) by_cluster[cluster].insert(muni);
      std::vector<std::pair<std::string, ShareScope>> scopes;
      for (const auto& [cluster, munis] : by_cluster) {
        ShareScope scope{dest, munis};
        try {
          class_shares(in.cube, cls, scope);
        } catch (const Error&) {
          continue;
        }
        scopes.push_back({"cluster_" + std::to_string(cluster), std::move(scope)});
      }
      write_class_shares(in.cube, cls, out_dir,
                         fs::path("classify") / ("class_shares_clusters_" + dest + ".csv"),
                         scopes, manifest);
    }
  }

  manifest.parameters["k"] = std::to_string(origin_space.k);
  manifest.parameters["edge_threshold"] = emit::num(params->get_double("edge_threshold", 0.0));
  manifest.parameters["gray_threshold"] = emit::num(describe.gray_threshold);
}

}  // namespace tourexp::runner
