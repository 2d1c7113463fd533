// Command-line front end: ingest -> describe -> gravity -> spaces ->
// communities -> classify, individually or as one pipeline run.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>

#include "tourexp/emit.hpp"
#include "tourexp/errors.hpp"
#include "tourexp/manifest.hpp"
#include "tourexp/runner.hpp"

namespace fs = std::filesystem;
using namespace tourexp;

namespace {

struct Cli {
  runner::InputPaths inputs;
  std::string out_dir = "out";

  void add_input_flags(CLI::App* cmd, bool with_attrs = true) {
    cmd->add_option("--transactions", inputs.transactions, "Transactions CSV")->required();
    if (with_attrs) {
      cmd->add_option("--countries", inputs.countries, "Country attributes CSV");
      cmd->add_option("--pairs", inputs.pairs, "Origin-destination pair attributes CSV");
      cmd->add_option("--geo", inputs.geo, "Municipality GeoJSON");
      cmd->add_option("--ppp", inputs.ppp, "Optional PPP factor CSV (iso3,factor)");
    }
    cmd->add_option("--window", inputs.window, "Observation window, e.g. 2011Q4:2014Q3");
    cmd->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  }
};

int finish(RunManifest& manifest, const fs::path& out_dir) {
  manifest.write(out_dir);  // manifest last: its presence marks a completed run
  return 0;
}

void record_inputs(RunManifest& manifest, const runner::InputPaths& inputs) {
  if (!inputs.transactions.empty()) manifest.inputs["transactions"] = inputs.transactions;
  if (!inputs.countries.empty()) manifest.inputs["countries"] = inputs.countries;
  if (!inputs.pairs.empty()) manifest.inputs["pairs"] = inputs.pairs;
  if (!inputs.geo.empty()) manifest.inputs["geo"] = inputs.geo;
  if (!inputs.ppp.empty()) manifest.inputs["ppp"] = inputs.ppp;
  if (!inputs.window.empty()) manifest.parameters["window"] = inputs.window;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Foreign card expenditure analytics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Cli cli;

  // --- synth -----------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with ground truth");
  std::string synth_config;
  std::optional<std::uint64_t> seed_flag;
  synth->add_option("--config", synth_config, "Synth config TOML (defaults when omitted)");
  synth->add_option("--seed", seed_flag, "Seed override");
  synth->add_option("--out-dir", cli.out_dir, "Output directory")->capture_default_str();

  // --- validate ---------------------------------------------------------
  auto* validate = app.add_subcommand("validate", "Parse and validate the input files");
  cli.add_input_flags(validate);

  // --- describe ---------------------------------------------------------
  auto* describe = app.add_subcommand("describe", "Rankings, distributions, timelines, seasonality");
  runner::DescribeOptions describe_opts;
  cli.add_input_flags(describe);
  describe->add_option("--dest", describe_opts.dest, "Destination country")->required();
  describe->add_option("--gray-threshold", describe_opts.gray_threshold,
                       "Seasonal balance gray band")->capture_default_str();
  describe->add_option("--atm-industry", describe_opts.atm_industry, "ATM industry key")
      ->capture_default_str();

  // --- gravity ----------------------------------------------------------
  auto* gravity = app.add_subcommand("gravity", "Fit a gravity model for one destination");
  runner::GravityOptions gravity_opts;
  cli.add_input_flags(gravity);
  gravity->add_option("--dest", gravity_opts.dest, "Destination country")->required();
  gravity->add_option("--spec", gravity_opts.spec_model, "Model specification 1..4")
      ->check(CLI::Range(1, 4))->capture_default_str();

  // --- origin-space -----------------------------------------------------
  auto* origin_space =
      app.add_subcommand("origin-space", "Origin Space graph, predictions, level and growth models");
  runner::OriginSpaceOptions origin_opts;
  cli.add_input_flags(origin_space);
  origin_space->add_option("--k", origin_opts.k, "Connections per node in the graph")
      ->capture_default_str();
  origin_space->add_flag("--raw-similarity", origin_opts.raw_similarity,
                         "Correlate raw USD instead of ln(1+USD)");

  // --- dest-space --------------------------------------------------------
  auto* dest_space =
      app.add_subcommand("dest-space", "Destination Space communities and ORE tables");
  runner::DestSpaceOptions dest_opts;
  cli.add_input_flags(dest_space);
  dest_space->add_option("--dest", dest_opts.dest, "Destination country")->required();
  dest_space->add_option("--edge-threshold", dest_opts.edge_threshold,
                         "Minimum similarity kept as an edge")->capture_default_str();
  dest_space->add_option("--seed", dest_opts.seed, "Community detection seed")
      ->capture_default_str();
  dest_space->add_option("--min-cluster-usd", dest_opts.min_cluster_usd,
                         "Hide ORE rows below this spend")->capture_default_str();
  dest_space->add_flag("--raw-similarity", dest_opts.raw_similarity,
                       "Correlate raw USD instead of ln(1+USD)");

  // --- classify -----------------------------------------------------------
  auto* classify = app.add_subcommand("classify", "Tourism/commuting/other industry classification");
  runner::ClassifyRunOptions classify_opts;
  cli.add_input_flags(classify);
  classify->add_option("--anchor-industry", classify_opts.anchor, "Tourism anchor industry")
      ->capture_default_str();
  classify->add_option("--atm-industry", classify_opts.atm, "Commuting anchor industry")
      ->capture_default_str();
  classify->add_flag("--fisher", classify_opts.fisher,
                     "Combine p-values with Fisher's method instead of the max");
  classify->add_option("--partition", classify_opts.partition_path,
                       "Partition CSV for per-cluster shares");
  classify->add_option("--dest", classify_opts.partition_dest,
                       "Destination country of the partition");

  // --- pipeline -----------------------------------------------------------
  auto* pipeline = app.add_subcommand("pipeline", "Run everything from a TOML config");
  std::string pipeline_config;
  pipeline->add_option("--config", pipeline_config, "Pipeline config TOML")->required();
  pipeline->add_option("--seed", seed_flag, "Seed override for synth generation");
  pipeline->add_option("--out-dir", cli.out_dir, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 2;
  }

  try {
    const fs::path out_dir = cli.out_dir;
    RunManifest manifest;
    record_inputs(manifest, cli.inputs);

    if (synth->parsed()) {
      manifest.command = "synth";
      if (!synth_config.empty()) manifest.inputs["config"] = synth_config;
      runner::run_synth({synth_config, seed_flag}, out_dir, manifest);
      return finish(manifest, out_dir);
    }
    if (pipeline->parsed()) {
      manifest.command = "pipeline";
      manifest.inputs["config"] = pipeline_config;
      runner::run_pipeline({pipeline_config, seed_flag}, out_dir, manifest);
      return finish(manifest, out_dir);
    }

    if (validate->parsed()) {
      manifest.command = "validate";
      const auto in = runner::load_inputs(cli.inputs, /*need_attrs=*/false);
      runner::run_validate(in, out_dir, manifest);
      return finish(manifest, out_dir);
    }
    if (describe->parsed()) {
      manifest.command = "describe";
      manifest.parameters["dest"] = describe_opts.dest;
      manifest.parameters["gray_threshold"] = emit::num(describe_opts.gray_threshold);
      const auto in = runner::load_inputs(cli.inputs, /*need_attrs=*/false);
      runner::run_describe(in, describe_opts, out_dir, manifest);
      return finish(manifest, out_dir);
    }
    if (gravity->parsed()) {
      manifest.command = "gravity";
      manifest.parameters["dest"] = gravity_opts.dest;
      manifest.parameters["spec"] = std::to_string(gravity_opts.spec_model);
      const auto in = runner::load_inputs(cli.inputs, /*need_attrs=*/true);
      runner::run_gravity(in, gravity_opts, out_dir, manifest);
      return finish(manifest, out_dir);
    }
    if (origin_space->parsed()) {
      manifest.command = "origin-space";
      manifest.parameters["k"] = std::to_string(origin_opts.k);
      const auto in = runner::load_inputs(cli.inputs, /*need_attrs=*/false);
      runner::run_origin_space(in, origin_opts, out_dir, manifest);
      return finish(manifest, out_dir);
    }
    if (dest_space->parsed()) {
      manifest.command = "dest-space";
      manifest.parameters["dest"] = dest_opts.dest;
      manifest.parameters["edge_threshold"] = emit::num(dest_opts.edge_threshold);
      manifest.parameters["seed"] = std::to_string(dest_opts.seed);
      manifest.parameters["min_cluster_usd"] = emit::num(dest_opts.min_cluster_usd);
      const auto in = runner::load_inputs(cli.inputs, /*need_attrs=*/false);
      runner::run_dest_space(in, dest_opts, out_dir, manifest);
      return finish(manifest, out_dir);
    }
    if (classify->parsed()) {
      manifest.command = "classify";
      manifest.parameters["anchor_industry"] = classify_opts.anchor;
      manifest.parameters["atm_industry"] = classify_opts.atm;
      const auto in = runner::load_inputs(cli.inputs, /*need_attrs=*/false);
      runner::run_classify(in, classify_opts, out_dir, manifest);
      return finish(manifest, out_dir);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
