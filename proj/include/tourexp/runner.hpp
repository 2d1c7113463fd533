#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "tourexp/attributes.hpp"
#include "tourexp/community.hpp"
#include "tourexp/cube.hpp"
#include "tourexp/manifest.hpp"
#include "tourexp/synth.hpp"
#include "tourexp/toml.hpp"

namespace tourexp::runner {

/// Input file flags shared by the analysis subcommands.
struct InputPaths {
  std::string transactions;
  std::string countries;
  std::string pairs;
  std::string geo;
  std::string ppp;
  std::string window;  // "2011Q4:2014Q3", empty = unbounded
};

struct LoadedInputs {
  ExpenditureCube cube;
  AttributeSet attrs;
  ParseReport report;
  std::optional<QuarterWindow> window;
  bool has_attrs = false;
};

LoadedInputs load_inputs(const InputPaths& paths, bool need_attrs);

/// Subcommand bodies. Each writes its outputs atomically under out_dir,
/// records them in the manifest and leaves writing the manifest itself to
/// the caller (the CLI writes it last).

void run_validate(const LoadedInputs& in, const std::filesystem::path& out_dir,
                  RunManifest& manifest);

struct DescribeOptions {
  std::string dest;
  double gray_threshold = 0.1;
  std::string atm_industry = "ATMs";
};
void run_describe(const LoadedInputs& in, const DescribeOptions& opts,
                  const std::filesystem::path& out_dir, RunManifest& manifest);

struct GravityOptions {
  std::string dest;
  int spec_model = 1;  // 1..4; 1/3 distance only, 2/4 add language + flights
};
void run_gravity(const LoadedInputs& in, const GravityOptions& opts,
                 const std::filesystem::path& out_dir, RunManifest& manifest);

struct OriginSpaceOptions {
  int k = 3;
  bool raw_similarity = false;  // sensitivity switch: correlate raw USD
};
void run_origin_space(const LoadedInputs& in, const OriginSpaceOptions& opts,
                      const std::filesystem::path& out_dir, RunManifest& manifest);

struct DestSpaceOptions {
  std::string dest;
  double edge_threshold = 0.0;
  std::uint64_t seed = 1;
  double min_cluster_usd = 0.0;
  bool raw_similarity = false;
};
/// Returns the cluster assignment (excluded municipalities get fresh
/// singleton clusters) for reuse by per-cluster classification shares.
std::map<std::string, int> run_dest_space(const LoadedInputs& in, const DestSpaceOptions& opts,
                                          const std::filesystem::path& out_dir,
                                          RunManifest& manifest);

struct ClassifyRunOptions {
  std::string anchor = "Accommodations";
  std::string atm = "ATMs";
  bool fisher = false;
  /// Optional partition file (municipality_id,cluster) and its destination,
  /// for per-cluster share tables.
  std::string partition_path;
  std::string partition_dest;
};
void run_classify(const LoadedInputs& in, const ClassifyRunOptions& opts,
                  const std::filesystem::path& out_dir, RunManifest& manifest);

SynthConfig synth_config_from_toml(const toml::Table& table);

struct SynthRunOptions {
  std::string config_path;  // empty = built-in defaults
  std::optional<std::uint64_t> seed;
};
void run_synth(const SynthRunOptions& opts, const std::filesystem::path& out_dir,
               RunManifest& manifest);

/// Full pipeline from a TOML config: optional synth generation, then
/// validate, describe, gravity, origin/destination spaces and
/// classification. Deterministic for a given config and seed.
struct PipelineOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
};
void run_pipeline(const PipelineOptions& opts, const std::filesystem::path& out_dir,
                  RunManifest& manifest);

std::map<std::string, int> read_partition_csv(const std::filesystem::path& path);

}  // namespace tourexp::runner
