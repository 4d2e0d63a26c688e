#pragma once

// Subcommands of the adrobust tool. Each writes its outputs under one run
// directory together with a run.json manifest echoing the effective options.

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "adrobust/parallel.hpp"

namespace adrobust::cli {

namespace fs = std::filesystem;

inline constexpr const char* kRunManifest = "run.json";

/// Invocation details echoed into run.json.
struct RunInfo {
  std::vector<std::string> args;
  std::string config_path;
  std::string config_text;  // verbatim contents of --config, if any
};

struct ImportCommand {
  fs::path images;
  fs::path features;
  fs::path out;
  std::vector<std::string> categories;
  std::vector<std::string> splits = {"train", "test"};
};

struct AugmentCommand {
  fs::path images;
  fs::path out;
  std::string category;
  fs::path policy_config;  // empty = built-in table
  int factor = 10;
  bool keep_originals = true;
  std::uint64_t seed = 0;
  int jobs = default_jobs();
};

struct PreprocessCommand {
  fs::path images;
  fs::path out;
  int resize = 380;
  int crop = 0;  // 0 = no centre crop
  int jobs = default_jobs();
};

struct FitCommand {
  fs::path train;
  fs::path out;
  std::string method = "mahalanobis-ledoit";
  std::vector<std::string> levels;  // empty = block4, block6, block7
  int k = 1;
  std::size_t channel_subset = 0;
  std::uint64_t seed = 0;
  int jobs = default_jobs();
};

struct ScoreCommand {
  fs::path model;
  fs::path data;
  fs::path out;
  bool heatmaps = true;
  int jobs = default_jobs();
};

struct BenchCommand {
  fs::path data;  // <data>/<category>/{train,test}
  fs::path out;
  std::vector<std::string> categories;
  std::vector<std::string> methods = {"knn", "mahalanobis-empirical", "mahalanobis-ledoit", "padim-ledoit"};
  std::vector<std::string> levels;
  std::vector<int> grid;  // empty = per-category rule
  int replicates = 5;
  std::uint64_t seed = 0;
  std::vector<int> aug_factors = {0};
  bool keep_originals = true;
  std::vector<std::string> exclude;
  bool dry_run = false;
  /// Dry-run against the public MVTec AD training counts instead of `data`.
  bool mvtec_counts = false;
  bool plots = true;
  int jobs = default_jobs();
};

struct SynthCommand {
  fs::path out;
  std::string category = "synthetic";
  int n_train = 40;
  int n_test_normal = 20;
  int n_test_anomalous = 20;
  double shift_sigma = 4.0;
  int aug_factor = 0;
  std::uint64_t seed = 0;
};

void cmd_import(const ImportCommand& c, std::ostream& log, const RunInfo& info = {});
void cmd_augment(const AugmentCommand& c, std::ostream& log, const RunInfo& info = {});
void cmd_preprocess(const PreprocessCommand& c, std::ostream& log, const RunInfo& info = {});
void cmd_fit(const FitCommand& c, std::ostream& log, const RunInfo& info = {});
void cmd_score(const ScoreCommand& c, std::ostream& log, const RunInfo& info = {});
/// Returns the planned model count per method and augmentation factor.
std::size_t cmd_bench(const BenchCommand& c, std::ostream& log, const RunInfo& info = {});
void cmd_synth(const SynthCommand& c, std::ostream& log, const RunInfo& info = {});

/// Exit codes: 0 success, 1 validation error, 2 runtime error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace adrobust::cli
