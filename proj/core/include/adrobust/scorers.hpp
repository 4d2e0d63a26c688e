#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "adrobust/covariance.hpp"
#include "adrobust/feature_pipeline.hpp"
#include "adrobust/tensor.hpp"

namespace adrobust {

// ---------------------------------------------------------------------------
// KNN (DN2-style). Score is the mean *squared* euclidean distance to the k
// nearest training embeddings, not its square root.

struct KnnModel {
  Eigen::MatrixXd train;  // n x D, one row per training embedding
  int k = 1;
  std::vector<LevelSlice> level_slices;

  Eigen::Index size() const noexcept { return train.rows(); }
  Eigen::Index dim() const noexcept { return train.cols(); }
};

KnnModel knn_fit(std::span<const EmbeddingVector* const> train, int k = 1);
KnnModel knn_fit(std::span<const EmbeddingVector> train, int k = 1);

/// Ties at the k-th neighbour resolve to the lower training index.
double knn_score(const KnnModel& model, const EmbeddingVector& y);

// ---------------------------------------------------------------------------
// Mahalanobis: one Gaussian per pooled level, score = sum of per-level
// distances.

struct LevelGaussian {
  std::string level;
  GaussianStats stats;
};

struct MahalanobisModel {
  std::vector<LevelGaussian> per_level;
  Estimator estimator = Estimator::ledoit_wolf;
};

MahalanobisModel maha_fit_pooled(std::span<const EmbeddingVector* const> pooled,
                                 Estimator estimator, int jobs = 1);
MahalanobisModel maha_fit(std::span<const FeatureMapSet> train,
                          std::span<const std::string> levels, Estimator estimator,
                          int jobs = 1);

/// `y` must contain every level of the model (matched by name).
double maha_score_pooled(const MahalanobisModel& model, const EmbeddingVector& y);
double maha_score(const MahalanobisModel& model, const FeatureMapSet& y);

// ---------------------------------------------------------------------------
// PaDiM: one Gaussian per aligned spatial location, score = max location
// distance, heatmap = all location distances.

struct Heatmap {
  int height = 0;
  int width = 0;
  std::vector<double> values;  // row-major

  double at(int i, int j) const noexcept {
    return values[static_cast<std::size_t>(i) * width + j];
  }
};

struct PadimOptions {
  Estimator estimator = Estimator::ledoit_wolf;
  /// 0 keeps all D channels; otherwise a seeded uniform subset of this size.
  std::size_t channel_subset_size = 0;
  std::uint64_t subset_seed = 0;
  /// Per-location covariances are dropped after fitting unless requested.
  bool keep_covariance = false;
  int jobs = 1;
};

struct PadimModel {
  int height = 0;
  int width = 0;
  std::size_t depth = 0;  // concatenated channel count before subsetting
  std::vector<LevelSlice> level_slices;
  std::vector<GaussianStats> per_location;  // row-major (i, j)
  Estimator estimator = Estimator::ledoit_wolf;
  std::vector<std::size_t> channel_subset;  // sorted; empty = all channels

  const GaussianStats& at(int i, int j) const {
    return per_location.at(static_cast<std::size_t>(i) * width + j);
  }
  std::vector<std::string> levels() const;
};

/// Sorted uniform subset of `size` channels out of `depth`.
std::vector<std::size_t> sample_channel_subset(std::size_t depth, std::size_t size,
                                               std::uint64_t seed);

PadimModel padim_fit_aligned(std::span<const AlignedPatchGrid* const> train,
                             const PadimOptions& options = {});
PadimModel padim_fit(std::span<const FeatureMapSet> train, std::span<const std::string> levels,
                     const PadimOptions& options = {});

struct ScoreResult {
  std::string image_id;
  double score = 0.0;
  std::optional<Heatmap> heatmap;
};

Heatmap padim_heatmap(const PadimModel& model, const AlignedPatchGrid& y);
ScoreResult padim_score_aligned(const PadimModel& model, const AlignedPatchGrid& y);
ScoreResult padim_score(const PadimModel& model, const FeatureMapSet& y);

// ---------------------------------------------------------------------------
// Uniform front-end used by the CLI and the robustness runner.

enum class MethodKind { knn, mahalanobis, padim };

const char* method_kind_name(MethodKind kind) noexcept;

struct MethodConfig {
  std::string label;  // e.g. "mahalanobis-ledoit"
  MethodKind kind = MethodKind::mahalanobis;
  Estimator estimator = Estimator::ledoit_wolf;
  int k = 1;
  std::vector<std::string> levels = default_levels();
  std::size_t channel_subset_size = 0;
  std::uint64_t seed = 0;
};

/// "knn", "mahalanobis" (= ledoit), "mahalanobis-empirical",
/// "mahalanobis-ledoit", "padim" (= ledoit), "padim-empirical", "padim-ledoit".
MethodConfig parse_method(std::string_view label);

using AnyModel = std::variant<KnnModel, MahalanobisModel, PadimModel>;

MethodKind model_kind(const AnyModel& model) noexcept;
std::vector<std::string> model_levels(const AnyModel& model);

AnyModel fit_model(const MethodConfig& config, std::span<const FeatureMapSet* const> train,
                   int jobs = 1);
AnyModel fit_model(const MethodConfig& config, std::span<const FeatureMapSet> train,
                   int jobs = 1);

/// Throws UnknownLevel when `y` lacks a level the model was fitted on.
ScoreResult score_model(const AnyModel& model, const FeatureMapSet& y);

}  // namespace adrobust
