#pragma once

// Low-data robustness protocol: for every sample size N on a grid and every
// replicate m, draw N original training images without replacement (seeded by
// (master_seed, category, N, m)), fit every configured method on exactly those
// images (plus their augmented variants when an augmentation factor is set),
// and score the full test split.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adrobust/embedding_store.hpp"
#include "adrobust/evaluation.hpp"
#include "adrobust/scorers.hpp"

namespace adrobust {

struct RobustnessRunSpec {
  /// Empty means build_sample_grid(N_max) per category.
  std::vector<int> sample_grid;
  int replicates = 5;
  std::uint64_t master_seed = 0;
  std::vector<MethodConfig> methods;
  std::vector<int> aug_factors = {0};
  /// With aug_factor > 0: keep the sampled originals next to their variants.
  bool keep_originals = true;
  int jobs = 1;

  /// Throws InvalidArgument.
  void validate() const;
};

struct CategoryInput {
  std::string name;
  const EmbeddingDataset* train = nullptr;
  const EmbeddingDataset* test = nullptr;
};

struct RobustnessRecord {
  std::string category;
  std::string method;
  std::string estimator;  // "-" for knn
  int aug_factor = 0;
  int n = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  std::size_t fit_size = 0;  // rows the model was actually fitted on
  double auc = 0.0;
  double fit_seconds = 0.0;
  double score_seconds = 0.0;
  std::vector<std::size_t> train_indices;  // indices into the originals
};

struct RobustnessReport {
  std::vector<RobustnessRecord> records;
  std::map<std::string, int> n_max;  // originals per category
  std::vector<std::string> warnings;
  std::uint64_t master_seed = 0;
  int replicates = 0;
  /// Numerical and protocol conventions that affect results.
  std::vector<std::pair<std::string, std::string>> conventions;
};

std::uint64_t cell_seed(std::uint64_t master_seed, std::string_view category, int n,
                        int replicate) noexcept;

/// Positions (in dataset order) of normal training samples that are not
/// augmented variants.
std::vector<std::size_t> original_indices(const EmbeddingDataset& train);

struct PlannedCategory {
  std::string category;
  int n_max = 0;
  std::vector<int> grid;
  std::size_t models_per_method = 0;  // per augmentation factor
};

std::vector<PlannedCategory> plan_robustness(
    std::span<const std::pair<std::string, int>> n_max_per_category,
    const RobustnessRunSpec& spec);

/// Total fitted models per method and augmentation factor.
std::size_t planned_model_count(std::span<const PlannedCategory> plan) noexcept;

RobustnessReport run_robustness(std::span<const CategoryInput> categories,
                                const RobustnessRunSpec& spec);

std::vector<std::pair<std::string, std::string>> default_conventions();

/// Mean AUC over replicates; throws UndefinedMetric when no record matches.
double mean_auc(const RobustnessReport& report, std::string_view category,
                std::string_view method, int aug_factor, int n);

/// (N / N_max, mean AUC) for every sampled N, ascending.
std::vector<CurvePoint> auc_percent_curve(const RobustnessReport& report,
                                          std::string_view category, std::string_view method,
                                          int aug_factor = 0);

/// Normalised area under the AUC-percent curve.
double auc_percent_area(const RobustnessReport& report, std::string_view category,
                        std::string_view method, int aug_factor = 0);

enum class CategoryGroup { all, textures, objects };

const char* group_name(CategoryGroup group) noexcept;
CategoryGroup parse_group(std::string_view name);

/// MVTec AD texture categories.
const std::vector<std::string>& texture_categories();
bool is_texture(std::string_view category) noexcept;

struct AggregateCurvePoint {
  std::string method;
  int aug_factor = 0;
  int n = 0;
  double mean_auc = 0.0;
  std::size_t n_categories = 0;
};

struct AggregateArea {
  std::string method;
  int aug_factor = 0;
  double mean_area = 0.0;
  std::size_t n_categories = 0;
};

struct AggregateTable {
  CategoryGroup group = CategoryGroup::all;
  std::vector<std::string> categories;
  std::vector<AggregateCurvePoint> curve;
  std::vector<AggregateArea> areas;
};

/// Unweighted mean over the group's categories present in the report,
/// minus `exclusions`. Throws InvalidArgument when nothing remains.
AggregateTable aggregate(const RobustnessReport& report, CategoryGroup group,
                         std::span<const std::string> exclusions = {});

}  // namespace adrobust
