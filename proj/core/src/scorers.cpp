#include "adrobust/scorers.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

#include "adrobust/error.hpp"
#include "adrobust/parallel.hpp"
#include "adrobust/random.hpp"

namespace adrobust {

namespace {

void check_same_slices(const std::vector<LevelSlice>& expected, const std::vector<LevelSlice>& got) {
  if (expected != got) throw DimensionMismatch("training embeddings disagree on level layout");
}

std::vector<const EmbeddingVector*> pointers(std::span<const EmbeddingVector> v) {
  std::vector<const EmbeddingVector*> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(&e);
  return out;
}

std::vector<const FeatureMapSet*> pointers(std::span<const FeatureMapSet> v) {
  std::vector<const FeatureMapSet*> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(&e);
  return out;
}

}  // namespace

// --- KNN -------------------------------------------------------------------

KnnModel knn_fit(std::span<const EmbeddingVector* const> train, int k) {
  if (train.empty()) throw InvalidArgument("knn_fit: empty training set");
  if (k < 1) throw InvalidArgument("knn_fit: k must be at least 1");
  if (static_cast<std::size_t>(k) > train.size()) {
    throw InvalidArgument("knn_fit: k = " + std::to_string(k) + " exceeds the " +
                          std::to_string(train.size()) + " training embeddings");
  }
  const auto dim = static_cast<Eigen::Index>(train.front()->dim());
  KnnModel model;
  model.k = k;
  model.level_slices = train.front()->level_slices;
  model.train.resize(static_cast<Eigen::Index>(train.size()), dim);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto& e = *train[i];
    if (static_cast<Eigen::Index>(e.dim()) != dim) {
      throw DimensionMismatch("knn_fit: training embeddings have different dimensions");
    }
    check_same_slices(model.level_slices, e.level_slices);
    model.train.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(e.values.data(), dim);
  }
  return model;
}

KnnModel knn_fit(std::span<const EmbeddingVector> train, int k) {
  const auto ptrs = pointers(train);
  return knn_fit(std::span<const EmbeddingVector* const>(ptrs), k);
}

double knn_score(const KnnModel& model, const EmbeddingVector& y) {
  if (static_cast<Eigen::Index>(y.dim()) != model.dim()) {
    throw DimensionMismatch("knn_score: query has dimension " + std::to_string(y.dim()) +
                            ", model has " + std::to_string(model.dim()));
  }
  const Eigen::Map<const Eigen::RowVectorXd> q(y.values.data(), model.dim());
  std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(model.size()));
  for (Eigen::Index i = 0; i < model.size(); ++i) {
    dist[static_cast<std::size_t>(i)] = {(model.train.row(i) - q).squaredNorm(), i};
  }
  const auto k = static_cast<std::size_t>(model.k);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += dist[i].first;
  return sum / static_cast<double>(k);
}

// --- Mahalanobis -----------------------------------------------------------

MahalanobisModel maha_fit_pooled(std::span<const EmbeddingVector* const> pooled, Estimator estimator,
                                 int jobs) {
  if (pooled.empty()) throw InvalidArgument("maha_fit: empty training set");
  const auto& slices = pooled.front()->level_slices;
  for (const auto* e : pooled) check_same_slices(slices, e->level_slices);

  MahalanobisModel model;
  model.estimator = estimator;
  model.per_level.resize(slices.size());
  const auto n = static_cast<Eigen::Index>(pooled.size());
  parallel_for(slices.size(), jobs, [&](std::size_t l) {
    const auto& s = slices[l];
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(s.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto vals = pooled[static_cast<std::size_t>(i)]->level_values(s);
      x.row(i) = Eigen::Map<const Eigen::RowVectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    }
    model.per_level[l] = {s.name, fit_gaussian(x, estimator)};
  });
  return model;
}

MahalanobisModel maha_fit(std::span<const FeatureMapSet> train, std::span<const std::string> levels,
                          Estimator estimator, int jobs) {
  std::vector<EmbeddingVector> pooled;
  pooled.reserve(train.size());
  for (const auto& fm : train) pooled.push_back(global_average_pool(fm, levels));
  const auto ptrs = pointers(pooled);
  return maha_fit_pooled(ptrs, estimator, jobs);
}

double maha_score_pooled(const MahalanobisModel& model, const EmbeddingVector& y) {
  double total = 0.0;
  for (const auto& lg : model.per_level) {
    const auto& s = y.slice(lg.level);
    total += mahalanobis(lg.stats, y.level_values(s));
  }
  return total;
}

double maha_score(const MahalanobisModel& model, const FeatureMapSet& y) {
  std::vector<std::string> levels;
  levels.reserve(model.per_level.size());
  for (const auto& lg : model.per_level) levels.push_back(lg.level);
  return maha_score_pooled(model, global_average_pool(y, levels));
}

// --- PaDiM -----------------------------------------------------------------

std::vector<std::string> PadimModel::levels() const {
  std::vector<std::string> out;
  for (const auto& s : level_slices) out.push_back(s.name);
  return out;
}

std::vector<std::size_t> sample_channel_subset(std::size_t depth, std::size_t size, std::uint64_t seed) {
  if (size == 0 || size > depth) {
    throw InvalidArgument("channel subset size must be in [1, " + std::to_string(depth) + "]");
  }
  Rng rng(mix_seed({seed, 0x70616469ULL}));
  return sample_without_replacement(depth, size, rng);
}

PadimModel padim_fit_aligned(std::span<const AlignedPatchGrid* const> train, const PadimOptions& options) {
  if (train.empty()) throw InvalidArgument("padim_fit: empty training set");
  const auto& first = *train.front();
  for (const auto* g : train) {
    if (g->depth != first.depth || g->height != first.height || g->width != first.width ||
        g->level_slices != first.level_slices) {
      throw DimensionMismatch("padim_fit: training grids differ in shape or level layout");
    }
  }
  PadimModel model;
  model.height = first.height;
  model.width = first.width;
  model.depth = static_cast<std::size_t>(first.depth);
  model.level_slices = first.level_slices;
  model.estimator = options.estimator;

  std::vector<std::size_t> channels;
  if (options.channel_subset_size > 0 && options.channel_subset_size < model.depth) {
    model.channel_subset = sample_channel_subset(model.depth, options.channel_subset_size, options.subset_seed);
    channels = model.channel_subset;
  } else if (options.channel_subset_size > model.depth) {
    throw InvalidArgument("padim_fit: channel subset larger than the embedding depth");
  } else {
    channels.resize(model.depth);
    std::iota(channels.begin(), channels.end(), std::size_t{0});
  }

  const std::size_t locations = first.locations();
  const auto n = static_cast<Eigen::Index>(train.size());
  const auto p = static_cast<Eigen::Index>(channels.size());
  model.per_location.resize(locations);
  parallel_for(locations, options.jobs, [&](std::size_t loc) {
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& values = train[static_cast<std::size_t>(i)]->values;
      for (Eigen::Index c = 0; c < p; ++c) {
        x(i, c) = values[channels[static_cast<std::size_t>(c)] * locations + loc];
      }
    }
    GaussianStats stats = fit_gaussian(x, options.estimator);
    if (!options.keep_covariance) stats.covariance.resize(0, 0);
    model.per_location[loc] = std::move(stats);
  });
  return model;
}

PadimModel padim_fit(std::span<const FeatureMapSet> train, std::span<const std::string> levels,
                     const PadimOptions& options) {
  std::vector<AlignedPatchGrid> grids;
  grids.reserve(train.size());
  for (const auto& fm : train) grids.push_back(align_concat(fm, levels));
  std::vector<const AlignedPatchGrid*> ptrs;
  for (const auto& g : grids) ptrs.push_back(&g);
  return padim_fit_aligned(ptrs, options);
}

Heatmap padim_heatmap(const PadimModel& model, const AlignedPatchGrid& y) {
  if (y.height != model.height || y.width != model.width || static_cast<std::size_t>(y.depth) != model.depth) {
    throw DimensionMismatch("padim_score: grid " + std::to_string(y.depth) + "x" + std::to_string(y.height) +
                            "x" + std::to_string(y.width) + " does not match model " +
                            std::to_string(model.depth) + "x" + std::to_string(model.height) + "x" +
                            std::to_string(model.width));
  }
  const std::size_t locations = y.locations();
  const bool subset = !model.channel_subset.empty();
  const std::size_t p = subset ? model.channel_subset.size() : model.depth;
  Heatmap out{model.height, model.width, std::vector<double>(locations)};
  Eigen::VectorXd v(static_cast<Eigen::Index>(p));
  for (std::size_t loc = 0; loc < locations; ++loc) {
    for (std::size_t c = 0; c < p; ++c) {
      const std::size_t channel = subset ? model.channel_subset[c] : c;
      v[static_cast<Eigen::Index>(c)] = y.values[channel * locations + loc];
    }
    out.values[loc] = mahalanobis(model.per_location[loc], v);
  }
  return out;
}

ScoreResult padim_score_aligned(const PadimModel& model, const AlignedPatchGrid& y) {
  ScoreResult r;
  r.heatmap = padim_heatmap(model, y);
  r.score = *std::max_element(r.heatmap->values.begin(), r.heatmap->values.end());
  return r;
}

ScoreResult padim_score(const PadimModel& model, const FeatureMapSet& y) {
  const auto levels = model.levels();
  const auto grid = align_concat(y, levels);
  if (grid.level_slices != model.level_slices || grid.height != model.height || grid.width != model.width) {
    throw ShapeMismatch(y.image_id, "image '" + y.image_id + "' does not match the PaDiM model layout");
  }
  ScoreResult r = padim_score_aligned(model, grid);
  r.image_id = y.image_id;
  return r;
}

// --- front-end ---------------------------------------------------------------

const char* method_kind_name(MethodKind kind) noexcept {
  switch (kind) {
    case MethodKind::knn: return "knn";
    case MethodKind::mahalanobis: return "mahalanobis";
    case MethodKind::padim: return "padim";
  }
  return "?";
}

MethodConfig parse_method(std::string_view label) {
  MethodConfig c;
  c.label = std::string(label);
  const auto dash = label.find('-');
  const std::string_view head = label.substr(0, dash);
  const std::string_view tail = dash == std::string_view::npos ? std::string_view{} : label.substr(dash + 1);
  if (head == "knn" && tail.empty()) {
    c.kind = MethodKind::knn;
    return c;
  }
  if (head == "mahalanobis" || head == "padim") {
    c.kind = head == "padim" ? MethodKind::padim : MethodKind::mahalanobis;
    c.estimator = tail.empty() ? Estimator::ledoit_wolf : parse_estimator(tail);
    return c;
  }
  throw InvalidArgument("unknown method '" + std::string(label) + "'");
}

MethodKind model_kind(const AnyModel& model) noexcept {
  return static_cast<MethodKind>(model.index());
}

std::vector<std::string> model_levels(const AnyModel& model) {
  return std::visit(
      [](const auto& m) -> std::vector<std::string> {
        using T = std::decay_t<decltype(m)>;
        std::vector<std::string> out;
        if constexpr (std::is_same_v<T, KnnModel>) {
          for (const auto& s : m.level_slices) out.push_back(s.name);
        } else if constexpr (std::is_same_v<T, MahalanobisModel>) {
          for (const auto& lg : m.per_level) out.push_back(lg.level);
        } else {
          out = m.levels();
        }
        return out;
      },
      model);
}

AnyModel fit_model(const MethodConfig& config, std::span<const FeatureMapSet* const> train, int jobs) {
  if (train.empty()) throw InvalidArgument("fit: empty training set");
  switch (config.kind) {
    case MethodKind::knn:
    case MethodKind::mahalanobis: {
      std::vector<EmbeddingVector> pooled;
      pooled.reserve(train.size());
      for (const auto* fm : train) pooled.push_back(global_average_pool(*fm, config.levels));
      const auto ptrs = pointers(pooled);
      if (config.kind == MethodKind::knn) return knn_fit(ptrs, config.k);
      return maha_fit_pooled(ptrs, config.estimator, jobs);
    }
    case MethodKind::padim: {
      std::vector<AlignedPatchGrid> grids;
      grids.reserve(train.size());
      for (const auto* fm : train) grids.push_back(align_concat(*fm, config.levels));
      std::vector<const AlignedPatchGrid*> ptrs;
      for (const auto& g : grids) ptrs.push_back(&g);
      PadimOptions opts;
      opts.estimator = config.estimator;
      opts.channel_subset_size = config.channel_subset_size;
      opts.subset_seed = config.seed;
      opts.jobs = jobs;
      return padim_fit_aligned(ptrs, opts);
    }
  }
  throw InvalidArgument("fit: unknown method kind");
}

AnyModel fit_model(const MethodConfig& config, std::span<const FeatureMapSet> train, int jobs) {
  const auto ptrs = pointers(train);
  return fit_model(config, std::span<const FeatureMapSet* const>(ptrs), jobs);
}

ScoreResult score_model(const AnyModel& model, const FeatureMapSet& y) {
  return std::visit(
      [&](const auto& m) -> ScoreResult {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KnnModel>) {
          std::vector<std::string> levels;
          for (const auto& s : m.level_slices) levels.push_back(s.name);
          return {y.image_id, knn_score(m, global_average_pool(y, levels)), std::nullopt};
        } else if constexpr (std::is_same_v<T, MahalanobisModel>) {
          return {y.image_id, maha_score(m, y), std::nullopt};
        } else {
          return padim_score(m, y);
        }
      },
      model);
}

}  // namespace adrobust
