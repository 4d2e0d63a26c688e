#include "adrobust/robustness.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <optional>
#include <set>

#include "adrobust/augmentation.hpp"
#include "adrobust/error.hpp"
#include "adrobust/parallel.hpp"
#include "adrobust/random.hpp"

namespace adrobust {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string levels_key(const std::vector<std::string>& levels) {
  std::string key;
  for (const auto& l : levels) key += l + '\x1f';
  return key;
}

// Embeddings computed once per (category, level list) and reused by every fit.
struct Representations {
  std::vector<EmbeddingVector> pooled;
  std::vector<AlignedPatchGrid> aligned;
};

Representations represent(const EmbeddingDataset& ds, const std::vector<std::size_t>& rows,
                          const std::vector<std::string>& levels, bool need_aligned) {
  Representations r;
  r.pooled.resize(ds.size());
  if (need_aligned) r.aligned.resize(ds.size());
  for (const auto i : rows) {
    r.pooled[i] = global_average_pool(ds.features(i), levels);
    if (need_aligned) r.aligned[i] = align_concat(ds.features(i), levels);
  }
  return r;
}

struct Cell {
  int aug_factor = 0;
  int n = 0;
  int replicate = 0;
  std::size_t method = 0;
};

}  // namespace

void RobustnessRunSpec::validate() const {
  if (replicates < 1) throw InvalidArgument("replicates must be at least 1");
  if (methods.empty()) throw InvalidArgument("at least one method is required");
  std::set<int> seen;
  for (const int n : sample_grid) {
    if (n < 1) throw InvalidArgument("sample sizes must be at least 1");
    if (!seen.insert(n).second) throw InvalidArgument("sample grid values must be distinct");
  }
  if (aug_factors.empty()) throw InvalidArgument("at least one augmentation factor is required");
  for (const int f : aug_factors) {
    if (f < 0) throw InvalidArgument("augmentation factors must be non-negative");
  }
  std::set<std::string> labels;
  for (const auto& m : methods) {
    if (!labels.insert(m.label).second) throw InvalidArgument("duplicate method label '" + m.label + "'");
  }
}

std::uint64_t cell_seed(std::uint64_t master_seed, std::string_view category, int n, int replicate) noexcept {
  return mix_seed({master_seed, hash_string(category), static_cast<std::uint64_t>(n),
                   static_cast<std::uint64_t>(replicate)});
}

std::vector<std::size_t> original_indices(const EmbeddingDataset& train) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto& s = train.samples()[i];
    if (s.label == Label::normal && parse_augmented_id(s.image_id).replicate == 0) out.push_back(i);
  }
  return out;
}

std::vector<PlannedCategory> plan_robustness(std::span<const std::pair<std::string, int>> n_max_per_category,
                                             const RobustnessRunSpec& spec) {
  std::vector<PlannedCategory> plan;
  for (const auto& [name, n_max] : n_max_per_category) {
    PlannedCategory p;
    p.category = name;
    p.n_max = n_max;
    if (spec.sample_grid.empty()) {
      p.grid = build_sample_grid(n_max);
    } else {
      for (const int n : spec.sample_grid) {
        if (n <= n_max) p.grid.push_back(n);
      }
      std::sort(p.grid.begin(), p.grid.end());
    }
    p.models_per_method = p.grid.size() * static_cast<std::size_t>(spec.replicates);
    plan.push_back(std::move(p));
  }
  return plan;
}

std::size_t planned_model_count(std::span<const PlannedCategory> plan) noexcept {
  std::size_t total = 0;
  for (const auto& p : plan) total += p.models_per_method;
  return total;
}

std::vector<std::pair<std::string, std::string>> default_conventions() {
  std::string order;
  for (const auto t : transform_order()) order += (order.empty() ? "" : ",") + std::string(t);
  return {
      {"knn_distance", "mean squared euclidean distance to the k nearest training embeddings"},
      {"mahalanobis_levels", "sum of per-level distances on pooled features"},
      {"empirical_covariance", "maximum likelihood (divisor n)"},
      {"empirical_inverse", "symmetric pseudo-inverse, eigenvalues <= p*eps*lambda_max zeroed"},
      {"ledoit_wolf", "(1-delta)*S + delta*tr(S)/p*I, Ledoit-Wolf 2004 delta clipped to [0,1]"},
      {"padim_alignment", "largest grid among levels, nearest-neighbour floor(t*src/tgt)"},
      {"augmentation_order", order},
      {"flip_probability", "0.5"},
      {"augmentation_fill", "constant 0, bilinear resampling"},
      {"sampling", "N originals without replacement, same indices for every method"},
      {"seed_hash", "splitmix64 chain over (master_seed, fnv1a64(category), N, m)"},
      {"auc_percent_area", "trapezoid over [x_min, x_max] divided by (x_max - x_min)"},
  };
}

RobustnessReport run_robustness(std::span<const CategoryInput> categories, const RobustnessRunSpec& spec) {
  spec.validate();
  RobustnessReport report;
  report.master_seed = spec.master_seed;
  report.replicates = spec.replicates;
  report.conventions = default_conventions();

  for (const auto& cat : categories) {
    if (cat.train == nullptr || cat.test == nullptr) {
      throw InvalidArgument("category '" + cat.name + "' lacks a train or test split");
    }
    const EmbeddingDataset& train = *cat.train;
    const EmbeddingDataset& test = *cat.test;
    const auto originals = original_indices(train);
    const int n_max = static_cast<int>(originals.size());
    if (n_max == 0) throw InvalidArgument("category '" + cat.name + "' has no normal training images");
    report.n_max[cat.name] = n_max;

    std::vector<int> grid;
    const std::vector<int> requested = spec.sample_grid.empty() ? build_sample_grid(n_max) : spec.sample_grid;
    for (const int n : requested) {
      if (n > n_max) {
        report.warnings.push_back("category '" + cat.name + "': N=" + std::to_string(n) +
                                  " exceeds the " + std::to_string(n_max) + " available images, skipped");
      } else {
        grid.push_back(n);
      }
    }
    std::sort(grid.begin(), grid.end());

    // variants[o][r-1] = dataset row of original o's r-th augmented copy
    const int max_factor = *std::max_element(spec.aug_factors.begin(), spec.aug_factors.end());
    std::vector<std::vector<std::size_t>> variants(originals.size());
    std::vector<std::size_t> train_rows = originals;
    if (max_factor > 0) {
      for (std::size_t o = 0; o < originals.size(); ++o) {
        const auto& id = train.samples()[originals[o]].image_id;
        for (int r = 1; r <= max_factor; ++r) {
          const auto row = train.index_of(augmented_id(id, r));
          if (!row) {
            throw InvalidArgument("category '" + cat.name + "': missing augmented features '" +
                                  augmented_id(id, r) + "'");
          }
          variants[o].push_back(*row);
          train_rows.push_back(*row);
        }
      }
    }

    std::vector<std::size_t> test_rows(test.size());
    std::vector<Label> test_labels(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
      test_rows[i] = i;
      test_labels[i] = test.samples()[i].label;
    }

    std::map<std::string, std::pair<Representations, Representations>> reps;
    for (const auto& m : spec.methods) {
      const auto key = levels_key(m.levels);
      const bool aligned = m.kind == MethodKind::padim;
      auto it = reps.find(key);
      if (it == reps.end() || (aligned && it->second.first.aligned.empty())) {
        reps[key] = {represent(train, train_rows, m.levels, aligned), represent(test, test_rows, m.levels, aligned)};
      }
    }

    std::vector<Cell> cells;
    for (const int f : spec.aug_factors) {
      for (const int n : grid) {
        for (int rep = 0; rep < spec.replicates; ++rep) {
          for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) cells.push_back({f, n, rep, mi});
        }
      }
    }

    std::vector<RobustnessRecord> records(cells.size());
    parallel_for(cells.size(), spec.jobs, [&](std::size_t ci) {
      const Cell& cell = cells[ci];
      const MethodConfig& method = spec.methods[cell.method];
      const auto& [train_reps, test_reps] = reps.at(levels_key(method.levels));

      RobustnessRecord& rec = records[ci];
      rec.category = cat.name;
      rec.method = method.label;
      rec.estimator = method.kind == MethodKind::knn ? "-" : estimator_name(method.estimator);
      rec.aug_factor = cell.aug_factor;
      rec.n = cell.n;
      rec.replicate = cell.replicate;
      rec.seed = cell_seed(spec.master_seed, cat.name, cell.n, cell.replicate);

      Rng rng(rec.seed);
      rec.train_indices = sample_without_replacement(originals.size(), static_cast<std::size_t>(cell.n), rng);

      std::vector<std::size_t> fit_rows;
      for (const auto o : rec.train_indices) {
        if (cell.aug_factor == 0 || spec.keep_originals) fit_rows.push_back(originals[o]);
        for (int r = 0; r < cell.aug_factor; ++r) fit_rows.push_back(variants[o][static_cast<std::size_t>(r)]);
      }
      rec.fit_size = fit_rows.size();

      std::vector<ScoredLabel> scored(test.size());
      const auto t_fit = Clock::now();
      if (method.kind == MethodKind::padim) {
        std::vector<const AlignedPatchGrid*> fit_set;
        for (const auto row : fit_rows) fit_set.push_back(&train_reps.aligned[row]);
        PadimOptions opts;
        opts.estimator = method.estimator;
        opts.channel_subset_size = method.channel_subset_size;
        opts.subset_seed = method.seed;
        const PadimModel model = padim_fit_aligned(fit_set, opts);
        rec.fit_seconds = seconds_since(t_fit);
        const auto t_score = Clock::now();
        for (std::size_t i = 0; i < test.size(); ++i) {
          scored[i] = {padim_score_aligned(model, test_reps.aligned[i]).score, test_labels[i]};
        }
        rec.score_seconds = seconds_since(t_score);
      } else {
        std::vector<const EmbeddingVector*> fit_set;
        for (const auto row : fit_rows) fit_set.push_back(&train_reps.pooled[row]);
        if (method.kind == MethodKind::knn) {
          const KnnModel model = knn_fit(fit_set, method.k);
          rec.fit_seconds = seconds_since(t_fit);
          const auto t_score = Clock::now();
          for (std::size_t i = 0; i < test.size(); ++i) {
            scored[i] = {knn_score(model, test_reps.pooled[i]), test_labels[i]};
          }
          rec.score_seconds = seconds_since(t_score);
        } else {
          const MahalanobisModel model = maha_fit_pooled(fit_set, method.estimator);
          rec.fit_seconds = seconds_since(t_fit);
          const auto t_score = Clock::now();
          for (std::size_t i = 0; i < test.size(); ++i) {
            scored[i] = {maha_score_pooled(model, test_reps.pooled[i]), test_labels[i]};
          }
          rec.score_seconds = seconds_since(t_score);
        }
      }
      rec.auc = roc_auc(scored);
    });
    for (auto& r : records) report.records.push_back(std::move(r));
  }
  return report;
}

double mean_auc(const RobustnessReport& report, std::string_view category, std::string_view method,
                int aug_factor, int n) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& r : report.records) {
    if (r.category == category && r.method == method && r.aug_factor == aug_factor && r.n == n) {
      sum += r.auc;
      ++count;
    }
  }
  if (count == 0) {
    throw UndefinedMetric("no records for " + std::string(category) + "/" + std::string(method) +
                          " N=" + std::to_string(n));
  }
  return sum / static_cast<double>(count);
}

std::vector<CurvePoint> auc_percent_curve(const RobustnessReport& report, std::string_view category,
                                          std::string_view method, int aug_factor) {
  const auto it = report.n_max.find(std::string(category));
  if (it == report.n_max.end()) throw UndefinedMetric("category '" + std::string(category) + "' not in report");
  std::set<int> sizes;
  for (const auto& r : report.records) {
    if (r.category == category && r.method == method && r.aug_factor == aug_factor) sizes.insert(r.n);
  }
  std::vector<CurvePoint> curve;
  for (const int n : sizes) {
    curve.push_back({static_cast<double>(n) / it->second, mean_auc(report, category, method, aug_factor, n)});
  }
  return curve;
}

double auc_percent_area(const RobustnessReport& report, std::string_view category, std::string_view method,
                        int aug_factor) {
  return normalized_curve_area(auc_percent_curve(report, category, method, aug_factor));
}

const char* group_name(CategoryGroup group) noexcept {
  switch (group) {
    case CategoryGroup::all: return "all";
    case CategoryGroup::textures: return "textures";
    case CategoryGroup::objects: return "objects";
  }
  return "?";
}

CategoryGroup parse_group(std::string_view name) {
  if (name == "all") return CategoryGroup::all;
  if (name == "textures") return CategoryGroup::textures;
  if (name == "objects") return CategoryGroup::objects;
  throw InvalidArgument("unknown category group '" + std::string(name) + "'");
}

const std::vector<std::string>& texture_categories() {
  static const std::vector<std::string> textures = {"carpet", "tile", "leather", "grid", "wood"};
  return textures;
}

bool is_texture(std::string_view category) noexcept {
  const auto& t = texture_categories();
  return std::find(t.begin(), t.end(), category) != t.end();
}

AggregateTable aggregate(const RobustnessReport& report, CategoryGroup group,
                         std::span<const std::string> exclusions) {
  AggregateTable table;
  table.group = group;
  std::set<std::string> present;
  std::vector<std::pair<std::string, int>> method_aug;
  for (const auto& r : report.records) {
    present.insert(r.category);
    const std::pair<std::string, int> key{r.method, r.aug_factor};
    if (std::find(method_aug.begin(), method_aug.end(), key) == method_aug.end()) method_aug.push_back(key);
  }
  for (const auto& c : present) {
    if (std::find(exclusions.begin(), exclusions.end(), c) != exclusions.end()) continue;
    if (group == CategoryGroup::textures && !is_texture(c)) continue;
    if (group == CategoryGroup::objects && is_texture(c)) continue;
    table.categories.push_back(c);
  }
  if (table.categories.empty()) {
    throw InvalidArgument(std::string("category group '") + group_name(group) + "' is empty");
  }
  for (const auto& [method, aug] : method_aug) {
    std::map<int, std::pair<double, std::size_t>> per_n;
    double area_sum = 0.0;
    std::size_t area_count = 0;
    for (const auto& c : table.categories) {
      std::vector<CurvePoint> curve;
      try {
        curve = auc_percent_curve(report, c, method, aug);
      } catch (const UndefinedMetric&) {
        continue;
      }
      std::set<int> sizes;
      for (const auto& r : report.records) {
        if (r.category == c && r.method == method && r.aug_factor == aug) sizes.insert(r.n);
      }
      for (const int n : sizes) {
        auto& acc = per_n[n];
        acc.first += mean_auc(report, c, method, aug, n);
        ++acc.second;
      }
      if (curve.size() >= 2) {
        area_sum += normalized_curve_area(curve);
        ++area_count;
      }
    }
    for (const auto& [n, acc] : per_n) {
      table.curve.push_back({method, aug, n, acc.first / static_cast<double>(acc.second), acc.second});
    }
    if (area_count > 0) {
      table.areas.push_back({method, aug, area_sum / static_cast<double>(area_count), area_count});
    }
  }
  return table;
}

}  // namespace adrobust
