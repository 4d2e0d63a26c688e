#include "adrobust/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adrobust/error.hpp"

namespace adrobust {

double roc_auc(std::span<const ScoredLabel> scored) {
  std::size_t n_anom = 0;
  for (const auto& s : scored) {
    if (std::isnan(s.score)) throw InvalidArgument("roc_auc: NaN score");
    if (s.label == Label::anomalous) ++n_anom;
  }
  const std::size_t n_norm = scored.size() - n_anom;
  if (n_anom == 0 || n_norm == 0) {
    throw UndefinedMetric("roc_auc needs at least one normal and one anomalous sample");
  }
  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scored[a].score < scored[b].score; });

  // Sum of mid-ranks (1-based) of the anomalous samples.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t anomalous_in_group = 0;
    while (j < order.size() && scored[order[j]].score == scored[order[i]].score) {
      if (scored[order[j]].label == Label::anomalous) ++anomalous_in_group;
      ++j;
    }
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    rank_sum += mid_rank * static_cast<double>(anomalous_in_group);
    i = j;
  }
  const double na = static_cast<double>(n_anom);
  const double u = rank_sum - na * (na + 1.0) / 2.0;
  return u / (na * static_cast<double>(n_norm));
}

std::vector<int> build_sample_grid(int n_max) {
  if (n_max < 1) throw InvalidArgument("sample grid needs at least one training image");
  if (n_max < 5) return {n_max};
  std::vector<int> grid;
  for (int n = 5; n < 50 && n <= n_max; n += 5) grid.push_back(n);
  for (int n = 50; n <= n_max; n += 10) grid.push_back(n);
  if (grid.back() != n_max) grid.push_back(n_max);
  return grid;
}

double normalized_curve_area(std::span<const CurvePoint> points) {
  std::vector<CurvePoint> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), [](const CurvePoint& a, const CurvePoint& b) { return a.x < b.x; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].x == sorted[i - 1].x) throw InvalidArgument("curve has duplicate x values");
  }
  if (sorted.size() < 2) throw UndefinedMetric("curve area needs at least two distinct sample sizes");
  double area = 0.0;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    area += 0.5 * (sorted[i].y + sorted[i - 1].y) * (sorted[i].x - sorted[i - 1].x);
  }
  return area / (sorted.back().x - sorted.front().x);
}

}  // namespace adrobust
