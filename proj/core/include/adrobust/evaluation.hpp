#pragma once

#include <span>
#include <vector>

#include "adrobust/embedding_store.hpp"

namespace adrobust {

struct ScoredLabel {
  double score = 0.0;
  Label label = Label::normal;
};

/// Image-level ROC AUC via the Mann-Whitney U statistic with mid-ranks, so
/// tied normal/anomalous pairs count 0.5. Throws UndefinedMetric if either
/// class is absent.
double roc_auc(std::span<const ScoredLabel> scored);

/// Sample sizes 5, 10, ..., 45, then 50, 60, 70, ..., plus n_max itself,
/// all capped at n_max. n_max < 5 yields {n_max}; n_max < 1 throws.
std::vector<int> build_sample_grid(int n_max);

struct CurvePoint {
  double x = 0.0;  // fraction of the full training set
  double y = 0.0;  // mean AUC
};

/// Trapezoidal area under y(x) over [x_min, x_max] divided by the interval
/// length. Points are sorted by x first. Throws UndefinedMetric for fewer than
/// two distinct x.
double normalized_curve_area(std::span<const CurvePoint> points);

}  // namespace adrobust
