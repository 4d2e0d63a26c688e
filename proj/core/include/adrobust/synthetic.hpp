#pragma once

// Gaussian feature datasets for smoke runs and tests.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "adrobust/embedding_store.hpp"

namespace adrobust {

struct SyntheticSpec {
  std::string category = "synthetic";
  /// Each level draws an independent N(0, Sigma_level) channel vector per
  /// location; Sigma has eigenvalues in [0.5, 2] and a random basis.
  std::vector<LevelSpec> levels = {
      {"block4", {16, 4, 4}}, {"block6", {24, 2, 2}}, {"block7", {32, 2, 2}}};
  int n_train = 40;
  int n_test_normal = 20;
  int n_test_anomalous = 20;
  /// Anomalies add shift_sigma * sqrt(Sigma_cc) to every channel c.
  double shift_sigma = 4.0;
  /// Augmented variants per training image ("<id>__aug<k>"), each the
  /// original plus N(0, (aug_noise * sigma)^2) jitter.
  int aug_factor = 0;
  double aug_noise = 0.25;
  std::uint64_t seed = 0;
};

struct SyntheticSplits {
  EmbeddingDataset train;
  EmbeddingDataset test;
};

SyntheticSplits make_synthetic(const SyntheticSpec& spec);

}  // namespace adrobust
