#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adrobust/tensor.hpp"

namespace adrobust {

/// Default feature taps: EfficientNet-B4 blocks 4, 6 and 7.
std::vector<std::string> default_levels();

/// Half-open channel range [begin, end) of one level inside a concatenated
/// descriptor.
struct LevelSlice {
  std::string name;
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const LevelSlice&, const LevelSlice&) = default;
};

/// Pooled, concatenated descriptor. Slices are contiguous and cover [0, D).
struct EmbeddingVector {
  std::vector<double> values;
  std::vector<LevelSlice> level_slices;

  std::size_t dim() const noexcept { return values.size(); }
  /// Throws UnknownLevel.
  const LevelSlice& slice(std::string_view level_name) const;
  std::span<const double> level_values(const LevelSlice& s) const {
    return std::span<const double>(values).subspan(s.begin, s.size());
  }
};

/// D x H0 x W0 aligned spatial embedding, channel-major.
struct AlignedPatchGrid {
  int depth = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;
  std::vector<LevelSlice> level_slices;

  double at(int d, int i, int j) const noexcept {
    return values[(static_cast<std::size_t>(d) * height + i) * width + j];
  }
  std::size_t locations() const noexcept {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  /// Concatenated feature vector at location (i, j).
  std::vector<double> location_vector(int i, int j) const;
};

/// Per-channel spatial mean of each requested level, concatenated in the
/// requested order.
EmbeddingVector global_average_pool(const FeatureMapSet& fm,
                                    std::span<const std::string> levels);

/// Source index of the nearest-neighbour map floor(t * src / tgt).
inline int nearest_source_index(int target_index, int source_size, int target_size) noexcept {
  return static_cast<int>((static_cast<long long>(target_index) * source_size) / target_size);
}

/// Aligns every requested level onto the largest requested spatial grid
/// (by H*W, first wins on ties) with nearest-neighbour replication and
/// concatenates channels per location.
AlignedPatchGrid align_concat(const FeatureMapSet& fm, std::span<const std::string> levels);

}  // namespace adrobust
