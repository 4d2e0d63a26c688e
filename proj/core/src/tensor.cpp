#include "adrobust/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "adrobust/error.hpp"

namespace adrobust {

Tensor3f::Tensor3f(LevelShape shape, float fill) : shape_(shape), data_(shape.size(), fill) {
  if (shape.channels < 0 || shape.height < 0 || shape.width < 0) {
    throw InvalidArgument("tensor dimensions must be non-negative");
  }
}

Tensor3f::Tensor3f(LevelShape shape, std::vector<float> values)
    : shape_(shape), data_(std::move(values)) {
  if (shape.channels < 0 || shape.height < 0 || shape.width < 0) {
    throw InvalidArgument("tensor dimensions must be non-negative");
  }
  if (data_.size() != shape.size()) {
    throw InvalidArgument("tensor value count does not match its shape");
  }
}

bool Tensor3f::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

const FeatureLevel* FeatureMapSet::find(std::string_view level_name) const noexcept {
  for (const auto& level : levels) {
    if (level.name == level_name) return &level;
  }
  return nullptr;
}

const FeatureLevel& FeatureMapSet::level(std::string_view level_name) const {
  if (const auto* found = find(level_name)) return *found;
  throw UnknownLevel("image '" + image_id + "' has no level '" + std::string(level_name) + "'");
}

}  // namespace adrobust
