#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace adrobust {

/// Shape of one feature level, C x H x W.
struct LevelShape {
  int channels = 0;
  int height = 0;
  int width = 0;

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) *
           static_cast<std::size_t>(width);
  }
  std::size_t spatial() const noexcept {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  friend bool operator==(const LevelShape&, const LevelShape&) = default;
};

/// Dense C x H x W float tensor, channel-major then row-major.
class Tensor3f {
 public:
  Tensor3f() = default;
  explicit Tensor3f(LevelShape shape, float fill = 0.0f);
  Tensor3f(LevelShape shape, std::vector<float> values);

  const LevelShape& shape() const noexcept { return shape_; }
  int channels() const noexcept { return shape_.channels; }
  int height() const noexcept { return shape_.height; }
  int width() const noexcept { return shape_.width; }

  float& at(int c, int h, int w) noexcept { return data_[index(c, h, w)]; }
  float at(int c, int h, int w) const noexcept { return data_[index(c, h, w)]; }

  const std::vector<float>& values() const noexcept { return data_; }
  std::vector<float>& values() noexcept { return data_; }

  bool all_finite() const noexcept;

  friend bool operator==(const Tensor3f&, const Tensor3f&) = default;

 private:
  std::size_t index(int c, int h, int w) const noexcept {
    return (static_cast<std::size_t>(c) * shape_.height + h) * shape_.width + w;
  }

  LevelShape shape_;
  std::vector<float> data_;
};

struct FeatureLevel {
  std::string name;
  Tensor3f tensor;

  friend bool operator==(const FeatureLevel&, const FeatureLevel&) = default;
};

/// Raw multi-level extractor output for one image.
struct FeatureMapSet {
  std::string image_id;
  std::vector<FeatureLevel> levels;

  /// Returns nullptr when the level is absent.
  const FeatureLevel* find(std::string_view level_name) const noexcept;
  /// Throws UnknownLevel when the level is absent.
  const FeatureLevel& level(std::string_view level_name) const;

  friend bool operator==(const FeatureMapSet&, const FeatureMapSet&) = default;
};

}  // namespace adrobust
