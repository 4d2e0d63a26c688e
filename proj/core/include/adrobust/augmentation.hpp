#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adrobust/image.hpp"
#include "adrobust/random.hpp"

namespace adrobust {

template <typename T>
struct Range {
  T lo{};
  T hi{};
  friend bool operator==(const Range&, const Range&) = default;
};

/// Per-category transform set. Disabled transforms are false / nullopt /
/// zero translation.
struct AugmentationPolicy {
  bool flip_h = false;
  bool flip_v = false;
  int translate_x = 0;  // max |dx| in pixels
  int translate_y = 0;
  std::optional<Range<double>> rotate_deg;
  bool rotate_90s = false;
  std::optional<Range<double>> zoom;
  std::optional<Range<int>> add;  // pixel-value units
  std::optional<Range<double>> multiply;

  /// Throws InvalidArgument on inverted or otherwise invalid ranges.
  void validate() const;
  bool is_identity() const noexcept;

  friend bool operator==(const AugmentationPolicy&, const AugmentationPolicy&) = default;
};

/// Transform names in application order.
std::span<const std::string_view> transform_order() noexcept;

struct PolicyConfig {
  std::map<std::string, AugmentationPolicy> policies;
  double flip_probability = 0.5;
};

/// Parses the JSON policy file format (see core/data/augmentation_policies.json).
PolicyConfig parse_policy_config(std::string_view json_text);
PolicyConfig load_policy_config(const std::filesystem::path& file);
/// The compiled-in per-category table.
const PolicyConfig& default_policy_config();

/// Category lookup; spaces and underscores are interchangeable ("metal nut").
/// Throws InvalidArgument for unknown categories.
AugmentationPolicy load_policy(std::string_view category, const PolicyConfig& config);

/// One realisation of a policy.
struct AugmentationParams {
  bool flip_h = false;
  bool flip_v = false;
  int dx = 0;
  int dy = 0;
  double rotate_deg = 0.0;
  int quarter_turns = 0;  // 0..3, counter-clockwise
  double zoom = 1.0;
  int add = 0;
  double multiply = 1.0;
};

/// Draws parameters in transform order; disabled transforms consume no
/// randomness.
AugmentationParams sample_params(const AugmentationPolicy& policy, Rng& rng,
                                 double flip_probability = 0.5);

/// Applies flips exactly, resamples the remaining geometry in one bilinear
/// pass (black fill), then brightness add / multiply with clamping.
Image apply_params(const Image& image, const AugmentationParams& params);

Image augment_image(const Image& image, const AugmentationPolicy& policy, Rng& rng,
                    double flip_probability = 0.5);

struct AugmentationPlan {
  int factor = 0;
  bool keep_originals = true;
  std::uint64_t seed = 0;
};

struct NamedImage {
  std::string image_id;
  Image image;
};

struct AugmentedImage {
  std::string image_id;  // staging id, see augmented_id()
  std::string source_id;
  int replicate = 0;  // 0 = original
  Image image;
};

/// "<image_id>__aug<k>", k >= 1.
std::string augmented_id(std::string_view image_id, int replicate);

/// Splits an id produced by augmented_id(); originals give replicate 0.
struct ParsedId {
  std::string source_id;
  int replicate = 0;
};
ParsedId parse_augmented_id(std::string_view image_id);

/// Seed of the stream used for (image index, replicate).
std::uint64_t augmentation_stream_seed(std::uint64_t seed, std::size_t image_index,
                                       int replicate) noexcept;

/// Output order: for each input image, its original (if kept) followed by
/// replicates 1..factor. Deterministic regardless of `jobs`.
std::vector<AugmentedImage> augment_dataset(std::span<const NamedImage> images,
                                            const AugmentationPolicy& policy,
                                            const AugmentationPlan& plan,
                                            double flip_probability = 0.5, int jobs = 1);

}  // namespace adrobust
