#include "adrobust/augmentation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "adrobust/default_policies.hpp"
#include "adrobust/error.hpp"
#include "adrobust/parallel.hpp"

namespace adrobust {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 8> kOrder = {"flip_h", "flip_v",     "translate", "rotate",
                                                   "rotate_90s", "zoom", "add",       "multiply"};

template <typename T>
void check_range(const std::optional<Range<T>>& r, const char* name) {
  if (r && !(r->lo <= r->hi)) {
    throw InvalidArgument(std::string("augmentation range '") + name + "' has lo > hi");
  }
}

std::string normalize_category(std::string_view category) {
  std::string out(category);
  for (auto& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (c == ' ' || c == '-') c = '_';
  }
  return out;
}

template <typename T>
std::optional<Range<T>> range_from_json(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const auto& r = j.at(key);
  if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number()) {
    throw InvalidArgument(std::string("augmentation field '") + key + "' must be null or [lo, hi]");
  }
  if constexpr (std::is_integral_v<T>) {
    if (!r[0].is_number_integer() || !r[1].is_number_integer()) {
      throw InvalidArgument(std::string("augmentation field '") + key + "' must hold integers");
    }
  }
  return Range<T>{r[0].get<T>(), r[1].get<T>()};
}

AugmentationPolicy policy_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("augmentation policy must be a JSON object");
  AugmentationPolicy p;
  p.flip_h = j.value("flip_h", false);
  p.flip_v = j.value("flip_v", false);
  if (j.contains("translate") && !j.at("translate").is_null()) {
    const auto& t = j.at("translate");
    if (!t.is_array() || t.size() != 2 || !t[0].is_number_integer() || !t[1].is_number_integer()) {
      throw InvalidArgument("augmentation field 'translate' must be [max_x, max_y] integers");
    }
    p.translate_x = t[0].get<int>();
    p.translate_y = t[1].get<int>();
  }
  p.rotate_deg = range_from_json<double>(j, "rotate");
  p.rotate_90s = j.value("rotate_90s", false);
  p.zoom = range_from_json<double>(j, "zoom");
  p.add = range_from_json<int>(j, "add");
  p.multiply = range_from_json<double>(j, "multiply");
  p.validate();
  return p;
}

std::uint8_t clamp_u8(long v) noexcept { return static_cast<std::uint8_t>(std::clamp(v, 0L, 255L)); }

}  // namespace

void AugmentationPolicy::validate() const {
  if (translate_x < 0 || translate_y < 0) throw InvalidArgument("translation maxima must be non-negative");
  check_range(rotate_deg, "rotate");
  check_range(zoom, "zoom");
  check_range(add, "add");
  check_range(multiply, "multiply");
  if (zoom && (zoom->lo <= 0.0 || zoom->lo > 1.0 || zoom->hi < 1.0)) {
    throw InvalidArgument("zoom range must be positive and contain 1.0");
  }
  if (multiply && multiply->lo <= 0.0) throw InvalidArgument("multiply range must be positive");
}

bool AugmentationPolicy::is_identity() const noexcept {
  return !flip_h && !flip_v && translate_x == 0 && translate_y == 0 && !rotate_deg && !rotate_90s && !zoom &&
         !add && !multiply;
}

std::span<const std::string_view> transform_order() noexcept { return kOrder; }

PolicyConfig parse_policy_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("policy config is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("policies") || !j.at("policies").is_object()) {
    throw FormatError("policy config must be an object with a 'policies' object");
  }
  if (j.contains("transform_order")) {
    const auto order = j.at("transform_order").get<std::vector<std::string>>();
    if (!std::equal(order.begin(), order.end(), kOrder.begin(), kOrder.end())) {
      throw FormatError("policy config transform_order differs from the implemented order");
    }
  }
  PolicyConfig config;
  config.flip_probability = j.value("flip_probability", 0.5);
  if (!(config.flip_probability >= 0.0 && config.flip_probability <= 1.0)) {
    throw InvalidArgument("flip_probability must be in [0, 1]");
  }
  for (const auto& [name, body] : j.at("policies").items()) {
    try {
      config.policies[normalize_category(name)] = policy_from_json(body);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("policy '" + name + "': " + e.what());
    }
  }
  return config;
}

PolicyConfig load_policy_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open policy config '" + file.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_policy_config(ss.str());
}

const PolicyConfig& default_policy_config() {
  static const PolicyConfig config = parse_policy_config(detail::kDefaultPoliciesJson);
  return config;
}

AugmentationPolicy load_policy(std::string_view category, const PolicyConfig& config) {
  const auto it = config.policies.find(normalize_category(category));
  if (it == config.policies.end()) {
    throw InvalidArgument("no augmentation policy for category '" + std::string(category) + "'");
  }
  return it->second;
}

AugmentationParams sample_params(const AugmentationPolicy& policy, Rng& rng, double flip_probability) {
  AugmentationParams p;
  if (policy.flip_h) p.flip_h = rng.bernoulli(flip_probability);
  if (policy.flip_v) p.flip_v = rng.bernoulli(flip_probability);
  if (policy.translate_x > 0) p.dx = static_cast<int>(rng.uniform_int(-policy.translate_x, policy.translate_x));
  if (policy.translate_y > 0) p.dy = static_cast<int>(rng.uniform_int(-policy.translate_y, policy.translate_y));
  if (policy.rotate_deg) p.rotate_deg = rng.uniform_real(policy.rotate_deg->lo, policy.rotate_deg->hi);
  if (policy.rotate_90s) p.quarter_turns = static_cast<int>(rng.uniform_int(0, 3));
  if (policy.zoom) p.zoom = rng.uniform_real(policy.zoom->lo, policy.zoom->hi);
  if (policy.add) p.add = static_cast<int>(rng.uniform_int(policy.add->lo, policy.add->hi));
  if (policy.multiply) p.multiply = rng.uniform_real(policy.multiply->lo, policy.multiply->hi);
  return p;
}

Image apply_params(const Image& image, const AugmentationParams& params) {
  if (image.empty()) throw InvalidArgument("cannot augment an empty image");
  const int w = image.width;
  const int h = image.height;

  Image flipped = image;
  if (params.flip_h || params.flip_v) {
    for (int y = 0; y < h; ++y) {
      const int sy = params.flip_v ? h - 1 - y : y;
      for (int x = 0; x < w; ++x) {
        const int sx = params.flip_h ? w - 1 - x : x;
        for (int c = 0; c < 3; ++c) flipped.at(x, y, c) = image.at(sx, sy, c);
      }
    }
  }

  Image geo = flipped;
  const int turns = ((params.quarter_turns % 4) + 4) % 4;
  if (params.dx != 0 || params.dy != 0 || params.rotate_deg != 0.0 || turns != 0 || params.zoom != 1.0) {
    // Forward map about the centre: zoom(quarter(rotate(translate(p)))).
    // Each output pixel pulls from the inverse image of its own position.
    const double cx = 0.5 * (w - 1);
    const double cy = 0.5 * (h - 1);
    const double theta = params.rotate_deg * std::numbers::pi / 180.0;
    const double cs = std::cos(theta);
    const double sn = std::sin(theta);
    for (int yo = 0; yo < h; ++yo) {
      for (int xo = 0; xo < w; ++xo) {
        double u = (xo - cx) / params.zoom;
        double v = (yo - cy) / params.zoom;
        for (int t = 0; t < turns; ++t) {
          // inverse of (u, v) -> (v, -u)
          const double nu = -v;
          v = u;
          u = nu;
        }
        const double ru = cs * u - sn * v;
        const double rv = sn * u + cs * v;
        const double sx = ru - params.dx + cx;
        const double sy = rv - params.dy + cy;
        for (int c = 0; c < 3; ++c) {
          geo.at(xo, yo, c) = clamp_u8(std::lround(sample_bilinear(flipped, sx, sy, c, 0.0)));
        }
      }
    }
  }

  if (params.add != 0 || params.multiply != 1.0) {
    for (auto& px : geo.pixels) {
      const long added = static_cast<long>(clamp_u8(static_cast<long>(px) + params.add));
      px = clamp_u8(std::lround(static_cast<double>(added) * params.multiply));
    }
  }
  return geo;
}

Image augment_image(const Image& image, const AugmentationPolicy& policy, Rng& rng, double flip_probability) {
  return apply_params(image, sample_params(policy, rng, flip_probability));
}

std::string augmented_id(std::string_view image_id, int replicate) {
  return std::string(image_id) + "__aug" + std::to_string(replicate);
}

ParsedId parse_augmented_id(std::string_view image_id) {
  const auto pos = image_id.rfind("__aug");
  if (pos == std::string_view::npos || pos + 5 >= image_id.size()) return {std::string(image_id), 0};
  const auto digits = image_id.substr(pos + 5);
  if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
      digits.size() > 9) {
    return {std::string(image_id), 0};
  }
  const int k = std::stoi(std::string(digits));
  if (k < 1) return {std::string(image_id), 0};
  return {std::string(image_id.substr(0, pos)), k};
}

std::uint64_t augmentation_stream_seed(std::uint64_t seed, std::size_t image_index, int replicate) noexcept {
  return mix_seed({seed, 0x61756721ULL, static_cast<std::uint64_t>(image_index),
                   static_cast<std::uint64_t>(replicate)});
}

std::vector<AugmentedImage> augment_dataset(std::span<const NamedImage> images, const AugmentationPolicy& policy,
                                            const AugmentationPlan& plan, double flip_probability, int jobs) {
  if (plan.factor < 0) throw InvalidArgument("augmentation factor must be non-negative");
  policy.validate();
  const std::size_t per_image = static_cast<std::size_t>(plan.factor) + (plan.keep_originals ? 1 : 0);
  std::vector<AugmentedImage> out(images.size() * per_image);
  parallel_for(out.size(), jobs, [&](std::size_t slot) {
    const std::size_t i = slot / per_image;
    const int r = static_cast<int>(slot % per_image) + (plan.keep_originals ? 0 : 1);
    const auto& src = images[i];
    auto& dst = out[slot];
    dst.source_id = src.image_id;
    dst.replicate = r;
    if (r == 0) {
      dst.image_id = src.image_id;
      dst.image = src.image;
      return;
    }
    dst.image_id = augmented_id(src.image_id, r);
    Rng rng(augmentation_stream_seed(plan.seed, i, r));
    dst.image = augment_image(src.image, policy, rng, flip_probability);
  });
  return out;
}

}  // namespace adrobust
