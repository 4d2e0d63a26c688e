#include "adrobust/feature_pipeline.hpp"

#include "adrobust/error.hpp"

namespace adrobust {

std::vector<std::string> default_levels() { return {"block4", "block6", "block7"}; }

const LevelSlice& EmbeddingVector::slice(std::string_view level_name) const {
  for (const auto& s : level_slices) {
    if (s.name == level_name) return s;
  }
  throw UnknownLevel("embedding has no level '" + std::string(level_name) + "'");
}

std::vector<double> AlignedPatchGrid::location_vector(int i, int j) const {
  std::vector<double> v(static_cast<std::size_t>(depth));
  for (int d = 0; d < depth; ++d) v[static_cast<std::size_t>(d)] = at(d, i, j);
  return v;
}

namespace {

std::vector<const FeatureLevel*> resolve(const FeatureMapSet& fm, std::span<const std::string> levels) {
  if (levels.empty()) throw InvalidArgument("at least one feature level is required");
  std::vector<const FeatureLevel*> out;
  out.reserve(levels.size());
  for (const auto& name : levels) out.push_back(&fm.level(name));
  return out;
}

}  // namespace

EmbeddingVector global_average_pool(const FeatureMapSet& fm, std::span<const std::string> levels) {
  const auto resolved = resolve(fm, levels);
  EmbeddingVector out;
  std::size_t total = 0;
  for (const auto* l : resolved) total += static_cast<std::size_t>(l->tensor.channels());
  out.values.reserve(total);
  for (const auto* l : resolved) {
    const auto& t = l->tensor;
    const std::size_t begin = out.values.size();
    const std::size_t area = t.shape().spatial();
    const auto& v = t.values();
    for (int c = 0; c < t.channels(); ++c) {
      double sum = 0.0;
      const std::size_t base = static_cast<std::size_t>(c) * area;
      for (std::size_t k = 0; k < area; ++k) sum += static_cast<double>(v[base + k]);
      out.values.push_back(area == 0 ? 0.0 : sum / static_cast<double>(area));
    }
    out.level_slices.push_back({l->name, begin, out.values.size()});
  }
  return out;
}

AlignedPatchGrid align_concat(const FeatureMapSet& fm, std::span<const std::string> levels) {
  const auto resolved = resolve(fm, levels);
  const FeatureLevel* target = resolved.front();
  for (const auto* l : resolved) {
    if (l->tensor.shape().spatial() > target->tensor.shape().spatial()) target = l;
  }
  AlignedPatchGrid out;
  out.height = target->tensor.height();
  out.width = target->tensor.width();
  for (const auto* l : resolved) out.depth += l->tensor.channels();
  out.values.resize(static_cast<std::size_t>(out.depth) * out.locations());

  std::vector<int> row_map(static_cast<std::size_t>(out.height));
  std::vector<int> col_map(static_cast<std::size_t>(out.width));
  std::size_t d0 = 0;
  for (const auto* l : resolved) {
    const auto& t = l->tensor;
    for (int i = 0; i < out.height; ++i) row_map[i] = nearest_source_index(i, t.height(), out.height);
    for (int j = 0; j < out.width; ++j) col_map[j] = nearest_source_index(j, t.width(), out.width);
    for (int c = 0; c < t.channels(); ++c) {
      double* dst = out.values.data() + (d0 + static_cast<std::size_t>(c)) * out.locations();
      for (int i = 0; i < out.height; ++i) {
        for (int j = 0; j < out.width; ++j) {
          dst[static_cast<std::size_t>(i) * out.width + j] = static_cast<double>(t.at(c, row_map[i], col_map[j]));
        }
      }
    }
    out.level_slices.push_back({l->name, d0, d0 + static_cast<std::size_t>(t.channels())});
    d0 += static_cast<std::size_t>(t.channels());
  }
  return out;
}

}  // namespace adrobust
