#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "adrobust/tensor.hpp"

namespace adrobust {

enum class Label { normal, anomalous };

const char* label_name(Label label) noexcept;
Label parse_label(std::string_view name);

/// MVTec convention: the "good" folder holds normal images, any other folder
/// name is a defect type.
Label label_from_defect(std::string_view defect_type) noexcept;

struct LabeledSample {
  std::string image_id;
  Label label = Label::normal;
  std::string defect_type = "good";
  std::string category;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

struct LevelSpec {
  std::string name;
  LevelShape shape;

  friend bool operator==(const LevelSpec&, const LevelSpec&) = default;
};

struct DatasetManifest {
  std::string category;
  std::string extractor;
  /// Optional weights hash recorded by the extractor.
  std::string extractor_fingerprint;
  int input_height = 0;
  int input_width = 0;
  /// Level names and shapes shared by every image, in storage order.
  std::vector<LevelSpec> levels;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

/// One split of a labelled feature dataset. Immutable once built; every
/// sample owns exactly one FeatureMapSet whose levels match the manifest.
class EmbeddingDataset {
 public:
  EmbeddingDataset() = default;

  /// Validates all invariants; throws ShapeMismatch / NonFiniteValue /
  /// InvalidArgument naming the first offending image.
  EmbeddingDataset(DatasetManifest manifest, std::vector<LabeledSample> samples,
                   std::vector<FeatureMapSet> features);

  const DatasetManifest& manifest() const noexcept { return manifest_; }
  const std::vector<LabeledSample>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }

  const FeatureMapSet& features(std::size_t index) const { return features_.at(index); }
  const FeatureMapSet& features(std::string_view image_id) const;
  std::optional<std::size_t> index_of(std::string_view image_id) const;

  std::vector<std::string> level_names() const;

 private:
  DatasetManifest manifest_;
  std::vector<LabeledSample> samples_;
  std::vector<FeatureMapSet> features_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

/// Reads `<dir>/manifest.json` + `<dir>/tensors.bin`.
EmbeddingDataset load_dataset(const std::filesystem::path& dir);

/// Reads only the manifest header and sample list (no tensors).
struct DatasetIndex {
  DatasetManifest manifest;
  std::vector<LabeledSample> samples;
};
DatasetIndex load_dataset_index(const std::filesystem::path& dir);

/// Writes the archive, creating `dir` if needed. Tensors are stored as
/// little-endian f32.
void save_dataset(const EmbeddingDataset& ds, const std::filesystem::path& dir);

}  // namespace adrobust
