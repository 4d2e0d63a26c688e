#pragma once

// Recognises the MVTec AD directory convention:
//   <root>/<category>/train/good/*.png
//   <root>/<category>/test/<defect>/*.png
// Image ids inside a split are "<defect>/<file stem>", e.g. "crack/003".

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "adrobust/embedding_store.hpp"

namespace adrobust {

struct MvtecImage {
  std::string category;
  std::string split;
  std::string defect_type;
  std::filesystem::path path;
  std::string image_id;
};

/// Defect-free training images per category of the public MVTec AD release,
/// sorted by name. Used for dry-run planning without the dataset on disk.
const std::vector<std::pair<std::string, int>>& mvtec_train_counts();

/// Sorted category names (sub-directories holding a `train/` folder).
std::vector<std::string> list_mvtec_categories(const std::filesystem::path& root);

/// Images of one split in deterministic (defect, file name) order. Throws
/// FormatError when `train/good` (train split) or `test/` is missing.
std::vector<MvtecImage> scan_mvtec_split(const std::filesystem::path& root,
                                         const std::string& category,
                                         const std::string& split);

/// Rebuilds `features` with labels and order taken from the image tree. Every
/// image must have features; extra feature entries are an error too.
EmbeddingDataset attach_labels(const EmbeddingDataset& features,
                               const std::vector<MvtecImage>& images);

struct ImportOptions {
  /// Empty means every category found under the image root.
  std::vector<std::string> categories;
  std::vector<std::string> splits = {"train", "test"};
};

/// For each category/split, reads `<features_root>/<category>/<split>` (an
/// archive produced by the extractor), labels it from the image tree and
/// writes `<out_root>/<category>/<split>`. Returns the written directories.
std::vector<std::filesystem::path> import_mvtec(const std::filesystem::path& image_root,
                                                const std::filesystem::path& features_root,
                                                const std::filesystem::path& out_root,
                                                const ImportOptions& options = {});

}  // namespace adrobust
