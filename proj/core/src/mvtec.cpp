#include "adrobust/mvtec.hpp"

#include <algorithm>
#include <set>

#include "adrobust/error.hpp"

namespace adrobust {

namespace fs = std::filesystem;

namespace {

bool is_image_file(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png";
}

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (directories ? entry.is_directory() : (entry.is_regular_file() && is_image_file(entry.path()))) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

const std::vector<std::pair<std::string, int>>& mvtec_train_counts() {
  static const std::vector<std::pair<std::string, int>> counts = {
      {"bottle", 209},     {"cable", 224}, {"capsule", 219},    {"carpet", 280}, {"grid", 264},
      {"hazelnut", 391},   {"leather", 245}, {"metal_nut", 220}, {"pill", 267},  {"screw", 320},
      {"tile", 230},       {"toothbrush", 60}, {"transistor", 213}, {"wood", 247}, {"zipper", 240}};
  return counts;
}

std::vector<std::string> list_mvtec_categories(const fs::path& root) {
  if (!fs::is_directory(root)) throw FormatError("'" + root.string() + "' is not a directory");
  std::vector<std::string> out;
  for (const auto& dir : sorted_entries(root, true)) {
    if (fs::is_directory(dir / "train")) out.push_back(dir.filename().string());
  }
  return out;
}

std::vector<MvtecImage> scan_mvtec_split(const fs::path& root, const std::string& category,
                                         const std::string& split) {
  const fs::path split_dir = root / category / split;
  if (split == "train" && !fs::is_directory(split_dir / "good")) {
    throw FormatError("missing '" + (split_dir / "good").string() + "'");
  }
  if (!fs::is_directory(split_dir)) throw FormatError("missing '" + split_dir.string() + "'");

  std::vector<MvtecImage> images;
  for (const auto& defect_dir : sorted_entries(split_dir, true)) {
    const std::string defect = defect_dir.filename().string();
    if (split == "train" && defect != "good") {
      throw FormatError("training split of '" + category + "' contains non-normal folder '" + defect + "'");
    }
    for (const auto& file : sorted_entries(defect_dir, false)) {
      images.push_back({category, split, defect, file, defect + "/" + file.stem().string()});
    }
  }
  return images;
}

EmbeddingDataset attach_labels(const EmbeddingDataset& features, const std::vector<MvtecImage>& images) {
  std::vector<LabeledSample> samples;
  std::vector<FeatureMapSet> maps;
  samples.reserve(images.size());
  maps.reserve(images.size());
  std::set<std::string> used;
  for (const auto& img : images) {
    if (!features.index_of(img.image_id)) {
      throw SampleError(img.image_id, "no features for image '" + img.image_id + "' (" +
                                          img.path.string() + ")");
    }
    samples.push_back({img.image_id, label_from_defect(img.defect_type), img.defect_type, img.category});
    maps.push_back(features.features(img.image_id));
    used.insert(img.image_id);
  }
  for (const auto& s : features.samples()) {
    if (!used.count(s.image_id)) {
      throw SampleError(s.image_id, "features for '" + s.image_id + "' have no matching image");
    }
  }
  DatasetManifest manifest = features.manifest();
  if (!images.empty()) manifest.category = images.front().category;
  return EmbeddingDataset(std::move(manifest), std::move(samples), std::move(maps));
}

std::vector<fs::path> import_mvtec(const fs::path& image_root, const fs::path& features_root,
                                   const fs::path& out_root, const ImportOptions& options) {
  std::vector<std::string> categories = options.categories;
  if (categories.empty()) categories = list_mvtec_categories(image_root);
  if (categories.empty()) {
    throw FormatError("no MVTec categories under '" + image_root.string() + "'");
  }
  std::vector<fs::path> written;
  for (const auto& category : categories) {
    if (!fs::is_directory(image_root / category)) {
      throw FormatError("category '" + category + "' not found under '" + image_root.string() + "'");
    }
    for (const auto& split : options.splits) {
      const auto images = scan_mvtec_split(image_root, category, split);
      const auto features = load_dataset(features_root / category / split);
      const auto labelled = attach_labels(features, images);
      const fs::path out = out_root / category / split;
      save_dataset(labelled, out);
      written.push_back(out);
    }
  }
  return written;
}

}  // namespace adrobust
