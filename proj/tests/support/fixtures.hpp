#pragma once

// Small builders shared by the test suites.

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "adrobust/embedding_store.hpp"
#include "adrobust/random.hpp"
#include "adrobust/tensor.hpp"

namespace fixtures {

inline adrobust::Tensor3f tensor(int c, int h, int w, std::vector<float> values) {
  return adrobust::Tensor3f({c, h, w}, std::move(values));
}

inline adrobust::Tensor3f random_tensor(int c, int h, int w, adrobust::Rng& rng) {
  adrobust::Tensor3f t({c, h, w});
  for (auto& v : t.values()) v = static_cast<float>(rng.normal());
  return t;
}

/// FeatureMapSet with levels of the given shapes filled with N(0,1) noise.
inline adrobust::FeatureMapSet random_maps(const std::string& id,
                                           const std::vector<adrobust::LevelSpec>& levels,
                                           adrobust::Rng& rng) {
  adrobust::FeatureMapSet fm;
  fm.image_id = id;
  for (const auto& l : levels) {
    fm.levels.push_back({l.name, random_tensor(l.shape.channels, l.shape.height, l.shape.width, rng)});
  }
  return fm;
}

inline adrobust::EmbeddingDataset random_dataset(const std::vector<adrobust::LevelSpec>& levels,
                                                 int n_normal, int n_anomalous, std::uint64_t seed,
                                                 const std::string& category = "widget") {
  adrobust::Rng rng(seed);
  adrobust::DatasetManifest m;
  m.category = category;
  m.extractor = "test";
  m.input_height = 380;
  m.input_width = 380;
  m.levels = levels;
  std::vector<adrobust::LabeledSample> samples;
  std::vector<adrobust::FeatureMapSet> maps;
  for (int i = 0; i < n_normal + n_anomalous; ++i) {
    const bool normal = i < n_normal;
    const std::string id = (normal ? "good/" : "crack/") + std::to_string(i);
    samples.push_back({id, normal ? adrobust::Label::normal : adrobust::Label::anomalous,
                       normal ? "good" : "crack", category});
    maps.push_back(random_maps(id, levels, rng));
  }
  return adrobust::EmbeddingDataset(m, std::move(samples), std::move(maps));
}

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, adrobust::Rng& rng) {
  Eigen::MatrixXd x(rows, cols);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  return x;
}

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 gen(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("adrobust-test-" + std::to_string(gen()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
