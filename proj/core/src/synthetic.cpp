#include "adrobust/synthetic.hpp"

#include <cstdio>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "adrobust/augmentation.hpp"
#include "adrobust/error.hpp"
#include "adrobust/random.hpp"

namespace adrobust {

namespace {

struct LevelModel {
  Eigen::MatrixXd chol;   // lower Cholesky factor of Sigma
  Eigen::VectorXd sigma;  // per-channel standard deviation
};

LevelModel make_level_model(int channels, Rng& rng) {
  Eigen::MatrixXd g(channels, channels);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.normal();
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  Eigen::VectorXd lambda(channels);
  for (int c = 0; c < channels; ++c) lambda[c] = rng.uniform_real(0.5, 2.0);
  const Eigen::MatrixXd sigma = q * lambda.asDiagonal() * q.transpose();
  return {Eigen::LLT<Eigen::MatrixXd>(sigma).matrixL(), sigma.diagonal().cwiseSqrt()};
}

std::string numbered(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s/%03d", prefix, i);
  return buf;
}

FeatureMapSet draw(const std::string& id, const std::vector<LevelSpec>& levels,
                   const std::vector<LevelModel>& models, double shift, Rng& rng) {
  FeatureMapSet fm;
  fm.image_id = id;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto& shape = levels[l].shape;
    Tensor3f t(shape);
    Eigen::VectorXd z(shape.channels);
    for (int i = 0; i < shape.height; ++i) {
      for (int j = 0; j < shape.width; ++j) {
        for (int c = 0; c < shape.channels; ++c) z[c] = rng.normal();
        const Eigen::VectorXd x = models[l].chol * z + shift * models[l].sigma;
        for (int c = 0; c < shape.channels; ++c) t.at(c, i, j) = static_cast<float>(x[c]);
      }
    }
    fm.levels.push_back({levels[l].name, std::move(t)});
  }
  return fm;
}

}  // namespace

SyntheticSplits make_synthetic(const SyntheticSpec& spec) {
  if (spec.levels.empty()) throw InvalidArgument("synthetic dataset needs at least one level");
  if (spec.n_train < 1 || spec.n_test_normal < 1 || spec.n_test_anomalous < 1 || spec.aug_factor < 0) {
    throw InvalidArgument("synthetic dataset sizes must be positive");
  }
  Rng rng(mix_seed({spec.seed, hash_string(spec.category)}));
  std::vector<LevelModel> models;
  for (const auto& l : spec.levels) models.push_back(make_level_model(l.shape.channels, rng));

  DatasetManifest manifest;
  manifest.category = spec.category;
  manifest.extractor = "synthetic-gaussian";
  manifest.levels = spec.levels;

  std::vector<LabeledSample> train_samples;
  std::vector<FeatureMapSet> train_maps;
  for (int i = 0; i < spec.n_train; ++i) {
    const auto id = numbered("good", i);
    train_samples.push_back({id, Label::normal, "good", spec.category});
    train_maps.push_back(draw(id, spec.levels, models, 0.0, rng));
  }
  const int originals = spec.n_train;
  for (int i = 0; i < originals; ++i) {
    for (int r = 1; r <= spec.aug_factor; ++r) {
      FeatureMapSet fm = train_maps[static_cast<std::size_t>(i)];
      fm.image_id = augmented_id(fm.image_id, r);
      for (std::size_t l = 0; l < fm.levels.size(); ++l) {
        auto& t = fm.levels[l].tensor;
        for (int c = 0; c < t.channels(); ++c) {
          const double s = spec.aug_noise * models[l].sigma[c];
          for (int h = 0; h < t.height(); ++h) {
            for (int w = 0; w < t.width(); ++w) t.at(c, h, w) += static_cast<float>(s * rng.normal());
          }
        }
      }
      train_samples.push_back({fm.image_id, Label::normal, "good", spec.category});
      train_maps.push_back(std::move(fm));
    }
  }

  std::vector<LabeledSample> test_samples;
  std::vector<FeatureMapSet> test_maps;
  for (int i = 0; i < spec.n_test_normal; ++i) {
    const auto id = numbered("good", i);
    test_samples.push_back({id, Label::normal, "good", spec.category});
    test_maps.push_back(draw(id, spec.levels, models, 0.0, rng));
  }
  for (int i = 0; i < spec.n_test_anomalous; ++i) {
    const auto id = numbered("shift", i);
    test_samples.push_back({id, Label::anomalous, "shift", spec.category});
    test_maps.push_back(draw(id, spec.levels, models, spec.shift_sigma, rng));
  }
  return {EmbeddingDataset(manifest, std::move(train_samples), std::move(train_maps)),
          EmbeddingDataset(manifest, std::move(test_samples), std::move(test_maps))};
}

}  // namespace adrobust
