#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Cholesky>

#include "adrobust/error.hpp"
#include "adrobust/model_io.hpp"
#include "adrobust/scorers.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace adrobust;

namespace {

EmbeddingVector emb(std::vector<double> v, std::vector<LevelSlice> slices = {}) {
  if (slices.empty()) slices = {{"A", 0, v.size()}};
  return {std::move(v), std::move(slices)};
}

std::vector<EmbeddingVector> random_embeddings(std::size_t n, std::size_t d, Rng& rng) {
  std::vector<EmbeddingVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(d);
    for (auto& x : v) x = rng.normal();
    out.push_back(emb(std::move(v)));
  }
  return out;
}

// Identity precision, zero mean.
GaussianStats unit_gaussian(Eigen::Index d) {
  GaussianStats g;
  g.mean = Eigen::VectorXd::Zero(d);
  g.precision = Eigen::MatrixXd::Identity(d, d);
  return g;
}

const std::vector<std::string> kA = {"A"};
const std::vector<std::string> kAB = {"A", "B"};

std::vector<FeatureMapSet> random_sets(int n, const std::vector<LevelSpec>& levels, Rng& rng) {
  std::vector<FeatureMapSet> out;
  for (int i = 0; i < n; ++i) out.push_back(fixtures::random_maps("s" + std::to_string(i), levels, rng));
  return out;
}

}  // namespace

TEST_SUITE("knn") {

TEST_CASE("fit stores every vector") {
  const std::vector<EmbeddingVector> t = {emb({1, 1}), emb({1, 1}), emb({2, 0})};
  const auto m = knn_fit(t, 1);
  CHECK(m.size() == 3);
  CHECK(m.train.row(0) == m.train.row(1));
  CHECK_THROWS_AS(knn_fit(t, 5), InvalidArgument);
  CHECK_THROWS_AS(knn_fit(t, 0), InvalidArgument);
}

TEST_CASE("score examples") {
  const std::vector<EmbeddingVector> one = {emb({0, 0})};
  CHECK(knn_score(knn_fit(one, 1), emb({3, 4})) == 25.0);
  CHECK(knn_score(knn_fit(one, 1), emb({0, 0})) == 0.0);
  const std::vector<EmbeddingVector> two = {emb({0, 0}), emb({0, 2})};
  CHECK(knn_score(knn_fit(two, 2), emb({0, 1})) == 1.0);
  CHECK_THROWS_AS(knn_score(knn_fit(two, 2), emb({0, 1, 2})), DimensionMismatch);
}

TEST_CASE("matches brute force") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(3, 50));
    const auto d = static_cast<std::size_t>(rng.uniform_int(1, 8));
    const auto train = random_embeddings(n, d, rng);
    const auto q = random_embeddings(1, d, rng)[0];
    std::vector<oracle::Vec> rows;
    for (const auto& e : train) rows.push_back(e.values);
    for (int k = 1; k <= 3; ++k) {
      const double got = knn_score(knn_fit(train, k), q);
      CHECK(got == oracle::knn(rows, q.values, k));
      CHECK(got >= 0.0);
      CHECK(std::isfinite(got));
    }
  }
}

TEST_CASE("adding a training point never increases the k=1 score") {
  Rng rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    auto train = random_embeddings(static_cast<std::size_t>(rng.uniform_int(1, 20)), 4, rng);
    const auto q = random_embeddings(1, 4, rng)[0];
    const double before = knn_score(knn_fit(train, 1), q);
    train.push_back(random_embeddings(1, 4, rng)[0]);
    CHECK(knn_score(knn_fit(train, 1), q) <= before);
  }
}

}  // TEST_SUITE

TEST_SUITE("mahalanobis_scorer") {

TEST_CASE("constant single level") {
  std::vector<FeatureMapSet> train;
  for (int i = 0; i < 4; ++i) train.push_back({"x", {{"A", fixtures::tensor(2, 1, 1, {1.5f, -2.0f})}}});
  const auto m = maha_fit(train, kA, Estimator::empirical);
  REQUIRE(m.per_level.size() == 1);
  CHECK(m.per_level[0].stats.mean(0) == 1.5);
  CHECK(m.per_level[0].stats.covariance.isZero());
  CHECK(maha_score(m, train[0]) == 0.0);
}

TEST_CASE("one Gaussian per level in order, Ledoit-Wolf PD at n < p") {
  Rng rng(23);
  const std::vector<LevelSpec> levels = {{"A", {112, 2, 2}}, {"B", {20, 1, 1}}, {"C", {30, 1, 1}}};
  const auto train = random_sets(5, levels, rng);
  const std::vector<std::string> names = {"C", "A", "B"};
  const auto m = maha_fit(train, names, Estimator::ledoit_wolf);
  REQUIRE(m.per_level.size() == 3);
  for (std::size_t l = 0; l < 3; ++l) {
    CHECK(m.per_level[l].level == names[l]);
    Eigen::LLT<Eigen::MatrixXd> llt(m.per_level[l].stats.covariance);
    CHECK(llt.info() == Eigen::Success);
  }
  CHECK(m.per_level[1].stats.dim() == 112);
}

TEST_CASE("sum over levels with identity precision") {
  MahalanobisModel m;
  for (const char* n : {"A", "B", "C"}) m.per_level.push_back({n, unit_gaussian(2)});
  const auto y = emb({3, 4, 3, 4, 3, 4}, {{"A", 0, 2}, {"B", 2, 4}, {"C", 4, 6}});
  CHECK(maha_score_pooled(m, y) == doctest::Approx(15.0).epsilon(1e-15));
}

TEST_CASE("training mean scores zero and single level equals the distance") {
  Rng rng(24);
  const auto train = random_embeddings(30, 4, rng);
  std::vector<const EmbeddingVector*> ptrs;
  for (const auto& e : train) ptrs.push_back(&e);
  const auto m = maha_fit_pooled(ptrs, Estimator::empirical);
  const auto& g = m.per_level[0].stats;
  std::vector<double> mean(g.mean.data(), g.mean.data() + g.mean.size());
  CHECK(maha_score_pooled(m, emb(mean)) == doctest::Approx(0.0));
  const auto q = random_embeddings(1, 4, rng)[0];
  CHECK(maha_score_pooled(m, q) == mahalanobis(g, std::span<const double>(q.values)));
}

TEST_CASE("empirical estimator matches an explicit inverse") {
  Rng rng(25);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = static_cast<std::size_t>(rng.uniform_int(2, 6));
    const auto train = random_embeddings(3 * d + 10, d, rng);
    std::vector<const EmbeddingVector*> ptrs;
    oracle::Mat rows;
    for (const auto& e : train) {
      ptrs.push_back(&e);
      rows.push_back(e.values);
    }
    const auto m = maha_fit_pooled(ptrs, Estimator::empirical);
    const auto q = random_embeddings(1, d, rng)[0];
    const double ref = oracle::mahalanobis(oracle::column_means(rows), oracle::invert(oracle::mle_covariance(rows)),
                                           q.values);
    CHECK(maha_score_pooled(m, q) == doctest::Approx(ref).epsilon(1e-8));
  }
}

TEST_CASE("missing level at score time") {
  Rng rng(26);
  const auto train = random_sets(4, {{"A", {2, 1, 1}}, {"B", {2, 1, 1}}}, rng);
  const auto m = maha_fit(train, kAB, Estimator::ledoit_wolf);
  const FeatureMapSet only_a{"q", {train[0].levels[0]}};
  CHECK_THROWS_AS(maha_score(m, only_a), UnknownLevel);
}

}  // TEST_SUITE

TEST_SUITE("padim") {

TEST_CASE("1x1 grid equals a pooled Gaussian") {
  Rng rng(31);
  const auto train = random_sets(12, {{"A", {3, 1, 1}}}, rng);
  PadimOptions opts;
  opts.estimator = Estimator::empirical;
  opts.keep_covariance = true;
  const auto pm = padim_fit(train, kA, opts);
  const auto mm = maha_fit(train, kA, Estimator::empirical);
  REQUIRE(pm.per_location.size() == 1);
  CHECK((pm.at(0, 0).covariance - mm.per_level[0].stats.covariance).norm() < 1e-14);
  const auto q = fixtures::random_maps("q", {{"A", {3, 1, 1}}}, rng);
  const auto r = padim_score(pm, q);
  CHECK(r.score == doctest::Approx(maha_score(mm, q)).epsilon(1e-12));
  CHECK(r.image_id == "q");
}

TEST_CASE("structure: one Gaussian per location, covariance dropped by default") {
  Rng rng(32);
  const auto train = random_sets(6, {{"A", {2, 2, 2}}}, rng);
  const auto pm = padim_fit(train, kA);
  CHECK(pm.per_location.size() == 4);
  CHECK_FALSE(pm.at(1, 1).has_covariance());
  CHECK(pm.estimator == Estimator::ledoit_wolf);
}

TEST_CASE("identical locations give identical Gaussians") {
  Rng rng(33);
  std::vector<FeatureMapSet> train;
  for (int i = 0; i < 6; ++i) {
    Tensor3f t({2, 2, 2});
    const float a = static_cast<float>(rng.normal()), b = static_cast<float>(rng.normal());
    for (int h = 0; h < 2; ++h)
      for (int w = 0; w < 2; ++w) {
        t.at(0, h, w) = a;
        t.at(1, h, w) = b;
      }
    train.push_back({"s", {{"A", t}}});
  }
  const auto pm = padim_fit(train, kA);
  for (int loc = 1; loc < 4; ++loc) {
    CHECK(pm.per_location[loc].mean == pm.per_location[0].mean);
    CHECK(pm.per_location[loc].precision == pm.per_location[0].precision);
  }
}

TEST_CASE("score is the heatmap maximum") {
  PadimModel pm;
  pm.height = 2;
  pm.width = 2;
  pm.depth = 1;
  pm.level_slices = {{"A", 0, 1}};
  for (int i = 0; i < 4; ++i) pm.per_location.push_back(unit_gaussian(1));
  AlignedPatchGrid g;
  g.depth = 1;
  g.height = 2;
  g.width = 2;
  g.values = {1.0, -7.0, 3.0, 2.0};
  g.level_slices = pm.level_slices;
  const auto r = padim_score_aligned(pm, g);
  CHECK(r.score == 7.0);
  CHECK(r.heatmap->values == std::vector<double>{1.0, 7.0, 3.0, 2.0});
  g.values = {0, 0, 0, 0};
  CHECK(padim_score_aligned(pm, g).score == 0.0);
}

TEST_CASE("identity precision reduces to the largest local norm") {
  Rng rng(34);
  for (int trial = 0; trial < 20; ++trial) {
    const auto q = fixtures::random_maps("q", {{"A", {2, 3, 3}}, {"B", {3, 1, 1}}}, rng);
    const auto grid = align_concat(q, kAB);
    PadimModel pm;
    pm.height = grid.height;
    pm.width = grid.width;
    pm.depth = static_cast<std::size_t>(grid.depth);
    pm.level_slices = grid.level_slices;
    for (std::size_t l = 0; l < grid.locations(); ++l) pm.per_location.push_back(unit_gaussian(grid.depth));
    double best = 0.0;
    for (int i = 0; i < grid.height; ++i)
      for (int j = 0; j < grid.width; ++j) {
        double s = 0.0;
        for (double v : grid.location_vector(i, j)) s += v * v;
        best = std::max(best, std::sqrt(s));
      }
    const auto r = padim_score(pm, q);
    CHECK(r.score == doctest::Approx(best).epsilon(1e-12));
    CHECK(std::find(r.heatmap->values.begin(), r.heatmap->values.end(), r.score) != r.heatmap->values.end());
    for (double v : r.heatmap->values) CHECK(v <= r.score);
  }
}

TEST_CASE("channel subset is seeded, sorted and used") {
  const auto a = sample_channel_subset(20, 5, 9);
  CHECK(a == sample_channel_subset(20, 5, 9));
  CHECK(a.size() == 5);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
  CHECK_THROWS_AS(sample_channel_subset(4, 5, 0), InvalidArgument);
  Rng rng(35);
  const auto train = random_sets(8, {{"A", {6, 2, 2}}}, rng);
  PadimOptions opts;
  opts.channel_subset_size = 3;
  opts.subset_seed = 4;
  const auto pm = padim_fit(train, kA, opts);
  CHECK(pm.channel_subset.size() == 3);
  CHECK(pm.at(0, 0).dim() == 3);
  CHECK(std::isfinite(padim_score(pm, train[0]).score));
}

TEST_CASE("layout mismatch at score time") {
  Rng rng(36);
  const auto train = random_sets(4, {{"A", {2, 2, 2}}}, rng);
  const auto pm = padim_fit(train, kA);
  const auto other = fixtures::random_maps("bad", {{"A", {2, 3, 3}}}, rng);
  CHECK_THROWS_AS(padim_score(pm, other), ShapeMismatch);
}

}  // TEST_SUITE

TEST_SUITE("methods") {

TEST_CASE("method labels") {
  CHECK(parse_method("knn").kind == MethodKind::knn);
  const auto m = parse_method("mahalanobis");
  CHECK(m.kind == MethodKind::mahalanobis);
  CHECK(m.estimator == Estimator::ledoit_wolf);
  CHECK(parse_method("mahalanobis-empirical").estimator == Estimator::empirical);
  CHECK(parse_method("padim-empirical").kind == MethodKind::padim);
  CHECK(parse_method("padim-ledoit").label == "padim-ledoit");
  CHECK_THROWS_AS(parse_method("svm"), InvalidArgument);
}

}  // TEST_SUITE

TEST_SUITE("model_io") {

TEST_CASE("every model kind round-trips to identical scores") {
  Rng rng(41);
  const std::vector<LevelSpec> levels = {{"A", {3, 2, 2}}, {"B", {2, 1, 1}}};
  const auto train = random_sets(10, levels, rng);
  const auto probe = fixtures::random_maps("probe", levels, rng);
  for (const char* label : {"knn", "mahalanobis-empirical", "mahalanobis-ledoit", "padim-ledoit"}) {
    auto cfg = parse_method(label);
    cfg.levels = kAB;
    const auto model = fit_model(cfg, train);
    fixtures::TempDir tmp;
    save_model(model, tmp.path(), R"({"note":"x"})");
    const auto loaded = load_model(tmp.path());
    CHECK(model_kind(loaded) == cfg.kind);
    CHECK(model_levels(loaded) == kAB);
    CHECK(score_model(loaded, probe).score == score_model(model, probe).score);
    CHECK(load_model_metadata(tmp.path()).find("\"note\"") != std::string::npos);
  }
}

TEST_CASE("wrong magic bytes") {
  Rng rng(42);
  auto cfg = parse_method("knn");
  cfg.levels = kA;
  const auto train = random_sets(3, {{"A", {2, 1, 1}}}, rng);
  fixtures::TempDir tmp;
  save_model(fit_model(cfg, train), tmp.path());
  {
    std::fstream f(tmp / "tensors.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXXXXXX", 8);
  }
  CHECK_THROWS_AS(load_model(tmp.path()), FormatError);
  CHECK_THROWS_AS(save_model(fit_model(cfg, train), tmp.path(), "[1]"), InvalidArgument);
}

TEST_CASE("model fitted on (A,B) rejects a dataset exposing only A") {
  Rng rng(43);
  const auto train = random_sets(6, {{"A", {2, 2, 2}}, {"B", {2, 1, 1}}}, rng);
  const FeatureMapSet only_a{"q", {train[0].levels[0]}};
  for (const char* label : {"knn", "mahalanobis", "padim"}) {
    auto cfg = parse_method(label);
    cfg.levels = kAB;
    fixtures::TempDir tmp;
    save_model(fit_model(cfg, train), tmp.path());
    CHECK_THROWS_AS(score_model(load_model(tmp.path()), only_a), UnknownLevel);
  }
}

TEST_CASE("heatmap container and png") {
  Heatmap h{2, 3, {0.0, 1.0, 2.0, 3.0, 4.0, 5.5}};
  fixtures::TempDir tmp;
  save_heatmap(h, tmp / "hm");
  const auto back = load_heatmap(tmp / "hm");
  CHECK(back.height == 2);
  CHECK(back.values == h.values);
  write_heatmap_png(h, tmp / "hm.png");
  CHECK(std::filesystem::file_size(tmp / "hm.png") > 0);
}

}  // TEST_SUITE
