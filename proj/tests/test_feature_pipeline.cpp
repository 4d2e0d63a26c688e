#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "adrobust/error.hpp"
#include "adrobust/feature_pipeline.hpp"
#include "support/fixtures.hpp"

using namespace adrobust;
using fixtures::tensor;

namespace {

FeatureMapSet maps(std::vector<FeatureLevel> levels) { return FeatureMapSet{"img", std::move(levels)}; }

const std::vector<std::string> kA = {"A"};
const std::vector<std::string> kAB = {"A", "B"};
const std::vector<std::string> kBA = {"B", "A"};

}  // namespace

TEST_SUITE("feature_pipeline") {

TEST_CASE("default taps") { CHECK(default_levels() == std::vector<std::string>{"block4", "block6", "block7"}); }

TEST_CASE("constant maps pool to their constants") {
  auto fm = maps({{"A", tensor(2, 3, 3, std::vector<float>(18, 0.0f))}});
  for (int h = 0; h < 3; ++h)
    for (int w = 0; w < 3; ++w) {
      fm.levels[0].tensor.at(0, h, w) = 3.0f;
      fm.levels[0].tensor.at(1, h, w) = -1.0f;
    }
  const auto v = global_average_pool(fm, kA);
  CHECK(v.values == std::vector<double>{3.0, -1.0});
  CHECK(v.level_slices == std::vector<LevelSlice>{{"A", 0, 2}});
}

TEST_CASE("arithmetic mean of one channel") {
  const auto v = global_average_pool(maps({{"A", tensor(1, 2, 2, {1, 2, 3, 4})}}), kA);
  CHECK(v.values == std::vector<double>{2.5});
}

TEST_CASE("concatenation follows the requested order") {
  const auto fm = maps({{"A", tensor(1, 1, 2, {4, 6})}, {"B", tensor(1, 1, 1, {7})}});
  CHECK(global_average_pool(fm, kAB).values == std::vector<double>{5.0, 7.0});
  const auto ba = global_average_pool(fm, kBA);
  CHECK(ba.values == std::vector<double>{7.0, 5.0});
  CHECK(ba.slice("A").begin == 1);
  CHECK_THROWS_AS(ba.slice("C"), UnknownLevel);
}

TEST_CASE("missing level is an error") {
  const auto fm = maps({{"A", tensor(1, 1, 1, {1})}});
  CHECK_THROWS_AS(global_average_pool(fm, kAB), UnknownLevel);
  CHECK_THROWS_AS(align_concat(fm, kAB), UnknownLevel);
}

TEST_CASE("single level alignment is the identity") {
  adrobust::Rng rng(3);
  const auto fm = maps({{"A", fixtures::random_tensor(3, 2, 4, rng)}});
  const auto g = align_concat(fm, kA);
  CHECK(g.depth == 3);
  CHECK(g.height == 2);
  CHECK(g.width == 4);
  const auto& src = fm.levels[0].tensor.values();
  REQUIRE(g.values.size() == src.size());
  for (std::size_t i = 0; i < src.size(); ++i) CHECK(g.values[i] == static_cast<double>(src[i]));
}

TEST_CASE("coarse level is replicated onto the fine grid") {
  const auto fm = maps({{"A", tensor(1, 2, 2, {1, 2, 3, 4})}, {"B", tensor(1, 1, 1, {9})}});
  const auto g = align_concat(fm, kAB);
  CHECK(g.height == 2);
  CHECK(g.width == 2);
  CHECK(g.location_vector(0, 0) == std::vector<double>{1, 9});
  CHECK(g.location_vector(0, 1) == std::vector<double>{2, 9});
  CHECK(g.location_vector(1, 0) == std::vector<double>{3, 9});
  CHECK(g.location_vector(1, 1) == std::vector<double>{4, 9});
}

TEST_CASE("largest grid wins regardless of order") {
  const auto fm = maps({{"A", tensor(1, 2, 2, {1, 2, 3, 4})}, {"B", tensor(1, 1, 1, {9})}});
  const auto g = align_concat(fm, kBA);
  CHECK(g.height == 2);
  CHECK(g.location_vector(1, 1) == std::vector<double>{9, 4});
}

TEST_CASE("pooling the aligned grid matches global pooling for block replication") {
  adrobust::Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int h = static_cast<int>(rng.uniform_int(1, 3));
    const int w = static_cast<int>(rng.uniform_int(1, 3));
    const int f = static_cast<int>(rng.uniform_int(1, 3));
    const auto fm = maps({{"A", fixtures::random_tensor(2, h * f, w * f, rng)},
                          {"B", fixtures::random_tensor(3, h, w, rng)}});
    const auto pooled = global_average_pool(fm, kAB);
    const auto g = align_concat(fm, kAB);
    for (int d = 0; d < g.depth; ++d) {
      double s = 0.0;
      for (int i = 0; i < g.height; ++i)
        for (int j = 0; j < g.width; ++j) s += g.at(d, i, j);
      CHECK(s / static_cast<double>(g.locations()) == doctest::Approx(pooled.values[d]).epsilon(1e-12));
    }
  }
}

TEST_CASE("pooling is linear in a scalar") {
  adrobust::Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    auto fm = maps({{"A", fixtures::random_tensor(4, 3, 5, rng)}});
    const float alpha = static_cast<float>(rng.uniform_real(-4.0, 4.0));
    const auto base = global_average_pool(fm, kA);
    for (auto& v : fm.levels[0].tensor.values()) v *= alpha;
    const auto scaled = global_average_pool(fm, kA);
    for (std::size_t c = 0; c < base.dim(); ++c)
      CHECK(scaled.values[c] == doctest::Approx(alpha * base.values[c]).epsilon(1e-5));
  }
}

TEST_CASE("spatial permutation leaves pooling unchanged") {
  adrobust::Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int h = 3, w = 4, c = 2;
    auto fm = maps({{"A", fixtures::random_tensor(c, h, w, rng)}});
    const auto base = global_average_pool(fm, kA);
    std::vector<int> perm(h * w);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size() - 1; i > 0; --i)
      std::swap(perm[i], perm[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)))]);
    Tensor3f shuffled({c, h, w});
    for (int ch = 0; ch < c; ++ch)
      for (int p = 0; p < h * w; ++p)
        shuffled.at(ch, perm[p] / w, perm[p] % w) = fm.levels[0].tensor.at(ch, p / w, p % w);
    fm.levels[0].tensor = shuffled;
    const auto after = global_average_pool(fm, kA);
    for (std::size_t i = 0; i < base.dim(); ++i)
      CHECK(after.values[i] == doctest::Approx(base.values[i]).epsilon(1e-12));
  }
}

TEST_CASE("aligned slices read the nearest source location") {
  adrobust::Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const int ha = static_cast<int>(rng.uniform_int(1, 6)), wa = static_cast<int>(rng.uniform_int(1, 6));
    const int hb = static_cast<int>(rng.uniform_int(1, 6)), wb = static_cast<int>(rng.uniform_int(1, 6));
    const auto fm = maps({{"A", fixtures::random_tensor(2, ha, wa, rng)},
                          {"B", fixtures::random_tensor(1, hb, wb, rng)}});
    const auto g = align_concat(fm, kAB);
    const bool a_target = ha * wa >= hb * wb;
    CHECK(g.height == (a_target ? ha : hb));
    for (int i = 0; i < g.height; ++i)
      for (int j = 0; j < g.width; ++j) {
        const auto v = g.location_vector(i, j);
        const auto& ta = fm.levels[0].tensor;
        const auto& tb = fm.levels[1].tensor;
        const int ia = nearest_source_index(i, ha, g.height), ja = nearest_source_index(j, wa, g.width);
        const int ib = nearest_source_index(i, hb, g.height), jb = nearest_source_index(j, wb, g.width);
        CHECK(v[0] == static_cast<double>(ta.at(0, ia, ja)));
        CHECK(v[1] == static_cast<double>(ta.at(1, ia, ja)));
        CHECK(v[2] == static_cast<double>(tb.at(0, ib, jb)));
      }
  }
}

}  // TEST_SUITE
