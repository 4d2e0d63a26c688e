#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "adrobust/error.hpp"
#include "adrobust/evaluation.hpp"
#include "adrobust/mvtec.hpp"
#include "adrobust/random.hpp"
#include "adrobust/report_io.hpp"
#include "adrobust/robustness.hpp"
#include "adrobust/synthetic.hpp"
#include "support/oracles.hpp"

using namespace adrobust;

namespace {

std::vector<ScoredLabel> scored(const std::vector<double>& normal, const std::vector<double>& anomalous) {
  std::vector<ScoredLabel> out;
  for (double s : normal) out.push_back({s, Label::normal});
  for (double s : anomalous) out.push_back({s, Label::anomalous});
  return out;
}

// Scores drawn from a small integer set so ties are frequent.
std::vector<ScoredLabel> random_scored(Rng& rng, std::vector<double>& normal, std::vector<double>& anomalous) {
  normal.clear();
  anomalous.clear();
  const auto nn = rng.uniform_int(1, 10), na = rng.uniform_int(1, 10);
  for (int i = 0; i < nn; ++i) normal.push_back(static_cast<double>(rng.uniform_int(0, 6)));
  for (int i = 0; i < na; ++i) anomalous.push_back(static_cast<double>(rng.uniform_int(0, 6)));
  auto s = scored(normal, anomalous);
  for (std::size_t i = s.size() - 1; i > 0; --i)
    std::swap(s[i], s[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)))]);
  return s;
}

RobustnessRecord record(const std::string& cat, const std::string& method, int n, int rep, double auc) {
  RobustnessRecord r;
  r.category = cat;
  r.method = method;
  r.n = n;
  r.replicate = rep;
  r.auc = auc;
  return r;
}

SyntheticSpec small_synthetic(std::uint64_t seed, int aug_factor = 0) {
  SyntheticSpec s;
  s.levels = {{"block4", {6, 2, 2}}, {"block6", {4, 1, 1}}};
  s.n_train = 16;
  s.n_test_normal = 8;
  s.n_test_anomalous = 8;
  s.aug_factor = aug_factor;
  s.seed = seed;
  return s;
}

std::vector<MethodConfig> three_methods() {
  std::vector<MethodConfig> out;
  for (const char* l : {"knn", "mahalanobis-ledoit", "padim-ledoit"}) {
    auto m = parse_method(l);
    m.levels = {"block4", "block6"};
    out.push_back(m);
  }
  return out;
}

std::string csv(const RobustnessReport& r) {
  std::ostringstream os;
  write_records_csv(r, os);
  return os.str();
}

}  // namespace

TEST_SUITE("roc_auc") {

TEST_CASE("examples") {
  CHECK(roc_auc(scored({0, 1}, {2, 3})) == 1.0);
  CHECK(roc_auc(scored({1, 3}, {2, 4})) == 0.75);
  CHECK(roc_auc(scored({1, 1}, {1, 1})) == 0.5);
  CHECK_THROWS_AS(roc_auc(scored({1, 2}, {})), UndefinedMetric);
  CHECK_THROWS_AS(roc_auc(scored({}, {1})), UndefinedMetric);
}

TEST_CASE("equals pair counting") {
  Rng rng(1);
  std::vector<double> n, a;
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = random_scored(rng, n, a);
    CHECK(roc_auc(s) == oracle::auc_pairs(n, a));
  }
}

TEST_CASE("invariant under increasing transforms") {
  Rng rng(2);
  std::vector<double> n, a;
  for (int trial = 0; trial < 100; ++trial) {
    auto s = random_scored(rng, n, a);
    const double base = roc_auc(s);
    for (auto f : {+[](double x) { return std::exp(x); }, +[](double x) { return 10.0 * x; },
                   +[](double x) { return x + 7.0; }}) {
      auto t = s;
      for (auto& e : t) e.score = f(e.score);
      CHECK(roc_auc(t) == base);
    }
  }
}

TEST_CASE("flipping labels complements the AUC") {
  Rng rng(3);
  std::vector<double> n, a;
  for (int trial = 0; trial < 100; ++trial) {
    auto s = random_scored(rng, n, a);
    const double base = roc_auc(s);
    for (auto& e : s) e.label = e.label == Label::normal ? Label::anomalous : Label::normal;
    CHECK(roc_auc(s) == doctest::Approx(1.0 - base).epsilon(1e-15));
  }
}

}  // TEST_SUITE

TEST_SUITE("sample_grid") {

TEST_CASE("grid rule") {
  CHECK(build_sample_grid(60) == std::vector<int>{5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 60});
  CHECK(build_sample_grid(12) == std::vector<int>{5, 10, 12});
  CHECK(build_sample_grid(5) == std::vector<int>{5});
  CHECK(build_sample_grid(3) == std::vector<int>{3});
  CHECK(build_sample_grid(73) == std::vector<int>{5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 60, 70, 73});
  CHECK_THROWS_AS(build_sample_grid(0), InvalidArgument);
}

TEST_CASE("grid is strictly increasing and ends at n_max") {
  for (int n = 1; n <= 400; ++n) {
    const auto g = build_sample_grid(n);
    CHECK(g.back() == n);
    CHECK(std::adjacent_find(g.begin(), g.end(), std::greater_equal<>()) == g.end());
  }
}

}  // TEST_SUITE

TEST_SUITE("curve_area") {

TEST_CASE("constant curves return the constant") {
  const std::vector<CurvePoint> one = {{0.1, 1.0}, {0.5, 1.0}, {1.0, 1.0}};
  CHECK(normalized_curve_area(one) == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<CurvePoint> half = {{0.2, 0.5}, {1.0, 0.5}};
  CHECK(normalized_curve_area(half) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("trapezoid by hand, order independent") {
  const std::vector<CurvePoint> pts = {{1.0, 1.0}, {0.5, 0.8}};
  CHECK(normalized_curve_area(pts) == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("degenerate inputs") {
  const std::vector<CurvePoint> single = {{1.0, 0.7}};
  CHECK_THROWS_AS(normalized_curve_area(single), UndefinedMetric);
  const std::vector<CurvePoint> dup = {{0.5, 0.7}, {0.5, 0.8}, {1.0, 0.9}};
  CHECK_THROWS_AS(normalized_curve_area(dup), InvalidArgument);
}

TEST_CASE("area lies between the extreme values") {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<CurvePoint> pts;
    std::set<double> xs;
    const auto k = rng.uniform_int(2, 12);
    while (static_cast<std::int64_t>(xs.size()) < k) xs.insert(rng.uniform_real(0.0, 1.0));
    for (double x : xs) pts.push_back({x, rng.uniform_real(0.3, 1.0)});
    const double area = normalized_curve_area(pts);
    const auto [lo, hi] = std::minmax_element(pts.begin(), pts.end(),
                                              [](const CurvePoint& a, const CurvePoint& b) { return a.y < b.y; });
    CHECK(area >= lo->y - 1e-12);
    CHECK(area <= hi->y + 1e-12);
  }
}

}  // TEST_SUITE

TEST_SUITE("groups") {

TEST_CASE("texture group") {
  CHECK(texture_categories().size() == 5);
  CHECK(is_texture("carpet"));
  CHECK_FALSE(is_texture("bottle"));
  CHECK(parse_group("objects") == CategoryGroup::objects);
  CHECK_THROWS_AS(parse_group("things"), InvalidArgument);
}

TEST_CASE("public MVTec counts add up to the paper's training total") {
  int total = 0;
  for (const auto& [name, n] : mvtec_train_counts()) total += n;
  CHECK(mvtec_train_counts().size() == 15);
  CHECK(total == 3629);
}

TEST_CASE("aggregate over groups with exclusions") {
  RobustnessReport report;
  for (const auto& [name, n] : mvtec_train_counts()) {
    report.n_max[name] = 20;
    for (int size : {5, 10, 20}) report.records.push_back(record(name, "knn", size, 0, is_texture(name) ? 0.9 : 0.6));
  }
  const auto tex = aggregate(report, CategoryGroup::textures);
  CHECK(tex.categories.size() == 5);
  REQUIRE(tex.areas.size() == 1);
  CHECK(tex.areas[0].mean_area == doctest::Approx(0.9));
  const std::vector<std::string> excl = {"toothbrush"};
  const auto obj = aggregate(report, CategoryGroup::objects, excl);
  CHECK(obj.categories.size() == 9);
  CHECK(obj.areas[0].n_categories == 9);
  CHECK(aggregate(report, CategoryGroup::all).categories.size() == 15);
}

TEST_CASE("a single-category group equals that category") {
  RobustnessReport report;
  report.n_max["carpet"] = 10;
  report.records = {record("carpet", "knn", 5, 0, 0.7), record("carpet", "knn", 5, 1, 0.9),
                    record("carpet", "knn", 10, 0, 0.95)};
  const auto agg = aggregate(report, CategoryGroup::textures);
  CHECK(agg.areas[0].mean_area == doctest::Approx(auc_percent_area(report, "carpet", "knn")).epsilon(1e-15));
  REQUIRE(agg.curve.size() == 2);
  CHECK(agg.curve[0].mean_auc == doctest::Approx(0.8));
  CHECK(mean_auc(report, "carpet", "knn", 0, 5) == doctest::Approx(0.8));
  const auto curve = auc_percent_curve(report, "carpet", "knn");
  CHECK(curve.front().x == 0.5);
  CHECK(auc_percent_area(report, "carpet", "knn") == doctest::Approx(0.875));
  CHECK_THROWS_AS(aggregate(report, CategoryGroup::objects), InvalidArgument);
}

}  // TEST_SUITE

TEST_SUITE("robustness") {

TEST_CASE("cell seeds depend on every coordinate") {
  const auto s = cell_seed(1, "carpet", 5, 0);
  CHECK(s == cell_seed(1, "carpet", 5, 0));
  CHECK(s != cell_seed(2, "carpet", 5, 0));
  CHECK(s != cell_seed(1, "tile", 5, 0));
  CHECK(s != cell_seed(1, "carpet", 10, 0));
  CHECK(s != cell_seed(1, "carpet", 5, 1));
}

TEST_CASE("dry-run count on MVTec follows the grid rule") {
  RobustnessRunSpec spec;
  spec.replicates = 5;
  spec.methods = {parse_method("knn")};
  const auto& counts = mvtec_train_counts();
  const auto plan = plan_robustness(counts, spec);
  // Hand count: 10 grid points up to 50, then one per 10 above, plus N_max when
  // it is not on the grid; 442 sizes over the 15 categories.
  CHECK(planned_model_count(plan) == 2210);
  // The published 3094 is not a multiple of M = 5, so no grid reproduces it.
  CHECK(3094 % spec.replicates != 0);
}

TEST_CASE("same index sets across methods; sets are valid subsets") {
  const auto data = make_synthetic(small_synthetic(3));
  const std::vector<CategoryInput> cats = {{"synthetic", &data.train, &data.test}};
  RobustnessRunSpec spec;
  spec.sample_grid = {5, 10};
  spec.replicates = 3;
  spec.master_seed = 17;
  spec.methods = three_methods();
  const auto report = run_robustness(cats, spec);
  CHECK(report.records.size() == 2 * 3 * 3);
  for (const auto& a : report.records) {
    CHECK(a.train_indices.size() == static_cast<std::size_t>(a.n));
    CHECK(std::is_sorted(a.train_indices.begin(), a.train_indices.end()));
    CHECK(std::adjacent_find(a.train_indices.begin(), a.train_indices.end()) == a.train_indices.end());
    CHECK(a.train_indices.back() < 16);
    CHECK(a.auc >= 0.0);
    CHECK(a.auc <= 1.0);
    for (const auto& b : report.records)
      if (a.n == b.n && a.replicate == b.replicate) CHECK(a.train_indices == b.train_indices);
  }
  CHECK(report.records[0].train_indices != report.records[3].train_indices);
}

TEST_CASE("two runs are byte-identical, also with more jobs") {
  const auto data = make_synthetic(small_synthetic(5));
  const std::vector<CategoryInput> cats = {{"synthetic", &data.train, &data.test}};
  RobustnessRunSpec spec;
  spec.sample_grid = {5, 10, 15};
  spec.replicates = 2;
  spec.master_seed = 99;
  spec.methods = three_methods();
  const auto a = csv(run_robustness(cats, spec));
  spec.jobs = 3;
  const auto b = csv(run_robustness(cats, spec));
  CHECK(a == b);
  CHECK(report_json(run_robustness(cats, spec)) == report_json(run_robustness(cats, spec)));
}

TEST_CASE("grid [N_max] with one replicate equals a direct fit") {
  const auto data = make_synthetic(small_synthetic(7));
  const std::vector<CategoryInput> cats = {{"synthetic", &data.train, &data.test}};
  RobustnessRunSpec spec;
  spec.sample_grid = {16};
  spec.replicates = 1;
  spec.methods = three_methods();
  const auto report = run_robustness(cats, spec);
  REQUIRE(report.records.size() == 3);
  std::vector<FeatureMapSet> train;
  for (std::size_t i = 0; i < data.train.size(); ++i) train.push_back(data.train.features(i));
  for (std::size_t mi = 0; mi < 3; ++mi) {
    const auto model = fit_model(spec.methods[mi], train);
    std::vector<ScoredLabel> s;
    for (std::size_t i = 0; i < data.test.size(); ++i)
      s.push_back({score_model(model, data.test.features(i)).score, data.test.samples()[i].label});
    CHECK(report.records[mi].auc == roc_auc(s));
    CHECK(report.records[mi].fit_size == 16);
  }
}

TEST_CASE("oversized grid entries are skipped with a warning") {
  const auto data = make_synthetic(small_synthetic(9));
  const std::vector<CategoryInput> cats = {{"synthetic", &data.train, &data.test}};
  RobustnessRunSpec spec;
  spec.sample_grid = {5, 40};
  spec.replicates = 1;
  spec.methods = {parse_method("knn")};
  spec.methods[0].levels = {"block4"};
  const auto report = run_robustness(cats, spec);
  CHECK(report.records.size() == 1);
  CHECK(report.warnings.size() == 1);
}

TEST_CASE("augmentation factors reuse the same originals") {
  const auto data = make_synthetic(small_synthetic(11, 2));
  const std::vector<CategoryInput> cats = {{"synthetic", &data.train, &data.test}};
  CHECK(original_indices(data.train).size() == 16);
  RobustnessRunSpec spec;
  spec.sample_grid = {5};
  spec.replicates = 1;
  spec.aug_factors = {0, 2};
  spec.methods = {three_methods()[1]};
  auto report = run_robustness(cats, spec);
  REQUIRE(report.records.size() == 2);
  CHECK(report.records[0].fit_size == 5);
  CHECK(report.records[1].fit_size == 15);
  CHECK(report.records[0].train_indices == report.records[1].train_indices);
  spec.keep_originals = false;
  spec.aug_factors = {1};
  report = run_robustness(cats, spec);
  CHECK(report.records[0].fit_size == 5);
}

TEST_CASE("spec validation") {
  RobustnessRunSpec spec;
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);  // no methods
  spec.methods = {parse_method("knn")};
  spec.replicates = 0;
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
  spec.replicates = 1;
  spec.aug_factors = {-1};
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
}

TEST_CASE("report outputs") {
  const auto data = make_synthetic(small_synthetic(13));
  const std::vector<CategoryInput> cats = {{"synthetic", &data.train, &data.test}};
  RobustnessRunSpec spec;
  spec.sample_grid = {5, 10};
  spec.replicates = 1;
  spec.methods = three_methods();
  const auto report = run_robustness(cats, spec);
  const auto text = csv(report);
  CHECK(text.rfind("category,", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 7);
  std::ostringstream t;
  write_timings_csv(report, t);
  CHECK(t.str().find("fit_seconds") != std::string::npos);
  CHECK(render_svg(report, "synthetic").find("<svg") != std::string::npos);
  CHECK(report_json(report).find("\"conventions\"") != std::string::npos);
}

}  // TEST_SUITE
