#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "adrobust/augmentation.hpp"
#include "adrobust/embedding_store.hpp"
#include "adrobust/error.hpp"
#include "adrobust/evaluation.hpp"
#include "adrobust/image.hpp"
#include "adrobust/model_io.hpp"
#include "adrobust/mvtec.hpp"
#include "adrobust/report_io.hpp"
#include "adrobust/robustness.hpp"
#include "adrobust/scorers.hpp"
#include "adrobust/synthetic.hpp"

#ifndef ADROBUST_VERSION
#define ADROBUST_VERSION "unknown"
#endif

namespace adrobust::cli {

using nlohmann::json;

namespace {

std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const fs::path& file, const std::string& text) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + file.string() + "'");
}

void require_dir(const fs::path& p, const char* what) {
  if (p.empty()) throw InvalidArgument(std::string("missing ") + what);
  if (!fs::is_directory(p)) throw InvalidArgument(std::string(what) + " '" + p.string() + "' is not a directory");
}

void require_out(const fs::path& p) {
  if (p.empty()) throw InvalidArgument("missing output directory (--out)");
  fs::create_directories(p);
}

void write_run_manifest(const fs::path& out, const std::string& command, json options, const RunInfo& info,
                        json results) {
  json j;
  j["format_version"] = 1;
  j["tool"] = "adrobust";
  j["version"] = ADROBUST_VERSION;
  j["command"] = command;
  j["options"] = std::move(options);
  j["args"] = info.args;
  if (!info.config_text.empty()) {
    j["config_file"] = {{"path", info.config_path}, {"content", json::parse(info.config_text)}};
  }
  j["results"] = std::move(results);
  write_file(out / kRunManifest, j.dump(2) + "\n");
}

std::string id_from_path(const fs::path& rel) {
  fs::path p = rel;
  p.replace_extension();
  return p.generic_string();
}

/// PNG files under `root`, relative paths in sorted order.
std::vector<fs::path> list_pngs(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") out.push_back(fs::relative(e.path(), root));
  }
  std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) {
    return a.generic_string() < b.generic_string();
  });
  return out;
}

std::string safe_name(std::string id) {
  std::replace(id.begin(), id.end(), '/', '_');
  return id;
}

/// Checks that two archives come from the same extractor weights when both say.
void check_fingerprints(const std::string& a, const std::string& b, const std::string& what) {
  if (!a.empty() && !b.empty() && a != b) {
    throw InvalidArgument(what + ": extractor fingerprints differ ('" + a + "' vs '" + b + "')");
  }
}

MethodConfig method_from(const std::string& label, const std::vector<std::string>& levels, int k,
                         std::size_t subset, std::uint64_t seed) {
  MethodConfig m = parse_method(label);
  if (!levels.empty()) m.levels = levels;
  m.k = k;
  m.channel_subset_size = subset;
  m.seed = seed;
  return m;
}

json to_json(const ImportCommand& c) {
  return {{"images", c.images.string()}, {"features", c.features.string()}, {"out", c.out.string()},
          {"categories", c.categories}, {"splits", c.splits}};
}

json to_json(const AugmentCommand& c) {
  return {{"images", c.images.string()}, {"out", c.out.string()},   {"category", c.category},
          {"policy_config", c.policy_config.string()}, {"factor", c.factor},
          {"keep_originals", c.keep_originals}, {"seed", c.seed}};
}

json to_json(const PreprocessCommand& c) {
  return {{"images", c.images.string()}, {"out", c.out.string()}, {"resize", c.resize}, {"crop", c.crop}};
}

json to_json(const FitCommand& c) {
  return {{"train", c.train.string()}, {"out", c.out.string()},       {"method", c.method},
          {"levels", c.levels},        {"k", c.k},                    {"channel_subset", c.channel_subset},
          {"seed", c.seed}};
}

json to_json(const ScoreCommand& c) {
  return {{"model", c.model.string()}, {"data", c.data.string()}, {"out", c.out.string()},
          {"heatmaps", c.heatmaps}};
}

json to_json(const BenchCommand& c) {
  return {{"data", c.data.string()},
          {"out", c.out.string()},
          {"categories", c.categories},
          {"methods", c.methods},
          {"levels", c.levels},
          {"grid", c.grid},
          {"replicates", c.replicates},
          {"seed", c.seed},
          {"aug_factors", c.aug_factors},
          {"keep_originals", c.keep_originals},
          {"exclude", c.exclude},
          {"dry_run", c.dry_run},
          {"mvtec_counts", c.mvtec_counts},
          {"plots", c.plots}};
}

json to_json(const SynthCommand& c) {
  return {{"out", c.out.string()},     {"category", c.category},
          {"n_train", c.n_train},      {"n_test_normal", c.n_test_normal},
          {"n_test_anomalous", c.n_test_anomalous}, {"shift_sigma", c.shift_sigma},
          {"aug_factor", c.aug_factor}, {"seed", c.seed}};
}

}  // namespace

void cmd_import(const ImportCommand& c, std::ostream& log, const RunInfo& info) {
  require_dir(c.images, "image root");
  require_dir(c.features, "features root");
  require_out(c.out);
  adrobust::ImportOptions opts;
  opts.categories = c.categories;
  opts.splits = c.splits;
  const auto written = import_mvtec(c.images, c.features, c.out, opts);
  json outputs = json::array();
  for (const auto& dir : written) {
    const auto index = load_dataset_index(dir);
    log << "imported " << fs::relative(dir, c.out).generic_string() << ": " << index.samples.size() << " images\n";
    outputs.push_back({{"archive", fs::relative(dir, c.out).generic_string()}, {"samples", index.samples.size()}});
  }
  write_run_manifest(c.out, "import", to_json(c), info, {{"archives", outputs}});
}

void cmd_augment(const AugmentCommand& c, std::ostream& log, const RunInfo& info) {
  require_dir(c.images, "image directory");
  if (c.category.empty()) throw InvalidArgument("missing --category (selects the augmentation policy)");
  if (c.factor < 0) throw InvalidArgument("--factor must be non-negative");
  const PolicyConfig cfg = c.policy_config.empty() ? default_policy_config() : load_policy_config(c.policy_config);
  const AugmentationPolicy policy = load_policy(c.category, cfg);
  require_out(c.out);

  const auto files = list_pngs(c.images);
  std::vector<NamedImage> images;
  std::map<std::string, fs::path> source_file;
  for (const auto& rel : files) {
    images.push_back({id_from_path(rel), read_png(c.images / rel)});
    source_file[images.back().image_id] = c.images / rel;
  }
  const auto augmented =
      augment_dataset(images, policy, {c.factor, c.keep_originals, c.seed}, cfg.flip_probability, c.jobs);

  const fs::path dir = c.out / "images";
  json outputs = json::array();
  for (const auto& a : augmented) {
    const fs::path file = dir / (a.image_id + ".png");
    fs::create_directories(file.parent_path());
    if (a.replicate == 0) {
      fs::copy_file(source_file.at(a.source_id), file, fs::copy_options::overwrite_existing);
    } else {
      write_png(a.image, file);
    }
    outputs.push_back({{"image_id", a.image_id}, {"source_id", a.source_id}, {"replicate", a.replicate}});
  }
  log << "augmented " << images.size() << " images into " << augmented.size() << " files\n";
  write_run_manifest(c.out, "augment", to_json(c), info,
                     {{"inputs", images.size()}, {"outputs", augmented.size()}, {"files", outputs}});
}

void cmd_preprocess(const PreprocessCommand& c, std::ostream& log, const RunInfo& info) {
  require_dir(c.images, "image directory");
  if (c.resize < 1) throw InvalidArgument("--resize must be positive");
  if (c.crop < 0) throw InvalidArgument("--crop must be non-negative");
  const auto files = list_pngs(c.images);
  // Validate every image before writing anything.
  std::vector<Image> loaded(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    loaded[i] = read_png(c.images / files[i]);
    if (c.crop > 0 && (c.crop > loaded[i].width || c.crop > loaded[i].height)) {
      throw InvalidArgument("crop " + std::to_string(c.crop) + " exceeds image '" + files[i].generic_string() +
                            "' (" + std::to_string(loaded[i].width) + "x" + std::to_string(loaded[i].height) + ")");
    }
  }
  require_out(c.out);
  parallel_for(files.size(), c.jobs, [&](std::size_t i) {
    Image img = c.crop > 0 ? center_crop(loaded[i], c.crop, c.crop) : loaded[i];
    img = resize_bilinear(img, c.resize, c.resize);
    const fs::path file = c.out / "images" / files[i];
    fs::create_directories(file.parent_path());
    write_png(img, file);
  });
  log << "preprocessed " << files.size() << " images to " << c.resize << "x" << c.resize << "\n";
  write_run_manifest(c.out, "preprocess", to_json(c), info, {{"images", files.size()}});
}

void cmd_fit(const FitCommand& c, std::ostream& log, const RunInfo& info) {
  require_dir(c.train, "training archive (--train)");
  if (c.out.empty()) throw InvalidArgument("missing output directory (--out)");
  const MethodConfig method = method_from(c.method, c.levels, c.k, c.channel_subset, c.seed);
  const EmbeddingDataset train = load_dataset(c.train);
  std::vector<const FeatureMapSet*> fit_set;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train.samples()[i].label == Label::normal) fit_set.push_back(&train.features(i));
  }
  if (fit_set.empty()) throw InvalidArgument("training archive '" + c.train.string() + "' has no normal samples");
  if (fit_set.size() != train.size()) {
    log << "warning: ignoring " << train.size() - fit_set.size() << " anomalous training samples\n";
  }
  const AnyModel model = fit_model(method, fit_set, c.jobs);

  const auto& m = train.manifest();
  json meta{{"method", method.label},
            {"kind", method_kind_name(method.kind)},
            {"levels", method.levels},
            {"estimator", method.kind == MethodKind::knn ? "-" : estimator_name(method.estimator)},
            {"k", method.k},
            {"channel_subset", method.channel_subset_size},
            {"seed", method.seed},
            {"category", m.category},
            {"n_train", fit_set.size()},
            {"train_archive", c.train.string()},
            {"preprocessing",
             {{"extractor", m.extractor},
              {"extractor_fingerprint", m.extractor_fingerprint},
              {"input_resolution", {m.input_height, m.input_width}}}}};
  require_out(c.out);
  save_model(model, c.out / "model", meta.dump());
  log << "fitted " << method.label << " on " << fit_set.size() << " samples\n";
  write_run_manifest(c.out, "fit", to_json(c), info, {{"model", "model"}, {"metadata", meta}});
}

void cmd_score(const ScoreCommand& c, std::ostream& log, const RunInfo& info) {
  require_dir(c.model, "model (--model)");
  require_dir(c.data, "archive (--data)");
  if (c.out.empty()) throw InvalidArgument("missing output directory (--out)");
  const fs::path model_dir = fs::is_directory(c.model / "model") ? c.model / "model" : c.model;
  const AnyModel model = load_model(model_dir);
  const json meta = json::parse(load_model_metadata(model_dir));
  const EmbeddingDataset data = load_dataset(c.data);
  if (meta.contains("preprocessing")) {
    check_fingerprints(meta["preprocessing"].value("extractor_fingerprint", ""), data.manifest().extractor_fingerprint,
                       "score");
  }
  // Fail on the first sample lacking a model level before any output.
  const auto levels = model_levels(model);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (const auto& l : levels) (void)data.features(i).level(l);
  }

  std::vector<ScoreResult> results(data.size());
  parallel_for(data.size(), c.jobs, [&](std::size_t i) { results[i] = score_model(model, data.features(i)); });

  require_out(c.out);
  std::ostringstream scores;
  scores << "image_id,label,defect_type,score\n";
  std::vector<ScoredLabel> scored;
  bool has_normal = false, has_anomalous = false;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& s = data.samples()[i];
    scores << s.image_id << ',' << label_name(s.label) << ',' << s.defect_type << ',' << exact(results[i].score)
           << '\n';
    scored.push_back({results[i].score, s.label});
    (s.label == Label::normal ? has_normal : has_anomalous) = true;
  }
  write_file(c.out / "scores.csv", scores.str());

  json res{{"samples", data.size()}, {"method", meta.value("method", "")}};
  if (has_normal && has_anomalous) {
    res["image_auc"] = roc_auc(scored);
    log << "image AUC " << exact(res["image_auc"].get<double>()) << "\n";
  }
  if (c.heatmaps && model_kind(model) == MethodKind::padim) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto name = safe_name(data.samples()[i].image_id);
      save_heatmap(*results[i].heatmap, c.out / "heatmaps" / name);
      write_heatmap_png(*results[i].heatmap, c.out / "heatmaps" / (name + ".png"));
    }
    res["heatmaps"] = "heatmaps";
  }
  log << "scored " << data.size() << " samples\n";
  write_run_manifest(c.out, "score", to_json(c), info, res);
}

std::size_t cmd_bench(const BenchCommand& c, std::ostream& log, const RunInfo& info) {
  RobustnessRunSpec spec;
  spec.sample_grid = c.grid;
  spec.replicates = c.replicates;
  spec.master_seed = c.seed;
  spec.aug_factors = c.aug_factors;
  spec.keep_originals = c.keep_originals;
  spec.jobs = c.jobs;
  for (const auto& label : c.methods) spec.methods.push_back(method_from(label, c.levels, 1, 0, c.seed));
  spec.validate();
  if (c.out.empty()) throw InvalidArgument("missing output directory (--out)");

  // Category list and N_max per category.
  std::vector<std::pair<std::string, int>> n_max;
  const std::set<std::string> wanted(c.categories.begin(), c.categories.end());
  if (c.mvtec_counts) {
    if (!c.dry_run) throw InvalidArgument("--mvtec-counts only applies to --dry-run");
    for (const auto& entry : mvtec_train_counts()) {
      if (wanted.empty() || wanted.count(entry.first)) n_max.push_back(entry);
    }
  } else {
    require_dir(c.data, "data root");
    std::vector<std::string> found;
    for (const auto& e : fs::directory_iterator(c.data)) {
      if (e.is_directory() && fs::is_regular_file(e.path() / "train" / "manifest.json")) {
        found.push_back(e.path().filename().string());
      }
    }
    std::sort(found.begin(), found.end());
    for (const auto& name : found) {
      if (!wanted.empty() && !wanted.count(name)) continue;
      const auto index = load_dataset_index(c.data / name / "train");
      int originals = 0;
      for (const auto& s : index.samples) {
        originals += s.label == Label::normal && parse_augmented_id(s.image_id).replicate == 0;
      }
      n_max.push_back({name, originals});
    }
  }
  for (const auto& name : wanted) {
    if (std::none_of(n_max.begin(), n_max.end(), [&](const auto& e) { return e.first == name; })) {
      throw InvalidArgument("unknown category '" + name + "'");
    }
  }
  if (n_max.empty()) throw InvalidArgument("no categories to benchmark");

  const auto plan = plan_robustness(n_max, spec);
  const std::size_t per_method = planned_model_count(plan);
  json plan_json = json::array();
  for (const auto& p : plan) {
    plan_json.push_back({{"category", p.category}, {"n_max", p.n_max}, {"grid", p.grid},
                         {"models_per_method", p.models_per_method}});
  }
  log << "planned models per method: " << per_method << " (" << plan.size() << " categories, M=" << c.replicates
      << ")\n";
  log << "planned fits in total: " << per_method * spec.methods.size() * spec.aug_factors.size() << "\n";
  require_out(c.out);
  json results{{"plan", plan_json},
               {"planned_models_per_method", per_method},
               {"planned_fits_total", per_method * spec.methods.size() * spec.aug_factors.size()}};
  if (c.dry_run) {
    write_run_manifest(c.out, "bench", to_json(c), info, results);
    return per_method;
  }

  // One category at a time keeps memory to a single category's features.
  RobustnessReport report;
  report.master_seed = spec.master_seed;
  report.replicates = spec.replicates;
  report.conventions = default_conventions();
  for (const auto& [name, n] : n_max) {
    const EmbeddingDataset train = load_dataset(c.data / name / "train");
    const EmbeddingDataset test = load_dataset(c.data / name / "test");
    check_fingerprints(train.manifest().extractor_fingerprint, test.manifest().extractor_fingerprint, name);
    const std::vector<CategoryInput> input = {{name, &train, &test}};
    auto part = run_robustness(input, spec);
    for (auto& r : part.records) report.records.push_back(std::move(r));
    for (auto& w : part.warnings) report.warnings.push_back(std::move(w));
    report.n_max.insert(part.n_max.begin(), part.n_max.end());
    log << name << ": " << report.n_max[name] << " originals, done\n";
  }
  for (const auto& w : report.warnings) log << "warning: " << w << "\n";

  std::ostringstream records, timings;
  write_records_csv(report, records);
  write_timings_csv(report, timings);
  write_file(c.out / "records.csv", records.str());
  write_file(c.out / "timings.csv", timings.str());
  write_file(c.out / "report.json", report_json(report, c.exclude));
  json plots = json::array();
  if (c.plots) {
    for (const auto& [name, n] : n_max) {
      for (const int f : spec.aug_factors) {
        const std::string file = "plots/" + name + "_aug" + std::to_string(f) + ".svg";
        write_file(c.out / file, render_svg(report, name, f));
        plots.push_back(file);
      }
    }
  }
  results["records"] = report.records.size();
  results["outputs"] = {{"records", "records.csv"}, {"timings", "timings.csv"}, {"report", "report.json"},
                        {"plots", plots}};
  write_run_manifest(c.out, "bench", to_json(c), info, results);
  return per_method;
}

void cmd_synth(const SynthCommand& c, std::ostream& log, const RunInfo& info) {
  SyntheticSpec spec;
  spec.category = c.category;
  spec.n_train = c.n_train;
  spec.n_test_normal = c.n_test_normal;
  spec.n_test_anomalous = c.n_test_anomalous;
  spec.shift_sigma = c.shift_sigma;
  spec.aug_factor = c.aug_factor;
  spec.seed = c.seed;
  const auto splits = make_synthetic(spec);
  require_out(c.out);
  save_dataset(splits.train, c.out / c.category / "train");
  save_dataset(splits.test, c.out / c.category / "test");
  log << "wrote synthetic category '" << c.category << "': " << splits.train.size() << " train, "
      << splits.test.size() << " test\n";
  write_run_manifest(c.out, "synth", to_json(c), info,
                     {{"train", splits.train.size()}, {"test", splits.test.size()}});
}

// --- argument parsing -------------------------------------------------------

namespace {

std::string json_scalar(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

/// Turns config entries into flags for options absent from the command line.
std::vector<std::string> config_args(const json& config, CLI::App& sub, const std::vector<std::string>& given) {
  json merged = json::object();
  for (const auto& [k, v] : config.items()) {
    if (!(v.is_object() && k == sub.get_name())) merged[k] = v;
  }
  if (config.contains(sub.get_name()) && config[sub.get_name()].is_object()) {
    for (const auto& [k, v] : config[sub.get_name()].items()) merged[k] = v;
  }
  std::vector<std::string> out;
  for (const auto& [key, value] : merged.items()) {
    if (key == "config") continue;
    std::string name = "--" + key;
    std::replace(name.begin(), name.end(), '_', '-');
    const CLI::Option* opt = sub.get_option_no_throw(name);
    if (opt == nullptr) throw InvalidArgument("unknown config key '" + key + "' for '" + sub.get_name() + "'");
    const bool on_command_line = std::any_of(given.begin(), given.end(), [&](const std::string& a) {
      return a == name || a.rfind(name + "=", 0) == 0;
    });
    if (on_command_line || value.is_null()) continue;
    if (value.is_array()) {
      if (value.empty()) continue;
      std::string joined;
      for (const auto& e : value) joined += (joined.empty() ? "" : ",") + json_scalar(e);
      out.push_back(name + "=" + joined);
    } else {
      out.push_back(name + "=" + json_scalar(value));
    }
  }
  return out;
}

std::string read_text(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read config file '" + file.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Low-data robustness benchmark for embedding-based anomaly detectors", "adrobust"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ADROBUST_VERSION);

  std::string config_file;
  auto with_common = [&config_file](CLI::App* sub, int* jobs) {
    sub->add_option("--config", config_file, "JSON config; flags given on the command line take precedence");
    if (jobs != nullptr) sub->add_option("--jobs", *jobs, "Worker threads")->check(CLI::PositiveNumber);
  };

  ImportCommand imp;
  auto* s_import = app.add_subcommand("import", "Label extractor features with the MVTec folder structure");
  s_import->add_option("--images", imp.images, "MVTec AD root (<category>/{train,test}/<defect>/*.png)");
  s_import->add_option("--features", imp.features, "Extractor archives <category>/<split>");
  s_import->add_option("--out", imp.out, "Output root for labelled archives");
  s_import->add_option("--categories", imp.categories, "Restrict to these categories")->delimiter(',');
  s_import->add_option("--splits", imp.splits, "Splits to import")->delimiter(',')->capture_default_str();
  with_common(s_import, nullptr);

  AugmentCommand aug;
  auto* s_aug = app.add_subcommand("augment", "Write augmented copies of a directory of PNG images");
  s_aug->add_option("--images", aug.images, "Input directory (searched recursively)");
  s_aug->add_option("--out", aug.out, "Run directory; images go to <out>/images");
  s_aug->add_option("--category", aug.category, "Policy to use, e.g. capsule or \"metal nut\"");
  s_aug->add_option("--policy-config", aug.policy_config, "Policy table JSON (default: built-in)");
  s_aug->add_option("--factor", aug.factor, "Augmented copies per image")->capture_default_str();
  s_aug->add_flag("--keep-originals,!--no-originals", aug.keep_originals, "Also write the originals")
      ->capture_default_str();
  s_aug->add_option("--seed", aug.seed)->capture_default_str();
  with_common(s_aug, &aug.jobs);

  PreprocessCommand pre;
  auto* s_pre = app.add_subcommand("preprocess", "Optional centre crop, then bilinear resize");
  s_pre->add_option("--images", pre.images, "Input directory (searched recursively)");
  s_pre->add_option("--out", pre.out, "Run directory; images go to <out>/images");
  s_pre->add_option("--resize", pre.resize, "Square output size")->capture_default_str();
  s_pre->add_option("--crop", pre.crop, "Square centre crop applied first (0 = none)")->capture_default_str();
  with_common(s_pre, &pre.jobs);

  FitCommand fit;
  auto* s_fit = app.add_subcommand("fit", "Fit one detector on a training archive");
  s_fit->add_option("--train", fit.train, "Training archive");
  s_fit->add_option("--out", fit.out, "Run directory; the model goes to <out>/model");
  s_fit->add_option("--method", fit.method, "knn | mahalanobis[-empirical|-ledoit] | padim[-empirical|-ledoit]")
      ->capture_default_str();
  s_fit->add_option("--levels", fit.levels, "Feature levels (default block4,block6,block7)")->delimiter(',');
  s_fit->add_option("--k", fit.k, "Neighbours for knn")->capture_default_str();
  s_fit->add_option("--channel-subset", fit.channel_subset, "PaDiM random channel subset size (0 = all)");
  s_fit->add_option("--seed", fit.seed, "Seed of the channel subset")->capture_default_str();
  with_common(s_fit, &fit.jobs);

  ScoreCommand score;
  auto* s_score = app.add_subcommand("score", "Score an archive with a fitted model");
  s_score->add_option("--model", score.model, "Model directory or the run directory of 'fit'");
  s_score->add_option("--data", score.data, "Archive to score");
  s_score->add_option("--out", score.out, "Run directory for scores.csv and heatmaps");
  s_score->add_flag("--heatmaps,!--no-heatmaps", score.heatmaps, "Write PaDiM heatmaps")->capture_default_str();
  with_common(s_score, &score.jobs);

  BenchCommand bench;
  auto* s_bench = app.add_subcommand("bench", "Run the sample-size robustness protocol");
  s_bench->add_option("--data", bench.data, "Root holding <category>/{train,test} archives");
  s_bench->add_option("--out", bench.out, "Run directory for the report");
  s_bench->add_option("--categories", bench.categories, "Restrict to these categories")->delimiter(',');
  s_bench->add_option("--methods", bench.methods, "Method labels")->delimiter(',')->capture_default_str();
  s_bench->add_option("--levels", bench.levels, "Feature levels for every method")->delimiter(',');
  s_bench->add_option("--grid", bench.grid, "Sample sizes (default: rule per category)")->delimiter(',');
  s_bench->add_option("--replicates", bench.replicates, "Draws per sample size (M)")->capture_default_str();
  s_bench->add_option("--seed", bench.seed, "Master seed")->capture_default_str();
  s_bench->add_option("--aug-factors", bench.aug_factors, "Augmentation factors")->delimiter(',')
      ->capture_default_str();
  s_bench->add_flag("--keep-originals,!--no-originals", bench.keep_originals,
                    "Fit on originals next to their augmented variants")
      ->capture_default_str();
  s_bench->add_option("--exclude", bench.exclude, "Categories left out of aggregates")->delimiter(',');
  s_bench->add_flag("--dry-run", bench.dry_run, "Only print the planned model count");
  s_bench->add_flag("--mvtec-counts", bench.mvtec_counts, "Plan against public MVTec AD training counts");
  s_bench->add_flag("--plots,!--no-plots", bench.plots, "Write SVG plots")->capture_default_str();
  with_common(s_bench, &bench.jobs);

  SynthCommand synth;
  auto* s_synth = app.add_subcommand("synth", "Write a synthetic Gaussian category for smoke runs");
  s_synth->add_option("--out", synth.out, "Root; writes <out>/<category>/{train,test}");
  s_synth->add_option("--category", synth.category)->capture_default_str();
  s_synth->add_option("--n-train", synth.n_train)->capture_default_str();
  s_synth->add_option("--n-test-normal", synth.n_test_normal)->capture_default_str();
  s_synth->add_option("--n-test-anomalous", synth.n_test_anomalous)->capture_default_str();
  s_synth->add_option("--shift-sigma", synth.shift_sigma)->capture_default_str();
  s_synth->add_option("--aug-factor", synth.aug_factor)->capture_default_str();
  s_synth->add_option("--seed", synth.seed)->capture_default_str();
  with_common(s_synth, nullptr);

  RunInfo info;
  for (int i = 1; i < argc; ++i) info.args.emplace_back(argv[i]);

  try {
    // Config entries become flags inserted after the subcommand name.
    std::vector<std::string> args = info.args;
    auto sub_it = std::find_if(args.begin(), args.end(), [&](const std::string& a) {
      return a.empty() || a[0] != '-';
    });
    for (std::size_t i = 0; i < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
      else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
      if (path.empty()) continue;
      if (sub_it == args.end()) throw InvalidArgument("--config must follow a subcommand");
      CLI::App* sub = app.get_subcommand_no_throw(*sub_it);
      if (sub == nullptr) break;  // unknown subcommand, let the parser report it
      info.config_path = path;
      info.config_text = read_text(path);
      json config;
      try {
        config = json::parse(info.config_text);
      } catch (const json::exception& e) {
        throw InvalidArgument("config '" + path + "' is not valid JSON: " + e.what());
      }
      if (!config.is_object()) throw InvalidArgument("config '" + path + "' must hold a JSON object");
      const auto extra = config_args(config, *sub, args);
      args.insert(sub_it + 1, extra.begin(), extra.end());
      break;
    }

    std::vector<const char*> cargv = {argc > 0 ? argv[0] : "adrobust"};
    for (const auto& a : args) cargv.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? 0 : 1;
    }

    if (s_import->parsed()) cmd_import(imp, out, info);
    else if (s_aug->parsed()) cmd_augment(aug, out, info);
    else if (s_pre->parsed()) cmd_preprocess(pre, out, info);
    else if (s_fit->parsed()) cmd_fit(fit, out, info);
    else if (s_score->parsed()) cmd_score(score, out, info);
    else if (s_bench->parsed()) cmd_bench(bench, out, info);
    else if (s_synth->parsed()) cmd_synth(synth, out, info);
    return 0;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const UnknownLevel& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const DimensionMismatch& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace adrobust::cli
