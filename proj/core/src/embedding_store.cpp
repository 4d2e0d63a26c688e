#include "adrobust/embedding_store.hpp"

#include "adrobust/container.hpp"
#include "adrobust/error.hpp"
#include "manifest_json.hpp"

namespace adrobust {

using detail::json;

const char* label_name(Label label) noexcept {
  return label == Label::normal ? "normal" : "anomalous";
}

Label parse_label(std::string_view name) {
  if (name == "normal") return Label::normal;
  if (name == "anomalous") return Label::anomalous;
  throw FormatError("unknown label '" + std::string(name) + "'");
}

Label label_from_defect(std::string_view defect_type) noexcept {
  return defect_type == "good" ? Label::normal : Label::anomalous;
}

EmbeddingDataset::EmbeddingDataset(DatasetManifest manifest, std::vector<LabeledSample> samples,
                                   std::vector<FeatureMapSet> features)
    : manifest_(std::move(manifest)), samples_(std::move(samples)), features_(std::move(features)) {
  if (samples_.size() != features_.size()) {
    throw InvalidArgument("dataset has " + std::to_string(samples_.size()) + " samples but " +
                          std::to_string(features_.size()) + " feature sets");
  }
  for (std::size_t i = 0; i < manifest_.levels.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (manifest_.levels[i].name == manifest_.levels[j].name) {
        throw InvalidArgument("duplicate level name '" + manifest_.levels[i].name + "'");
      }
    }
  }
  by_id_.reserve(samples_.size());
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    const auto& fm = features_[i];
    if (s.image_id != fm.image_id) {
      throw SampleError(s.image_id, "sample '" + s.image_id + "' is paired with features of '" +
                                        fm.image_id + "'");
    }
    if ((s.label == Label::normal) != (s.defect_type == "good")) {
      throw SampleError(s.image_id, "sample '" + s.image_id +
                                        "': label normal must match defect_type 'good'");
    }
    if (!by_id_.emplace(s.image_id, i).second) {
      throw SampleError(s.image_id, "duplicate image_id '" + s.image_id + "'");
    }
    if (fm.levels.size() != manifest_.levels.size()) {
      throw ShapeMismatch(s.image_id, "image '" + s.image_id + "' has " +
                                          std::to_string(fm.levels.size()) + " levels, manifest declares " +
                                          std::to_string(manifest_.levels.size()));
    }
    for (std::size_t l = 0; l < fm.levels.size(); ++l) {
      const auto& declared = manifest_.levels[l];
      const auto& level = fm.levels[l];
      if (level.name != declared.name || level.tensor.shape() != declared.shape) {
        const auto& sh = level.tensor.shape();
        throw ShapeMismatch(s.image_id, "image '" + s.image_id + "' level '" + level.name + "' is " +
                                            std::to_string(sh.channels) + "x" + std::to_string(sh.height) +
                                            "x" + std::to_string(sh.width) + ", manifest declares '" +
                                            declared.name + "' " + std::to_string(declared.shape.channels) +
                                            "x" + std::to_string(declared.shape.height) + "x" +
                                            std::to_string(declared.shape.width));
      }
      if (!level.tensor.all_finite()) {
        throw NonFiniteValue(s.image_id, "image '" + s.image_id + "' level '" + level.name +
                                             "' contains NaN or Inf");
      }
    }
  }
}

const FeatureMapSet& EmbeddingDataset::features(std::string_view image_id) const {
  const auto idx = index_of(image_id);
  if (!idx) throw InvalidArgument("no image '" + std::string(image_id) + "' in dataset");
  return features_[*idx];
}

std::optional<std::size_t> EmbeddingDataset::index_of(std::string_view image_id) const {
  const auto it = by_id_.find(std::string(image_id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> EmbeddingDataset::level_names() const {
  std::vector<std::string> names;
  names.reserve(manifest_.levels.size());
  for (const auto& l : manifest_.levels) names.push_back(l.name);
  return names;
}

namespace {

json shape_json(const LevelShape& s) { return json::array({s.channels, s.height, s.width}); }

LevelShape shape_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("level shape must be [C, H, W]");
  LevelShape s{j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
  if (s.channels <= 0 || s.height <= 0 || s.width <= 0) {
    throw FormatError("level shape entries must be positive");
  }
  return s;
}

DatasetManifest manifest_from_json(const json& j) {
  DatasetManifest m;
  m.category = j.value("category", "");
  m.extractor = j.value("extractor", "");
  m.extractor_fingerprint = j.value("extractor_fingerprint", "");
  if (j.contains("input_resolution")) {
    const auto& r = j.at("input_resolution");
    if (!r.is_array() || r.size() != 2) throw FormatError("input_resolution must be [H, W]");
    m.input_height = r[0].get<int>();
    m.input_width = r[1].get<int>();
  }
  for (const auto& l : j.at("levels")) {
    m.levels.push_back({l.at("name").get<std::string>(), shape_from_json(l.at("shape"))});
  }
  return m;
}

LabeledSample sample_from_json(const json& s, const std::string& fallback_category) {
  LabeledSample out;
  out.image_id = s.at("image_id").get<std::string>();
  out.label = parse_label(s.at("label").get<std::string>());
  out.defect_type = s.value("defect_type", out.label == Label::normal ? "good" : "");
  out.category = s.value("category", fallback_category);
  return out;
}

}  // namespace

DatasetIndex load_dataset_index(const std::filesystem::path& dir) {
  const json j = detail::read_manifest(dir);
  try {
    if (j.value("kind", "embedding_dataset") != "embedding_dataset") {
      throw FormatError("'" + dir.string() + "' is not an embedding dataset archive");
    }
    DatasetIndex index;
    index.manifest = manifest_from_json(j);
    for (const auto& s : j.at("samples")) {
      index.samples.push_back(sample_from_json(s, index.manifest.category));
    }
    return index;
  } catch (const json::exception& e) {
    throw FormatError("malformed manifest in '" + dir.string() + "': " + e.what());
  }
}

EmbeddingDataset load_dataset(const std::filesystem::path& dir) {
  const json j = detail::read_manifest(dir);
  DatasetManifest manifest;
  std::vector<LabeledSample> samples;
  std::vector<FeatureMapSet> features;
  try {
    if (j.value("kind", "embedding_dataset") != "embedding_dataset") {
      throw FormatError("'" + dir.string() + "' is not an embedding dataset archive");
    }
    manifest = manifest_from_json(j);
    const auto& js = j.at("samples");
    samples.reserve(js.size());
    features.reserve(js.size());
    std::optional<BlobReader> reader;
    if (!js.empty()) reader.emplace(dir / kBlobFileName);
    for (const auto& s : js) {
      samples.push_back(sample_from_json(s, manifest.category));
      FeatureMapSet fm;
      fm.image_id = samples.back().image_id;
      for (const auto& l : s.at("levels")) {
        const LevelShape shape = shape_from_json(l.at("shape"));
        const BlobRef ref = detail::blob_from_json(l);
        if (ref.dtype != DType::f32 || ref.count() != shape.size()) {
          throw ShapeMismatch(fm.image_id, "image '" + fm.image_id + "' level '" +
                                               l.at("name").get<std::string>() +
                                               "': payload size does not match its shape");
        }
        fm.levels.push_back({l.at("name").get<std::string>(), Tensor3f(shape, reader->read_f32(ref))});
      }
      features.push_back(std::move(fm));
    }
  } catch (const json::exception& e) {
    throw FormatError("malformed manifest in '" + dir.string() + "': " + e.what());
  }
  return EmbeddingDataset(std::move(manifest), std::move(samples), std::move(features));
}

void save_dataset(const EmbeddingDataset& ds, const std::filesystem::path& dir) {
  detail::ensure_directory(dir);
  const auto& m = ds.manifest();
  json j;
  j["format_version"] = kContainerFormatVersion;
  j["kind"] = "embedding_dataset";
  j["category"] = m.category;
  j["extractor"] = m.extractor;
  if (!m.extractor_fingerprint.empty()) j["extractor_fingerprint"] = m.extractor_fingerprint;
  j["input_resolution"] = json::array({m.input_height, m.input_width});
  j["element_order"] = "CHW";
  j["byte_order"] = "little";
  j["levels"] = json::array();
  for (const auto& l : m.levels) {
    j["levels"].push_back({{"name", l.name}, {"shape", shape_json(l.shape)}});
  }
  BlobWriter writer;
  j["samples"] = json::array();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& s = ds.samples()[i];
    json js{{"image_id", s.image_id},
            {"label", label_name(s.label)},
            {"defect_type", s.defect_type},
            {"category", s.category}};
    js["levels"] = json::array();
    for (const auto& level : ds.features(i).levels) {
      json jl = detail::blob_to_json(writer.append(std::span<const float>(level.tensor.values())));
      jl["name"] = level.name;
      jl["shape"] = shape_json(level.tensor.shape());
      js["levels"].push_back(std::move(jl));
    }
    j["samples"].push_back(std::move(js));
  }
  writer.write(dir / kBlobFileName);
  detail::write_manifest(dir, j);
}

}  // namespace adrobust
