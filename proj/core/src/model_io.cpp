#include "adrobust/model_io.hpp"

#include <algorithm>
#include <cmath>

#include "adrobust/container.hpp"
#include "adrobust/error.hpp"
#include "adrobust/image.hpp"
#include "manifest_json.hpp"

namespace adrobust {

using detail::json;

namespace {

json slices_json(const std::vector<LevelSlice>& slices) {
  json out = json::array();
  for (const auto& s : slices) out.push_back({{"name", s.name}, {"begin", s.begin}, {"end", s.end}});
  return out;
}

std::vector<LevelSlice> slices_from_json(const json& j) {
  std::vector<LevelSlice> out;
  for (const auto& s : j) {
    out.push_back({s.at("name").get<std::string>(), s.at("begin").get<std::size_t>(),
                   s.at("end").get<std::size_t>()});
  }
  return out;
}

BlobRef put(BlobWriter& w, const Eigen::MatrixXd& m) {
  // Column-major storage; matrices written here are symmetric or vectors.
  return w.append(std::span<const double>(m.data(), static_cast<std::size_t>(m.size())));
}

BlobRef put(BlobWriter& w, const Eigen::VectorXd& v) {
  return w.append(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

void get(const BlobReader& r, const json& ref, Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols) {
  m.resize(rows, cols);
  r.read_into(detail::blob_from_json(ref), std::span<double>(m.data(), static_cast<std::size_t>(m.size())));
}

void get(const BlobReader& r, const json& ref, Eigen::VectorXd& v, Eigen::Index n) {
  v.resize(n);
  r.read_into(detail::blob_from_json(ref), std::span<double>(v.data(), static_cast<std::size_t>(v.size())));
}

json stats_json(BlobWriter& w, const GaussianStats& s) {
  json j{{"dim", s.dim()},
         {"estimator", estimator_name(s.estimator)},
         {"shrinkage", s.shrinkage},
         {"n_samples", s.n_samples},
         {"mean", detail::blob_to_json(put(w, s.mean))},
         {"precision", detail::blob_to_json(put(w, s.precision))}};
  if (s.has_covariance()) j["covariance"] = detail::blob_to_json(put(w, s.covariance));
  return j;
}

GaussianStats stats_from_json(const BlobReader& r, const json& j) {
  GaussianStats s;
  const auto p = j.at("dim").get<Eigen::Index>();
  s.estimator = parse_estimator(j.at("estimator").get<std::string>());
  s.shrinkage = j.at("shrinkage").get<double>();
  s.n_samples = j.at("n_samples").get<std::size_t>();
  get(r, j.at("mean"), s.mean, p);
  get(r, j.at("precision"), s.precision, p, p);
  if (j.contains("covariance")) get(r, j.at("covariance"), s.covariance, p, p);
  return s;
}

void save_knn(const KnnModel& m, BlobWriter& w, json& j) {
  // Row-major so the payload reads as one embedding after another.
  std::vector<double> rows(static_cast<std::size_t>(m.train.size()));
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    for (Eigen::Index c = 0; c < m.dim(); ++c) {
      rows[static_cast<std::size_t>(i * m.dim() + c)] = m.train(i, c);
    }
  }
  j["k"] = m.k;
  j["levels"] = slices_json(m.level_slices);
  j["train_shape"] = json::array({m.size(), m.dim()});
  j["train_embeddings"] = detail::blob_to_json(w.append(std::span<const double>(rows)));
}

KnnModel load_knn(const BlobReader& r, const json& j) {
  KnnModel m;
  m.k = j.at("k").get<int>();
  m.level_slices = slices_from_json(j.at("levels"));
  const auto n = j.at("train_shape")[0].get<Eigen::Index>();
  const auto d = j.at("train_shape")[1].get<Eigen::Index>();
  const auto rows = r.read_f64(detail::blob_from_json(j.at("train_embeddings")));
  if (static_cast<Eigen::Index>(rows.size()) != n * d) throw FormatError("knn payload size mismatch");
  m.train.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < d; ++c) m.train(i, c) = rows[static_cast<std::size_t>(i * d + c)];
  }
  if (m.k < 1 || m.k > n) throw FormatError("knn model has invalid k");
  return m;
}

void save_maha(const MahalanobisModel& m, BlobWriter& w, json& j) {
  j["estimator"] = estimator_name(m.estimator);
  j["per_level"] = json::array();
  for (const auto& lg : m.per_level) {
    json e = stats_json(w, lg.stats);
    e["level"] = lg.level;
    j["per_level"].push_back(std::move(e));
  }
}

MahalanobisModel load_maha(const BlobReader& r, const json& j) {
  MahalanobisModel m;
  m.estimator = parse_estimator(j.at("estimator").get<std::string>());
  for (const auto& e : j.at("per_level")) {
    m.per_level.push_back({e.at("level").get<std::string>(), stats_from_json(r, e)});
  }
  return m;
}

void save_padim(const PadimModel& m, BlobWriter& w, json& j) {
  j["estimator"] = estimator_name(m.estimator);
  j["grid"] = json::array({m.height, m.width});
  j["depth"] = m.depth;
  j["levels"] = slices_json(m.level_slices);
  j["channel_subset"] = m.channel_subset;
  const std::size_t p = m.channel_subset.empty() ? m.depth : m.channel_subset.size();
  const std::size_t locations = m.per_location.size();
  const bool with_cov = !m.per_location.empty() && m.per_location.front().has_covariance();
  std::vector<double> means, precisions, covariances, shrinkage;
  means.reserve(locations * p);
  precisions.reserve(locations * p * p);
  if (with_cov) covariances.reserve(locations * p * p);
  std::vector<std::size_t> n_samples;
  for (const auto& s : m.per_location) {
    means.insert(means.end(), s.mean.data(), s.mean.data() + s.mean.size());
    precisions.insert(precisions.end(), s.precision.data(), s.precision.data() + s.precision.size());
    if (with_cov) covariances.insert(covariances.end(), s.covariance.data(), s.covariance.data() + s.covariance.size());
    shrinkage.push_back(s.shrinkage);
    n_samples.push_back(s.n_samples);
  }
  j["dim"] = p;
  j["n_samples"] = n_samples;
  j["mean"] = detail::blob_to_json(w.append(std::span<const double>(means)));
  j["precision"] = detail::blob_to_json(w.append(std::span<const double>(precisions)));
  j["shrinkage"] = detail::blob_to_json(w.append(std::span<const double>(shrinkage)));
  if (with_cov) j["covariance"] = detail::blob_to_json(w.append(std::span<const double>(covariances)));
}

PadimModel load_padim(const BlobReader& r, const json& j) {
  PadimModel m;
  m.estimator = parse_estimator(j.at("estimator").get<std::string>());
  m.height = j.at("grid")[0].get<int>();
  m.width = j.at("grid")[1].get<int>();
  m.depth = j.at("depth").get<std::size_t>();
  m.level_slices = slices_from_json(j.at("levels"));
  m.channel_subset = j.at("channel_subset").get<std::vector<std::size_t>>();
  const auto p = j.at("dim").get<std::size_t>();
  const auto n_samples = j.at("n_samples").get<std::vector<std::size_t>>();
  const std::size_t locations = static_cast<std::size_t>(m.height) * static_cast<std::size_t>(m.width);
  if (n_samples.size() != locations) throw FormatError("padim model location count mismatch");
  const auto means = r.read_f64(detail::blob_from_json(j.at("mean")));
  const auto precisions = r.read_f64(detail::blob_from_json(j.at("precision")));
  const auto shrinkage = r.read_f64(detail::blob_from_json(j.at("shrinkage")));
  std::vector<double> covariances;
  if (j.contains("covariance")) covariances = r.read_f64(detail::blob_from_json(j.at("covariance")));
  if (means.size() != locations * p || precisions.size() != locations * p * p || shrinkage.size() != locations ||
      (!covariances.empty() && covariances.size() != locations * p * p)) {
    throw FormatError("padim payload size mismatch");
  }
  const auto ip = static_cast<Eigen::Index>(p);
  m.per_location.resize(locations);
  for (std::size_t loc = 0; loc < locations; ++loc) {
    auto& s = m.per_location[loc];
    s.estimator = m.estimator;
    s.shrinkage = shrinkage[loc];
    s.n_samples = n_samples[loc];
    s.mean = Eigen::Map<const Eigen::VectorXd>(means.data() + loc * p, ip);
    s.precision = Eigen::Map<const Eigen::MatrixXd>(precisions.data() + loc * p * p, ip, ip);
    if (!covariances.empty()) {
      s.covariance = Eigen::Map<const Eigen::MatrixXd>(covariances.data() + loc * p * p, ip, ip);
    }
  }
  return m;
}

}  // namespace

void save_model(const AnyModel& model, const std::filesystem::path& dir, const std::string& metadata_json) {
  json metadata;
  try {
    metadata = json::parse(metadata_json);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("model metadata is not valid JSON: ") + e.what());
  }
  if (!metadata.is_object()) throw InvalidArgument("model metadata must be a JSON object");

  detail::ensure_directory(dir);
  BlobWriter writer;
  json j;
  j["format_version"] = kContainerFormatVersion;
  j["kind"] = "model";
  j["model_kind"] = method_kind_name(model_kind(model));
  j["byte_order"] = "little";
  j["metadata"] = std::move(metadata);
  json body;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KnnModel>) save_knn(m, writer, body);
        else if constexpr (std::is_same_v<T, MahalanobisModel>) save_maha(m, writer, body);
        else save_padim(m, writer, body);
      },
      model);
  j["model"] = std::move(body);
  writer.write(dir / kBlobFileName);
  detail::write_manifest(dir, j);
}

AnyModel load_model(const std::filesystem::path& dir) {
  const json j = detail::read_manifest(dir);
  if (j.value("kind", "") != "model") throw FormatError("'" + dir.string() + "' is not a model container");
  const BlobReader reader(dir / kBlobFileName);
  try {
    const auto kind = j.at("model_kind").get<std::string>();
    const auto& body = j.at("model");
    if (kind == "knn") return load_knn(reader, body);
    if (kind == "mahalanobis") return load_maha(reader, body);
    if (kind == "padim") return load_padim(reader, body);
    throw FormatError("unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw FormatError("malformed model manifest in '" + dir.string() + "': " + e.what());
  }
}

std::string load_model_metadata(const std::filesystem::path& dir) {
  const json j = detail::read_manifest(dir);
  return j.value("metadata", json::object()).dump();
}

void save_heatmap(const Heatmap& heatmap, const std::filesystem::path& dir) {
  detail::ensure_directory(dir);
  BlobWriter writer;
  json j;
  j["format_version"] = kContainerFormatVersion;
  j["kind"] = "heatmap";
  j["byte_order"] = "little";
  j["shape"] = json::array({heatmap.height, heatmap.width});
  j["values"] = detail::blob_to_json(writer.append(std::span<const double>(heatmap.values)));
  writer.write(dir / kBlobFileName);
  detail::write_manifest(dir, j);
}

Heatmap load_heatmap(const std::filesystem::path& dir) {
  const json j = detail::read_manifest(dir);
  if (j.value("kind", "") != "heatmap") throw FormatError("'" + dir.string() + "' is not a heatmap container");
  const BlobReader reader(dir / kBlobFileName);
  try {
    Heatmap h;
    h.height = j.at("shape")[0].get<int>();
    h.width = j.at("shape")[1].get<int>();
    h.values = reader.read_f64(detail::blob_from_json(j.at("values")));
    if (h.values.size() != static_cast<std::size_t>(h.height) * static_cast<std::size_t>(h.width)) {
      throw FormatError("heatmap payload size mismatch");
    }
    return h;
  } catch (const json::exception& e) {
    throw FormatError("malformed heatmap manifest in '" + dir.string() + "': " + e.what());
  }
}

void write_heatmap_png(const Heatmap& heatmap, const std::filesystem::path& file) {
  if (heatmap.values.empty()) throw InvalidArgument("empty heatmap");
  const auto [lo_it, hi_it] = std::minmax_element(heatmap.values.begin(), heatmap.values.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  std::vector<std::uint8_t> gray(heatmap.values.size(), 0);
  if (range > 0.0) {
    for (std::size_t i = 0; i < gray.size(); ++i) {
      gray[i] = static_cast<std::uint8_t>(std::lround(255.0 * (heatmap.values[i] - lo) / range));
    }
  }
  write_gray_png(gray, heatmap.width, heatmap.height, file);
}

}  // namespace adrobust
