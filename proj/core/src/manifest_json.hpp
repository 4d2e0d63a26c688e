#pragma once

// Internal helpers for the JSON half of the container format.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "adrobust/container.hpp"
#include "adrobust/error.hpp"

namespace adrobust::detail {

using nlohmann::json;

inline json blob_to_json(const BlobRef& ref) {
  return json{{"dtype", dtype_name(ref.dtype)}, {"offset", ref.offset}, {"nbytes", ref.nbytes}};
}

inline BlobRef blob_from_json(const json& j) {
  try {
    return BlobRef{parse_dtype(j.at("dtype").get<std::string>()), j.at("offset").get<std::uint64_t>(),
                   j.at("nbytes").get<std::uint64_t>()};
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed blob reference: ") + e.what());
  }
}

inline json read_manifest(const std::filesystem::path& dir) {
  const auto file = dir / kManifestFileName;
  if (!std::filesystem::is_regular_file(file)) {
    throw MissingManifest("no " + std::string(kManifestFileName) + " in '" + dir.string() + "'");
  }
  std::ifstream in(file);
  if (!in) throw IoError("cannot open '" + file.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("'" + file.string() + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw FormatError("'" + file.string() + "' must hold a JSON object");
  const auto version = j.value("format_version", -1);
  if (version != static_cast<int>(kContainerFormatVersion)) {
    throw VersionMismatch("'" + file.string() + "' has format_version " + std::to_string(version) +
                          ", expected " + std::to_string(kContainerFormatVersion));
  }
  return j;
}

inline void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + file.string() + "'");
}

inline void write_manifest(const std::filesystem::path& dir, const json& j) {
  write_text(dir / kManifestFileName, j.dump(2) + "\n");
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

}  // namespace adrobust::detail
