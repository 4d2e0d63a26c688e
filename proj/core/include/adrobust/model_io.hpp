#pragma once

#include <filesystem>
#include <string>

#include "adrobust/scorers.hpp"

namespace adrobust {

/// Writes a model container (manifest.json + tensors.bin, f64 payloads).
/// `metadata_json` must be a JSON object and is stored verbatim under
/// "metadata".
void save_model(const AnyModel& model, const std::filesystem::path& dir,
                const std::string& metadata_json = "{}");

/// Throws FormatError (bad magic, truncated payload, unknown kind) or
/// VersionMismatch.
AnyModel load_model(const std::filesystem::path& dir);

/// The "metadata" object of a saved model, serialised as JSON text.
std::string load_model_metadata(const std::filesystem::path& dir);

/// Heatmap as a single-blob container of kind "heatmap".
void save_heatmap(const Heatmap& heatmap, const std::filesystem::path& dir);
Heatmap load_heatmap(const std::filesystem::path& dir);

/// Min-max normalised 8-bit grayscale PNG. A constant map renders black.
void write_heatmap_png(const Heatmap& heatmap, const std::filesystem::path& file);

}  // namespace adrobust
