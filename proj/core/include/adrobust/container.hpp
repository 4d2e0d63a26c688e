#pragma once

// Binary side of the manifest + blob container shared by dataset archives,
// model files and heatmap grids. A container is a directory holding
// `manifest.json` and `tensors.bin`; tensors.bin starts with a 16-byte header
// (8-byte magic, u32 format version, u32 reserved) followed by raw
// little-endian payloads addressed by absolute byte offsets.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace adrobust {

inline constexpr std::array<char, 8> kBlobMagic = {'A', 'D', 'R', 'B', 'L', 'O', 'B', '1'};
inline constexpr std::uint32_t kContainerFormatVersion = 1;
inline constexpr std::size_t kBlobHeaderSize = 16;

inline constexpr const char* kManifestFileName = "manifest.json";
inline constexpr const char* kBlobFileName = "tensors.bin";

enum class DType { f32, f64 };

std::size_t dtype_size(DType dtype) noexcept;
const char* dtype_name(DType dtype) noexcept;
DType parse_dtype(const std::string& name);

struct BlobRef {
  DType dtype = DType::f32;
  std::uint64_t offset = 0;
  std::uint64_t nbytes = 0;

  std::uint64_t count() const noexcept { return nbytes / dtype_size(dtype); }
};

/// Accumulates payloads in memory; `write` emits header + payloads.
class BlobWriter {
 public:
  BlobWriter();

  BlobRef append(std::span<const float> values);
  BlobRef append(std::span<const double> values);

  std::uint64_t size() const noexcept { return buffer_.size(); }
  void write(const std::filesystem::path& file) const;

 private:
  std::vector<unsigned char> buffer_;
};

/// Whole-file reader with bounds-checked typed access.
class BlobReader {
 public:
  explicit BlobReader(const std::filesystem::path& file);

  std::vector<float> read_f32(const BlobRef& ref) const;
  std::vector<double> read_f64(const BlobRef& ref) const;
  /// Reads directly into caller storage; `out.size()` must equal ref.count().
  void read_into(const BlobRef& ref, std::span<double> out) const;
  void read_into(const BlobRef& ref, std::span<float> out) const;

  std::uint64_t size() const noexcept { return bytes_.size(); }

 private:
  void check(const BlobRef& ref, DType expected) const;

  std::filesystem::path file_;
  std::vector<unsigned char> bytes_;
};

}  // namespace adrobust
