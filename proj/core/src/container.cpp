#include "adrobust/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "adrobust/error.hpp"

namespace adrobust {

namespace {

static_assert(sizeof(float) == 4 && sizeof(double) == 8);

template <typename T>
void put_le(std::vector<unsigned char>& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t b = 0; b < sizeof(U); ++b) {
    out.push_back(static_cast<unsigned char>((bits >> (8 * b)) & 0xFFu));
  }
}

template <typename T>
T get_le(const unsigned char* p) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) {
    bits |= static_cast<U>(p[b]) << (8 * b);
  }
  return std::bit_cast<T>(bits);
}

template <typename T>
BlobRef append_values(std::vector<unsigned char>& buffer, std::span<const T> values, DType dtype) {
  BlobRef ref{dtype, buffer.size(), values.size() * sizeof(T)};
  buffer.reserve(buffer.size() + ref.nbytes);
  if constexpr (std::endian::native == std::endian::little) {
    const auto* raw = reinterpret_cast<const unsigned char*>(values.data());
    buffer.insert(buffer.end(), raw, raw + ref.nbytes);
  } else {
    for (T v : values) put_le(buffer, v);
  }
  return ref;
}

template <typename T>
void copy_values(const unsigned char* src, std::span<T> out) {
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data(), src, out.size() * sizeof(T));
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = get_le<T>(src + i * sizeof(T));
  }
}

}  // namespace

std::size_t dtype_size(DType dtype) noexcept { return dtype == DType::f32 ? 4 : 8; }

const char* dtype_name(DType dtype) noexcept { return dtype == DType::f32 ? "f32" : "f64"; }

DType parse_dtype(const std::string& name) {
  if (name == "f32") return DType::f32;
  if (name == "f64") return DType::f64;
  throw FormatError("unknown dtype '" + name + "'");
}

BlobWriter::BlobWriter() {
  buffer_.insert(buffer_.end(), kBlobMagic.begin(), kBlobMagic.end());
  put_le(buffer_, kContainerFormatVersion);
  put_le(buffer_, std::uint32_t{0});
}

BlobRef BlobWriter::append(std::span<const float> values) {
  return append_values(buffer_, values, DType::f32);
}

BlobRef BlobWriter::append(std::span<const double> values) {
  return append_values(buffer_, values, DType::f64);
}

void BlobWriter::write(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(buffer_.data()),
            static_cast<std::streamsize>(buffer_.size()));
  if (!out) throw IoError("failed writing '" + file.string() + "'");
}

BlobReader::BlobReader(const std::filesystem::path& file) : file_(file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open '" + file.string() + "'");
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  bytes_.resize(size);
  if (size > 0) in.read(reinterpret_cast<char*>(bytes_.data()), static_cast<std::streamsize>(size));
  if (!in) throw IoError("failed reading '" + file.string() + "'");

  if (bytes_.size() < kBlobHeaderSize ||
      std::memcmp(bytes_.data(), kBlobMagic.data(), kBlobMagic.size()) != 0) {
    throw FormatError("'" + file.string() + "' is not a blob container (bad magic)");
  }
  const auto version = get_le<std::uint32_t>(bytes_.data() + kBlobMagic.size());
  if (version != kContainerFormatVersion) {
    throw VersionMismatch("'" + file.string() + "' has blob format version " +
                          std::to_string(version) + ", expected " +
                          std::to_string(kContainerFormatVersion));
  }
}

void BlobReader::check(const BlobRef& ref, DType expected) const {
  if (ref.dtype != expected) {
    throw FormatError("blob dtype mismatch in '" + file_.string() + "'");
  }
  if (ref.offset < kBlobHeaderSize || ref.nbytes % dtype_size(ref.dtype) != 0 ||
      ref.offset > bytes_.size() || ref.nbytes > bytes_.size() - ref.offset) {
    throw FormatError("blob [" + std::to_string(ref.offset) + ", +" + std::to_string(ref.nbytes) +
                      ") is out of bounds in '" + file_.string() + "'");
  }
}

std::vector<float> BlobReader::read_f32(const BlobRef& ref) const {
  check(ref, DType::f32);
  std::vector<float> out(ref.count());
  copy_values(bytes_.data() + ref.offset, std::span<float>(out));
  return out;
}

std::vector<double> BlobReader::read_f64(const BlobRef& ref) const {
  check(ref, DType::f64);
  std::vector<double> out(ref.count());
  copy_values(bytes_.data() + ref.offset, std::span<double>(out));
  return out;
}

void BlobReader::read_into(const BlobRef& ref, std::span<double> out) const {
  check(ref, DType::f64);
  if (out.size() != ref.count()) throw FormatError("blob size does not match destination");
  copy_values(bytes_.data() + ref.offset, out);
}

void BlobReader::read_into(const BlobRef& ref, std::span<float> out) const {
  check(ref, DType::f32);
  if (out.size() != ref.count()) throw FormatError("blob size does not match destination");
  copy_values(bytes_.data() + ref.offset, out);
}

}  // namespace adrobust
