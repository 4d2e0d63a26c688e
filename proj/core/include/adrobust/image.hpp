#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace adrobust {

/// 8-bit interleaved RGB image.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // size = width * height * 3

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, fill) {}

  bool empty() const noexcept { return width == 0 || height == 0; }
  std::uint8_t& at(int x, int y, int c) noexcept {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  std::uint8_t at(int x, int y, int c) const noexcept {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Decodes any 8/16-bit gray, gray+alpha, palette, RGB or RGBA PNG into RGB8.
Image read_png(const std::filesystem::path& file);
void write_png(const Image& image, const std::filesystem::path& file);
void write_gray_png(std::span<const std::uint8_t> gray, int width, int height,
                    const std::filesystem::path& file);

/// Centred crop; throws InvalidArgument if the crop exceeds the image.
Image center_crop(const Image& image, int crop_width, int crop_height);

/// Bilinear resize with half-pixel centres (edge pixels clamped).
Image resize_bilinear(const Image& image, int width, int height);

/// Bilinear sample at (x, y) in pixel coordinates; taps outside the image
/// read as `fill`.
double sample_bilinear(const Image& image, double x, double y, int channel,
                       double fill = 0.0) noexcept;

}  // namespace adrobust
