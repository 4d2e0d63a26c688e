#include "adrobust/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "adrobust/error.hpp"

namespace adrobust {

Image read_png(const std::filesystem::path& file) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, file.string().c_str())) {
    throw IoError("cannot read PNG '" + file.string() + "': " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  Image out(static_cast<int>(png.width), static_cast<int>(png.height));
  if (!png_image_finish_read(&png, nullptr, out.pixels.data(), 0, nullptr)) {
    png_image_free(&png);
    throw IoError("cannot decode PNG '" + file.string() + "': " + png.message);
  }
  return out;
}

namespace {

void write_png_format(const std::uint8_t* data, int width, int height, png_uint_32 format,
                      const std::filesystem::path& file) {
  if (width <= 0 || height <= 0) throw InvalidArgument("cannot write an empty image");
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(width);
  png.height = static_cast<png_uint_32>(height);
  png.format = format;
  if (!png_image_write_to_file(&png, file.string().c_str(), 0, data, 0, nullptr)) {
    throw IoError("cannot write PNG '" + file.string() + "': " + png.message);
  }
}

}  // namespace

void write_png(const Image& image, const std::filesystem::path& file) {
  write_png_format(image.pixels.data(), image.width, image.height, PNG_FORMAT_RGB, file);
}

void write_gray_png(std::span<const std::uint8_t> gray, int width, int height,
                    const std::filesystem::path& file) {
  if (gray.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw InvalidArgument("gray buffer size does not match image dimensions");
  }
  write_png_format(gray.data(), width, height, PNG_FORMAT_GRAY, file);
}

Image center_crop(const Image& image, int crop_width, int crop_height) {
  if (crop_width <= 0 || crop_height <= 0) throw InvalidArgument("crop size must be positive");
  if (crop_width > image.width || crop_height > image.height) {
    throw InvalidArgument("crop " + std::to_string(crop_width) + "x" + std::to_string(crop_height) +
                          " exceeds image " + std::to_string(image.width) + "x" + std::to_string(image.height));
  }
  const int x0 = (image.width - crop_width) / 2;
  const int y0 = (image.height - crop_height) / 2;
  Image out(crop_width, crop_height);
  for (int y = 0; y < crop_height; ++y) {
    const auto* src = &image.pixels[(static_cast<std::size_t>(y0 + y) * image.width + x0) * 3];
    std::copy(src, src + static_cast<std::size_t>(crop_width) * 3,
              &out.pixels[static_cast<std::size_t>(y) * crop_width * 3]);
  }
  return out;
}

Image resize_bilinear(const Image& image, int width, int height) {
  if (width <= 0 || height <= 0) throw InvalidArgument("resize target must be positive");
  if (image.empty()) throw InvalidArgument("cannot resize an empty image");
  if (width == image.width && height == image.height) return image;
  Image out(width, height);
  const double sx = static_cast<double>(image.width) / width;
  const double sy = static_cast<double>(image.height) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(image.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(image.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = image.at(x0, y0, c) * (1.0 - wx) + image.at(x1, y0, c) * wx;
        const double bottom = image.at(x0, y1, c) * (1.0 - wx) + image.at(x1, y1, c) * wx;
        const double v = top * (1.0 - wy) + bottom * wy;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

double sample_bilinear(const Image& image, double x, double y, int channel, double fill) noexcept {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const double wx = x - fx;
  const double wy = y - fy;
  const auto tap = [&](double tx, double ty) {
    if (tx < 0 || ty < 0 || tx >= image.width || ty >= image.height) return fill;
    return static_cast<double>(image.at(static_cast<int>(tx), static_cast<int>(ty), channel));
  };
  double v = 0.0;
  if (wx < 1.0 && wy < 1.0) v += (1.0 - wx) * (1.0 - wy) * tap(fx, fy);
  if (wx > 0.0) v += wx * (1.0 - wy) * tap(fx + 1, fy);
  if (wy > 0.0) v += (1.0 - wx) * wy * tap(fx, fy + 1);
  if (wx > 0.0 && wy > 0.0) v += wx * wy * tap(fx + 1, fy + 1);
  return v;
}

}  // namespace adrobust
