#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <png.h>

namespace skindet {

// Interleaved 8-bit RGB.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // 3 * width * height

  std::uint8_t r(int row, int col) const { return rgb[idx(row, col)]; }
  std::uint8_t g(int row, int col) const { return rgb[idx(row, col) + 1]; }
  std::uint8_t b(int row, int col) const { return rgb[idx(row, col) + 2]; }

  std::size_t idx(int row, int col) const {
    return 3 * (static_cast<std::size_t>(row) * width + col);
  }
};

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> gray;

  std::uint8_t at(int row, int col) const {
    return gray[static_cast<std::size_t>(row) * width + col];
  }
};

namespace detail {
inline void png_check(png_imagep image, const std::string& what, const std::string& path) {
  if (PNG_IMAGE_FAILED(*image))
    throw std::invalid_argument(what + " " + path + ": " + image->message);
}
}  // namespace detail

inline Image read_png_rgb(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw std::invalid_argument("cannot read image " + path.string() + ": " + image.message);
  image.format = PNG_FORMAT_RGB;
  Image out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.rgb.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.rgb.data(), 0, nullptr)) {
    png_image_free(&image);
    throw std::invalid_argument("cannot decode image " + path.string() + ": " + image.message);
  }
  return out;
}

inline GrayImage read_png_gray(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw std::invalid_argument("cannot read mask " + path.string() + ": " + image.message);
  image.format = PNG_FORMAT_GRAY;
  GrayImage out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.gray.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.gray.data(), 0, nullptr)) {
    png_image_free(&image);
    throw std::invalid_argument("cannot decode mask " + path.string() + ": " + image.message);
  }
  return out;
}

inline void write_png_rgb(const Image& img, const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.rgb.data(), 0, nullptr))
    throw std::runtime_error("cannot write image " + path.string() + ": " + image.message);
}

inline void write_png_gray(const GrayImage& img, const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.gray.data(), 0, nullptr))
    throw std::runtime_error("cannot write mask " + path.string() + ": " + image.message);
}

}  // namespace skindet
