// 8-bit RGB PNG read/write on top of libpng. Values scale by 1/255 on
// load and round to nearest on save; alpha is dropped on read.
#pragma once

#include <png.h>

#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnof/imaging.hpp"

namespace qnof {

inline ColorImage load_png(const std::string& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(
      std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!fp) throw std::runtime_error("load_png: cannot open " + path);

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("load_png: png_create_read_struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("load_png: png_create_info_struct");
  }
  std::vector<png_bytep> rows;
  std::vector<png_byte> data;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("load_png: failed reading " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const png_byte color_type = png_get_color_type(png, info);
  const png_byte bit_depth = png_get_bit_depth(png, info);

  // normalize everything to 8-bit RGB
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type == PNG_COLOR_TYPE_GRAY ||
      color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const std::size_t rowbytes = png_get_rowbytes(png, info);
  data.resize(rowbytes * height);
  rows.resize(height);
  for (png_uint_32 i = 0; i < height; ++i) rows[i] = data.data() + i * rowbytes;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  ColorImage img(height, width);
  for (png_uint_32 i = 0; i < height; ++i) {
    const png_bytep row = rows[i];
    for (png_uint_32 j = 0; j < width; ++j) {
      img.r(i, j) = row[3 * j + 0] / 255.0;
      img.g(i, j) = row[3 * j + 1] / 255.0;
      img.b(i, j) = row[3 * j + 2] / 255.0;
    }
  }
  return img;
}

inline void save_png(const std::string& path, const ColorImage& img) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(
      std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) throw std::runtime_error("save_png: cannot open " + path);

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("save_png: png_create_write_struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("save_png: png_create_info_struct");
  }
  const Eigen::Index h = img.height(), w = img.width();
  std::vector<png_byte> data(static_cast<std::size_t>(3 * h * w));
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  auto to_byte = [](double v) {
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<png_byte>(std::lround(c * 255.0));
  };
  for (Eigen::Index i = 0; i < h; ++i) {
    rows[static_cast<std::size_t>(i)] =
        data.data() + static_cast<std::size_t>(3 * i * w);
    for (Eigen::Index j = 0; j < w; ++j) {
      data[static_cast<std::size_t>(3 * (i * w + j) + 0)] = to_byte(img.r(i, j));
      data[static_cast<std::size_t>(3 * (i * w + j) + 1)] = to_byte(img.g(i, j));
      data[static_cast<std::size_t>(3 * (i * w + j) + 2)] = to_byte(img.b(i, j));
    }
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("save_png: failed writing " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w),
               static_cast<png_uint_32>(h), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace qnof
