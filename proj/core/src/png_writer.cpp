#include <png.h>

#include <cstring>

#include "idss/error.hpp"
#include "idss/raster.hpp"

namespace idss {

void write_mask_png(const LabelMask& mask, const std::filesystem::path& path) {
  std::vector<unsigned char> rgb(mask.pixel_count() * 3);
  const auto labels = mask.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Rgb c = palette_color(labels[i]);
    rgb[3 * i] = c.r;
    rgb[3 * i + 1] = c.g;
    rgb[3 * i + 2] = c.b;
  }

  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(mask.width());
  image.height = static_cast<png_uint_32>(mask.height());
  image.format = PNG_FORMAT_RGB;
  if (png_image_write_to_file(&image, path.c_str(), 0, rgb.data(), 0, nullptr) == 0) {
    const std::string reason = image.message;
    png_image_free(&image);
    throw IoError("cannot write PNG " + path.string() + ": " + reason);
  }
}

RgbImage read_rgb_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&image, path.c_str()) == 0) {
    const std::string reason = image.message;
    png_image_free(&image);
    throw IoError("cannot read PNG " + path.string() + ": " + reason);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(image));
  if (png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr) == 0) {
    const std::string reason = image.message;
    png_image_free(&image);
    throw FormatError("cannot decode PNG " + path.string() + ": " + reason);
  }

  RgbImage out;
  out.height = image.height;
  out.width = image.width;
  out.pixels.resize(out.height * out.width);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    out.pixels[i] = {buffer[3 * i], buffer[3 * i + 1], buffer[3 * i + 2]};
  }
  return out;
}

}  // namespace idss
