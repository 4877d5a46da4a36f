#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "idss/labels.hpp"

namespace idss {

// Sentinel-2 band names in the order the 13-band stacks are stored:
// B01..B08, B8A, B09..B12.
const std::vector<std::string>& sentinel2_band_names();

// Sentinel-2 names when `bands` == 13, otherwise "B01", "B02", ...
std::vector<std::string> default_band_names(std::size_t bands);

// H x W x C raster of 32-bit reals stored band-sequential (C planes, each
// row-major), with a per-pixel validity mask.
class BandStack {
 public:
  BandStack() = default;

  // Zero-filled stack with every pixel valid.
  BandStack(std::size_t height, std::size_t width, std::vector<std::string> band_names);

  // Takes ownership of `data` (size H*W*C) and `valid` (size H*W, 0 or 1).
  // An empty `valid` means every pixel is valid. Throws DimensionError on size
  // mismatches; does not check finiteness (see check_finite()).
  BandStack(std::size_t height, std::size_t width, std::vector<std::string> band_names,
            std::vector<float> data, std::vector<std::uint8_t> valid = {});

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t bands() const noexcept { return band_names_.size(); }
  std::size_t pixel_count() const noexcept { return height_ * width_; }

  const std::vector<std::string>& band_names() const noexcept { return band_names_; }
  std::optional<std::size_t> band_index(std::string_view name) const;

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  std::span<const float> plane(std::size_t band) const;
  std::span<float> plane(std::size_t band);

  float at(std::size_t band, std::size_t row, std::size_t col) const {
    return data_[(band * height_ + row) * width_ + col];
  }
  float& at(std::size_t band, std::size_t row, std::size_t col) {
    return data_[(band * height_ + row) * width_ + col];
  }

  const std::vector<std::uint8_t>& valid_mask() const noexcept { return valid_; }
  bool valid(std::size_t row, std::size_t col) const { return valid_[row * width_ + col] != 0; }
  void set_valid(std::size_t row, std::size_t col, bool v) {
    valid_[row * width_ + col] = v ? 1 : 0;
  }
  bool all_valid() const noexcept;

  // Copies the C band values of one pixel into `out` (size C).
  void pixel(std::size_t row, std::size_t col, std::span<float> out) const;
  std::vector<float> pixel(std::size_t row, std::size_t col) const;

  // Throws FormatError if any valid pixel holds NaN or Inf.
  void check_finite() const;

  friend bool operator==(const BandStack&, const BandStack&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::string> band_names_;
  std::vector<float> data_;
  std::vector<std::uint8_t> valid_;
};

class LabelMask {
 public:
  LabelMask() = default;
  LabelMask(std::size_t height, std::size_t width, ClassId fill = ClassId::kInvalid);
  // Throws DimensionError unless labels.size() == height * width.
  LabelMask(std::size_t height, std::size_t width, std::vector<ClassId> labels);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t pixel_count() const noexcept { return labels_.size(); }

  ClassId at(std::size_t row, std::size_t col) const { return labels_[row * width_ + col]; }
  ClassId& at(std::size_t row, std::size_t col) { return labels_[row * width_ + col]; }

  std::span<const ClassId> labels() const noexcept { return labels_; }
  std::span<ClassId> labels() noexcept { return labels_; }

  friend bool operator==(const LabelMask&, const LabelMask&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<ClassId> labels_;
};

struct TileOrigin {
  std::size_t row = 0;
  std::size_t col = 0;

  friend auto operator<=>(const TileOrigin&, const TileOrigin&) = default;
};

struct TileGrid {
  std::size_t tile_size = 256;
  std::size_t original_height = 0;
  std::size_t original_width = 0;
  std::size_t padded_height = 0;
  std::size_t padded_width = 0;
  std::vector<TileOrigin> tiles;  // row-major order

  std::size_t tile_rows() const noexcept { return padded_height / tile_size; }
  std::size_t tile_cols() const noexcept { return padded_width / tile_size; }
};

// --- BST1 interchange ------------------------------------------------------

// Reads a BST1 file plus its optional ".msk" sibling. Band names are the
// defaults for the stored band count since BST1 does not carry names.
BandStack read_band_stack(const std::filesystem::path& path);

// Writes BST1. A ".msk" sibling is written only if some pixel is invalid; a
// stale one is removed otherwise so that read-back matches.
void write_band_stack(const BandStack& stack, const std::filesystem::path& path);

// Reads only the 16-byte header: (height, width, bands).
struct Bst1Header {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t bands = 0;
};
Bst1Header read_band_stack_header(const std::filesystem::path& path);

// ".lbl" files: H*W bytes of class ids, no header.
LabelMask read_label_mask(const std::filesystem::path& path, std::size_t height,
                          std::size_t width);
void write_label_mask(const LabelMask& mask, const std::filesystem::path& path);

// `path` with its extension replaced (".msk", ".lbl").
std::filesystem::path sibling_path(const std::filesystem::path& path, std::string_view extension);

// --- tiling ----------------------------------------------------------------

TileGrid plan_tiles(std::size_t height, std::size_t width, std::size_t tile_size = 256);

// Zero-filled, invalid padding up to the grid's padded extent.
BandStack pad_stack(const BandStack& stack, const TileGrid& grid);

// tile_size x tile_size window of a padded stack.
BandStack crop_tile(const BandStack& padded, TileOrigin origin, std::size_t tile_size);

// Splits a mask of original dimensions into padded tiles (padding labelled
// invalid). Inverse of stitch_labels.
std::vector<std::pair<TileOrigin, LabelMask>> split_labels(const LabelMask& mask,
                                                           const TileGrid& grid);

// Reassembles tile masks and crops the padding away.
LabelMask stitch_labels(std::span<const std::pair<TileOrigin, LabelMask>> tile_masks,
                        const TileGrid& grid);

// --- rendering -------------------------------------------------------------

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

Rgb palette_color(ClassId id) noexcept;

void write_mask_png(const LabelMask& mask, const std::filesystem::path& path);

// Decodes an 8-bit RGB PNG into row-major pixels; used to inspect rendered masks.
struct RgbImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<Rgb> pixels;
};
RgbImage read_rgb_png(const std::filesystem::path& path);

}  // namespace idss
