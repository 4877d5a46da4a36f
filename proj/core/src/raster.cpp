#include "idss/raster.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "idss/error.hpp"

namespace idss {

namespace {

constexpr char kMagic[4] = {'B', 'S', 'T', '1'};
constexpr std::size_t kHeaderBytes = 16;

std::uint32_t load_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u32_le(std::uint32_t v, unsigned char* p) {
  p[0] = static_cast<unsigned char>(v & 0xffu);
  p[1] = static_cast<unsigned char>((v >> 8) & 0xffu);
  p[2] = static_cast<unsigned char>((v >> 16) & 0xffu);
  p[3] = static_cast<unsigned char>((v >> 24) & 0xffu);
}

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spill(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

Bst1Header decode_header(const std::vector<unsigned char>& bytes,
                         const std::filesystem::path& path) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError(path.string() + ": bad magic, expected \"BST1\"", 0);
  }
  if (bytes.size() < kHeaderBytes) {
    throw FormatError(path.string() + ": truncated header", bytes.size());
  }
  return {load_u32_le(&bytes[4]), load_u32_le(&bytes[8]), load_u32_le(&bytes[12])};
}

}  // namespace

const std::vector<std::string>& sentinel2_band_names() {
  static const std::vector<std::string> names = {"B01", "B02", "B03", "B04", "B05",
                                                 "B06", "B07", "B08", "B8A", "B09",
                                                 "B10", "B11", "B12"};
  return names;
}

std::vector<std::string> default_band_names(std::size_t bands) {
  if (bands == sentinel2_band_names().size()) return sentinel2_band_names();
  std::vector<std::string> names;
  names.reserve(bands);
  for (std::size_t i = 0; i < bands; ++i) {
    std::ostringstream s;
    s << 'B';
    if (i + 1 < 10) s << '0';
    s << i + 1;
    names.push_back(s.str());
  }
  return names;
}

// --- BandStack ---------------------------------------------------------------

BandStack::BandStack(std::size_t height, std::size_t width,
                     std::vector<std::string> band_names)
    : height_(height),
      width_(width),
      band_names_(std::move(band_names)),
      data_(height * width * band_names_.size(), 0.0f),
      valid_(height * width, 1) {}

BandStack::BandStack(std::size_t height, std::size_t width,
                     std::vector<std::string> band_names, std::vector<float> data,
                     std::vector<std::uint8_t> valid)
    : height_(height),
      width_(width),
      band_names_(std::move(band_names)),
      data_(std::move(data)),
      valid_(std::move(valid)) {
  if (data_.size() != height_ * width_ * band_names_.size()) {
    throw DimensionError("band stack payload has " + std::to_string(data_.size()) +
                         " values, expected " +
                         std::to_string(height_ * width_ * band_names_.size()));
  }
  if (valid_.empty()) valid_.assign(height_ * width_, 1);
  if (valid_.size() != height_ * width_) {
    throw DimensionError("valid mask size does not match raster extent");
  }
  for (auto& v : valid_) v = v ? 1 : 0;
}

std::optional<std::size_t> BandStack::band_index(std::string_view name) const {
  auto it = std::find(band_names_.begin(), band_names_.end(), name);
  if (it == band_names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - band_names_.begin());
}

std::span<const float> BandStack::plane(std::size_t band) const {
  return std::span<const float>(data_).subspan(band * pixel_count(), pixel_count());
}

std::span<float> BandStack::plane(std::size_t band) {
  return std::span<float>(data_).subspan(band * pixel_count(), pixel_count());
}

bool BandStack::all_valid() const noexcept {
  return std::all_of(valid_.begin(), valid_.end(), [](std::uint8_t v) { return v != 0; });
}

void BandStack::pixel(std::size_t row, std::size_t col, std::span<float> out) const {
  const std::size_t offset = row * width_ + col;
  const std::size_t stride = pixel_count();
  for (std::size_t b = 0; b < out.size(); ++b) out[b] = data_[b * stride + offset];
}

std::vector<float> BandStack::pixel(std::size_t row, std::size_t col) const {
  std::vector<float> v(bands());
  pixel(row, col, v);
  return v;
}

void BandStack::check_finite() const {
  const std::size_t n = pixel_count();
  for (std::size_t b = 0; b < bands(); ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      if (valid_[i] && !std::isfinite(data_[b * n + i])) {
        throw FormatError("non-finite value in band " + band_names_[b] + " at valid pixel",
                          kHeaderBytes + 4 * (b * n + i));
      }
    }
  }
}

// --- LabelMask ---------------------------------------------------------------

LabelMask::LabelMask(std::size_t height, std::size_t width, ClassId fill)
    : height_(height), width_(width), labels_(height * width, fill) {}

LabelMask::LabelMask(std::size_t height, std::size_t width, std::vector<ClassId> labels)
    : height_(height), width_(width), labels_(std::move(labels)) {
  if (labels_.size() != height_ * width_) {
    throw DimensionError("label count " + std::to_string(labels_.size()) +
                         " does not match " + std::to_string(height_) + "x" +
                         std::to_string(width_));
  }
}

// --- BST1 I/O ----------------------------------------------------------------

std::filesystem::path sibling_path(const std::filesystem::path& path,
                                   std::string_view extension) {
  auto out = path;
  out.replace_extension(std::string(extension));
  return out;
}

Bst1Header read_band_stack_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes(kHeaderBytes);
  in.read(reinterpret_cast<char*>(bytes.data()), kHeaderBytes);
  bytes.resize(static_cast<std::size_t>(in.gcount()));
  return decode_header(bytes, path);
}

BandStack read_band_stack(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  const auto header = decode_header(bytes, path);
  const std::uint64_t h = header.height;
  const std::uint64_t w = header.width;
  const std::uint64_t c = header.bands;
  const std::uint64_t expected = kHeaderBytes + h * w * c * 4;
  if (bytes.size() < expected) {
    throw FormatError(path.string() + ": truncated payload, expected " +
                          std::to_string(expected) + " bytes",
                      bytes.size());
  }
  if (bytes.size() > expected) {
    throw FormatError(path.string() + ": trailing bytes after payload", expected);
  }

  std::vector<float> data(h * w * c);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = std::bit_cast<float>(load_u32_le(&bytes[kHeaderBytes + 4 * i]));
  }

  std::vector<std::uint8_t> valid(h * w, 1);
  const auto mask_path = sibling_path(path, ".msk");
  if (std::filesystem::exists(mask_path)) {
    const auto mask = slurp(mask_path);
    if (mask.size() != h * w) {
      throw FormatError(mask_path.string() + ": expected " + std::to_string(h * w) +
                            " mask bytes",
                        std::min<std::uint64_t>(mask.size(), h * w));
    }
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i] > 1) throw FormatError(mask_path.string() + ": mask byte not 0/1", i);
      valid[i] = mask[i];
    }
  }

  BandStack stack(h, w, default_band_names(c), std::move(data), std::move(valid));
  try {
    stack.check_finite();
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": non-finite value at a valid pixel", e.offset());
  }
  return stack;
}

void write_band_stack(const BandStack& stack, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(kHeaderBytes + stack.data().size() * 4);
  std::memcpy(bytes.data(), kMagic, 4);
  store_u32_le(static_cast<std::uint32_t>(stack.height()), &bytes[4]);
  store_u32_le(static_cast<std::uint32_t>(stack.width()), &bytes[8]);
  store_u32_le(static_cast<std::uint32_t>(stack.bands()), &bytes[12]);
  const auto data = stack.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    store_u32_le(std::bit_cast<std::uint32_t>(data[i]), &bytes[kHeaderBytes + 4 * i]);
  }
  spill(path, bytes);

  const auto mask_path = sibling_path(path, ".msk");
  if (stack.all_valid()) {
    std::error_code ec;
    std::filesystem::remove(mask_path, ec);
  } else {
    spill(mask_path, {stack.valid_mask().begin(), stack.valid_mask().end()});
  }
}

LabelMask read_label_mask(const std::filesystem::path& path, std::size_t height,
                          std::size_t width) {
  const auto bytes = slurp(path);
  if (bytes.size() != height * width) {
    throw FormatError(path.string() + ": expected " + std::to_string(height * width) +
                          " label bytes, found " + std::to_string(bytes.size()),
                      std::min(bytes.size(), height * width));
  }
  std::vector<ClassId> labels(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (!is_known_class(bytes[i])) {
      throw FormatError(path.string() + ": unknown class id " + std::to_string(bytes[i]), i);
    }
    labels[i] = static_cast<ClassId>(bytes[i]);
  }
  return LabelMask(height, width, std::move(labels));
}

void write_label_mask(const LabelMask& mask, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(mask.pixel_count());
  std::transform(mask.labels().begin(), mask.labels().end(), bytes.begin(),
                 [](ClassId id) { return to_underlying(id); });
  spill(path, bytes);
}

// --- tiling ------------------------------------------------------------------

TileGrid plan_tiles(std::size_t height, std::size_t width, std::size_t tile_size) {
  if (height == 0 || width == 0 || tile_size == 0) {
    throw InvalidArgument("plan_tiles: height, width and tile_size must be positive");
  }
  TileGrid grid;
  grid.tile_size = tile_size;
  grid.original_height = height;
  grid.original_width = width;
  grid.padded_height = (height + tile_size - 1) / tile_size * tile_size;
  grid.padded_width = (width + tile_size - 1) / tile_size * tile_size;
  for (std::size_t r = 0; r < grid.padded_height; r += tile_size) {
    for (std::size_t c = 0; c < grid.padded_width; c += tile_size) {
      grid.tiles.push_back({r, c});
    }
  }
  return grid;
}

BandStack pad_stack(const BandStack& stack, const TileGrid& grid) {
  if (stack.height() != grid.original_height || stack.width() != grid.original_width) {
    throw DimensionError("pad_stack: grid planned for " + std::to_string(grid.original_height) +
                         "x" + std::to_string(grid.original_width) + ", stack is " +
                         std::to_string(stack.height()) + "x" + std::to_string(stack.width()));
  }
  if (grid.padded_height == stack.height() && grid.padded_width == stack.width()) {
    return stack;
  }
  BandStack out(grid.padded_height, grid.padded_width, stack.band_names());
  for (std::size_t b = 0; b < stack.bands(); ++b) {
    for (std::size_t r = 0; r < stack.height(); ++r) {
      const auto src = stack.plane(b).subspan(r * stack.width(), stack.width());
      std::copy(src.begin(), src.end(), out.plane(b).begin() + r * out.width());
    }
  }
  for (std::size_t r = 0; r < out.height(); ++r) {
    for (std::size_t c = 0; c < out.width(); ++c) {
      const bool inside = r < stack.height() && c < stack.width();
      out.set_valid(r, c, inside && stack.valid(r, c));
    }
  }
  return out;
}

BandStack crop_tile(const BandStack& padded, TileOrigin origin, std::size_t tile_size) {
  if (origin.row + tile_size > padded.height() || origin.col + tile_size > padded.width()) {
    throw DimensionError("crop_tile: tile exceeds raster extent");
  }
  BandStack out(tile_size, tile_size, padded.band_names());
  for (std::size_t b = 0; b < padded.bands(); ++b) {
    for (std::size_t r = 0; r < tile_size; ++r) {
      const auto src =
          padded.plane(b).subspan((origin.row + r) * padded.width() + origin.col, tile_size);
      std::copy(src.begin(), src.end(), out.plane(b).begin() + r * tile_size);
    }
  }
  for (std::size_t r = 0; r < tile_size; ++r) {
    for (std::size_t c = 0; c < tile_size; ++c) {
      out.set_valid(r, c, padded.valid(origin.row + r, origin.col + c));
    }
  }
  return out;
}

std::vector<std::pair<TileOrigin, LabelMask>> split_labels(const LabelMask& mask,
                                                           const TileGrid& grid) {
  if (mask.height() != grid.original_height || mask.width() != grid.original_width) {
    throw DimensionError("split_labels: mask does not match grid");
  }
  const std::size_t ts = grid.tile_size;
  std::vector<std::pair<TileOrigin, LabelMask>> out;
  out.reserve(grid.tiles.size());
  for (const auto& origin : grid.tiles) {
    LabelMask tile(ts, ts, ClassId::kInvalid);
    for (std::size_t r = 0; r < ts && origin.row + r < mask.height(); ++r) {
      for (std::size_t c = 0; c < ts && origin.col + c < mask.width(); ++c) {
        tile.at(r, c) = mask.at(origin.row + r, origin.col + c);
      }
    }
    out.emplace_back(origin, std::move(tile));
  }
  return out;
}

LabelMask stitch_labels(std::span<const std::pair<TileOrigin, LabelMask>> tile_masks,
                        const TileGrid& grid) {
  const std::size_t ts = grid.tile_size;
  const std::set<TileOrigin> expected(grid.tiles.begin(), grid.tiles.end());
  std::set<TileOrigin> seen;
  for (const auto& [origin, tile] : tile_masks) {
    if (!expected.contains(origin)) {
      throw DimensionError("stitch_labels: origin (" + std::to_string(origin.row) + ", " +
                           std::to_string(origin.col) + ") is not on the grid");
    }
    if (!seen.insert(origin).second) {
      throw DimensionError("stitch_labels: duplicate tile at (" + std::to_string(origin.row) +
                           ", " + std::to_string(origin.col) + ")");
    }
    if (tile.height() != ts || tile.width() != ts) {
      throw DimensionError("stitch_labels: tile at (" + std::to_string(origin.row) + ", " +
                           std::to_string(origin.col) + ") is not " + std::to_string(ts) +
                           "x" + std::to_string(ts));
    }
  }
  if (seen.size() != expected.size()) {
    std::string missing;
    for (const auto& o : expected) {
      if (!seen.contains(o)) {
        missing += " (" + std::to_string(o.row) + ", " + std::to_string(o.col) + ")";
      }
    }
    throw DimensionError("stitch_labels: missing tiles:" + missing);
  }

  LabelMask out(grid.original_height, grid.original_width);
  for (const auto& [origin, tile] : tile_masks) {
    for (std::size_t r = 0; r < ts && origin.row + r < out.height(); ++r) {
      for (std::size_t c = 0; c < ts && origin.col + c < out.width(); ++c) {
        out.at(origin.row + r, origin.col + c) = tile.at(r, c);
      }
    }
  }
  return out;
}

Rgb palette_color(ClassId id) noexcept {
  switch (id) {
    case ClassId::kLand:
      return {0, 255, 0};
    case ClassId::kWater:
      return {0, 0, 255};
    case ClassId::kCloud:
      return {255, 255, 0};
    case ClassId::kInvalid:
      break;
  }
  return {0, 0, 0};
}

// --- labels.hpp --------------------------------------------------------------

std::string_view default_class_name(ClassId id) noexcept {
  switch (id) {
    case ClassId::kLand:
      return "Land";
    case ClassId::kWater:
      return "Water";
    case ClassId::kCloud:
      return "Cloud";
    case ClassId::kInvalid:
      break;
  }
  return "Invalid";
}

std::map<ClassId, std::string> default_class_names() {
  std::map<ClassId, std::string> names;
  for (auto id : kTrainableClasses) names.emplace(id, std::string(default_class_name(id)));
  return names;
}

}  // namespace idss
