#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "idss/raster.hpp"

namespace idss {

enum class FeatureKind {
  kRaw,     // per-pixel band vectors
  kLatent,  // externally supplied per-pixel embeddings (BST1, C = dimension)
};

std::string_view to_string(FeatureKind kind) noexcept;
// Throws InvalidArgument for anything but "raw" / "latent".
FeatureKind parse_feature_kind(std::string_view text);

struct FeatureSpaceDescriptor {
  FeatureKind kind = FeatureKind::kRaw;
  std::size_t dimension = 13;
  bool normalize = true;

  static FeatureSpaceDescriptor raw(std::size_t bands = 13, bool normalize = true) {
    return {FeatureKind::kRaw, bands, normalize};
  }
  static FeatureSpaceDescriptor latent(std::size_t dims = 64, bool normalize = true) {
    return {FeatureKind::kLatent, dims, normalize};
  }

  friend bool operator==(const FeatureSpaceDescriptor&, const FeatureSpaceDescriptor&) = default;
};

// Per-pixel feature vectors, pixel-major (the n values of a pixel are
// contiguous). Invalid pixels hold zeros.
class FeatureField {
 public:
  FeatureField() = default;
  FeatureField(std::size_t height, std::size_t width, std::size_t dimension);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t dimension() const noexcept { return dimension_; }

  std::span<const float> at(std::size_t row, std::size_t col) const {
    return std::span<const float>(vectors_).subspan((row * width_ + col) * dimension_,
                                                    dimension_);
  }
  std::span<float> at(std::size_t row, std::size_t col) {
    return std::span<float>(vectors_).subspan((row * width_ + col) * dimension_, dimension_);
  }

  bool valid(std::size_t row, std::size_t col) const { return valid_[row * width_ + col] != 0; }
  void set_valid(std::size_t row, std::size_t col, bool v) {
    valid_[row * width_ + col] = v ? 1 : 0;
  }
  const std::vector<std::uint8_t>& valid_mask() const noexcept { return valid_; }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t dimension_ = 0;
  std::vector<float> vectors_;
  std::vector<std::uint8_t> valid_;
};

// v / ||v||. Throws DegenerateVectorError for zero-norm or non-finite input.
std::vector<float> l2_normalize(std::span<const float> v);

// Non-throwing in-place variant; returns false (leaving v untouched) when v
// is degenerate.
bool l2_normalize_in_place(std::span<float> v) noexcept;

// Raw kind: band vectors of `stack` (stack.bands() must equal
// desc.dimension). Latent kind: vectors read from the BST1 file at
// `latent_path`, which must match the stack's extent.
FeatureField extract_features(const BandStack& stack, const FeatureSpaceDescriptor& desc,
                              const std::optional<std::filesystem::path>& latent_path = {});

// Same, with the latent raster already in memory (nullptr for raw kind).
FeatureField extract_features(const BandStack& stack, const FeatureSpaceDescriptor& desc,
                              const BandStack* latent);

}  // namespace idss
