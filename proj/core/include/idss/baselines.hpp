#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "idss/raster.hpp"

namespace idss {

// Per-pixel water index. Undefined pixels hold 0 with valid = 0.
struct IndexMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> values;
  std::vector<std::uint8_t> valid;

  std::optional<float> at(std::size_t row, std::size_t col) const {
    const std::size_t i = row * width + col;
    if (!valid[i]) return std::nullopt;
    return values[i];
  }
};

// (B03 - B08) / (B03 + B08). Undefined where the stack pixel is invalid or
// the denominator is zero. Throws DimensionError if either band is missing.
IndexMap ndwi(const BandStack& stack);

// Water where value > threshold, land otherwise, invalid where undefined.
LabelMask threshold_classify(const IndexMap& index, double threshold);

// Single-band stack named "NDWI" for writing as BST1.
BandStack index_to_stack(const IndexMap& index);

}  // namespace idss
