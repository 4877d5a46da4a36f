#include "idss/baselines.hpp"

#include <cmath>
#include <string>

#include "idss/error.hpp"

namespace idss {

IndexMap ndwi(const BandStack& stack) {
  const auto green = stack.band_index("B03");
  const auto nir = stack.band_index("B08");
  if (!green || !nir) {
    throw DimensionError(std::string("NDWI needs bands B03 and B08; missing ") +
                         (!green ? "B03" : "B08"));
  }
  IndexMap out{stack.height(), stack.width(), std::vector<float>(stack.pixel_count(), 0.0f),
               std::vector<std::uint8_t>(stack.pixel_count(), 0)};
  const auto g = stack.plane(*green);
  const auto n = stack.plane(*nir);
  const auto& valid = stack.valid_mask();
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    if (!valid[i]) continue;
    const double sum = static_cast<double>(g[i]) + n[i];
    if (sum == 0.0) continue;
    const double value = (static_cast<double>(g[i]) - n[i]) / sum;
    if (!std::isfinite(value)) continue;
    out.values[i] = static_cast<float>(value);
    out.valid[i] = 1;
  }
  return out;
}

LabelMask threshold_classify(const IndexMap& index, double threshold) {
  LabelMask out(index.height, index.width, ClassId::kInvalid);
  auto labels = out.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!index.valid[i]) continue;
    labels[i] = static_cast<double>(index.values[i]) > threshold ? ClassId::kWater : ClassId::kLand;
  }
  return out;
}

BandStack index_to_stack(const IndexMap& index) {
  return BandStack(index.height, index.width, {"NDWI"}, index.values, index.valid);
}

}  // namespace idss
