#include "idss/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "idss/error.hpp"

namespace idss {

std::string_view to_string(FeatureKind kind) noexcept {
  return kind == FeatureKind::kLatent ? "latent" : "raw";
}

FeatureKind parse_feature_kind(std::string_view text) {
  if (text == "raw") return FeatureKind::kRaw;
  if (text == "latent") return FeatureKind::kLatent;
  throw InvalidArgument("unknown feature kind \"" + std::string(text) +
                        "\" (expected raw or latent)");
}

FeatureField::FeatureField(std::size_t height, std::size_t width, std::size_t dimension)
    : height_(height),
      width_(width),
      dimension_(dimension),
      vectors_(height * width * dimension, 0.0f),
      valid_(height * width, 0) {}

bool l2_normalize_in_place(std::span<float> v) noexcept {
  double sq = 0.0;
  for (float x : v) {
    if (!std::isfinite(x)) return false;
    sq += static_cast<double>(x) * x;
  }
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) return false;
  for (float& x : v) x = static_cast<float>(x / norm);
  return true;
}

std::vector<float> l2_normalize(std::span<const float> v) {
  std::vector<float> out(v.begin(), v.end());
  if (!l2_normalize_in_place(out)) {
    throw DegenerateVectorError("cannot normalize a zero-norm or non-finite vector");
  }
  return out;
}

FeatureField extract_features(const BandStack& stack, const FeatureSpaceDescriptor& desc,
                              const std::optional<std::filesystem::path>& latent_path) {
  if (desc.kind == FeatureKind::kRaw) return extract_features(stack, desc, nullptr);
  if (!latent_path) {
    throw InvalidArgument("latent feature space requires a latent feature file");
  }
  const BandStack latent = read_band_stack(*latent_path);
  return extract_features(stack, desc, &latent);
}

FeatureField extract_features(const BandStack& stack, const FeatureSpaceDescriptor& desc,
                              const BandStack* latent) {
  if (desc.dimension == 0) throw InvalidArgument("feature dimension must be at least 1");

  const BandStack* source = &stack;
  if (desc.kind == FeatureKind::kRaw) {
    if (stack.bands() != desc.dimension) {
      throw DimensionError("raw feature space expects " + std::to_string(desc.dimension) +
                           " bands, stack has " + std::to_string(stack.bands()));
    }
  } else {
    if (latent == nullptr) {
      throw InvalidArgument("latent feature space requires a latent feature raster");
    }
    if (latent->bands() != desc.dimension) {
      throw DimensionError("latent features have " + std::to_string(latent->bands()) +
                           " channels, model expects " + std::to_string(desc.dimension));
    }
    if (latent->height() != stack.height() || latent->width() != stack.width()) {
      throw DimensionError("latent raster extent does not match the band stack");
    }
    source = latent;
  }

  FeatureField field(stack.height(), stack.width(), desc.dimension);
  for (std::size_t r = 0; r < stack.height(); ++r) {
    for (std::size_t c = 0; c < stack.width(); ++c) {
      if (!stack.valid(r, c) || !source->valid(r, c)) continue;
      auto v = field.at(r, c);
      source->pixel(r, c, v);
      bool ok = true;
      if (desc.normalize) {
        ok = l2_normalize_in_place(v);
      } else {
        for (float x : v) ok = ok && std::isfinite(x);
      }
      if (ok) {
        field.set_valid(r, c, true);
      } else {
        std::fill(v.begin(), v.end(), 0.0f);
      }
    }
  }
  return field;
}

}  // namespace idss
