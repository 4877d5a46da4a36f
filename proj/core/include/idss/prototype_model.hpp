#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idss/dual_kmeans.hpp"
#include "idss/features.hpp"
#include "idss/labels.hpp"
#include "idss/raster.hpp"

namespace idss {

inline constexpr int kModelFormatVersion = 1;

// A cluster center of one class. `latent_center` lives in the space the model
// decides in (the extracted feature space); `raw_center` is the same center
// expressed as band reflectances.
struct Prototype {
  ClassId class_id = ClassId::kLand;
  std::vector<double> latent_center;
  std::vector<double> raw_center;
  std::uint64_t support_count = 0;

  friend bool operator==(const Prototype&, const Prototype&) = default;
};

struct ModelConfig {
  std::size_t m_per_class = 500;
  std::size_t k_neighbors = 10;
  FeatureSpaceDescriptor feature;
  KMeansConfig kmeans;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct IdssModel {
  ModelConfig config;
  std::vector<Prototype> prototypes;
  std::vector<std::string> band_names;
  std::map<ClassId, std::string> class_names = default_class_names();
  int format_version = kModelFormatVersion;

  std::size_t raw_dimension() const noexcept { return band_names.size(); }
  std::size_t feature_dimension() const noexcept { return config.feature.dimension; }
  std::size_t prototype_count(ClassId id) const noexcept;
  std::string_view class_name(ClassId id) const;

  friend bool operator==(const IdssModel&, const IdssModel&) = default;
};

// Prototypes times feature dimension.
std::size_t parameter_count(const IdssModel& model) noexcept;

struct LabeledStack {
  BandStack stack;
  LabelMask labels;
  // Required iff the feature kind is latent.
  std::optional<std::filesystem::path> latent_path;
};

// Clusters the valid pixels of each trainable class separately and keeps the
// centers as prototypes. Throws TrainingError if a class has no pixels.
IdssModel train(std::span<const LabeledStack> inputs, const ModelConfig& config);

// exp(-||f - p.latent_center||^2)
double similarity(std::span<const float> f, const Prototype& p);

struct PixelDecision {
  ClassId label = ClassId::kInvalid;
  std::vector<std::size_t> neighbor_ids;       // best first
  std::vector<double> neighbor_similarities;   // non-increasing
  std::map<ClassId, std::size_t> votes;
};

// K-nearest-prototype vote over all classes pooled, K = min(k_neighbors,
// prototype count).
//
// Neighbors are ranked by similarity, ties by smaller squared distance, then
// smaller class id, then lower prototype index. The label is the class with
// the most votes; a tie goes to the larger similarity sum over that class's
// neighbors, then to the smaller class id.
PixelDecision decide(std::span<const float> f, const IdssModel& model);

// Tiles, decides every valid pixel and stitches. Invalid pixels get label 0.
LabelMask predict_mask(const BandStack& stack, const IdssModel& model,
                       const std::optional<std::filesystem::path>& latent_path = {},
                       std::size_t tile_size = 256);
LabelMask predict_mask(const BandStack& stack, const IdssModel& model, const BandStack* latent,
                       std::size_t tile_size = 256);

// Textual (JSON) model files.
std::string serialize_model(const IdssModel& model);
IdssModel parse_model(std::string_view text);
void save_model(const IdssModel& model, const std::filesystem::path& path);
IdssModel load_model(const std::filesystem::path& path);

}  // namespace idss
