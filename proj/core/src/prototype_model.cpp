#include "idss/prototype_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "decider.hpp"
#include "idss/error.hpp"

namespace idss {

std::size_t IdssModel::prototype_count(ClassId id) const noexcept {
  return static_cast<std::size_t>(std::count_if(
      prototypes.begin(), prototypes.end(), [id](const Prototype& p) { return p.class_id == id; }));
}

std::string_view IdssModel::class_name(ClassId id) const {
  const auto it = class_names.find(id);
  return it != class_names.end() ? std::string_view(it->second) : default_class_name(id);
}

std::size_t parameter_count(const IdssModel& model) noexcept {
  return model.prototypes.size() * model.feature_dimension();
}

// --- training ----------------------------------------------------------------

namespace {

void validate_config(const ModelConfig& config) {
  if (config.m_per_class == 0) throw InvalidArgument("m_per_class must be at least 1");
  if (config.k_neighbors == 0) throw InvalidArgument("k_neighbors must be at least 1");
  if (config.kmeans.batch_size == 0) throw InvalidArgument("batch_size must be at least 1");
}

}  // namespace

IdssModel train(std::span<const LabeledStack> inputs, const ModelConfig& config) {
  validate_config(config);
  if (inputs.empty()) throw TrainingError("no labeled stacks to train on");

  const auto& band_names = inputs.front().stack.band_names();
  const std::size_t raw_dim = band_names.size();
  const bool latent = config.feature.kind == FeatureKind::kLatent;
  if (!latent && config.feature.dimension != raw_dim) {
    throw DimensionError("raw feature space of dimension " +
                         std::to_string(config.feature.dimension) + " but stacks have " +
                         std::to_string(raw_dim) + " bands");
  }

  std::vector<FeatureField> fields;
  fields.reserve(inputs.size());
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    const auto& in = inputs[s];
    if (in.stack.band_names() != band_names) {
      throw DimensionError("training stack " + std::to_string(s) +
                           " has different bands from the first stack");
    }
    if (in.labels.height() != in.stack.height() || in.labels.width() != in.stack.width()) {
      throw DimensionError("labels of training stack " + std::to_string(s) +
                           " do not match its extent");
    }
    if (latent && !in.latent_path) {
      throw InvalidArgument("training stack " + std::to_string(s) +
                            " has no latent feature file");
    }
    if (!latent && in.latent_path) {
      throw InvalidArgument("latent feature file given for a raw-feature model");
    }
    fields.push_back(extract_features(in.stack, config.feature, in.latent_path));
  }

  IdssModel model;
  model.config = config;
  model.config.kmeans.m = config.m_per_class;
  model.band_names = band_names;

  std::vector<float> raw(raw_dim);
  for (const ClassId id : kTrainableClasses) {
    DualPointSet points(config.feature.dimension, raw_dim);
    for (std::size_t s = 0; s < inputs.size(); ++s) {
      const auto& stack = inputs[s].stack;
      const auto& labels = inputs[s].labels;
      const auto& field = fields[s];
      for (std::size_t r = 0; r < stack.height(); ++r) {
        for (std::size_t c = 0; c < stack.width(); ++c) {
          if (labels.at(r, c) != id || !field.valid(r, c)) continue;
          stack.pixel(r, c, raw);
          points.push_back(field.at(r, c), raw);
        }
      }
    }
    if (points.empty()) {
      throw TrainingError("no valid training pixels for class " +
                          std::string(default_class_name(id)));
    }

    KMeansConfig kmeans = config.kmeans;
    kmeans.m = config.m_per_class;
    kmeans.seed = config.kmeans.seed + to_underlying(id);
    auto result = fit(points, kmeans);
    for (auto& center : result.centers) {
      model.prototypes.push_back({id, std::move(center.latent_center),
                                  std::move(center.raw_center), center.assign_count});
    }
  }
  return model;
}

// --- decision ----------------------------------------------------------------

double similarity(std::span<const float> f, const Prototype& p) {
  if (f.size() != p.latent_center.size()) {
    throw DimensionError("similarity: feature has " + std::to_string(f.size()) +
                         " dimensions, prototype has " + std::to_string(p.latent_center.size()));
  }
  double d2 = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double d = static_cast<double>(f[k]) - p.latent_center[k];
    d2 += d * d;
  }
  return std::exp(-d2);
}

namespace detail {

Decider::Decider(const IdssModel& model) {
  if (model.prototypes.empty()) throw InvalidArgument("decide: model has no prototypes");
  dimension_ = model.prototypes.front().latent_center.size();
  for (const auto& p : model.prototypes) {
    if (p.latent_center.size() != dimension_) {
      throw DimensionError("model prototypes disagree on feature dimension");
    }
  }
  k_ = std::min(model.config.k_neighbors, model.prototypes.size());
  centers_.reserve(model.prototypes.size() * dimension_);
  classes_.reserve(model.prototypes.size());
  for (const auto& p : model.prototypes) {
    centers_.insert(centers_.end(), p.latent_center.begin(), p.latent_center.end());
    classes_.push_back(p.class_id);
  }
  ranked_.reserve(k_ + 1);
}

void Decider::rank(std::span<const float> f) {
  if (f.size() != dimension_) {
    throw DimensionError("decide: feature has " + std::to_string(f.size()) +
                         " dimensions, model expects " + std::to_string(dimension_));
  }
  ranked_.clear();
  const std::size_t count = classes_.size();
  const double* center = centers_.data();
  for (std::size_t i = 0; i < count; ++i, center += dimension_) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < dimension_; ++k) {
      const double d = static_cast<double>(f[k]) - center[k];
      d2 += d * d;
    }
    const Candidate cand{d2, classes_[i], i};
    if (ranked_.size() == k_ && !(cand < ranked_.back())) continue;
    auto pos = std::upper_bound(ranked_.begin(), ranked_.end(), cand);
    ranked_.insert(pos, cand);
    if (ranked_.size() > k_) ranked_.pop_back();
  }
}

ClassId Decider::tally(std::span<const double> sims) const {
  std::array<std::size_t, 4> votes{};
  std::array<double, 4> sums{};
  for (std::size_t i = 0; i < ranked_.size(); ++i) {
    const auto c = to_underlying(ranked_[i].class_id);
    ++votes[c];
    sums[c] += sims[i];
  }
  ClassId best = ClassId::kInvalid;
  std::size_t best_votes = 0;
  double best_sum = 0.0;
  for (const ClassId id : kTrainableClasses) {
    const auto c = to_underlying(id);
    if (votes[c] == 0) continue;
    if (votes[c] > best_votes || (votes[c] == best_votes && sums[c] > best_sum)) {
      best = id;
      best_votes = votes[c];
      best_sum = sums[c];
    }
  }
  return best;
}

ClassId Decider::label(std::span<const float> f) {
  rank(f);
  sims_.resize(ranked_.size());
  for (std::size_t i = 0; i < ranked_.size(); ++i) sims_[i] = std::exp(-ranked_[i].d2);
  return tally(sims_);
}

PixelDecision Decider::decide(std::span<const float> f) {
  PixelDecision out;
  out.label = label(f);
  out.neighbor_ids.reserve(ranked_.size());
  out.neighbor_similarities = sims_;
  for (const auto& cand : ranked_) {
    out.neighbor_ids.push_back(cand.index);
    ++out.votes[cand.class_id];
  }
  return out;
}

}  // namespace detail

PixelDecision decide(std::span<const float> f, const IdssModel& model) {
  detail::Decider decider(model);
  return decider.decide(f);
}

// --- prediction --------------------------------------------------------------

LabelMask predict_mask(const BandStack& stack, const IdssModel& model,
                       const std::optional<std::filesystem::path>& latent_path,
                       std::size_t tile_size) {
  if (model.config.feature.kind == FeatureKind::kLatent) {
    if (!latent_path) throw InvalidArgument("latent model requires a latent feature file");
    const BandStack latent = read_band_stack(*latent_path);
    return predict_mask(stack, model, &latent, tile_size);
  }
  return predict_mask(stack, model, nullptr, tile_size);
}

LabelMask predict_mask(const BandStack& stack, const IdssModel& model, const BandStack* latent,
                       std::size_t tile_size) {
  if (stack.bands() != model.raw_dimension()) {
    throw DimensionError("stack has " + std::to_string(stack.bands()) +
                         " bands, model was trained on " +
                         std::to_string(model.raw_dimension()));
  }
  const bool latent_kind = model.config.feature.kind == FeatureKind::kLatent;
  if (latent_kind && latent == nullptr) {
    throw InvalidArgument("latent model requires a latent feature raster");
  }
  if (latent_kind && (latent->height() != stack.height() || latent->width() != stack.width())) {
    throw DimensionError("latent raster extent does not match the band stack");
  }

  detail::Decider decider(model);
  const TileGrid grid = plan_tiles(stack.height(), stack.width(), tile_size);
  const BandStack padded = pad_stack(stack, grid);
  std::optional<BandStack> padded_latent;
  if (latent_kind) padded_latent = pad_stack(*latent, grid);

  std::vector<std::pair<TileOrigin, LabelMask>> tiles;
  tiles.reserve(grid.tiles.size());
  for (const auto& origin : grid.tiles) {
    const BandStack tile = crop_tile(padded, origin, tile_size);
    std::optional<BandStack> tile_latent;
    if (padded_latent) tile_latent = crop_tile(*padded_latent, origin, tile_size);
    const FeatureField field = extract_features(
        tile, model.config.feature, tile_latent ? &*tile_latent : nullptr);

    LabelMask labels(tile_size, tile_size, ClassId::kInvalid);
    for (std::size_t r = 0; r < tile_size; ++r) {
      for (std::size_t c = 0; c < tile_size; ++c) {
        if (field.valid(r, c)) labels.at(r, c) = decider.label(field.at(r, c));
      }
    }
    tiles.emplace_back(origin, std::move(labels));
  }
  return stitch_labels(tiles, grid);
}

}  // namespace idss
