#include "idss/dual_kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "idss/error.hpp"
#include "rng.hpp"

namespace idss {

namespace {

// Sampling draws come from a stream distinct from the seeding stream so that
// changing the init method does not shift the batches.
constexpr std::uint64_t kSamplingStream = 0x9e3779b97f4a7c15ULL;

double squared_distance(std::span<const double> center, std::span<const float> v) {
  double sum = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double d = center[k] - static_cast<double>(v[k]);
    sum += d * d;
  }
  return sum;
}

DualCenter center_from_point(const DualPointSet& points, std::size_t i) {
  const auto latent = points.latent(i);
  const auto raw = points.raw(i);
  return {std::vector<double>(latent.begin(), latent.end()),
          std::vector<double>(raw.begin(), raw.end()), 0};
}

// center += eta * (point - center), which leaves a center sitting on the
// point exactly where it is.
void move_toward(std::vector<double>& center, std::span<const float> point, double eta) {
  for (std::size_t k = 0; k < center.size(); ++k) {
    center[k] += eta * (static_cast<double>(point[k]) - center[k]);
  }
}

void validate(const DualPointSet& points, std::size_t m) {
  if (points.empty()) throw InvalidArgument("k-means: empty point set");
  if (m == 0) throw InvalidArgument("k-means: cluster count must be at least 1");
}

}  // namespace

// --- DualPointSet ------------------------------------------------------------

DualPointSet::DualPointSet(std::size_t latent_dim, std::size_t raw_dim)
    : latent_dim_(latent_dim), raw_dim_(raw_dim) {}

void DualPointSet::push_back(std::span<const float> latent, std::span<const float> raw) {
  if (latent.size() != latent_dim_ || raw.size() != raw_dim_) {
    throw DimensionError("DualPointSet: expected (" + std::to_string(latent_dim_) + ", " +
                         std::to_string(raw_dim_) + ") dimensions, got (" +
                         std::to_string(latent.size()) + ", " + std::to_string(raw.size()) +
                         ")");
  }
  latent_.insert(latent_.end(), latent.begin(), latent.end());
  raw_.insert(raw_.end(), raw.begin(), raw.end());
  ++count_;
}

void DualPointSet::reserve(std::size_t n) {
  latent_.reserve(n * latent_dim_);
  raw_.reserve(n * raw_dim_);
}

void DualPointSet::check_finite() const {
  auto finite = [](float x) { return std::isfinite(x); };
  if (!std::all_of(latent_.begin(), latent_.end(), finite) ||
      !std::all_of(raw_.begin(), raw_.end(), finite)) {
    throw InvalidArgument("k-means: non-finite input point");
  }
}

// --- init --------------------------------------------------------------------

std::string_view to_string(InitMethod init) noexcept {
  return init == InitMethod::kRandomPoints ? "random_points" : "kmeans_pp";
}

InitMethod parse_init_method(std::string_view text) {
  if (text == "kmeans_pp") return InitMethod::kKMeansPlusPlus;
  if (text == "random_points") return InitMethod::kRandomPoints;
  throw InvalidArgument("unknown init method \"" + std::string(text) + "\"");
}

std::vector<DualCenter> kmeanspp_init(const DualPointSet& points, std::size_t m,
                                      std::uint64_t seed) {
  validate(points, m);
  detail::Rng rng(seed);
  const std::size_t n = points.size();

  std::vector<DualCenter> centers;
  centers.reserve(std::min(m, n));
  centers.push_back(center_from_point(points, rng.below(n)));

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    d2[i] = squared_distance(centers.back().latent_center, points.latent(i));
  }

  while (centers.size() < m) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    // Every remaining point duplicates an existing center.
    if (!(total > 0.0)) break;

    const double target = rng.uniform() * total;
    std::size_t chosen = n;
    std::size_t last_positive = n;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      last_positive = i;
      cumulative += d2[i];
      if (cumulative > target) {
        chosen = i;
        break;
      }
    }
    if (chosen == n) chosen = last_positive;

    centers.push_back(center_from_point(points, chosen));
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(centers.back().latent_center, points.latent(i)));
    }
  }
  return centers;
}

std::vector<DualCenter> random_points_init(const DualPointSet& points, std::size_t m,
                                           std::uint64_t seed) {
  validate(points, m);
  detail::Rng rng(seed);
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }

  std::vector<DualCenter> centers;
  for (std::size_t idx : order) {
    if (centers.size() == m) break;
    const auto v = points.latent(idx);
    const bool duplicate = std::any_of(centers.begin(), centers.end(), [&](const DualCenter& c) {
      return std::equal(v.begin(), v.end(), c.latent_center.begin(),
                        [](float a, double b) { return static_cast<double>(a) == b; });
    });
    if (!duplicate) centers.push_back(center_from_point(points, idx));
  }
  return centers;
}

// --- fit ---------------------------------------------------------------------

std::size_t nearest_center(std::span<const DualCenter> centers, std::span<const float> v) {
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d2 = squared_distance(centers[c].latent_center, v);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = c;
    }
  }
  return best;
}

KMeansResult fit(const DualPointSet& points, const KMeansConfig& config) {
  validate(points, config.m);
  if (config.batch_size == 0) throw InvalidArgument("k-means: batch size must be at least 1");
  points.check_finite();

  KMeansResult result;
  result.centers = config.init == InitMethod::kRandomPoints
                       ? random_points_init(points, config.m, config.seed)
                       : kmeanspp_init(points, config.m, config.seed);
  auto& centers = result.centers;

  detail::Rng sampler(config.seed ^ kSamplingStream);
  std::vector<std::size_t> batch(config.batch_size);
  std::vector<std::size_t> assigned(config.batch_size);

  for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
    for (auto& idx : batch) idx = sampler.below(points.size());
    // Assign the whole batch against the centers as they stand, then move.
    for (std::size_t b = 0; b < batch.size(); ++b) {
      assigned[b] = nearest_center(centers, points.latent(batch[b]));
    }
    for (std::size_t b = 0; b < batch.size(); ++b) {
      DualCenter& c = centers[assigned[b]];
      ++c.assign_count;
      const double eta = 1.0 / static_cast<double>(c.assign_count);
      move_toward(c.latent_center, points.latent(batch[b]), eta);
      move_toward(c.raw_center, points.raw(batch[b]), eta);
      ++result.updates;
    }
  }

  // One repair pass: each empty center jumps to the point farthest from the
  // live centers. A center that finds no point at positive distance is dropped.
  const bool any_empty = std::any_of(centers.begin(), centers.end(),
                                     [](const DualCenter& c) { return c.assign_count == 0; });
  if (any_empty) {
    const std::size_t n = points.size();
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    for (const auto& c : centers) {
      if (c.assign_count == 0) continue;
      for (std::size_t i = 0; i < n; ++i) {
        d2[i] = std::min(d2[i], squared_distance(c.latent_center, points.latent(i)));
      }
    }
    std::vector<DualCenter> kept;
    kept.reserve(centers.size());
    for (auto& c : centers) {
      if (c.assign_count > 0) {
        kept.push_back(std::move(c));
        continue;
      }
      const auto far = std::max_element(d2.begin(), d2.end());
      if (!(*far > 0.0)) continue;
      DualCenter reseeded = center_from_point(points, static_cast<std::size_t>(far - d2.begin()));
      reseeded.assign_count = 1;
      for (std::size_t i = 0; i < n; ++i) {
        d2[i] = std::min(d2[i], squared_distance(reseeded.latent_center, points.latent(i)));
      }
      kept.push_back(std::move(reseeded));
      ++result.updates;
      ++result.reseeded;
    }
    centers = std::move(kept);
  }
  return result;
}

double quantization_error(std::span<const DualCenter> centers, const DualPointSet& points) {
  if (centers.empty()) throw InvalidArgument("quantization_error: no centers");
  if (points.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    total += squared_distance(centers[nearest_center(centers, points.latent(i))].latent_center,
                              points.latent(i));
  }
  return total / static_cast<double>(points.size());
}

}  // namespace idss
