#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace idss {

// Index-aligned point pairs: entry j describes one pixel both in the space
// used for assignment decisions ("latent") and in band space ("raw").
class DualPointSet {
 public:
  DualPointSet(std::size_t latent_dim, std::size_t raw_dim);

  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }
  std::size_t latent_dim() const noexcept { return latent_dim_; }
  std::size_t raw_dim() const noexcept { return raw_dim_; }

  std::span<const float> latent(std::size_t i) const {
    return std::span<const float>(latent_).subspan(i * latent_dim_, latent_dim_);
  }
  std::span<const float> raw(std::size_t i) const {
    return std::span<const float>(raw_).subspan(i * raw_dim_, raw_dim_);
  }

  // Throws DimensionError on wrong vector lengths.
  void push_back(std::span<const float> latent, std::span<const float> raw);
  void reserve(std::size_t n);

  // Throws InvalidArgument if any stored value is NaN or Inf.
  void check_finite() const;

 private:
  std::size_t latent_dim_;
  std::size_t raw_dim_;
  std::size_t count_ = 0;
  std::vector<float> latent_;
  std::vector<float> raw_;
};

struct DualCenter {
  std::vector<double> latent_center;
  std::vector<double> raw_center;
  std::uint64_t assign_count = 0;

  friend bool operator==(const DualCenter&, const DualCenter&) = default;
};

enum class InitMethod { kKMeansPlusPlus, kRandomPoints };

std::string_view to_string(InitMethod init) noexcept;
InitMethod parse_init_method(std::string_view text);

struct KMeansConfig {
  std::size_t m = 500;
  std::size_t batch_size = 1024;
  std::size_t max_iterations = 100;
  std::uint64_t seed = 42;
  InitMethod init = InitMethod::kKMeansPlusPlus;

  friend bool operator==(const KMeansConfig&, const KMeansConfig&) = default;
};

struct KMeansResult {
  std::vector<DualCenter> centers;
  // Sampled-point updates applied, plus one per empty-center reseed.
  std::uint64_t updates = 0;
  std::size_t reseeded = 0;
};

// k-means++ seeding in latent space. Returns min(m, number of distinct latent
// points) centers, each a copy of one input point in both spaces, with
// assign_count 0.
std::vector<DualCenter> kmeanspp_init(const DualPointSet& points, std::size_t m,
                                      std::uint64_t seed);

// Up to m distinct points chosen uniformly at random.
std::vector<DualCenter> random_points_init(const DualPointSet& points, std::size_t m,
                                           std::uint64_t seed);

// Mini-batch K-means (per-center step 1/count). Assignments use latent
// distances; every move is applied to both the latent and the raw center.
KMeansResult fit(const DualPointSet& points, const KMeansConfig& config);

// Mean squared latent distance from each point to its nearest center.
double quantization_error(std::span<const DualCenter> centers, const DualPointSet& points);

// Index of the center nearest to `v` in latent space (lowest index on ties).
std::size_t nearest_center(std::span<const DualCenter> centers, std::span<const float> v);

}  // namespace idss
