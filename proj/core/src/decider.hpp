#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <tuple>
#include <vector>

#include "idss/prototype_model.hpp"

namespace idss::detail {

// Reusable scratch for repeated decisions against one model. Prototype
// centers are flattened into one contiguous buffer.
class Decider {
 public:
  explicit Decider(const IdssModel& model);

  ClassId label(std::span<const float> f);
  PixelDecision decide(std::span<const float> f);

 private:
  struct Candidate {
    double d2;
    ClassId class_id;
    std::size_t index;

    friend bool operator<(const Candidate& a, const Candidate& b) {
      return std::tie(a.d2, a.class_id, a.index) < std::tie(b.d2, b.class_id, b.index);
    }
  };

  void rank(std::span<const float> f);
  ClassId tally(std::span<const double> sims) const;

  std::size_t dimension_ = 0;
  std::size_t k_ = 0;
  std::vector<double> centers_;
  std::vector<ClassId> classes_;
  std::vector<Candidate> ranked_;
  std::vector<double> sims_;
};

}  // namespace idss::detail
