#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "idss/labels.hpp"
#include "idss/raster.hpp"

namespace idss {

struct ClassCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

// One-vs-rest tallies per trainable class over the pixels whose reference
// label is valid. Counts from several images can be summed (micro average).
struct ConfusionCounts {
  std::array<ClassCounts, 3> per_class{};
  std::uint64_t evaluated = 0;

  ClassCounts& operator[](ClassId id) { return per_class.at(to_underlying(id) - 1); }
  const ClassCounts& operator[](ClassId id) const { return per_class.at(to_underlying(id) - 1); }

  ConfusionCounts& operator+=(const ConfusionCounts& other);

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// Pixels with truth 0 are skipped; a prediction of 0 on a valid reference
// pixel is a miss for the reference class. Throws DimensionError when the
// masks differ in size.
ConfusionCounts confusion(const LabelMask& pred, const LabelMask& truth);

// TP / (TP + FP + FN); nullopt when the denominator is 0.
std::optional<double> iou(const ClassCounts& counts);
std::optional<double> iou(const ConfusionCounts& counts, ClassId id);
// TP / (TP + FN); nullopt when the class is absent from the reference.
std::optional<double> recall(const ClassCounts& counts);
std::optional<double> recall(const ConfusionCounts& counts, ClassId id);

struct ClassMetrics {
  ClassId class_id = ClassId::kLand;
  std::string name;  // the water row is headed "total water"
  std::optional<double> iou;
  std::optional<double> recall;
  double pixel_share = 0.0;  // share of evaluated reference pixels
  ClassCounts counts;
};

struct MetricsReport {
  std::vector<ClassMetrics> rows;  // class id order
  std::uint64_t evaluated_pixels = 0;
};

MetricsReport report(const ConfusionCounts& counts,
                     const std::map<ClassId, std::string>& class_names = default_class_names());
MetricsReport report(const LabelMask& pred, const LabelMask& truth,
                     const std::map<ClassId, std::string>& class_names = default_class_names());

// Percent with 2 decimals, "n/a" when undefined.
std::string format_percent(const std::optional<double>& value);

// Aligned columns: class, IoU %, Recall %, share %.
std::string format_report_text(const MetricsReport& report);
std::string format_report_json(const MetricsReport& report);

}  // namespace idss
