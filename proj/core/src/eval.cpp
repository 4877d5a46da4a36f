#include "idss/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "idss/error.hpp"
#include "json.hpp"

namespace idss {

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& other) {
  for (std::size_t i = 0; i < per_class.size(); ++i) {
    per_class[i].tp += other.per_class[i].tp;
    per_class[i].fp += other.per_class[i].fp;
    per_class[i].fn += other.per_class[i].fn;
    per_class[i].tn += other.per_class[i].tn;
  }
  evaluated += other.evaluated;
  return *this;
}

ConfusionCounts confusion(const LabelMask& pred, const LabelMask& truth) {
  if (pred.height() != truth.height() || pred.width() != truth.width()) {
    throw DimensionError("confusion: prediction is " + std::to_string(pred.height()) + "x" +
                         std::to_string(pred.width()) + ", reference is " +
                         std::to_string(truth.height()) + "x" + std::to_string(truth.width()));
  }
  // Joint histogram first, one-vs-rest counts from it.
  std::array<std::array<std::uint64_t, 4>, 4> joint{};
  const auto p = pred.labels();
  const auto t = truth.labels();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] == ClassId::kInvalid) continue;
    ++joint[to_underlying(t[i])][to_underlying(p[i])];
  }

  ConfusionCounts out;
  for (std::size_t ti = 1; ti < 4; ++ti) {
    for (std::size_t pi = 0; pi < 4; ++pi) out.evaluated += joint[ti][pi];
  }
  for (const ClassId id : kTrainableClasses) {
    const auto c = to_underlying(id);
    auto& counts = out[id];
    counts.tp = joint[c][c];
    std::uint64_t predicted = 0;
    std::uint64_t actual = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      predicted += joint[k][c];
      actual += joint[c][k];
    }
    counts.fp = predicted - counts.tp;
    counts.fn = actual - counts.tp;
    counts.tn = out.evaluated - counts.tp - counts.fp - counts.fn;
  }
  return out;
}

std::optional<double> iou(const ClassCounts& c) {
  const std::uint64_t denom = c.tp + c.fp + c.fn;
  if (denom == 0) return std::nullopt;
  return static_cast<double>(c.tp) / static_cast<double>(denom);
}

std::optional<double> iou(const ConfusionCounts& counts, ClassId id) { return iou(counts[id]); }

std::optional<double> recall(const ClassCounts& c) {
  const std::uint64_t denom = c.tp + c.fn;
  if (denom == 0) return std::nullopt;
  return static_cast<double>(c.tp) / static_cast<double>(denom);
}

std::optional<double> recall(const ConfusionCounts& counts, ClassId id) {
  return recall(counts[id]);
}

MetricsReport report(const ConfusionCounts& counts,
                     const std::map<ClassId, std::string>& class_names) {
  MetricsReport out;
  out.evaluated_pixels = counts.evaluated;
  for (const ClassId id : kTrainableClasses) {
    ClassMetrics row;
    row.class_id = id;
    if (id == ClassId::kWater) {
      row.name = "total water";
    } else {
      const auto it = class_names.find(id);
      row.name = it != class_names.end() ? it->second : std::string(default_class_name(id));
    }
    row.counts = counts[id];
    row.iou = iou(row.counts);
    row.recall = recall(row.counts);
    row.pixel_share = counts.evaluated == 0
                          ? 0.0
                          : static_cast<double>(row.counts.tp + row.counts.fn) /
                                static_cast<double>(counts.evaluated);
    out.rows.push_back(std::move(row));
  }
  return out;
}

MetricsReport report(const LabelMask& pred, const LabelMask& truth,
                     const std::map<ClassId, std::string>& class_names) {
  return report(confusion(pred, truth), class_names);
}

std::string format_percent(const std::optional<double>& value) {
  if (!value) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", *value * 100.0);
  return buf;
}

std::string format_report_text(const MetricsReport& report) {
  std::size_t name_width = 5;
  for (const auto& row : report.rows) name_width = std::max(name_width, row.name.size());

  std::ostringstream out;
  auto cell = [&out](const std::string& s, std::size_t width, bool left) {
    if (left) {
      out << s << std::string(width > s.size() ? width - s.size() : 0, ' ');
    } else {
      out << std::string(width > s.size() ? width - s.size() : 0, ' ') << s;
    }
  };
  cell("class", name_width, true);
  out << "  ";
  cell("IoU %", 8, false);
  out << "  ";
  cell("Recall %", 8, false);
  out << "  ";
  cell("share %", 8, false);
  out << '\n';
  for (const auto& row : report.rows) {
    cell(row.name, name_width, true);
    out << "  ";
    cell(format_percent(row.iou), 8, false);
    out << "  ";
    cell(format_percent(row.recall), 8, false);
    out << "  ";
    cell(format_percent(row.pixel_share), 8, false);
    out << '\n';
  }
  out << "evaluated pixels: " << report.evaluated_pixels << '\n';
  return out.str();
}

std::string format_report_json(const MetricsReport& report) {
  nlohmann::ordered_json root;
  root["evaluated_pixels"] = report.evaluated_pixels;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    nlohmann::ordered_json j;
    j["class_id"] = to_underlying(row.class_id);
    j["name"] = row.name;
    j["iou_percent"] = row.iou ? nlohmann::ordered_json(*row.iou * 100.0) : nullptr;
    j["recall_percent"] = row.recall ? nlohmann::ordered_json(*row.recall * 100.0) : nullptr;
    j["pixel_share_percent"] = row.pixel_share * 100.0;
    j["tp"] = row.counts.tp;
    j["fp"] = row.counts.fp;
    j["fn"] = row.counts.fn;
    j["tn"] = row.counts.tn;
    rows.push_back(std::move(j));
  }
  root["classes"] = std::move(rows);
  return root.dump(2) + "\n";
}

}  // namespace idss
