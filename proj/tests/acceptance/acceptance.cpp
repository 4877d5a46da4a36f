// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "idss/baselines.hpp"
#include "idss/dual_kmeans.hpp"
#include "idss/eval.hpp"
#include "idss/explain.hpp"
#include "idss/prototype_model.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

namespace {

using namespace idss;
using testing::Point;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

DualPointSet to_set(const std::vector<Point>& pts) {
  DualPointSet s(pts.front().size(), pts.front().size());
  for (const auto& p : pts) {
    const std::vector<float> v(p.begin(), p.end());
    s.push_back(v, v);
  }
  return s;
}

std::vector<Point> as_float(std::vector<Point> pts) {
  for (auto& p : pts) {
    for (auto& x : p) x = static_cast<double>(static_cast<float>(x));
  }
  return pts;
}

using Means = std::array<std::vector<double>, 3>;

double min_separation(const Means& m) {
  double sep = 1e9;
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) sep = std::min(sep, std::sqrt(testing::sq_dist(m[a], m[b])));
  }
  return sep;
}

// Land, water and cloud band means that differ in spectral shape. Land and
// cloud are about 0.34 apart.
Means shape_means() {
  Means m;
  for (std::size_t b = 0; b < 13; ++b) {
    m[0].push_back(0.17 + 0.025 * static_cast<double>(b));
    m[1].push_back(b < 4 ? 0.3 : 0.05);
    m[2].push_back(0.32);
  }
  return m;
}

// Land and cloud with the same spectral shape, cloud brighter.
Means brightness_means() {
  Means m;
  for (std::size_t b = 0; b < 13; ++b) {
    const double land = 0.2 + 0.02 * static_cast<double>(b);
    m[0].push_back(land);
    m[1].push_back(b < 4 ? 0.3 : 0.05);
    m[2].push_back(land + 0.09 + 0.004 * static_cast<double>(b % 3));
  }
  return m;
}

Means scene_means() { return shape_means(); }

// Train on 6 scenes, evaluate on 2 held-out ones.
bool end_to_end_case(const Means& means, bool normalize, std::string& detail) {
  std::vector<LabeledStack> train_set;
  for (std::uint64_t i = 0; i < 6; ++i) {
    auto s = testing::synthetic_scene(256, 256, means, 0.02, 1000 + i);
    train_set.push_back({std::move(s.stack), std::move(s.labels), std::nullopt});
  }
  ModelConfig cfg;
  cfg.feature = FeatureSpaceDescriptor::raw(13, normalize);
  cfg.m_per_class = 50;
  cfg.k_neighbors = 10;
  cfg.kmeans.seed = 42;
  const auto model = train(train_set, cfg);

  ConfusionCounts counts;
  for (std::uint64_t i = 0; i < 2; ++i) {
    const auto s = testing::synthetic_scene(256, 256, means, 0.02, 2000 + i);
    counts += confusion(predict_mask(s.stack, model), s.labels);
  }

  const double sep = min_separation(means);
  bool ok = sep >= 0.3;
  detail += std::string(normalize ? "[normalized" : "[unnormalized") + ", sep " + fmt("%.3f", sep);
  for (const ClassId id : kTrainableClasses) {
    const auto i = iou(counts, id), r = recall(counts, id);
    ok = ok && i && r && *i >= 0.95 && *r >= 0.95;
    detail += std::string(", ") + std::string(default_class_name(id)) + " " +
              fmt("%.4f", i.value_or(-1)) + "/" + fmt("%.4f", r.value_or(-1));
  }
  detail += "] ";
  return ok;
}

Outcome synthetic_end_to_end() {
  const auto t0 = Clock::now();
  std::string detail = "IoU/recall ";
  const bool a = end_to_end_case(shape_means(), true, detail);
  const bool b = end_to_end_case(brightness_means(), false, detail);
  const double elapsed = seconds_since(t0);
  detail += fmt("%.1f", elapsed) + " s";
  return {a && b && elapsed < 60.0, detail};
}

Outcome clustering_oracle() {
  const auto t0 = Clock::now();
  const std::vector<Point> means = {{0, 0}, {10, 0}, {0, 10}, {10, 10}};
  int passed = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto pts = as_float(testing::gaussian_blobs(means, 250, 0.5, seed));
    KMeansConfig cfg;
    cfg.m = 4;
    cfg.seed = seed;
    const auto r = fit(to_set(pts), cfg);
    const double err = quantization_error(r.centers, to_set(pts));
    const double lloyd = testing::lloyd_oracle(pts, 4, 10, seed).error;
    worst = std::max(worst, err / lloyd);
    if (err <= 1.10 * lloyd) ++passed;
  }
  const double elapsed = seconds_since(t0);
  return {passed == 5 && elapsed < 5.0, std::to_string(passed) + "/5 seeds, worst ratio " +
                                            fmt("%.4f", worst) + ", " + fmt("%.2f", elapsed) +
                                            " s"};
}

Outcome dual_consistency() {
  std::size_t checked = 0, mismatched = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto pts = testing::gaussian_blobs({{0, 0, 0}, {1, 2, 3}, {-2, 1, 0}}, 300, 0.4, seed);
    KMeansConfig cfg;
    cfg.m = 8;
    cfg.seed = seed;
    cfg.batch_size = 128;
    cfg.max_iterations = 50;
    for (const auto& c : fit(to_set(pts), cfg).centers) {
      for (std::size_t k = 0; k < c.raw_center.size(); ++k) {
        ++checked;
        if (std::bit_cast<std::uint64_t>(c.latent_center[k]) !=
            std::bit_cast<std::uint64_t>(c.raw_center[k])) {
          ++mismatched;
        }
      }
    }
  }
  return {mismatched == 0 && checked > 0,
          std::to_string(checked) + " coordinates, " + std::to_string(mismatched) + " differ"};
}

Outcome decision_oracle() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::size_t mismatches = 0;
  const int instances = 10000;
  for (int t = 0; t < instances; ++t) {
    const std::size_t dim = 1 + rng() % 8, n = 1 + rng() % 30, k = 1 + rng() % 15;
    const bool grid = rng() % 2 == 0;
    auto draw = [&] { return grid ? std::round(u(rng) * 2.0) / 2.0 : u(rng); };
    IdssModel model;
    model.config.k_neighbors = k;
    model.config.feature = FeatureSpaceDescriptor::raw(dim, false);
    model.band_names = default_band_names(dim);
    std::vector<testing::OracleProto> oracle;
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> c(dim);
      for (auto& x : c) x = static_cast<double>(static_cast<float>(draw()));
      const auto id = static_cast<ClassId>(1 + rng() % 3);
      model.prototypes.push_back({id, c, c, 1});
      oracle.push_back({id, c});
    }
    std::vector<float> f(dim);
    for (auto& x : f) x = static_cast<float>(draw());
    const auto got = decide(f, model);
    const auto want = testing::brute_decide(f, oracle, k);
    if (got.label != want.label || got.neighbor_ids != want.ranked) ++mismatches;
  }
  return {mismatches == 0,
          std::to_string(instances) + " instances, " + std::to_string(mismatches) + " mismatches"};
}

Outcome similarity_closed_form() {
  const Prototype origin{ClassId::kLand, {0.0, 0.0}, {0.0, 0.0}, 1};
  const double s1 = similarity(std::vector<float>{1.0f, 0.0f}, origin);
  const double s0 = similarity(std::vector<float>{0.0f, 0.0f}, origin);
  return {std::abs(s1 - 0.367879441) <= 1e-9 && s0 == 1.0,
          "d2=1 -> " + fmt("%.12f", s1) + ", d2=0 -> " + fmt("%.17g", s0)};
}

Outcome metrics() {
  std::mt19937_64 rng(11);
  std::size_t mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t h = 1 + rng() % 16, w = 1 + rng() % 16;
    const auto pred = testing::random_mask(h, w, rng), truth = testing::random_mask(h, w, rng);
    const auto got = confusion(pred, truth);
    const auto want = testing::brute_confusion(pred, truth);
    for (int c = 0; c < 3; ++c) {
      const auto& g = got.per_class[c];
      if (g.tp != want[c].tp || g.fp != want[c].fp || g.fn != want[c].fn || g.tn != want[c].tn) {
        ++mismatches;
      }
    }
  }
  std::size_t violations = 0;
  for (int t = 0; t < 10000; ++t) {
    const ClassCounts c{rng() % 500, rng() % 500, rng() % 500, rng() % 500};
    const auto i = iou(c), r = recall(c);
    if (r && (!i || *i > *r)) ++violations;
  }
  const auto quarter = iou(ClassCounts{1, 1, 2, 0});
  const bool exact = quarter && *quarter == 0.25;
  return {mismatches == 0 && violations == 0 && exact,
          std::to_string(mismatches) + " confusion mismatches, " + std::to_string(violations) +
              " IoU>Recall, IoU(1,1,2)=" + fmt("%.17g", quarter.value_or(-1))};
}

// Default configuration (500 prototypes per class) over a 64-channel latent
// embedding of a synthetic scene.
struct DefaultModel {
  IdssModel model;
  BandStack stack;
  BandStack latent;
};

DefaultModel default_latent_model() {
  testing::TempDir dir;
  auto scene = testing::synthetic_scene(96, 96, scene_means(), 0.02, 77);
  BandStack latent(96, 96, default_band_names(64));
  for (std::size_t k = 0; k < 64; ++k) {
    const auto src = scene.stack.plane(k % 13);
    auto dst = latent.plane(k);
    for (std::size_t i = 0; i < dst.size(); ++i) {
      dst[i] = std::tanh(src[i] * static_cast<float>(1 + k / 13));
    }
  }
  write_band_stack(latent, dir / "latent.bst");

  ModelConfig cfg;
  cfg.feature = FeatureSpaceDescriptor::latent(64);
  cfg.kmeans.max_iterations = 30;
  const std::vector<LabeledStack> in = {{scene.stack, scene.labels, dir / "latent.bst"}};
  return {train(in, cfg), std::move(scene.stack), std::move(latent)};
}

Outcome parameter_accounting(const DefaultModel& d) {
  const auto n = parameter_count(d.model);
  return {n == 96000 && d.model.prototypes.size() == 1500 && d.model.feature_dimension() == 64,
          std::to_string(d.model.prototypes.size()) + " prototypes x " +
              std::to_string(d.model.feature_dimension()) + " dims = " + std::to_string(n)};
}

Outcome tiling() {
  std::mt19937_64 rng(5);
  std::size_t failures = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t h = 1 + rng() % 600, w = 1 + rng() % 600;
    const std::size_t ts = std::array<std::size_t, 3>{64, 128, 256}[rng() % 3];
    const auto grid = plan_tiles(h, w, ts);
    const auto mask = testing::random_mask(h, w, rng);
    if (stitch_labels(split_labels(mask, grid), grid) != mask) ++failures;

    BandStack s(h, w, {"B01"});
    for (auto& v : s.data()) v = static_cast<float>(rng() % 1000);
    const auto padded = pad_stack(s, grid);
    for (const auto& o : grid.tiles) {
      const auto tile = crop_tile(padded, o, ts);
      for (std::size_t r = 0; r < ts && o.row + r < h; r += 13) {
        for (std::size_t c = 0; c < ts && o.col + c < w; c += 11) {
          if (tile.at(0, r, c) != s.at(0, o.row + r, o.col + c)) ++failures;
        }
      }
    }
  }

  // Random stack, small trained model.
  const auto scene = testing::synthetic_scene(300, 200, scene_means(), 0.05, 3);
  ModelConfig cfg;
  cfg.m_per_class = 10;
  cfg.kmeans.max_iterations = 20;
  const std::vector<LabeledStack> in = {{scene.stack, scene.labels, std::nullopt}};
  const auto model = train(in, cfg);
  BandStack random(300, 200, default_band_names(13));
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (auto& v : random.data()) v = u(rng);
  const bool same = predict_mask(random, model, nullptr, 64) ==
                    predict_mask(random, model, nullptr, 256);
  return {failures == 0 && same, std::to_string(failures) + " identity failures over 200 grids, " +
                                     "tile 64 vs 256 " + (same ? "identical" : "differ")};
}

Outcome rules(const DefaultModel& d) {
  const auto set = generate_rules(d.model);
  bool counts_ok = true;
  std::string counts;
  for (const ClassId id : kTrainableClasses) {
    const auto n = set.rules_for(id).size();
    counts_ok = counts_ok && n == 500;
    counts += std::string(default_class_name(id)) + "=" + std::to_string(n) + " ";
  }
  std::size_t term_mismatches = 0;
  for (std::size_t i = 0; i < set.rules.size(); ++i) {
    const auto& r = set.rules[i];
    const auto& raw = d.model.prototypes[i].raw_center;
    if (r.terms.size() != raw.size()) {
      ++term_mismatches;
      continue;
    }
    for (std::size_t b = 0; b < raw.size(); ++b) {
      if (r.terms[b].value != raw[b]) ++term_mismatches;
    }
  }

  const auto field = extract_features(d.stack, d.model.config.feature, &d.latent);
  std::mt19937_64 rng(13);
  std::size_t label_mismatches = 0, checked = 0;
  while (checked < 1000) {
    const std::size_t r = rng() % field.height(), c = rng() % field.width();
    if (!field.valid(r, c)) continue;
    ++checked;
    if (explain_pixel(field.at(r, c), d.model, set).decision.label !=
        decide(field.at(r, c), d.model).label) {
      ++label_mismatches;
    }
  }
  return {counts_ok && term_mismatches == 0 && label_mismatches == 0,
          counts + "; " + std::to_string(term_mismatches) + " term mismatches; " +
              std::to_string(label_mismatches) + "/1000 explain vs decide mismatches"};
}

Outcome ndwi_baseline() {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::size_t monotonicity = 0, oracle = 0;
  for (int t = 0; t < 100; ++t) {
    BandStack s(16, 16, default_band_names(13));
    for (auto& v : s.data()) v = u(rng);
    // B03 == B08 puts an index of exactly 0 on the diagonal.
    for (std::size_t i = 0; i < 16; ++i) {
      s.at(2, i, i) = 0.3f;
      s.at(7, i, i) = 0.3f;
    }
    const auto idx = ndwi(s);
    std::vector<double> thresholds = {-1.0, -0.5, -0.22, 0.0, 0.25, 0.7, 1.0};
    std::vector<LabelMask> masks;
    for (double th : thresholds) masks.push_back(threshold_classify(idx, th));
    for (std::size_t a = 0; a + 1 < masks.size(); ++a) {
      for (std::size_t i = 0; i < masks[a].pixel_count(); ++i) {
        if (masks[a + 1].labels()[i] == ClassId::kWater && masks[a].labels()[i] != ClassId::kWater) {
          ++monotonicity;
        }
      }
    }
    for (double th : {-0.22, 0.0}) {
      const auto got = threshold_classify(idx, th);
      for (std::size_t r = 0; r < 16; ++r) {
        for (std::size_t c = 0; c < 16; ++c) {
          const double g = s.at(2, r, c), n = s.at(7, r, c);
          const float value = static_cast<float>((g - n) / (g + n));
          const ClassId want = static_cast<double>(value) > th ? ClassId::kWater : ClassId::kLand;
          if (got.at(r, c) != want) ++oracle;
        }
      }
    }
  }
  IndexMap edge{1, 3, {-0.22f, 0.0f, 0.3f}, {1, 1, 1}};
  const auto at_zero = threshold_classify(edge, 0.0);
  const bool strict = at_zero.at(0, 1) == ClassId::kLand && at_zero.at(0, 2) == ClassId::kWater;
  return {monotonicity == 0 && oracle == 0 && strict,
          std::to_string(monotonicity) + " monotonicity violations, " + std::to_string(oracle) +
              " oracle mismatches, index 0 at threshold 0 -> " + (strict ? "land" : "water")};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&failures](const char* name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s  %-26s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  };

  report("synthetic end-to-end", synthetic_end_to_end);
  report("clustering oracle", clustering_oracle);
  report("dual consistency", dual_consistency);
  report("decision oracle", decision_oracle);
  report("similarity closed form", similarity_closed_form);
  report("metrics", metrics);

  std::optional<DefaultModel> default_model;
  try {
    default_model = default_latent_model();
  } catch (const std::exception& e) {
    std::printf("default model training failed: %s\n", e.what());
  }
  report("parameter accounting", [&] {
    return default_model ? parameter_accounting(*default_model) : Outcome{false, "no model"};
  });
  report("tiling", tiling);
  report("rules", [&] { return default_model ? rules(*default_model) : Outcome{false, "no model"}; });
  report("ndwi", ndwi_baseline);

  std::printf("%d failed\n", failures);
  return failures == 0 ? 0 : 1;
}
