#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "idss/baselines.hpp"
#include "idss/error.hpp"
#include "idss/eval.hpp"
#include "idss/explain.hpp"
#include "idss/features.hpp"
#include "idss/prototype_model.hpp"
#include "idss/raster.hpp"

namespace idss::cli {

namespace fs = std::filesystem;

namespace {

// Carries the exit code out of a command.
class CommandError : public std::runtime_error {
 public:
  CommandError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

[[noreturn]] void usage_error(const std::string& what) { throw CommandError(kUsageError, what); }
[[noreturn]] void data_error(const std::string& what) { throw CommandError(kDataError, what); }

void require_file(const fs::path& path, const std::string& role) {
  if (!fs::is_regular_file(path)) data_error(role + " not found: " + path.string());
}

void require_writable(const fs::path& path, const std::string& role) {
  const auto parent = path.parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    usage_error(role + " directory does not exist: " + parent.string());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

// --- train -------------------------------------------------------------------

struct TrainOptions {
  std::string inputs;
  std::size_t m = 500;
  std::size_t k = 10;
  std::string feature = "raw";
  std::string latent_dir;
  bool normalize = true;
  std::size_t batch_size = 1024;
  std::size_t iters = 100;
  std::uint64_t seed = 42;
  std::string init = "kmeans_pp";
  std::string out;
};

int cmd_train(const TrainOptions& opt, std::ostream& out) {
  ModelConfig config;
  try {
    config.feature.kind = parse_feature_kind(opt.feature);
    config.kmeans.init = parse_init_method(opt.init);
  } catch (const InvalidArgument& e) {
    usage_error(e.what());
  }
  if (opt.m == 0 || opt.k == 0 || opt.batch_size == 0) {
    usage_error("--m, --k and --batch-size must be positive");
  }
  const bool latent = config.feature.kind == FeatureKind::kLatent;
  if (latent && opt.latent_dir.empty()) usage_error("--feature latent requires --latent-dir");
  if (!latent && !opt.latent_dir.empty()) usage_error("--latent-dir requires --feature latent");
  require_writable(opt.out, "model output");

  if (!fs::is_directory(opt.inputs)) data_error("input directory not found: " + opt.inputs);
  if (latent && !fs::is_directory(opt.latent_dir)) {
    data_error("latent feature directory not found: " + opt.latent_dir);
  }

  std::vector<fs::path> stacks;
  for (const auto& entry : fs::directory_iterator(opt.inputs)) {
    if (entry.is_regular_file() && entry.path().extension() == ".bst") {
      stacks.push_back(entry.path());
    }
  }
  std::sort(stacks.begin(), stacks.end());
  if (stacks.empty()) data_error("no .bst stacks in " + opt.inputs);
  for (const auto& s : stacks) {
    require_file(sibling_path(s, ".lbl"), "label file for " + s.string());
    if (latent) require_file(fs::path(opt.latent_dir) / s.filename(), "latent features for " + s.string());
  }

  std::vector<LabeledStack> inputs;
  inputs.reserve(stacks.size());
  for (const auto& s : stacks) {
    LabeledStack ls;
    ls.stack = read_band_stack(s);
    ls.labels = read_label_mask(sibling_path(s, ".lbl"), ls.stack.height(), ls.stack.width());
    if (latent) ls.latent_path = fs::path(opt.latent_dir) / s.filename();
    inputs.push_back(std::move(ls));
  }

  config.m_per_class = opt.m;
  config.k_neighbors = opt.k;
  config.feature.normalize = opt.normalize;
  config.feature.dimension = latent ? read_band_stack_header(*inputs.front().latent_path).bands
                                    : inputs.front().stack.bands();
  config.kmeans.m = opt.m;
  config.kmeans.batch_size = opt.batch_size;
  config.kmeans.max_iterations = opt.iters;
  config.kmeans.seed = opt.seed;

  out << "seed: " << opt.seed << '\n';
  out << "feature: " << to_string(config.feature.kind) << " (dimension "
      << config.feature.dimension << ", normalize " << (opt.normalize ? "on" : "off") << ")\n";
  out << "training stacks: " << inputs.size() << '\n';

  const IdssModel model = train(inputs, config);
  save_model(model, opt.out);

  for (const ClassId id : kTrainableClasses) {
    out << "prototypes " << model.class_name(id) << ": " << model.prototype_count(id) << '\n';
  }
  out << "prototypes total: " << model.prototypes.size() << '\n';
  out << "parameter_count: " << parameter_count(model) << '\n';
  out << "model written to " << opt.out << '\n';
  return kSuccess;
}

// --- predict -----------------------------------------------------------------

struct PredictOptions {
  std::string model;
  std::string stack;
  std::string latent_features;
  std::string out;
  std::string png;
  std::size_t tile_size = 256;
};

int cmd_predict(const PredictOptions& opt, std::ostream& out) {
  if (opt.tile_size == 0) usage_error("--tile-size must be positive");
  require_file(opt.model, "model");
  require_file(opt.stack, "band stack");
  require_writable(opt.out, "mask output");
  if (!opt.png.empty()) require_writable(opt.png, "PNG output");

  const IdssModel model = load_model(opt.model);
  const bool latent = model.config.feature.kind == FeatureKind::kLatent;
  if (latent && opt.latent_features.empty()) {
    usage_error("model uses latent features; pass --latent-features");
  }
  if (!latent && !opt.latent_features.empty()) {
    usage_error("--latent-features given but the model uses raw features");
  }
  if (latent) require_file(opt.latent_features, "latent feature file");

  const BandStack stack = read_band_stack(opt.stack);
  std::optional<fs::path> latent_path;
  if (latent) latent_path = opt.latent_features;
  const LabelMask mask = predict_mask(stack, model, latent_path, opt.tile_size);

  write_label_mask(mask, opt.out);
  out << "mask " << mask.height() << "x" << mask.width() << " written to " << opt.out << '\n';
  if (!opt.png.empty()) {
    write_mask_png(mask, opt.png);
    out << "png written to " << opt.png << '\n';
  }
  return kSuccess;
}

// --- evaluate ----------------------------------------------------------------

struct EvaluateOptions {
  std::string pred;
  std::string truth;
  std::string format = "text";
  std::string out;
};

// Mask extent from a sibling .bst header when one exists, else a 1 x N strip.
LabelMask read_mask_for_eval(const fs::path& path) {
  const auto bst = sibling_path(path, ".bst");
  if (fs::is_regular_file(bst)) {
    const auto header = read_band_stack_header(bst);
    return read_label_mask(path, header.height, header.width);
  }
  return read_label_mask(path, 1, fs::file_size(path));
}

int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out) {
  if (opt.format != "text" && opt.format != "json") usage_error("--format must be text or json");
  require_file(opt.pred, "prediction mask");
  require_file(opt.truth, "reference mask");
  if (!opt.out.empty()) require_writable(opt.out, "report output");

  LabelMask pred = read_mask_for_eval(opt.pred);
  LabelMask truth = read_mask_for_eval(opt.truth);
  if (pred.pixel_count() != truth.pixel_count()) {
    data_error("mask size mismatch: " + opt.pred + " has " + std::to_string(pred.pixel_count()) +
               " pixels, " + opt.truth + " has " + std::to_string(truth.pixel_count()));
  }
  // Only one side may have a known 2-D shape; compare as strips then.
  if (pred.height() != truth.height()) {
    pred = LabelMask(1, pred.pixel_count(), std::vector<ClassId>(pred.labels().begin(), pred.labels().end()));
    truth = LabelMask(1, truth.pixel_count(), std::vector<ClassId>(truth.labels().begin(), truth.labels().end()));
  }

  const MetricsReport rep = report(pred, truth);
  const std::string text = opt.format == "json" ? format_report_json(rep) : format_report_text(rep);
  out << text;
  if (!opt.out.empty()) write_text(opt.out, text);
  return kSuccess;
}

// --- rules -------------------------------------------------------------------

struct RulesOptions {
  std::string model;
  std::string out;
  int precision = 4;
  std::string format = "text";
  bool disjunction = false;
};

int cmd_rules(const RulesOptions& opt, std::ostream& out) {
  if (opt.precision < 0 || opt.precision > 17) usage_error("--precision must be in [0, 17]");
  if (opt.format != "text" && opt.format != "json") usage_error("--format must be text or json");
  require_file(opt.model, "model");
  require_writable(opt.out, "rules output");

  const IdssModel model = load_model(opt.model);
  const RuleSet rules = generate_rules(model);
  std::string text;
  if (opt.format == "json") {
    text = export_rules_json(rules, model, opt.precision);
  } else if (opt.disjunction) {
    for (const ClassId id : kTrainableClasses) {
      if (model.prototype_count(id) == 0) continue;
      text += render_class_disjunction(rules, id, opt.precision) + '\n';
    }
  } else {
    text = export_rules_text(rules, opt.precision);
  }
  write_text(opt.out, text);

  for (const ClassId id : kTrainableClasses) {
    out << "rules " << model.class_name(id) << ": " << rules.rules_for(id).size() << '\n';
  }
  out << "rules written to " << opt.out << '\n';
  return kSuccess;
}

// --- explain -----------------------------------------------------------------

struct ExplainOptions {
  std::string model;
  std::string stack;
  std::string latent_features;
  std::vector<long long> pixel;
  int precision = 4;
};

BandStack single_pixel(const BandStack& stack, std::size_t row, std::size_t col) {
  return BandStack(1, 1, stack.band_names(), stack.pixel(row, col),
                   {static_cast<std::uint8_t>(stack.valid(row, col) ? 1 : 0)});
}

int cmd_explain(const ExplainOptions& opt, std::ostream& out) {
  if (opt.pixel.size() != 2) usage_error("--pixel takes <row> <col>");
  if (opt.precision < 0 || opt.precision > 17) usage_error("--precision must be in [0, 17]");
  require_file(opt.model, "model");
  require_file(opt.stack, "band stack");

  const IdssModel model = load_model(opt.model);
  const bool latent = model.config.feature.kind == FeatureKind::kLatent;
  if (latent && opt.latent_features.empty()) {
    usage_error("model uses latent features; pass --latent-features");
  }
  if (latent) require_file(opt.latent_features, "latent feature file");

  const BandStack stack = read_band_stack(opt.stack);
  const long long row = opt.pixel[0];
  const long long col = opt.pixel[1];
  if (row < 0 || col < 0 || static_cast<std::size_t>(row) >= stack.height() ||
      static_cast<std::size_t>(col) >= stack.width()) {
    usage_error("pixel (" + std::to_string(row) + ", " + std::to_string(col) +
                ") is outside the " + std::to_string(stack.height()) + "x" +
                std::to_string(stack.width()) + " stack");
  }
  if (stack.bands() != model.raw_dimension()) {
    data_error("stack has " + std::to_string(stack.bands()) + " bands, model expects " +
               std::to_string(model.raw_dimension()));
  }

  const auto r = static_cast<std::size_t>(row);
  const auto c = static_cast<std::size_t>(col);
  const BandStack one = single_pixel(stack, r, c);
  std::optional<BandStack> latent_one;
  if (latent) {
    const BandStack latent_stack = read_band_stack(opt.latent_features);
    if (latent_stack.height() != stack.height() || latent_stack.width() != stack.width()) {
      data_error("latent feature file extent does not match the stack");
    }
    latent_one = single_pixel(latent_stack, r, c);
  }
  const FeatureField field =
      extract_features(one, model.config.feature, latent_one ? &*latent_one : nullptr);

  out << "pixel (" << row << ", " << col << ")";
  if (!field.valid(0, 0)) {
    out << ": invalid, not classified (label 0)\n";
    return kSuccess;
  }

  const RuleSet rules = generate_rules(model);
  const Explanation ex = explain_pixel(field.at(0, 0), model, rules);
  out << ": label " << model.class_name(ex.decision.label) << '\n';
  out << "votes:";
  for (const auto& [id, n] : ex.decision.votes) out << ' ' << model.class_name(id) << '=' << n;
  out << '\n';
  for (std::size_t i = 0; i < ex.entries.size(); ++i) {
    const auto& e = ex.entries[i];
    std::ostringstream sim;
    sim << std::setprecision(6) << std::fixed << e.similarity;
    out << '#' << i + 1 << "  prototype " << e.prototype_index << "  "
        << model.class_name(e.class_id) << "  similarity " << sim.str() << "  support "
        << e.rule.support_count << "\n    "
        << render_rule_text(e.rule, model.class_names, opt.precision) << '\n';
  }
  return kSuccess;
}

// --- ndwi --------------------------------------------------------------------

struct NdwiOptions {
  std::string stack;
  double threshold = 0.0;
  std::string out;
  std::string index_out;
};

int cmd_ndwi(const NdwiOptions& opt, std::ostream& out) {
  require_file(opt.stack, "band stack");
  require_writable(opt.out, "mask output");
  if (!opt.index_out.empty()) require_writable(opt.index_out, "index output");

  const BandStack stack = read_band_stack(opt.stack);
  const IndexMap index = ndwi(stack);
  const LabelMask mask = threshold_classify(index, opt.threshold);
  write_label_mask(mask, opt.out);

  const auto water = std::count(mask.labels().begin(), mask.labels().end(), ClassId::kWater);
  out << "threshold: " << opt.threshold << '\n';
  out << "water pixels: " << water << '\n';
  out << "mask written to " << opt.out << '\n';
  if (!opt.index_out.empty()) {
    write_band_stack(index_to_stack(index), opt.index_out);
    out << "index written to " << opt.index_out << '\n';
  }
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prototype-based interpretable segmentation of multispectral rasters"};
  app.set_config("--config", "", "Read options from a TOML/INI file (flags override it)");
  app.require_subcommand(1);

  TrainOptions train_opt;
  auto* train_cmd = app.add_subcommand("train", "Learn per-class prototypes from labeled stacks");
  train_cmd->add_option("--inputs", train_opt.inputs, "Directory of <name>.bst + <name>.lbl")->required();
  train_cmd->add_option("--m", train_opt.m, "Prototypes per class")->capture_default_str();
  train_cmd->add_option("--k", train_opt.k, "Neighbors voting per pixel")->capture_default_str();
  train_cmd->add_option("--feature", train_opt.feature, "raw | latent")->capture_default_str();
  train_cmd->add_option("--latent-dir", train_opt.latent_dir, "Directory of latent <name>.bst files");
  train_cmd->add_flag("--normalize,!--no-normalize", train_opt.normalize, "L2-normalize feature vectors");
  train_cmd->add_option("--batch-size", train_opt.batch_size, "Mini-batch size")->capture_default_str();
  train_cmd->add_option("--iters", train_opt.iters, "Mini-batch iterations")->capture_default_str();
  train_cmd->add_option("--seed", train_opt.seed, "Random seed")->capture_default_str();
  train_cmd->add_option("--init", train_opt.init, "kmeans_pp | random_points")->capture_default_str();
  train_cmd->add_option("--out", train_opt.out, "Model file to write")->required();

  PredictOptions predict_opt;
  auto* predict_cmd = app.add_subcommand("predict", "Label every pixel of a stack");
  predict_cmd->add_option("--model", predict_opt.model)->required();
  predict_cmd->add_option("--stack", predict_opt.stack)->required();
  predict_cmd->add_option("--latent-features", predict_opt.latent_features);
  predict_cmd->add_option("--out", predict_opt.out, ".lbl mask to write")->required();
  predict_cmd->add_option("--png", predict_opt.png, "Optional rendered mask");
  predict_cmd->add_option("--tile-size", predict_opt.tile_size)->capture_default_str();

  EvaluateOptions eval_opt;
  auto* eval_cmd = app.add_subcommand("evaluate", "IoU and recall of a mask against a reference");
  eval_cmd->add_option("--pred", eval_opt.pred)->required();
  eval_cmd->add_option("--truth", eval_opt.truth)->required();
  eval_cmd->add_option("--format", eval_opt.format, "text | json")->capture_default_str();
  eval_cmd->add_option("--out", eval_opt.out, "Also write the report here");

  RulesOptions rules_opt;
  auto* rules_cmd = app.add_subcommand("rules", "Export the model as IF...THEN rules");
  rules_cmd->add_option("--model", rules_opt.model)->required();
  rules_cmd->add_option("--out", rules_opt.out)->required();
  rules_cmd->add_option("--precision", rules_opt.precision, "Decimal places")->capture_default_str();
  rules_cmd->add_option("--format", rules_opt.format, "text | json")->capture_default_str();
  rules_cmd->add_flag("--disjunction", rules_opt.disjunction, "One OR-combined rule per class");

  ExplainOptions explain_opt;
  auto* explain_cmd = app.add_subcommand("explain", "Show the prototypes behind one pixel's label");
  explain_cmd->add_option("--model", explain_opt.model)->required();
  explain_cmd->add_option("--stack", explain_opt.stack)->required();
  explain_cmd->add_option("--latent-features", explain_opt.latent_features);
  explain_cmd->add_option("--pixel", explain_opt.pixel, "<row> <col>")->expected(2)->required();
  explain_cmd->add_option("--precision", explain_opt.precision)->capture_default_str();

  NdwiOptions ndwi_opt;
  auto* ndwi_cmd = app.add_subcommand("ndwi", "NDWI threshold baseline");
  ndwi_cmd->add_option("--stack", ndwi_opt.stack)->required();
  ndwi_cmd->add_option("--threshold", ndwi_opt.threshold)->required();
  ndwi_cmd->add_option("--out", ndwi_opt.out, ".lbl mask to write")->required();
  ndwi_cmd->add_option("--index-out", ndwi_opt.index_out, "Optional BST1 index map");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_opt, out);
    if (predict_cmd->parsed()) return cmd_predict(predict_opt, out);
    if (eval_cmd->parsed()) return cmd_evaluate(eval_opt, out);
    if (rules_cmd->parsed()) return cmd_rules(rules_opt, out);
    if (explain_cmd->parsed()) return cmd_explain(explain_opt, out);
    if (ndwi_cmd->parsed()) return cmd_ndwi(ndwi_opt, out);
  } catch (const CommandError& e) {
    err << "error: " << e.what() << '\n';
    return e.code();
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("idss");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace idss::cli
