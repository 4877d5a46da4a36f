#include <cmath>
#include <fstream>
#include <sstream>

#include "idss/error.hpp"
#include "idss/prototype_model.hpp"
#include "json.hpp"

namespace idss {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Raw-kind models without normalization cluster directly in band space, so
// the two centers are identical and only raw_center is written.
bool stores_latent_center(const FeatureSpaceDescriptor& feature) {
  return feature.kind == FeatureKind::kLatent || feature.normalize;
}

ordered_json prototype_to_json(const Prototype& p, bool with_latent) {
  ordered_json j;
  j["class_id"] = to_underlying(p.class_id);
  j["support_count"] = p.support_count;
  j["raw_center"] = p.raw_center;
  if (with_latent) j["latent_center"] = p.latent_center;
  return j;
}

std::vector<double> finite_vector(const json& j, const char* key, std::size_t expected,
                                  std::size_t proto) {
  auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != expected) {
    throw FormatError("prototype " + std::to_string(proto) + ": " + key + " has " +
                      std::to_string(v.size()) + " values, expected " +
                      std::to_string(expected));
  }
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw FormatError("prototype " + std::to_string(proto) + ": non-finite " + key);
    }
  }
  return v;
}

}  // namespace

std::string serialize_model(const IdssModel& model) {
  const auto& cfg = model.config;
  ordered_json header;
  header["format_version"] = model.format_version;
  header["feature"] = {{"kind", std::string(to_string(cfg.feature.kind))},
                       {"dimension", cfg.feature.dimension},
                       {"normalize", cfg.feature.normalize}};
  header["band_names"] = model.band_names;
  ordered_json names = ordered_json::object();
  for (const auto& [id, name] : model.class_names) {
    names[std::to_string(to_underlying(id))] = name;
  }
  header["class_names"] = names;
  header["m_per_class"] = cfg.m_per_class;
  header["k_neighbors"] = cfg.k_neighbors;
  header["kmeans"] = {{"batch_size", cfg.kmeans.batch_size},
                      {"max_iterations", cfg.kmeans.max_iterations},
                      {"seed", cfg.kmeans.seed},
                      {"init", std::string(to_string(cfg.kmeans.init))}};

  // Header fields pretty-printed, one prototype record per line.
  std::ostringstream out;
  out << "{\n";
  for (auto it = header.begin(); it != header.end(); ++it) {
    out << "  " << ordered_json(it.key()).dump() << ": " << it.value().dump() << ",\n";
  }
  out << "  \"prototypes\": [";
  const bool with_latent = stores_latent_center(cfg.feature);
  for (std::size_t i = 0; i < model.prototypes.size(); ++i) {
    out << (i == 0 ? "\n    " : ",\n    ")
        << prototype_to_json(model.prototypes[i], with_latent).dump();
  }
  out << (model.prototypes.empty() ? "]\n" : "\n  ]\n") << "}\n";
  return out.str();
}

IdssModel parse_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("model file is not valid JSON: ") + e.what(), e.byte);
  }

  IdssModel model;
  try {
    model.format_version = j.at("format_version").get<int>();
    if (model.format_version != kModelFormatVersion) {
      throw VersionError("unsupported model format_version " +
                         std::to_string(model.format_version) + " (this build reads " +
                         std::to_string(kModelFormatVersion) + ")");
    }

    auto& cfg = model.config;
    const auto& feature = j.at("feature");
    cfg.feature.kind = parse_feature_kind(feature.at("kind").get<std::string>());
    cfg.feature.dimension = feature.at("dimension").get<std::size_t>();
    cfg.feature.normalize = feature.at("normalize").get<bool>();
    model.band_names = j.at("band_names").get<std::vector<std::string>>();
    cfg.m_per_class = j.at("m_per_class").get<std::size_t>();
    cfg.k_neighbors = j.at("k_neighbors").get<std::size_t>();
    if (cfg.k_neighbors == 0) throw FormatError("k_neighbors must be at least 1");
    if (cfg.feature.dimension == 0) throw FormatError("feature dimension must be at least 1");
    if (cfg.feature.kind == FeatureKind::kRaw && cfg.feature.dimension != model.band_names.size()) {
      throw FormatError("raw feature dimension does not match band_names");
    }

    if (j.contains("class_names")) {
      model.class_names.clear();
      for (const auto& [key, value] : j.at("class_names").items()) {
        const int id = std::stoi(key);
        if (id < 1 || id > 3) throw FormatError("class_names: unknown class id " + key);
        model.class_names[static_cast<ClassId>(id)] = value.get<std::string>();
      }
    }
    if (j.contains("kmeans")) {
      const auto& km = j.at("kmeans");
      cfg.kmeans.batch_size = km.value("batch_size", cfg.kmeans.batch_size);
      cfg.kmeans.max_iterations = km.value("max_iterations", cfg.kmeans.max_iterations);
      cfg.kmeans.seed = km.value("seed", cfg.kmeans.seed);
      cfg.kmeans.init = parse_init_method(km.value("init", std::string("kmeans_pp")));
    }
    cfg.kmeans.m = cfg.m_per_class;

    const bool with_latent = stores_latent_center(cfg.feature);
    const auto& protos = j.at("prototypes");
    if (!protos.is_array()) throw FormatError("prototypes must be an array");
    for (std::size_t i = 0; i < protos.size(); ++i) {
      const auto& pj = protos[i];
      Prototype p;
      const int id = pj.at("class_id").get<int>();
      if (id < 1 || id > 3) {
        throw FormatError("prototype " + std::to_string(i) + ": class_id " + std::to_string(id) +
                          " is not a trainable class");
      }
      p.class_id = static_cast<ClassId>(id);
      p.support_count = pj.at("support_count").get<std::uint64_t>();
      if (p.support_count == 0) {
        throw FormatError("prototype " + std::to_string(i) + ": support_count must be positive");
      }
      p.raw_center = finite_vector(pj, "raw_center", model.band_names.size(), i);
      if (with_latent) {
        p.latent_center = finite_vector(pj, "latent_center", cfg.feature.dimension, i);
      } else {
        if (pj.contains("latent_center")) {
          throw FormatError("prototype " + std::to_string(i) +
                            ": latent_center present in an unnormalized raw model");
        }
        p.latent_center = p.raw_center;
      }
      model.prototypes.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("model file schema violation: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("model file schema violation: ") + e.what());
  } catch (const std::logic_error& e) {
    throw FormatError(std::string("model file schema violation: ") + e.what());
  }
  return model;
}

void save_model(const IdssModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << serialize_model(model);
  if (!out) throw IoError("short write to " + path.string());
}

IdssModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_model(buf.str());
  } catch (const VersionError& e) {
    throw VersionError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace idss
