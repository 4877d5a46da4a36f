#include "idss/explain.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "idss/error.hpp"
#include "json.hpp"

namespace idss {

std::vector<const Rule*> RuleSet::rules_for(ClassId id) const {
  std::vector<const Rule*> out;
  for (const auto& r : rules) {
    if (r.class_id == id) out.push_back(&r);
  }
  return out;
}

RuleSet generate_rules(const IdssModel& model) {
  RuleSet set;
  set.class_names = model.class_names;
  set.band_names = model.band_names;
  set.rules.reserve(model.prototypes.size());
  for (std::size_t i = 0; i < model.prototypes.size(); ++i) {
    const auto& p = model.prototypes[i];
    if (p.raw_center.size() != model.band_names.size()) {
      throw DimensionError("prototype " + std::to_string(i) + " raw center does not match bands");
    }
    Rule rule{p.class_id, i, {}, p.support_count};
    rule.terms.reserve(p.raw_center.size());
    for (std::size_t b = 0; b < p.raw_center.size(); ++b) {
      rule.terms.push_back({model.band_names[b], p.raw_center[b]});
    }
    set.rules.push_back(std::move(rule));
  }
  return set;
}

std::string format_fixed(double value, int precision) {
  if (precision < 0) precision = 0;
  // std::to_chars is exact: the decimal result is the correctly rounded
  // value of the binary double, with exact ties going to even.
  char buf[512];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, precision);
  if (res.ec != std::errc()) {
    std::ostringstream s;
    s << value;
    return s.str();
  }
  std::string out(buf, res.ptr);
  // "-0.00" reads as noise in a rule; render it as zero.
  if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
  return out;
}

namespace {

std::string name_of(const std::map<ClassId, std::string>& names, ClassId id) {
  const auto it = names.find(id);
  return it != names.end() ? it->second : std::string(default_class_name(id));
}

std::string antecedent(const Rule& rule, int precision) {
  std::string out;
  for (std::size_t i = 0; i < rule.terms.size(); ++i) {
    if (i > 0) out += " AND ";
    out += "(" + rule.terms[i].band + " ~ " + format_fixed(rule.terms[i].value, precision) + ")";
  }
  return out;
}

}  // namespace

std::string render_rule_text(const Rule& rule, const std::map<ClassId, std::string>& class_names,
                             int precision) {
  return "IF " + antecedent(rule, precision) + " THEN " + name_of(class_names, rule.class_id);
}

std::string render_class_disjunction(const RuleSet& rules, ClassId id, int precision) {
  std::string out = "IF ";
  bool first = true;
  for (const Rule* r : rules.rules_for(id)) {
    if (!first) out += " OR ";
    first = false;
    out += antecedent(*r, precision);
  }
  return out + " THEN " + name_of(rules.class_names, id);
}

std::string export_rules_text(const RuleSet& rules, int precision) {
  std::string out;
  for (const ClassId id : kTrainableClasses) {
    for (const Rule* r : rules.rules_for(id)) {
      out += render_rule_text(*r, rules.class_names, precision);
      out += '\n';
    }
  }
  return out;
}

std::string export_rules_json(const RuleSet& rules, const IdssModel& model, int precision) {
  nlohmann::ordered_json root;
  root["band_names"] = rules.band_names;
  root["precision"] = precision;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const ClassId id : kTrainableClasses) {
    for (const Rule* r : rules.rules_for(id)) {
      nlohmann::ordered_json j;
      j["prototype_index"] = r->prototype_index;
      j["class_id"] = to_underlying(r->class_id);
      j["class_name"] = name_of(rules.class_names, r->class_id);
      j["support_count"] = r->support_count;
      std::vector<double> raw;
      raw.reserve(r->terms.size());
      for (const auto& t : r->terms) raw.push_back(t.value);
      j["raw_center"] = raw;
      if (r->prototype_index < model.prototypes.size() &&
          (model.config.feature.kind == FeatureKind::kLatent || model.config.feature.normalize)) {
        j["latent_center"] = model.prototypes[r->prototype_index].latent_center;
      }
      j["rule"] = render_rule_text(*r, rules.class_names, precision);
      list.push_back(std::move(j));
    }
  }
  root["rules"] = std::move(list);
  return root.dump(2) + "\n";
}

Explanation explain_pixel(std::span<const float> f, const IdssModel& model, const RuleSet& rules) {
  if (rules.rules.size() != model.prototypes.size()) {
    throw InvalidArgument("explain_pixel: rule set does not belong to this model");
  }
  Explanation out;
  out.decision = decide(f, model);
  out.entries.reserve(out.decision.neighbor_ids.size());
  for (std::size_t i = 0; i < out.decision.neighbor_ids.size(); ++i) {
    const std::size_t idx = out.decision.neighbor_ids[i];
    out.entries.push_back({idx, model.prototypes[idx].class_id,
                           out.decision.neighbor_similarities[i], rules.rules[idx]});
  }
  return out;
}

}  // namespace idss
