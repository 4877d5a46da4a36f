#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "idss/prototype_model.hpp"

namespace idss {

struct RuleTerm {
  std::string band;
  double value = 0.0;  // reflectance

  friend bool operator==(const RuleTerm&, const RuleTerm&) = default;
};

// IF (band_1 ~ v_1) AND ... AND (band_d ~ v_d) THEN class, one per prototype.
// Terms come from the raw-space center regardless of the decision space.
struct Rule {
  ClassId class_id = ClassId::kLand;
  std::size_t prototype_index = 0;
  std::vector<RuleTerm> terms;
  std::uint64_t support_count = 0;

  friend bool operator==(const Rule&, const Rule&) = default;
};

struct RuleSet {
  // Indexed by prototype index, so rules[i] explains model.prototypes[i].
  std::vector<Rule> rules;
  std::map<ClassId, std::string> class_names;
  std::vector<std::string> band_names;

  std::vector<const Rule*> rules_for(ClassId id) const;
};

RuleSet generate_rules(const IdssModel& model);

// "IF (B01 ~ 0.50) AND (B02 ~ 0.25) THEN Water". Values are rounded to
// `precision` decimals, ties to even.
std::string render_rule_text(const Rule& rule, const std::map<ClassId, std::string>& class_names,
                             int precision);

// All rules of one class joined by OR:
// "IF (...) AND (...) OR (...) AND (...) ... THEN Water".
std::string render_class_disjunction(const RuleSet& rules, ClassId id, int precision);

// One rule per line, classes in id order.
std::string export_rules_text(const RuleSet& rules, int precision);
// Prototype records plus the rendered string of each rule (JSON).
std::string export_rules_json(const RuleSet& rules, const IdssModel& model, int precision);

struct ExplanationEntry {
  std::size_t prototype_index = 0;
  ClassId class_id = ClassId::kLand;
  double similarity = 0.0;
  Rule rule;
};

struct Explanation {
  PixelDecision decision;
  std::vector<ExplanationEntry> entries;  // same order as the decision's neighbors
};

Explanation explain_pixel(std::span<const float> f, const IdssModel& model, const RuleSet& rules);

// Fixed-point rendering used by rule text: correctly rounded, ties to even.
std::string format_fixed(double value, int precision);

}  // namespace idss
