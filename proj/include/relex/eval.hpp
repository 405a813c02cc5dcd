#pragma once

#include <map>
#include <string>
#include <vector>

#include "relex/data.hpp"

namespace relex {

// Per-class counts and scores. tp_pred counts correct predictions (the
// precision numerator), tp_gold counts recovered gold items (the recall
// numerator); the two differ only under the EC overlap rule.
struct ClassScore {
  long long tp_pred = 0;
  long long tp_gold = 0;
  long long fp = 0;
  long long fn = 0;
  double precision = 0.0;  // 0..100, zero when the denominator is zero
  double recall = 0.0;
  double f1 = 0.0;
};

struct ScoreSet {
  std::map<std::string, ClassScore> classes;  // alphabetical; excluded labels omitted
  double macro_f1 = 0.0;                      // unweighted mean over classes
};

struct ScoreReport {
  ScoreSet entity;
  ScoreSet relation;
  bool entity_rule_ec = false;  // false: exact-span NER rule, true: EC overlap rule
  double average() const { return (entity.macro_f1 + relation.macro_f1) / 2.0; }
};

// Exact (start, end, label) span matching; "Other" never scored.
ScoreSet score_ner(const std::vector<std::vector<EntitySpan>>& gold,
                   const std::vector<std::vector<EntitySpan>>& pred);

// Type-overlap rule: a gold entity counts when any of its tokens lies in a
// same-type predicted span, a predicted entity when it covers a same-type
// gold token. "Other" never scored.
ScoreSet score_ec(const std::vector<std::vector<EntitySpan>>& gold,
                  const std::vector<std::vector<EntitySpan>>& pred);

// Exact directed (head, tail, label) matching; NEG never scored.
ScoreSet score_rc(const std::vector<std::vector<Relation>>& gold,
                  const std::vector<std::vector<Relation>>& pred);

ScoreReport score_predictions(const std::vector<std::vector<EntitySpan>>& gold_spans,
                              const std::vector<std::vector<EntitySpan>>& pred_spans,
                              const std::vector<std::vector<Relation>>& gold_relations,
                              const std::vector<std::vector<Relation>>& pred_relations,
                              bool ec_rule);

// Canonical byte layouts; both end with a trailing newline.
std::string report_to_table(const ScoreReport& report);
std::string report_to_kv(const ScoreReport& report);

}  // namespace relex
