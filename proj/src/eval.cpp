#include "relex/eval.hpp"

#include <cstdio>
#include <set>
#include <sstream>
#include <tuple>

#include "relex/errors.hpp"

namespace relex {

namespace {

void check_sizes(size_t gold, size_t pred, const char* what) {
  if (gold != pred)
    throw Error(std::string(what) + ": gold and prediction differ in sentence count");
}

void finish(ScoreSet& set) {
  double f1_sum = 0.0;
  for (auto& [name, c] : set.classes) {
    const long long pred_total = c.tp_pred + c.fp;
    const long long gold_total = c.tp_gold + c.fn;
    c.precision = pred_total == 0 ? 0.0 : 100.0 * static_cast<double>(c.tp_pred) / pred_total;
    c.recall = gold_total == 0 ? 0.0 : 100.0 * static_cast<double>(c.tp_gold) / gold_total;
    c.f1 = (c.precision + c.recall) == 0.0
               ? 0.0
               : 2.0 * c.precision * c.recall / (c.precision + c.recall);
    f1_sum += c.f1;
  }
  set.macro_f1 = set.classes.empty() ? 0.0 : f1_sum / static_cast<double>(set.classes.size());
}

bool excluded_entity(const std::string& label) { return label == "Other"; }

}  // namespace

ScoreSet score_ner(const std::vector<std::vector<EntitySpan>>& gold,
                   const std::vector<std::vector<EntitySpan>>& pred) {
  check_sizes(gold.size(), pred.size(), "score_ner");
  ScoreSet set;
  for (size_t s = 0; s < gold.size(); ++s) {
    std::set<std::tuple<int, int, std::string>> gold_set;
    for (const auto& g : gold[s]) gold_set.emplace(g.start, g.end, g.label);
    std::set<std::tuple<int, int, std::string>> pred_set;
    for (const auto& p : pred[s]) pred_set.emplace(p.start, p.end, p.label);
    for (const auto& g : gold_set) {
      const auto& label = std::get<2>(g);
      if (excluded_entity(label)) continue;
      auto& c = set.classes[label];
      if (pred_set.count(g)) {
        c.tp_gold += 1;
      } else {
        c.fn += 1;
      }
    }
    for (const auto& p : pred_set) {
      const auto& label = std::get<2>(p);
      if (excluded_entity(label)) continue;
      auto& c = set.classes[label];
      if (gold_set.count(p)) {
        c.tp_pred += 1;
      } else {
        c.fp += 1;
      }
    }
  }
  finish(set);
  return set;
}

ScoreSet score_ec(const std::vector<std::vector<EntitySpan>>& gold,
                  const std::vector<std::vector<EntitySpan>>& pred) {
  check_sizes(gold.size(), pred.size(), "score_ec");
  ScoreSet set;
  auto overlap = [](const EntitySpan& a, const EntitySpan& b) {
    return a.start <= b.end && b.start <= a.end;
  };
  for (size_t s = 0; s < gold.size(); ++s) {
    for (const auto& g : gold[s]) {
      if (excluded_entity(g.label)) continue;
      auto& c = set.classes[g.label];
      bool hit = false;
      for (const auto& p : pred[s])
        if (p.label == g.label && overlap(g, p)) {
          hit = true;
          break;
        }
      if (hit) c.tp_gold += 1;
      else c.fn += 1;
    }
    for (const auto& p : pred[s]) {
      if (excluded_entity(p.label)) continue;
      auto& c = set.classes[p.label];
      bool hit = false;
      for (const auto& g : gold[s])
        if (g.label == p.label && overlap(g, p)) {
          hit = true;
          break;
        }
      if (hit) c.tp_pred += 1;
      else c.fp += 1;
    }
  }
  finish(set);
  return set;
}

ScoreSet score_rc(const std::vector<std::vector<Relation>>& gold,
                  const std::vector<std::vector<Relation>>& pred) {
  check_sizes(gold.size(), pred.size(), "score_rc");
  ScoreSet set;
  for (size_t s = 0; s < gold.size(); ++s) {
    std::set<std::tuple<int, int, std::string>> gold_set;
    for (const auto& g : gold[s])
      if (g.label != kNeg) gold_set.emplace(g.head, g.tail, g.label);
    std::set<std::tuple<int, int, std::string>> pred_set;
    for (const auto& p : pred[s])
      if (p.label != kNeg) pred_set.emplace(p.head, p.tail, p.label);
    for (const auto& g : gold_set) {
      auto& c = set.classes[std::get<2>(g)];
      if (pred_set.count(g)) c.tp_gold += 1;
      else c.fn += 1;
    }
    for (const auto& p : pred_set) {
      auto& c = set.classes[std::get<2>(p)];
      if (gold_set.count(p)) c.tp_pred += 1;
      else c.fp += 1;
    }
  }
  finish(set);
  return set;
}

ScoreReport score_predictions(const std::vector<std::vector<EntitySpan>>& gold_spans,
                              const std::vector<std::vector<EntitySpan>>& pred_spans,
                              const std::vector<std::vector<Relation>>& gold_relations,
                              const std::vector<std::vector<Relation>>& pred_relations,
                              bool ec_rule) {
  ScoreReport report;
  report.entity_rule_ec = ec_rule;
  report.entity = ec_rule ? score_ec(gold_spans, pred_spans) : score_ner(gold_spans, pred_spans);
  report.relation = score_rc(gold_relations, pred_relations);
  return report;
}

namespace {

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void table_section(std::ostringstream& out, const std::string& name, const char* rule,
                   const ScoreSet& set) {
  out << name << " (" << rule << ")\n";
  char line[160];
  std::snprintf(line, sizeof(line), "  %-16s %8s %8s %8s %8s %8s %8s %8s\n", "class", "tp_pred",
                "tp_gold", "fp", "fn", "P", "R", "F1");
  out << line;
  for (const auto& [label, c] : set.classes) {
    std::snprintf(line, sizeof(line), "  %-16s %8lld %8lld %8lld %8lld %8s %8s %8s\n",
                  label.c_str(), c.tp_pred, c.tp_gold, c.fp, c.fn, fixed2(c.precision).c_str(),
                  fixed2(c.recall).c_str(), fixed2(c.f1).c_str());
    out << line;
  }
  out << "  macro-F1 " << fixed2(set.macro_f1) << "\n";
}

}  // namespace

std::string report_to_table(const ScoreReport& report) {
  std::ostringstream out;
  table_section(out, "entity", report.entity_rule_ec ? "EC rule" : "NER rule", report.entity);
  table_section(out, "relation", "RC rule", report.relation);
  out << "average " << fixed2(report.average()) << "\n";
  return out.str();
}

std::string report_to_kv(const ScoreReport& report) {
  std::ostringstream out;
  auto section = [&](const std::string& prefix, const ScoreSet& set) {
    for (const auto& [label, c] : set.classes) {
      const std::string base = prefix + "." + label + ".";
      out << base << "tp_pred = " << c.tp_pred << "\n";
      out << base << "tp_gold = " << c.tp_gold << "\n";
      out << base << "fp = " << c.fp << "\n";
      out << base << "fn = " << c.fn << "\n";
      out << base << "precision = " << fixed2(c.precision) << "\n";
      out << base << "recall = " << fixed2(c.recall) << "\n";
      out << base << "f1 = " << fixed2(c.f1) << "\n";
    }
    out << prefix << ".macro_f1 = " << fixed2(set.macro_f1) << "\n";
  };
  out << "entity.rule = " << (report.entity_rule_ec ? "ec" : "ner") << "\n";
  section("entity", report.entity);
  section("relation", report.relation);
  out << "average = " << fixed2(report.average()) << "\n";
  return out.str();
}

}  // namespace relex
