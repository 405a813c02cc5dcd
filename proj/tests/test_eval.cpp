#include <string>
#include <vector>

#include <doctest.h>

#include "helpers.hpp"
#include "relex/data.hpp"
#include "relex/errors.hpp"
#include "relex/eval.hpp"

using namespace relex;

namespace {

using Spans = std::vector<std::vector<EntitySpan>>;
using Rels = std::vector<std::vector<Relation>>;

std::string fixture(const std::string& name) {
  return testutil::slurp(std::string(RELEX_FIXTURE_DIR) + "/" + name);
}

}  // namespace

TEST_CASE("one perfect class and one missed class average to fifty") {
  const Spans gold = {{{0, 1, "Per"}, {3, 3, "Org"}}};
  const Spans pred = {{{0, 1, "Per"}, {4, 4, "Org"}}};
  ScoreSet s = score_ner(gold, pred);
  REQUIRE(s.classes.size() == 2);
  CHECK(s.classes.at("Per").f1 == 100.0);
  CHECK(s.classes.at("Org").f1 == 0.0);
  CHECK(s.classes.at("Org").fp == 1);
  CHECK(s.classes.at("Org").fn == 1);
  CHECK(s.macro_f1 == 50.0);
}

TEST_CASE("precision, recall, and f1 come from the usual ratios") {
  // Two of three predictions are right and both gold spans are found.
  const Spans gold = {{{0, 0, "Per"}, {2, 2, "Per"}}};
  const Spans pred = {{{0, 0, "Per"}, {2, 2, "Per"}, {4, 4, "Per"}}};
  ClassScore c = score_ner(gold, pred).classes.at("Per");
  CHECK(c.tp_pred == 2);
  CHECK(c.tp_gold == 2);
  CHECK(c.fp == 1);
  CHECK(c.fn == 0);
  CHECK(c.precision == doctest::Approx(200.0 / 3).epsilon(1e-12));
  CHECK(c.recall == 100.0);
  CHECK(c.f1 == doctest::Approx(80.0).epsilon(1e-12));
}

TEST_CASE("a boundary miss fails the exact rule but passes the overlap rule") {
  const Spans gold = {{{0, 2, "Per"}}};
  const Spans pred = {{{1, 1, "Per"}}};
  ClassScore exact = score_ner(gold, pred).classes.at("Per");
  CHECK(exact.f1 == 0.0);
  CHECK(exact.fp == 1);
  CHECK(exact.fn == 1);
  ClassScore overlap = score_ec(gold, pred).classes.at("Per");
  CHECK(overlap.tp_pred == 1);
  CHECK(overlap.tp_gold == 1);
  CHECK(overlap.f1 == 100.0);
}

TEST_CASE("the overlap rule counts predictions and gold items separately") {
  const Spans gold = {{{0, 3, "Per"}}};
  const Spans pred = {{{0, 0, "Per"}, {2, 2, "Per"}}};
  ClassScore c = score_ec(gold, pred).classes.at("Per");
  CHECK(c.tp_pred == 2);
  CHECK(c.tp_gold == 1);
  CHECK(c.fp == 0);
  CHECK(c.fn == 0);
  CHECK(c.precision == 100.0);
  CHECK(c.recall == 100.0);
}

TEST_CASE("the overlap rule still requires matching types") {
  const Spans gold = {{{0, 1, "Per"}}};
  const Spans pred = {{{1, 1, "Org"}}};
  ScoreSet s = score_ec(gold, pred);
  CHECK(s.classes.at("Per").fn == 1);
  CHECK(s.classes.at("Org").fp == 1);
  CHECK(s.macro_f1 == 0.0);
}

TEST_CASE("relations are directed") {
  const Rels gold = {{{1, 4, "Works_For"}}};
  const Rels reversed = {{{4, 1, "Works_For"}}};
  ClassScore wrong = score_rc(gold, reversed).classes.at("Works_For");
  CHECK(wrong.f1 == 0.0);
  CHECK(wrong.fp == 1);
  CHECK(wrong.fn == 1);
  CHECK(score_rc(gold, gold).classes.at("Works_For").f1 == 100.0);
}

TEST_CASE("the padding labels never reach the scoreboard") {
  const Spans gold = {{{0, 0, "Other"}, {2, 2, "Per"}}};
  const Spans pred = {{{1, 1, "Other"}, {2, 2, "Per"}}};
  ScoreSet ner = score_ner(gold, pred);
  CHECK(ner.classes.size() == 1);
  CHECK(ner.classes.count("Per") == 1);
  CHECK(ner.macro_f1 == 100.0);
  CHECK(score_ec(gold, pred).classes.count("Other") == 0);

  const Rels rg = {{{0, 2, "NEG"}}};
  const Rels rp = {{{0, 2, "NEG"}, {2, 0, "NEG"}}};
  ScoreSet rc = score_rc(rg, rp);
  CHECK(rc.classes.empty());
  CHECK(rc.macro_f1 == 0.0);
}

TEST_CASE("classes absent from gold and prediction alike do not dilute the macro") {
  const Spans gold = {{{0, 0, "Per"}}};
  const Spans pred_same = {{{0, 0, "Per"}}};
  ScoreSet s = score_ner(gold, pred_same);
  CHECK(s.classes.size() == 1);
  CHECK(s.macro_f1 == 100.0);

  // A spurious class enters the macro only once something mentions it.
  const Spans pred_extra = {{{0, 0, "Per"}, {2, 2, "Loc"}}};
  ScoreSet t = score_ner(gold, pred_extra);
  CHECK(t.classes.size() == 2);
  CHECK(t.macro_f1 == 50.0);
}

TEST_CASE("scoring a prediction against itself is perfect") {
  const Spans spans = {{{0, 1, "Per"}}, {}, {{2, 2, "Loc"}, {4, 5, "Org"}}};
  const Rels rels = {{{1, 2, "Works_For"}}, {}, {}};
  ScoreReport r = score_predictions(spans, spans, rels, rels, false);
  CHECK(r.entity.macro_f1 == 100.0);
  CHECK(r.relation.macro_f1 == 100.0);
  CHECK(r.average() == 100.0);
}

TEST_CASE("swapping gold and prediction swaps precision with recall") {
  const Spans a = {{{0, 1, "Per"}, {3, 3, "Per"}}, {{0, 0, "Loc"}}};
  const Spans b = {{{0, 1, "Per"}}, {{0, 0, "Loc"}, {2, 2, "Per"}}};
  ScoreSet ab = score_ner(a, b);
  ScoreSet ba = score_ner(b, a);
  for (const auto& [label, c] : ab.classes) {
    CHECK(c.precision == ba.classes.at(label).recall);
    CHECK(c.recall == ba.classes.at(label).precision);
    CHECK(c.fp == ba.classes.at(label).fn);
    CHECK(c.fn == ba.classes.at(label).fp);
  }
}

TEST_CASE("empty corpora score zero without classes") {
  ScoreReport r = score_predictions({}, {}, {}, {}, false);
  CHECK(r.entity.classes.empty());
  CHECK(r.relation.classes.empty());
  CHECK(r.average() == 0.0);
}

TEST_CASE("gold and prediction must cover the same sentences") {
  CHECK_THROWS_AS(score_ner({{}}, {}), Error);
  CHECK_THROWS_AS(score_rc({}, {{}}), Error);
}

TEST_CASE("report rendering matches the frozen layouts") {
  // Mixed outcome: two clean classes, one half-right, one missed relation.
  const Spans gold_spans = {
      {{0, 0, "Loc"}, {2, 3, "Org"}, {5, 5, "Peop"}, {7, 7, "Peop"}}};
  const Spans pred_spans = {
      {{0, 0, "Loc"}, {2, 3, "Org"}, {5, 5, "Peop"}, {9, 9, "Peop"}}};
  const Rels gold_rels = {{{0, 2, "Live_In"}, {5, 2, "Work_For"}}};
  const Rels pred_rels = {{{0, 3, "Live_In"}, {5, 2, "Work_For"}}};
  ScoreReport r = score_predictions(gold_spans, pred_spans, gold_rels, pred_rels, false);
  CHECK(report_to_table(r) == fixture("golden_ner_table.txt"));
  CHECK(report_to_kv(r) == fixture("golden_ner_kv.txt"));

  // Overlap-rule report with an empty relation section.
  const Spans ec_gold = {{{0, 0, "Loc"}, {4, 5, "Peop"}}};
  const Spans ec_pred = {{{2, 2, "Org"}, {5, 5, "Peop"}}};
  ScoreReport e = score_predictions(ec_gold, ec_pred, {{}}, {{}}, true);
  CHECK(report_to_table(e) == fixture("golden_ec_table.txt"));
}
