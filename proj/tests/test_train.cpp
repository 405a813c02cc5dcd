#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include <doctest.h>

#include "helpers.hpp"
#include "relex/checkpoint.hpp"
#include "relex/errors.hpp"
#include "relex/train.hpp"

using namespace relex;

namespace {

RunConfig quick_config(int epochs) {
  RunConfig cfg = testutil::tiny_config();
  cfg.epochs = epochs;
  return cfg;
}

}  // namespace

TEST_CASE("identical seeds give byte-identical training runs") {
  const Corpus corpus = testutil::gradient_corpus();
  const RunConfig cfg = quick_config(3);
  TrainReport a = train_model(corpus, corpus, cfg);
  TrainReport b = train_model(corpus, corpus, cfg);
  CHECK(a.best_checkpoint == b.best_checkpoint);
  CHECK(train_report_to_text(a) == train_report_to_text(b));

  RunConfig other = cfg;
  other.seed = cfg.seed + 1;
  TrainReport c = train_model(corpus, corpus, other);
  CHECK(c.best_checkpoint != a.best_checkpoint);
}

TEST_CASE("the report keeps the first epoch that reaches the best metric") {
  const Corpus corpus = testutil::gradient_corpus();
  TrainReport r = train_joint(corpus, corpus, quick_config(4));
  REQUIRE(r.phases.size() == 1);
  const PhaseReport& phase = r.phases[0];
  CHECK(phase.name == "joint");
  CHECK(phase.selection == "average");
  REQUIRE(static_cast<int>(phase.epochs.size()) == 4);

  double best = -1.0;
  int best_epoch = -1;
  for (const auto& e : phase.epochs) {
    CHECK(e.selection_metric == e.dev_average);
    if (e.selection_metric > best) {
      best = e.selection_metric;
      best_epoch = e.epoch;
    }
  }
  CHECK(phase.best_epoch == best_epoch);
  CHECK(phase.best_metric == best);
  CHECK(r.best_dev_entity_f1 == phase.epochs[best_epoch].dev_entity_f1);
  CHECK(r.best_dev_relation_f1 == phase.epochs[best_epoch].dev_relation_f1);
  CHECK(r.best_dev_average == phase.epochs[best_epoch].dev_average);
}

TEST_CASE("every step of a joint run satisfies the loss identity") {
  const Corpus corpus = testutil::gradient_corpus();
  const int epochs = 3;
  std::vector<StepInfo> steps;
  TrainOptions options;
  options.step_observer = [&](const StepInfo& info) { steps.push_back(info); };
  train_joint(corpus, corpus, quick_config(epochs), options);

  REQUIRE(static_cast<int>(steps.size()) == epochs * static_cast<int>(corpus.size()));
  for (size_t i = 0; i < steps.size(); ++i) {
    const StepInfo& s = steps[i];
    CHECK(s.step == static_cast<long long>(i) + 1);
    CHECK(s.epoch == static_cast<int>(i) / static_cast<int>(corpus.size()));
    CHECK(s.loss_has_both_parts);
    CHECK(s.loss == s.ner_loss + s.rc_loss);
    CHECK(s.ner_loss > 0.0);
  }
  // Each epoch visits every sentence exactly once, in a shuffled order.
  for (int e = 0; e < epochs; ++e) {
    std::set<int> seen;
    for (size_t i = e * corpus.size(); i < (e + 1) * corpus.size(); ++i)
      seen.insert(steps[i].sentence);
    CHECK(seen == std::set<int>{0, 1, 2});
  }
}

TEST_CASE("the pipeline trains its phases in order and freezes the tagger") {
  const Corpus corpus = testutil::gradient_corpus();
  RunConfig cfg = quick_config(3);
  cfg.mode = Mode::Pipeline;

  std::vector<StepInfo> steps;
  TrainOptions options;
  options.step_observer = [&](const StepInfo& info) { steps.push_back(info); };
  TrainReport r = train_pipeline(corpus, corpus, cfg, options);

  REQUIRE(r.phases.size() == 2);
  CHECK(r.phases[0].name == "ner");
  CHECK(r.phases[0].selection == "entity_f1");
  CHECK(r.phases[1].name == "rc");
  CHECK(r.phases[1].selection == "average");

  const size_t per_phase = cfg.epochs * corpus.size();
  REQUIRE(steps.size() == 2 * per_phase);
  for (size_t i = 0; i < per_phase; ++i) {
    CHECK(steps[i].rc_loss == 0.0);
    CHECK_FALSE(steps[i].loss_has_both_parts);
  }
  for (size_t i = per_phase; i < steps.size(); ++i) {
    CHECK(steps[i].ner_loss == 0.0);
    CHECK(steps[i].rc_used_gold_tags);
    CHECK(steps[i].step == static_cast<long long>(i) + 1);
  }

  // With the encoder and tagger frozen, the entity score cannot move during
  // the relation phase, and it stays at the restored best.
  const double restored = r.phases[0].epochs[r.phases[0].best_epoch].dev_entity_f1;
  for (const auto& e : r.phases[1].epochs) CHECK(e.dev_entity_f1 == restored);

  // The selected phase-two model must still tag exactly like the restored state.
  Model final_model = checkpoint_from_text(r.best_checkpoint);
  CHECK(evaluate_model(final_model, corpus).entity.macro_f1 == restored);
}

TEST_CASE("an exploding learning rate is reported as divergence") {
  const Corpus corpus = testutil::gradient_corpus();
  RunConfig cfg = quick_config(3);
  cfg.learning_rate = 1e200;
  CHECK_THROWS_AS(train_joint(corpus, corpus, cfg), DivergenceError);
}

TEST_CASE("pretrained vectors seed the word embeddings") {
  const Corpus corpus = testutil::gradient_corpus();
  RunConfig cfg = quick_config(1);
  cfg.learning_rate = 1e-9;
  TrainOptions options;
  options.pretrained_path = std::string(RELEX_FIXTURE_DIR) + "/pretrained_dim6.txt";
  TrainReport r = train_joint(corpus, corpus, cfg, options);

  Model model = checkpoint_from_text(r.best_checkpoint);
  const int row = model.vocab().words.id("ana");
  REQUIRE(row > 0);
  const auto& emb = model.params().get("encoder.word_emb").values();
  const std::vector<double> want = {-1, -2, -3, -4, -5, -6};
  for (int j = 0; j < 6; ++j)
    CHECK(emb[row * 6 + j] == doctest::Approx(want[j]).epsilon(1e-6));

  options.pretrained_path = testutil::temp_path("missing_vectors.txt");
  CHECK_THROWS_AS(train_joint(corpus, corpus, cfg, options), DataError);
}

TEST_CASE("training inputs are validated") {
  const Corpus corpus = testutil::gradient_corpus();
  const RunConfig cfg = quick_config(1);
  CHECK_THROWS_AS(train_model({}, corpus, cfg), DataError);
  CHECK_THROWS_AS(train_model(corpus, {}, cfg), DataError);
}

TEST_CASE("evaluation demands a gold-tagged corpus") {
  testutil::BuiltModel built(testutil::tiny_config(), testutil::gradient_corpus());
  CHECK_THROWS_AS(evaluate_model(built.model, {}), DataError);
  AnnotatedSentence untagged;
  untagged.tokens = {"ana", "met", "bo", "."};
  CHECK_THROWS_AS(evaluate_model(built.model, {untagged}), DataError);
}

TEST_CASE("the training report lists every epoch and the final scores") {
  const Corpus corpus = testutil::gradient_corpus();
  TrainReport r = train_joint(corpus, corpus, quick_config(2));
  const std::string text = train_report_to_text(r);
  CHECK(text.find("phase joint (selection average)\n") != std::string::npos);
  CHECK(text.find("  epoch 0: loss ") != std::string::npos);
  CHECK(text.find("  epoch 1: loss ") != std::string::npos);
  CHECK(text.find("  best epoch ") != std::string::npos);
  CHECK(text.find("final dev: entity ") != std::string::npos);
  CHECK(text.back() == '\n');
}
