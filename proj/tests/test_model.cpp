#include <algorithm>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <doctest.h>

#include "helpers.hpp"
#include "relex/data.hpp"
#include "relex/errors.hpp"
#include "relex/model.hpp"
#include "relex/ner.hpp"
#include "relex/rng.hpp"

using namespace relex;
using testutil::BuiltModel;

namespace {

long long count_for(const RunConfig& config, const Vocabularies& vocab) {
  return expected_parameter_count(config, vocab);
}

std::set<std::string> names_for(const RunConfig& config, const Vocabularies& vocab) {
  std::set<std::string> out;
  for (const auto& [name, shape] : expected_parameter_shapes(config, vocab)) out.insert(name);
  return out;
}

std::set<std::string> removed_by(const RunConfig& base, const RunConfig& ablated,
                                 const Vocabularies& vocab) {
  std::set<std::string> out;
  const auto kept = names_for(ablated, vocab);
  for (const auto& name : names_for(base, vocab))
    if (kept.count(name) == 0) out.insert(name);
  return out;
}

}  // namespace

TEST_CASE("the registry follows the declared layout under every ablation") {
  const Corpus train = testutil::gradient_corpus();
  RunConfig cfg = testutil::tiny_config();
  std::vector<RunConfig> variants(8, cfg);
  variants[1].no_char = true;
  variants[2].no_crf = true;
  variants[3].no_entity_emb = true;
  variants[4].no_bilinear = true;
  variants[5].no_linear = true;
  variants[6].setup = 2;
  variants[7].mode = Mode::Pipeline;
  for (const auto& v : variants) {
    BuiltModel built(v, train);
    CHECK(built.model.params().shapes() == expected_parameter_shapes(v, built.vocab));
    CHECK(built.model.params().total_size() == expected_parameter_count(v, built.vocab));
  }
}

TEST_CASE("each ablation removes exactly the advertised parameters") {
  const Corpus train = testutil::gradient_corpus();
  const Vocabularies vocab = Vocabularies::build(train);
  const RunConfig base = testutil::tiny_config();
  const long long k = vocab.tags.size();       // 13: O plus BILU for 3 classes
  const long long l = vocab.relations.size();  // 3: NEG, Works_At, Lives_In
  const long long h = base.hidden_dim;
  const long long m = base.ffnn_dim;
  const long long c = base.char_dim;
  REQUIRE(k == 13);
  REQUIRE(l == 3);

  RunConfig cfg = base;
  SUBCASE("no_bilinear drops the order-3 tensor") {
    cfg.no_bilinear = true;
    CHECK(count_for(base, vocab) - count_for(cfg, vocab) == m * l * m);
    CHECK(removed_by(base, cfg, vocab) == std::set<std::string>{"rc.biaffine.u"});
  }
  SUBCASE("no_linear drops the affine term") {
    cfg.no_linear = true;
    CHECK(count_for(base, vocab) - count_for(cfg, vocab) == l * 2 * m + l);
    CHECK(removed_by(base, cfg, vocab) ==
          std::set<std::string>{"rc.biaffine.b", "rc.biaffine.w"});
  }
  SUBCASE("no_crf drops the transition matrix") {
    cfg.no_crf = true;
    CHECK(count_for(base, vocab) - count_for(cfg, vocab) == (k + 2) * (k + 2));
    CHECK(removed_by(base, cfg, vocab) == std::set<std::string>{"ner.crf.transitions"});
  }
  SUBCASE("no_entity_emb drops the label table and narrows the relation stack") {
    cfg.no_entity_emb = true;
    const long long narrowed = 2 * (4 * h * base.label_dim);  // first-layer gate columns
    CHECK(count_for(base, vocab) - count_for(cfg, vocab) ==
          k * base.label_dim + narrowed);
    CHECK(removed_by(base, cfg, vocab) == std::set<std::string>{"rc.label_emb"});
  }
  SUBCASE("no_char drops the char encoder and narrows both stacks") {
    cfg.no_char = true;
    const long long chars = vocab.chars.size();
    const long long char_lstm = 2 * (4 * c * 2 * c + 4 * c);
    const long long narrowed = 2 * 2 * (4 * h * 2 * c);  // two stacks, two directions
    CHECK(count_for(base, vocab) - count_for(cfg, vocab) ==
          chars * c + char_lstm + narrowed);
    const auto removed = removed_by(base, cfg, vocab);
    CHECK(removed.count("encoder.char_emb") == 1);
    CHECK(removed.count("encoder.char_lstm.fwd.w") == 1);
    CHECK(removed.size() == 5);
  }
  SUBCASE("setup 2 adds the boundary table and widens both stacks") {
    cfg.setup = 2;
    const long long boundaries = vocab.boundaries.size();
    const long long widened = 2 * 2 * (4 * h * base.boundary_dim);
    CHECK(count_for(cfg, vocab) - count_for(base, vocab) ==
          boundaries * base.boundary_dim + widened);
    CHECK(removed_by(cfg, base, vocab) == std::set<std::string>{"encoder.boundary_emb"});
  }
}

TEST_CASE("the total loss is exactly the sum of its parts") {
  BuiltModel built(testutil::tiny_config(), testutil::gradient_corpus());
  const Corpus corpus = testutil::gradient_corpus();
  for (const auto& sent : corpus) {
    const EncodedSentence e = built.model.encode(sent);
    StepLosses both =
        built.model.sentence_losses(e, LossParts::Both, RcLabelSource::Gold, nullptr, false);
    REQUIRE(both.ner.defined());
    REQUIRE(both.rc.defined());
    CHECK(both.total.value() == both.ner.value() + both.rc.value());
    CHECK(both.ner.value() > 0.0);

    StepLosses ner_only =
        built.model.sentence_losses(e, LossParts::NerOnly, RcLabelSource::Gold, nullptr, false);
    CHECK(ner_only.total.value() == ner_only.ner.value());
    CHECK_FALSE(ner_only.rc.defined());
    CHECK(ner_only.ner.value() == doctest::Approx(both.ner.value()).epsilon(1e-15));

    StepLosses rc_only =
        built.model.sentence_losses(e, LossParts::RcOnly, RcLabelSource::Gold, nullptr, false);
    CHECK(rc_only.total.value() == rc_only.rc.value());
    CHECK_FALSE(rc_only.ner.defined());
    CHECK(rc_only.predicted_tags.empty());
    CHECK(rc_only.rc_used_gold_tags);
  }
}

TEST_CASE("a lone entity leaves the relation term at exact zero") {
  BuiltModel built(testutil::tiny_config(), testutil::gradient_corpus());
  AnnotatedSentence sent;
  sent.tokens = {"ana", "met", "."};
  sent.entity_tags = {"U-Per", "O", "O"};
  StepLosses out = built.model.sentence_losses(built.model.encode(sent), LossParts::Both,
                                               RcLabelSource::Gold, nullptr, false);
  CHECK(out.rc_candidates == 0);
  CHECK(out.rc.value() == 0.0);
  CHECK_FALSE(out.rc.requires_grad());
  CHECK(out.total.value() == out.ner.value());
}

TEST_CASE("the relation term can run from predicted tags alone") {
  BuiltModel built(testutil::tiny_config(), testutil::gradient_corpus());
  AnnotatedSentence untagged;
  untagged.tokens = {"ana", "met", "bo", "."};
  const EncodedSentence e = built.model.encode(untagged);

  StepLosses out =
      built.model.sentence_losses(e, LossParts::RcOnly, RcLabelSource::Predicted, nullptr, false);
  CHECK(out.predicted_tags.size() == 4);
  CHECK_FALSE(out.rc_used_gold_tags);
  CHECK(out.total.defined());

  // Gold labels cannot be conjured for an untagged sentence.
  CHECK_THROWS_AS(
      built.model.sentence_losses(e, LossParts::RcOnly, RcLabelSource::Gold, nullptr, false),
      DataError);
  CHECK_THROWS_AS(
      built.model.sentence_losses(e, LossParts::Both, RcLabelSource::Gold, nullptr, false),
      DataError);
}

TEST_CASE("training passes insist on an rng set") {
  BuiltModel built(testutil::tiny_config(), testutil::gradient_corpus());
  const EncodedSentence e = built.model.encode(testutil::gradient_corpus()[0]);
  CHECK_THROWS_AS(
      built.model.sentence_losses(e, LossParts::Both, RcLabelSource::Gold, nullptr, true), Error);
}

TEST_CASE("an empty sentence is rejected") {
  BuiltModel built(testutil::tiny_config(), testutil::gradient_corpus());
  CHECK_THROWS_AS(built.model.sentence_losses(EncodedSentence{}, LossParts::Both,
                                              RcLabelSource::Gold, nullptr, false),
                  DataError);
  CHECK_THROWS_AS(built.model.predict(AnnotatedSentence{}), DataError);
}

TEST_CASE("a corpus without relation classes cannot build a model") {
  Corpus train = testutil::gradient_corpus();
  for (auto& sent : train) sent.relations.clear();
  const Vocabularies vocab = Vocabularies::build(train);
  REQUIRE(vocab.relations.size() == 1);
  RngSet rng(7);
  CHECK_THROWS_AS(Model(testutil::tiny_config(), vocab, rng.init), ConfigError);
}

TEST_CASE("predictions are internally consistent even untrained") {
  BuiltModel built(testutil::tiny_config(), testutil::overfit_corpus());
  for (const auto& sent : testutil::overfit_corpus()) {
    const Prediction p = built.model.predict(sent);
    const int n = static_cast<int>(sent.tokens.size());
    REQUIRE(static_cast<int>(p.tags.size()) == n);
    CHECK(bilou_valid(p.tags));
    CHECK(spans_to_bilou(p.spans, n) == p.tags);

    std::set<int> ends;
    for (const auto& s : p.spans) ends.insert(s.end);
    std::set<std::pair<int, int>> seen;
    for (const auto& r : p.relations) {
      CHECK(r.label != "NEG");
      CHECK(built.vocab.relations.has(r.label));
      CHECK(ends.count(r.head) == 1);
      CHECK(ends.count(r.tail) == 1);
      CHECK(r.head != r.tail);
      CHECK(seen.insert({r.head, r.tail}).second);
    }
  }
}

TEST_CASE("strict mode folds the BILOU mask into the transitions") {
  const Corpus train = testutil::gradient_corpus();
  RunConfig strict = testutil::tiny_config();
  strict.strict_crf_transitions = true;
  BuiltModel built(strict, train);

  const Tensor raw = built.model.params().get("ner.crf.transitions");
  const Tensor mask = bilou_transition_mask(built.vocab);
  const Tensor effective = built.model.effective_transitions();
  REQUIRE(effective.size() == raw.size());
  for (int i = 0; i < raw.size(); ++i)
    CHECK(effective.values()[i] == raw.values()[i] + mask.values()[i]);

  BuiltModel loose(testutil::tiny_config(), train);
  CHECK(loose.model.effective_transitions().impl ==
        loose.model.params().get("ner.crf.transitions").impl);

  RunConfig no_crf = testutil::tiny_config();
  no_crf.no_crf = true;
  BuiltModel ablated(no_crf, train);
  CHECK_THROWS_AS(ablated.model.effective_transitions(), ConfigError);
}
