#include "relex/train.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "relex/adam.hpp"
#include "relex/checkpoint.hpp"
#include "relex/errors.hpp"

namespace relex {

namespace {

PhaseReport run_phase(Model& model, RngSet& rng, const std::vector<EncodedSentence>& train_enc,
                      const Corpus& dev, LossParts parts, RcLabelSource rc_source,
                      const std::string& name, const std::string& selection, AdamState& adam,
                      long long& global_step, const TrainOptions& options,
                      std::string& best_checkpoint) {
  PhaseReport report;
  report.name = name;
  report.selection = selection;

  std::vector<int> order(train_enc.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < model.config().epochs; ++epoch) {
    rng.shuffle.shuffle(order);
    EpochStats stats;
    stats.epoch = epoch;
    for (int idx : order) {
      EncodedSentence sent = train_enc[idx];
      model.apply_word_dropout(sent, rng.word_dropout);
      model.params().zero_grads();
      const StepLosses losses = model.sentence_losses(sent, parts, rc_source, &rng, true);
      const double loss = losses.total.value();
      if (!std::isfinite(loss))
        throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) +
                              ", sentence " + std::to_string(idx));
      ++global_step;
      stats.train_loss += loss;
      stats.train_ner_loss += losses.ner.defined() ? losses.ner.value() : 0.0;
      stats.train_rc_loss += losses.rc.defined() ? losses.rc.value() : 0.0;
      if (options.step_observer) {
        options.step_observer({global_step, epoch, idx, loss,
                               losses.ner.defined() ? losses.ner.value() : 0.0,
                               losses.rc.defined() ? losses.rc.value() : 0.0,
                               losses.ner.defined() && losses.rc.defined(),
                               losses.rc_used_gold_tags});
      }
      backward(losses.total);
      adam_step(model.params(), adam);
    }

    const ScoreReport score = evaluate_model(model, dev);
    stats.dev_entity_f1 = score.entity.macro_f1;
    stats.dev_relation_f1 = score.relation.macro_f1;
    stats.dev_average = score.average();
    stats.selection_metric = selection == "entity_f1" ? stats.dev_entity_f1 : stats.dev_average;
    report.epochs.push_back(stats);
    if (report.best_epoch < 0 || stats.selection_metric > report.best_metric) {
      report.best_epoch = epoch;
      report.best_metric = stats.selection_metric;
      best_checkpoint = checkpoint_to_text(model);
    }
  }
  return report;
}

struct Prepared {
  Model model;
  RngSet rng;
  std::vector<EncodedSentence> train_enc;
};

Prepared prepare(const Corpus& train, const Corpus& dev, const RunConfig& config,
                 const TrainOptions& options) {
  config.validate();
  if (train.empty()) throw DataError("training corpus is empty");
  if (dev.empty()) throw DataError("development corpus is empty");
  const Vocabularies vocab = Vocabularies::build(train);
  RngSet rng(config.seed);
  Model model(config, vocab, rng.init);
  if (!options.pretrained_path.empty())
    load_pretrained_words(options.pretrained_path, vocab.words,
                          model.params().get("encoder.word_emb"));
  std::vector<EncodedSentence> enc;
  enc.reserve(train.size());
  for (const auto& sent : train) enc.push_back(model.encode(sent));
  return {std::move(model), std::move(rng), std::move(enc)};
}

void fill_best_scores(TrainReport& report, const PhaseReport& final_phase) {
  const EpochStats& best = final_phase.epochs[final_phase.best_epoch];
  report.best_dev_entity_f1 = best.dev_entity_f1;
  report.best_dev_relation_f1 = best.dev_relation_f1;
  report.best_dev_average = best.dev_average;
}

}  // namespace

TrainReport train_joint(const Corpus& train, const Corpus& dev, const RunConfig& config,
                        const TrainOptions& options) {
  Prepared p = prepare(train, dev, config, options);
  AdamState adam(AdamConfig{config.learning_rate, 0.9, 0.999, 1e-8});
  long long step = 0;
  TrainReport report;
  report.phases.push_back(run_phase(p.model, p.rng, p.train_enc, dev, LossParts::Both,
                                    config.rc_label_source, "joint", "average", adam, step,
                                    options, report.best_checkpoint));
  fill_best_scores(report, report.phases.back());
  return report;
}

TrainReport train_pipeline(const Corpus& train, const Corpus& dev, const RunConfig& config,
                           const TrainOptions& options) {
  Prepared p = prepare(train, dev, config, options);
  long long step = 0;
  TrainReport report;

  std::string best_ner;
  AdamState adam_ner(AdamConfig{config.learning_rate, 0.9, 0.999, 1e-8});
  report.phases.push_back(run_phase(p.model, p.rng, p.train_enc, dev, LossParts::NerOnly,
                                    RcLabelSource::Gold, "ner", "entity_f1", adam_ner, step,
                                    options, best_ner));

  // Resume from the tagger's best state, then freeze everything it uses.
  {
    const Model best = checkpoint_from_text(best_ner);
    for (const auto& name : p.model.params().names())
      p.model.params().get(name).values() = best.params().get(name).values();
  }
  p.model.params().set_trainable_prefix("encoder.", false);
  p.model.params().set_trainable_prefix("ner.", false);

  AdamState adam_rc(AdamConfig{config.learning_rate, 0.9, 0.999, 1e-8});
  report.phases.push_back(run_phase(p.model, p.rng, p.train_enc, dev, LossParts::RcOnly,
                                    RcLabelSource::Gold, "rc", "average", adam_rc, step, options,
                                    report.best_checkpoint));
  fill_best_scores(report, report.phases.back());
  return report;
}

TrainReport train_model(const Corpus& train, const Corpus& dev, const RunConfig& config,
                        const TrainOptions& options) {
  return config.mode == Mode::Pipeline ? train_pipeline(train, dev, config, options)
                                       : train_joint(train, dev, config, options);
}

ScoreReport evaluate_model(const Model& model, const Corpus& gold) {
  if (gold.empty()) throw DataError("cannot evaluate an empty corpus");
  std::vector<std::vector<EntitySpan>> gold_spans, pred_spans;
  std::vector<std::vector<Relation>> gold_rels, pred_rels;
  for (const auto& sent : gold) {
    if (sent.entity_tags.empty())
      throw DataError("evaluation corpus must carry gold entity tags");
    gold_spans.push_back(bilou_to_spans(sent.entity_tags));
    gold_rels.push_back(sent.relations);
    const Prediction p = model.predict(sent);
    pred_spans.push_back(p.spans);
    pred_rels.push_back(p.relations);
  }
  return score_predictions(gold_spans, pred_spans, gold_rels, pred_rels,
                           model.config().setup == 2);
}

std::string train_report_to_text(const TrainReport& report) {
  std::ostringstream out;
  char line[256];
  for (const auto& phase : report.phases) {
    out << "phase " << phase.name << " (selection " << phase.selection << ")\n";
    for (const auto& e : phase.epochs) {
      std::snprintf(line, sizeof(line),
                    "  epoch %d: loss %.6f ner %.6f rc %.6f | dev entity %.2f relation %.2f "
                    "average %.2f\n",
                    e.epoch, e.train_loss, e.train_ner_loss, e.train_rc_loss, e.dev_entity_f1,
                    e.dev_relation_f1, e.dev_average);
      out << line;
    }
    std::snprintf(line, sizeof(line), "  best epoch %d (%s %.2f)\n", phase.best_epoch,
                  phase.selection.c_str(), phase.best_metric);
    out << line;
  }
  std::snprintf(line, sizeof(line), "final dev: entity %.2f relation %.2f average %.2f\n",
                report.best_dev_entity_f1, report.best_dev_relation_f1, report.best_dev_average);
  out << line;
  return out.str();
}

}  // namespace relex
