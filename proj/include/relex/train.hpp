#pragma once

#include <functional>
#include <string>
#include <vector>

#include "relex/eval.hpp"
#include "relex/model.hpp"

namespace relex {

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;  // summed over the epoch's sentences
  double train_ner_loss = 0.0;
  double train_rc_loss = 0.0;
  double dev_entity_f1 = 0.0;
  double dev_relation_f1 = 0.0;
  double dev_average = 0.0;
  double selection_metric = 0.0;
};

struct PhaseReport {
  std::string name;       // "joint", "ner", "rc"
  std::string selection;  // "average" or "entity_f1"
  std::vector<EpochStats> epochs;
  int best_epoch = -1;
  double best_metric = 0.0;
};

struct TrainReport {
  std::vector<PhaseReport> phases;
  std::string best_checkpoint;  // serialized archive of the selected model
  double best_dev_entity_f1 = 0.0;
  double best_dev_relation_f1 = 0.0;
  double best_dev_average = 0.0;
};

struct StepInfo {
  long long step = 0;
  int epoch = 0;
  int sentence = 0;  // corpus index
  double loss = 0.0;
  double ner_loss = 0.0;
  double rc_loss = 0.0;
  bool loss_has_both_parts = false;
  bool rc_used_gold_tags = false;
};

struct TrainOptions {
  std::string pretrained_path;  // word vectors; empty for random initialization
  std::function<void(const StepInfo&)> step_observer;
};

// Single model, summed loss, model selection by dev average.
TrainReport train_joint(const Corpus& train, const Corpus& dev, const RunConfig& config,
                        const TrainOptions& options = {});

// Phase one trains the tagger alone (selection by dev entity F1); phase two
// restores that best state, freezes the encoder and tagger, and trains the
// relation scorer on gold tags (selection by dev average).
TrainReport train_pipeline(const Corpus& train, const Corpus& dev, const RunConfig& config,
                           const TrainOptions& options = {});

// Dispatches on config.mode.
TrainReport train_model(const Corpus& train, const Corpus& dev, const RunConfig& config,
                        const TrainOptions& options = {});

// Predicts every sentence and scores against the gold annotation, with the
// EC rule under setup 2.
ScoreReport evaluate_model(const Model& model, const Corpus& gold);

std::string train_report_to_text(const TrainReport& report);

}  // namespace relex
