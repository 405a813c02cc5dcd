#pragma once

#include <cstdint>
#include <string>

namespace relex {

enum class Mode { Joint, Pipeline };
enum class RcLabelSource { Predicted, Gold };
enum class RcLossReduction { Mean, Sum };

// One experiment's full identity: setup, mode, ablations, hyperparameters,
// seed. Serializes to a line-oriented "key = value" block.
struct RunConfig {
  int setup = 1;  // 2 adds gold boundary-letter embeddings to the input
  Mode mode = Mode::Joint;

  bool no_char = false;        // drop the char-level word embedding
  bool no_crf = false;         // per-token softmax instead of the CRF
  bool no_entity_emb = false;  // drop tag embeddings from the RC input
  bool no_bilinear = false;    // drop the bilinear term of the scorer
  bool no_linear = false;      // drop the linear term of the scorer

  int epochs = 100;
  double learning_rate = 0.0005;
  int word_dim = 100;
  int char_dim = 25;
  int label_dim = 100;
  int boundary_dim = 100;
  int ffnn_dim = 100;
  int hidden_dim = 100;
  int lstm_layers = 2;
  double keep_prob = 0.67;
  std::uint64_t seed = 1;

  RcLabelSource rc_label_source = RcLabelSource::Predicted;
  RcLossReduction rc_loss_reduction = RcLossReduction::Mean;
  bool strict_crf_transitions = false;  // forbid BILOU-invalid CRF transitions
  bool word_dropout_chars = false;      // word dropout also hides the char sequence

  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

std::string config_to_text(const RunConfig& config);
RunConfig config_from_text(const std::string& text);

std::string mode_name(Mode mode);

}  // namespace relex
