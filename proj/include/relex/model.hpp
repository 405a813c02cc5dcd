#pragma once

#include <string>
#include <utility>
#include <vector>

#include "relex/config.hpp"
#include "relex/data.hpp"
#include "relex/lstm.hpp"
#include "relex/ner.hpp"
#include "relex/params.hpp"
#include "relex/rc.hpp"
#include "relex/rng.hpp"
#include "relex/tensor.hpp"

namespace relex {

// The parameter set a config/vocabulary pair produces, in registration
// order; also the audit baseline for ablation parameter-count checks and
// checkpoint shape validation.
std::vector<std::pair<std::string, Shape>> expected_parameter_shapes(const RunConfig& config,
                                                                     const Vocabularies& vocab);
long long expected_parameter_count(const RunConfig& config, const Vocabularies& vocab);

// A sentence resolved against the vocabularies. Unknown words and chars map
// to the reserved unk ids; gold fields stay empty for untagged sentences.
struct EncodedSentence {
  std::vector<int> word_ids;
  std::vector<std::vector<int>> char_ids;
  std::vector<int> gold_tag_ids;  // -1 for tags outside the training tag set
  std::vector<int> boundary_ids;
  std::vector<std::string> gold_tags;
  std::vector<Relation> relations;
  int size() const { return static_cast<int>(word_ids.size()); }
};

// Which loss terms a training step computes.
enum class LossParts { NerOnly, RcOnly, Both };

struct StepLosses {
  Tensor total;
  Tensor ner;  // undefined when the step skipped the term
  Tensor rc;
  std::vector<int> predicted_tags;  // this pass's decode; empty in RcOnly+gold steps
  int rc_candidates = 0;
  bool rc_used_gold_tags = false;
};

struct Prediction {
  std::vector<std::string> tags;  // canonical BILOU re-encoding of the spans
  std::vector<EntitySpan> spans;
  std::vector<Relation> relations;
};

class Model {
 public:
  Model(const RunConfig& config, const Vocabularies& vocab, RngStream& init_rng);

  const RunConfig& config() const { return config_; }
  const Vocabularies& vocab() const { return vocab_; }
  ParamRegistry& params() { return params_; }
  const ParamRegistry& params() const { return params_; }

  EncodedSentence encode(const AnnotatedSentence& sent) const;
  // One unk draw per token; hides the char sequence too when configured.
  void apply_word_dropout(EncodedSentence& sent, RngStream& rng) const;

  // v_i per token: word embedding, char-BiLSTM state, boundary embedding
  // (setup 2), before any dropout.
  std::vector<Tensor> assemble_inputs(const EncodedSentence& sent) const;

  std::vector<Tensor> ner_emissions(const std::vector<Tensor>& v, RngSet* rng,
                                    bool training) const;
  Tensor ner_loss(const std::vector<Tensor>& emissions, const std::vector<int>& gold_tags) const;
  DecodedTags ner_decode(const std::vector<Tensor>& emissions) const;

  // Full per-sentence pass building the requested loss terms.
  StepLosses sentence_losses(const EncodedSentence& sent, LossParts parts,
                             RcLabelSource rc_source, RngSet* rng, bool training) const;

  Prediction predict(const AnnotatedSentence& sent) const;

  // Transitions with the BILOU mask added when strict mode is on.
  Tensor effective_transitions() const;

 private:
  Tensor rc_loss_term(const std::vector<Tensor>& v, const std::vector<int>& tag_ids,
                      const std::vector<RelationCandidate>& candidates, RngSet* rng, bool training,
                      std::vector<std::vector<double>>* scores_out) const;

  RunConfig config_;
  Vocabularies vocab_;
  ParamRegistry params_;

  Tensor word_emb_, char_emb_, boundary_emb_;
  BiLstmLayer char_lstm_;
  std::vector<BiLstmLayer> ner_layers_, rc_layers_;
  Tensor ner_w_, ner_b_, transitions_, bilou_mask_;
  Tensor label_emb_, head_w_, head_b_, tail_w_, tail_b_;
  BiaffineParams biaffine_;
};

}  // namespace relex
