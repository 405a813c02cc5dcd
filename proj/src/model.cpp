#include "relex/model.hpp"

#include <unordered_map>

#include "relex/errors.hpp"

namespace relex {

namespace {

struct ParamSpec {
  std::string name;
  Shape shape;
  Init init;
};

int input_dim(const RunConfig& c) {
  return c.word_dim + (c.no_char ? 0 : 2 * c.char_dim) + (c.setup == 2 ? c.boundary_dim : 0);
}

void add_bilstm(std::vector<ParamSpec>& out, const std::string& prefix, int layers, int input,
                int hidden) {
  for (int layer = 0; layer < layers; ++layer) {
    const int in = layer == 0 ? input : 2 * hidden;
    for (const char* dir : {"fwd", "bwd"}) {
      const std::string base = prefix + ".l" + std::to_string(layer) + "." + dir;
      out.push_back({base + ".w", {4 * hidden, in + hidden}, Init::Glorot});
      out.push_back({base + ".b", {4 * hidden}, Init::Zeros});
    }
  }
}

std::vector<ParamSpec> parameter_layout(const RunConfig& c, const Vocabularies& vocab) {
  const int k = vocab.tags.size();
  const int l = vocab.relations.size();
  const int h = c.hidden_dim;
  const int m = c.ffnn_dim;
  const int v_dim = input_dim(c);
  const int x_dim = v_dim + (c.no_entity_emb ? 0 : c.label_dim);

  std::vector<ParamSpec> out;
  out.push_back({"encoder.word_emb", {vocab.words.size(), c.word_dim}, Init::Embedding});
  if (!c.no_char) {
    out.push_back({"encoder.char_emb", {vocab.chars.size(), c.char_dim}, Init::Embedding});
    for (const char* dir : {"fwd", "bwd"}) {
      const std::string base = std::string("encoder.char_lstm.") + dir;
      out.push_back({base + ".w", {4 * c.char_dim, 2 * c.char_dim}, Init::Glorot});
      out.push_back({base + ".b", {4 * c.char_dim}, Init::Zeros});
    }
  }
  if (c.setup == 2)
    out.push_back({"encoder.boundary_emb", {vocab.boundaries.size(), c.boundary_dim}, Init::Embedding});
  add_bilstm(out, "ner.bilstm", c.lstm_layers, v_dim, h);
  out.push_back({"ner.ffnn.w", {k, 2 * h}, Init::Glorot});
  out.push_back({"ner.ffnn.b", {k}, Init::Zeros});
  if (!c.no_crf) out.push_back({"ner.crf.transitions", {k + 2, k + 2}, Init::Glorot});
  if (!c.no_entity_emb) out.push_back({"rc.label_emb", {k, c.label_dim}, Init::Embedding});
  add_bilstm(out, "rc.bilstm", c.lstm_layers, x_dim, h);
  out.push_back({"rc.head.w", {m, 2 * h}, Init::Glorot});
  out.push_back({"rc.head.b", {m}, Init::Zeros});
  out.push_back({"rc.tail.w", {m, 2 * h}, Init::Glorot});
  out.push_back({"rc.tail.b", {m}, Init::Zeros});
  if (!c.no_bilinear) out.push_back({"rc.biaffine.u", {m, l, m}, Init::Glorot});
  if (!c.no_linear) {
    out.push_back({"rc.biaffine.w", {l, 2 * m}, Init::Glorot});
    out.push_back({"rc.biaffine.b", {l}, Init::Zeros});
  }
  return out;
}

void check_gold_ids(const std::vector<int>& ids) {
  if (ids.empty()) throw DataError("sentence has no gold entity tags");
  for (int id : ids)
    if (id < 0) throw DataError("sentence contains tags outside the training tag set");
}

}  // namespace

std::vector<std::pair<std::string, Shape>> expected_parameter_shapes(const RunConfig& config,
                                                                     const Vocabularies& vocab) {
  std::vector<std::pair<std::string, Shape>> out;
  for (const auto& spec : parameter_layout(config, vocab)) out.emplace_back(spec.name, spec.shape);
  return out;
}

long long expected_parameter_count(const RunConfig& config, const Vocabularies& vocab) {
  long long n = 0;
  for (const auto& [name, shape] : expected_parameter_shapes(config, vocab)) n += numel(shape);
  return n;
}

Model::Model(const RunConfig& config, const Vocabularies& vocab, RngStream& init_rng)
    : config_(config), vocab_(vocab) {
  config_.validate();
  if (vocab_.relations.size() < 2)
    throw ConfigError("the corpus defines no relation classes besides NEG");
  for (const auto& spec : parameter_layout(config_, vocab_))
    params_.create(spec.name, spec.shape, spec.init, init_rng);

  word_emb_ = params_.get("encoder.word_emb");
  if (!config_.no_char) {
    char_emb_ = params_.get("encoder.char_emb");
    char_lstm_ = {{params_.get("encoder.char_lstm.fwd.w"), params_.get("encoder.char_lstm.fwd.b")},
                  {params_.get("encoder.char_lstm.bwd.w"), params_.get("encoder.char_lstm.bwd.b")}};
  }
  if (config_.setup == 2) boundary_emb_ = params_.get("encoder.boundary_emb");

  auto bind_stack = [&](const std::string& prefix) {
    std::vector<BiLstmLayer> layers;
    for (int layer = 0; layer < config_.lstm_layers; ++layer) {
      const std::string base = prefix + ".l" + std::to_string(layer) + ".";
      layers.push_back({{params_.get(base + "fwd.w"), params_.get(base + "fwd.b")},
                        {params_.get(base + "bwd.w"), params_.get(base + "bwd.b")}});
    }
    return layers;
  };
  ner_layers_ = bind_stack("ner.bilstm");
  rc_layers_ = bind_stack("rc.bilstm");

  ner_w_ = params_.get("ner.ffnn.w");
  ner_b_ = params_.get("ner.ffnn.b");
  if (!config_.no_crf) {
    transitions_ = params_.get("ner.crf.transitions");
    if (config_.strict_crf_transitions) bilou_mask_ = bilou_transition_mask(vocab_);
  }
  if (!config_.no_entity_emb) label_emb_ = params_.get("rc.label_emb");
  head_w_ = params_.get("rc.head.w");
  head_b_ = params_.get("rc.head.b");
  tail_w_ = params_.get("rc.tail.w");
  tail_b_ = params_.get("rc.tail.b");
  if (!config_.no_bilinear) biaffine_.u = params_.get("rc.biaffine.u");
  if (!config_.no_linear) {
    biaffine_.w = params_.get("rc.biaffine.w");
    biaffine_.b = params_.get("rc.biaffine.b");
  }
}

EncodedSentence Model::encode(const AnnotatedSentence& sent) const {
  EncodedSentence e;
  e.word_ids.reserve(sent.tokens.size());
  e.char_ids.reserve(sent.tokens.size());
  for (const auto& word : sent.tokens) {
    const int id = vocab_.words.id(word);
    e.word_ids.push_back(id < 0 ? 0 : id);
    std::vector<int> cids;
    for (const auto& cp : utf8_codepoints(word)) {
      const int cid = vocab_.chars.id(cp);
      cids.push_back(cid < 0 ? 0 : cid);
    }
    if (cids.empty()) cids.push_back(0);
    e.char_ids.push_back(std::move(cids));
  }
  if (!sent.entity_tags.empty()) {
    e.gold_tags = sent.entity_tags;
    for (const auto& tag : sent.entity_tags) {
      e.gold_tag_ids.push_back(vocab_.tags.id(tag));
      e.boundary_ids.push_back(vocab_.boundary_id_of_tag(tag));
    }
  }
  e.relations = sent.relations;
  return e;
}

void Model::apply_word_dropout(EncodedSentence& sent, RngStream& rng) const {
  for (int i = 0; i < sent.size(); ++i) {
    const std::string& word = vocab_.words.symbol(sent.word_ids[i]);
    const auto it = vocab_.word_counts.find(word);
    const long long count = it == vocab_.word_counts.end() ? 0 : it->second;
    if (rng.uniform() < unk_probability(count)) {
      sent.word_ids[i] = 0;
      if (config_.word_dropout_chars) sent.char_ids[i] = {0};
    }
  }
}

std::vector<Tensor> Model::assemble_inputs(const EncodedSentence& sent) const {
  if (config_.setup == 2 && sent.boundary_ids.empty())
    throw DataError("setup 2 requires gold entity tags on every sentence");
  std::vector<Tensor> v(sent.size());
  for (int i = 0; i < sent.size(); ++i) {
    std::vector<Tensor> parts;
    parts.push_back(row(word_emb_, sent.word_ids[i]));
    if (!config_.no_char) {
      std::vector<Tensor> chars;
      chars.reserve(sent.char_ids[i].size());
      for (int cid : sent.char_ids[i]) chars.push_back(row(char_emb_, cid));
      parts.push_back(bilstm_final_states(char_lstm_, chars));
    }
    if (config_.setup == 2) parts.push_back(row(boundary_emb_, sent.boundary_ids[i]));
    v[i] = parts.size() == 1 ? parts[0] : concat(parts);
  }
  return v;
}

std::vector<Tensor> Model::ner_emissions(const std::vector<Tensor>& v, RngSet* rng,
                                         bool training) const {
  if (training && !rng) throw Error("training forward pass needs an rng set");
  std::vector<Tensor> in(v.size());
  for (size_t i = 0; i < v.size(); ++i)
    in[i] = training ? apply_dropout(v[i], config_.keep_prob, rng->dropout, true) : v[i];
  auto s = bilstm_stack_run(ner_layers_, in);
  std::vector<Tensor> emissions(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    const Tensor f = training ? apply_dropout(s[i], config_.keep_prob, rng->dropout, true) : s[i];
    emissions[i] = affine(ner_w_, f, ner_b_);
  }
  return emissions;
}

Tensor Model::effective_transitions() const {
  if (!transitions_.defined()) throw ConfigError("the CRF is disabled under no_crf");
  return config_.strict_crf_transitions ? add(transitions_, bilou_mask_) : transitions_;
}

Tensor Model::ner_loss(const std::vector<Tensor>& emissions,
                       const std::vector<int>& gold_tags) const {
  check_gold_ids(gold_tags);
  if (config_.no_crf) return softmax_ner_nll(emissions, gold_tags);
  return crf_nll(emissions, gold_tags, effective_transitions());
}

DecodedTags Model::ner_decode(const std::vector<Tensor>& emissions) const {
  if (config_.no_crf) return softmax_decode(emissions);
  return viterbi_decode(emissions, effective_transitions());
}

Tensor Model::rc_loss_term(const std::vector<Tensor>& v, const std::vector<int>& tag_ids,
                           const std::vector<RelationCandidate>& candidates, RngSet* rng,
                           bool training, std::vector<std::vector<double>>* scores_out) const {
  if (training && !rng) throw Error("training forward pass needs an rng set");
  std::vector<Tensor> xs(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    const Tensor x =
        config_.no_entity_emb ? v[i] : concat({row(label_emb_, tag_ids[i]), v[i]});
    xs[i] = training ? apply_dropout(x, config_.keep_prob, rng->dropout, true) : x;
  }
  auto rs = bilstm_stack_run(rc_layers_, xs);
  for (size_t i = 0; i < rs.size(); ++i)
    rs[i] = training ? apply_dropout(rs[i], config_.keep_prob, rng->dropout, true) : rs[i];

  std::unordered_map<int, Tensor> head_proj, tail_proj;
  std::vector<Tensor> scores;
  scores.reserve(candidates.size());
  for (const auto& cand : candidates) {
    Tensor& h = head_proj[cand.head];
    if (!h.defined()) h = affine(head_w_, rs[cand.head], head_b_);
    Tensor& t = tail_proj[cand.tail];
    if (!t.defined()) t = affine(tail_w_, rs[cand.tail], tail_b_);
    scores.push_back(biaffine_scores(biaffine_, h, t));
  }
  if (scores_out)
    for (const auto& s : scores) scores_out->push_back(s.values());
  return rc_softmax_loss(scores, candidates, config_.rc_loss_reduction);
}

StepLosses Model::sentence_losses(const EncodedSentence& sent, LossParts parts,
                                  RcLabelSource rc_source, RngSet* rng, bool training) const {
  if (sent.size() == 0) throw DataError("empty sentence");
  StepLosses out;
  const auto v = assemble_inputs(sent);

  const bool need_ner_loss = parts != LossParts::RcOnly;
  const bool need_rc = parts != LossParts::NerOnly;
  const bool need_pred = need_ner_loss || (need_rc && rc_source == RcLabelSource::Predicted);

  if (need_pred) {
    // When only the decode is needed (RC-only with predicted labels), the
    // NER branch runs mask-free so the dropout stream stays RC-owned.
    const bool ner_training = training && need_ner_loss;
    const auto emissions = ner_emissions(v, ner_training ? rng : nullptr, ner_training);
    out.predicted_tags = ner_decode(emissions).tags;
    if (need_ner_loss) out.ner = ner_loss(emissions, sent.gold_tag_ids);
  }

  if (need_rc) {
    std::vector<int> tag_ids;
    std::vector<EntitySpan> spans;
    if (rc_source == RcLabelSource::Gold) {
      check_gold_ids(sent.gold_tag_ids);
      tag_ids = sent.gold_tag_ids;
      spans = bilou_to_spans(sent.gold_tags);
      out.rc_used_gold_tags = true;
    } else {
      tag_ids = out.predicted_tags;
      std::vector<std::string> names(tag_ids.size());
      for (size_t i = 0; i < tag_ids.size(); ++i) names[i] = vocab_.tags.symbol(tag_ids[i]);
      spans = bilou_to_spans(names);
    }
    const auto candidates = build_candidates(spans, sent.relations, vocab_.relations);
    out.rc_candidates = static_cast<int>(candidates.size());
    if (candidates.empty())
      out.rc = Tensor::scalar(0.0);
    else
      out.rc = rc_loss_term(v, tag_ids, candidates, rng, training, nullptr);
  }

  if (out.ner.defined() && out.rc.defined())
    out.total = add(out.ner, out.rc);
  else
    out.total = out.ner.defined() ? out.ner : out.rc;
  return out;
}

Prediction Model::predict(const AnnotatedSentence& sent) const {
  const EncodedSentence e = encode(sent);
  if (e.size() == 0) throw DataError("empty sentence");
  const auto v = assemble_inputs(e);
  const auto emissions = ner_emissions(v, nullptr, false);
  const auto decoded = ner_decode(emissions);

  std::vector<std::string> raw(decoded.tags.size());
  for (size_t i = 0; i < decoded.tags.size(); ++i) raw[i] = vocab_.tags.symbol(decoded.tags[i]);

  Prediction p;
  p.spans = bilou_to_spans(raw);
  p.tags = spans_to_bilou(p.spans, e.size());
  if (p.spans.size() >= 2) {
    const auto candidates = build_candidates(p.spans, {}, vocab_.relations);
    std::vector<std::vector<double>> scores;
    rc_loss_term(v, decoded.tags, candidates, nullptr, false, &scores);
    for (size_t i = 0; i < candidates.size(); ++i) {
      int best = 0;
      for (size_t j = 1; j < scores[i].size(); ++j)
        if (scores[i][j] > scores[i][best]) best = static_cast<int>(j);
      if (best != 0)
        p.relations.push_back(
            {candidates[i].head, candidates[i].tail, vocab_.relations.symbol(best)});
    }
  }
  return p;
}

}  // namespace relex
