#pragma once

#include <vector>

#include "relex/config.hpp"
#include "relex/data.hpp"
#include "relex/tensor.hpp"

namespace relex {

// One ordered pair of entity-final tokens plus its training target.
struct RelationCandidate {
  int head = 0;
  int tail = 0;
  int gold_label = 0;  // NEG unless an exact gold (head, tail) match exists
  bool operator==(const RelationCandidate&) const = default;
};

// All ordered pairs (j, k), j != k, of the spans' final tokens, in span
// order. A candidate gets a gold label only on exact index equality with a
// gold relation; anything else, boundary errors included, is NEG.
std::vector<RelationCandidate> build_candidates(const std::vector<EntitySpan>& predicted_spans,
                                                const std::vector<Relation>& gold_relations,
                                                const SymbolTable& relations);

// Biaffine scorer weights. u is empty under the no-bilinear ablation, w and b
// under the no-linear ablation; the ablated term contributes nothing.
struct BiaffineParams {
  Tensor u;  // (m, l, m)
  Tensor w;  // (l, 2m)
  Tensor b;  // (l)
};

// s = head' U tail + W concat(head, tail) + b, minus ablated terms.
Tensor biaffine_scores(const BiaffineParams& params, const Tensor& head, const Tensor& tail);

// Cross-entropy against each candidate's gold label, aggregated by the
// configured reduction. No candidates yields an exact-zero constant.
Tensor rc_softmax_loss(const std::vector<Tensor>& scores,
                       const std::vector<RelationCandidate>& candidates,
                       RcLossReduction reduction);

}  // namespace relex
