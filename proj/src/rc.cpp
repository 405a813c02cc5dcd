#include "relex/rc.hpp"

#include <map>
#include <utility>

#include "relex/errors.hpp"

namespace relex {

std::vector<RelationCandidate> build_candidates(const std::vector<EntitySpan>& predicted_spans,
                                                const std::vector<Relation>& gold_relations,
                                                const SymbolTable& relations) {
  std::map<std::pair<int, int>, int> gold;
  for (const auto& r : gold_relations) {
    const int id = relations.id(r.label);
    gold.emplace(std::make_pair(r.head, r.tail), id < 0 ? 0 : id);
  }
  std::vector<RelationCandidate> out;
  for (const auto& a : predicted_spans) {
    for (const auto& b : predicted_spans) {
      if (a.end == b.end) continue;
      const auto it = gold.find({a.end, b.end});
      out.push_back({a.end, b.end, it == gold.end() ? 0 : it->second});
    }
  }
  return out;
}

Tensor biaffine_scores(const BiaffineParams& params, const Tensor& head, const Tensor& tail) {
  Tensor score;
  if (params.u.defined()) score = bilinear(params.u, head, tail);
  if (params.w.defined()) {
    const Tensor linear = affine(params.w, concat({head, tail}), params.b);
    score = score.defined() ? add(score, linear) : linear;
  }
  if (!score.defined()) throw ConfigError("biaffine scorer has no terms left");
  return score;
}

Tensor rc_softmax_loss(const std::vector<Tensor>& scores,
                       const std::vector<RelationCandidate>& candidates,
                       RcLossReduction reduction) {
  if (scores.size() != candidates.size())
    throw ShapeError("rc_softmax_loss: one score vector per candidate required");
  if (candidates.empty()) return Tensor::scalar(0.0);
  Tensor total;
  for (size_t i = 0; i < candidates.size(); ++i) {
    const int gold = candidates[i].gold_label;
    if (gold < 0 || gold >= scores[i].size())
      throw Error("rc_softmax_loss: gold label " + std::to_string(gold) + " out of range");
    const Tensor nll = scale(pick(log_softmax(scores[i]), gold), -1.0);
    total = i == 0 ? nll : add(total, nll);
  }
  if (reduction == RcLossReduction::Mean)
    total = scale(total, 1.0 / static_cast<double>(candidates.size()));
  return total;
}

}  // namespace relex
