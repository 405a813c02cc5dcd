#include "relex/ner.hpp"

#include <string>

#include "relex/errors.hpp"

namespace relex {

namespace {

// Validates the emission/transition/tag shapes shared by every entry point
// and returns (n, K).
std::pair<int, int> crf_dims(const std::vector<Tensor>& emissions, const Tensor& transitions) {
  if (emissions.empty()) throw ShapeError("crf: empty emission sequence");
  const int k = emissions[0].size();
  if (k < 1) throw ShapeError("crf: empty tag set");
  for (const auto& e : emissions) {
    if (e.shape() != Shape{k})
      throw ShapeError("crf: emission rows disagree in size");
  }
  if (transitions.shape() != Shape{k + 2, k + 2})
    throw ShapeError("crf: transitions must be " + shape_str({k + 2, k + 2}) + ", got " +
                     shape_str(transitions.shape()));
  return {static_cast<int>(emissions.size()), k};
}

void check_tags(const std::vector<int>& tags, int n, int k) {
  if (static_cast<int>(tags.size()) != n)
    throw ShapeError("crf: got " + std::to_string(tags.size()) + " tags for " +
                     std::to_string(n) + " positions");
  for (int t : tags) {
    if (t < 0 || t >= k)
      throw Error("crf: tag id " + std::to_string(t) + " out of range [0," + std::to_string(k) + ")");
  }
}

}  // namespace

Tensor crf_path_score(const std::vector<Tensor>& emissions, const std::vector<int>& tags,
                      const Tensor& transitions) {
  const auto [n, k] = crf_dims(emissions, transitions);
  check_tags(tags, n, k);
  const int t_dim = k + 2;
  const Tensor flat = flatten(transitions);
  Tensor score = add(pick(flat, k * t_dim + tags[0]), pick(emissions[0], tags[0]));
  for (int t = 1; t < n; ++t) {
    score = add(score, pick(flat, tags[t - 1] * t_dim + tags[t]));
    score = add(score, pick(emissions[t], tags[t]));
  }
  return add(score, pick(flat, tags[n - 1] * t_dim + (k + 1)));
}

Tensor crf_nll(const std::vector<Tensor>& emissions, const std::vector<int>& tags,
               const Tensor& transitions) {
  const auto [n, k] = crf_dims(emissions, transitions);
  check_tags(tags, n, k);
  const int t_dim = k + 2;
  const Tensor flat = flatten(transitions);

  // Transition columns hoisted out of the time loop.
  std::vector<Tensor> col(k);
  if (n > 1) {
    for (int j = 0; j < k; ++j) {
      std::vector<int> idx(k);
      for (int i = 0; i < k; ++i) idx[i] = i * t_dim + j;
      col[j] = gather(flat, idx);
    }
  }

  Tensor alpha = add(emissions[0], slice(row(transitions, k), 0, k));
  for (int t = 1; t < n; ++t) {
    std::vector<Tensor> parts(k);
    for (int j = 0; j < k; ++j) parts[j] = log_sum_exp(add(alpha, col[j]));
    alpha = add(emissions[t], concat(parts));
  }
  std::vector<int> stop_idx(k);
  for (int i = 0; i < k; ++i) stop_idx[i] = i * t_dim + (k + 1);
  const Tensor log_z = log_sum_exp(add(alpha, gather(flat, stop_idx)));
  return sub(log_z, crf_path_score(emissions, tags, transitions));
}

DecodedTags viterbi_decode(const std::vector<Tensor>& emissions, const Tensor& transitions) {
  const auto [n, k] = crf_dims(emissions, transitions);
  const int t_dim = k + 2;
  const auto& tr = transitions.values();

  std::vector<double> delta(k);
  for (int j = 0; j < k; ++j) delta[j] = emissions[0].values()[j] + tr[k * t_dim + j];

  std::vector<std::vector<int>> backptr(n, std::vector<int>(k, 0));
  for (int t = 1; t < n; ++t) {
    std::vector<double> next(k);
    for (int j = 0; j < k; ++j) {
      int best_i = 0;
      double best = delta[0] + tr[0 * t_dim + j];
      for (int i = 1; i < k; ++i) {
        const double s = delta[i] + tr[i * t_dim + j];
        if (s > best) {
          best = s;
          best_i = i;
        }
      }
      next[j] = best + emissions[t].values()[j];
      backptr[t][j] = best_i;
    }
    delta = std::move(next);
  }

  int best_j = 0;
  double best = delta[0] + tr[0 * t_dim + (k + 1)];
  for (int j = 1; j < k; ++j) {
    const double s = delta[j] + tr[j * t_dim + (k + 1)];
    if (s > best) {
      best = s;
      best_j = j;
    }
  }

  DecodedTags out;
  out.score = best;
  out.tags.assign(n, 0);
  out.tags[n - 1] = best_j;
  for (int t = n - 1; t > 0; --t) out.tags[t - 1] = backptr[t][out.tags[t]];
  return out;
}

Tensor softmax_ner_nll(const std::vector<Tensor>& emissions, const std::vector<int>& tags) {
  if (emissions.empty()) throw ShapeError("softmax_ner_nll: empty emission sequence");
  if (tags.size() != emissions.size())
    throw ShapeError("softmax_ner_nll: tag/position count mismatch");
  Tensor loss;
  for (size_t t = 0; t < emissions.size(); ++t) {
    const int k = emissions[t].size();
    if (tags[t] < 0 || tags[t] >= k)
      throw Error("softmax_ner_nll: tag id " + std::to_string(tags[t]) + " out of range");
    const Tensor nll = scale(pick(log_softmax(emissions[t]), tags[t]), -1.0);
    loss = t == 0 ? nll : add(loss, nll);
  }
  return loss;
}

DecodedTags softmax_decode(const std::vector<Tensor>& emissions) {
  if (emissions.empty()) throw ShapeError("softmax_decode: empty emission sequence");
  DecodedTags out;
  out.tags.reserve(emissions.size());
  for (const auto& e : emissions) {
    const auto& v = e.values();
    int best = 0;
    for (size_t j = 1; j < v.size(); ++j)
      if (v[j] > v[best]) best = static_cast<int>(j);
    out.tags.push_back(best);
    out.score += v[best];
  }
  return out;
}

Tensor bilou_transition_mask(const Vocabularies& vocab) {
  const int k = vocab.tags.size();
  const int t_dim = k + 2;
  const int start = k, stop = k + 1;

  // 'S' marks the virtual states; otherwise the tag's boundary letter.
  auto kind = [&](int state) -> char {
    if (state == start || state == stop) return 'S';
    return tag_parse(vocab.tags.symbol(state)).first;
  };
  auto type_of = [&](int state) -> std::string {
    if (state == start || state == stop) return "";
    return tag_parse(vocab.tags.symbol(state)).second;
  };

  auto allowed = [&](int from, int to) -> bool {
    if (from == stop || to == start) return true;  // never traversed
    const char f = from == start ? 'S' : kind(from);
    if (to == stop) return f == 'S' || f == 'O' || f == 'L' || f == 'U';
    const char t = kind(to);
    const bool f_open = f == 'B' || f == 'I';
    if (f_open) return (t == 'I' || t == 'L') && type_of(from) == type_of(to);
    return t == 'O' || t == 'B' || t == 'U';
  };

  std::vector<double> mask(static_cast<size_t>(t_dim) * t_dim, 0.0);
  for (int from = 0; from < t_dim; ++from) {
    for (int to = 0; to < t_dim; ++to) {
      if (!allowed(from, to)) mask[static_cast<size_t>(from) * t_dim + to] = -1e9;
    }
  }
  return Tensor::constant({t_dim, t_dim}, std::move(mask));
}

}  // namespace relex
