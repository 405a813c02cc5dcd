#pragma once

#include <vector>

#include "relex/data.hpp"
#include "relex/tensor.hpp"

namespace relex {

// Linear-chain CRF over K tags with two virtual states appended to the
// transition matrix: start row K, stop column K+1. Emissions are one
// length-K score vector per position.

// Emission + transition score of one path, start and stop included.
Tensor crf_path_score(const std::vector<Tensor>& emissions, const std::vector<int>& tags,
                      const Tensor& transitions);

// log Z - gold path score, with log Z from the log-space forward algorithm.
Tensor crf_nll(const std::vector<Tensor>& emissions, const std::vector<int>& tags,
               const Tensor& transitions);

struct DecodedTags {
  std::vector<int> tags;
  double score = 0.0;
};

// Max-scoring path under the crf_path_score scoring. Ties break toward the
// lowest tag id at every backpointer decision, final state included.
DecodedTags viterbi_decode(const std::vector<Tensor>& emissions, const Tensor& transitions);

// Per-position cross-entropy, summed; equals crf_nll at zero transitions.
Tensor softmax_ner_nll(const std::vector<Tensor>& emissions, const std::vector<int>& tags);

// Per-position argmax with the same tie rule; score is the emission sum.
DecodedTags softmax_decode(const std::vector<Tensor>& emissions);

// (K+2)x(K+2) constant: -1e9 on BILOU-forbidden moves, 0 elsewhere. Adding
// it to the transitions confines decoding to valid tag sequences.
Tensor bilou_transition_mask(const Vocabularies& vocab);

}  // namespace relex
