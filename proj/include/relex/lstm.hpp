#pragma once

#include <utility>
#include <vector>

#include "relex/tensor.hpp"

namespace relex {

// Weights of one LSTM direction: combined gate matrix (4H x (input+H)) and
// gate bias (4H). Gate order along the 4H axis: input, forget, cell, output.
struct LstmCell {
  Tensor w;
  Tensor b;
  int hidden() const { return b.size() / 4; }
  int input() const { return w.shape()[1] - hidden(); }
};

// One recurrence step; returns the new hidden and cell states.
std::pair<Tensor, Tensor> lstm_step(const LstmCell& cell, const Tensor& x, const Tensor& h,
                                    const Tensor& c);

// Hidden states aligned with sequence positions; initial states are zero.
// Forward order when reverse is false, right-to-left otherwise.
std::vector<Tensor> lstm_run(const LstmCell& cell, const std::vector<Tensor>& xs, bool reverse);

struct BiLstmLayer {
  LstmCell fwd, bwd;
};

// Per-position concat(forward h_i, backward h_i).
std::vector<Tensor> bilstm_run(const BiLstmLayer& layer, const std::vector<Tensor>& xs);

// Stacked layers; the output sequence of each layer feeds the next.
std::vector<Tensor> bilstm_stack_run(const std::vector<BiLstmLayer>& layers,
                                     const std::vector<Tensor>& xs);

// concat(final forward state, final backward state): the forward state at the
// last position and the backward state at the first.
Tensor bilstm_final_states(const BiLstmLayer& layer, const std::vector<Tensor>& xs);

}  // namespace relex
