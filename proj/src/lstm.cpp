#include "relex/lstm.hpp"

#include "relex/errors.hpp"

namespace relex {

std::pair<Tensor, Tensor> lstm_step(const LstmCell& cell, const Tensor& x, const Tensor& h,
                                    const Tensor& c) {
  const int hidden = cell.hidden();
  const Tensor gates = affine(cell.w, concat({x, h}), cell.b);
  const Tensor i = sigmoid(slice(gates, 0, hidden));
  const Tensor f = sigmoid(slice(gates, hidden, hidden));
  const Tensor g = tanh(slice(gates, 2 * hidden, hidden));
  const Tensor o = sigmoid(slice(gates, 3 * hidden, hidden));
  const Tensor c2 = add(mul(f, c), mul(i, g));
  const Tensor h2 = mul(o, tanh(c2));
  return {h2, c2};
}

std::vector<Tensor> lstm_run(const LstmCell& cell, const std::vector<Tensor>& xs, bool reverse) {
  if (xs.empty()) throw ShapeError("lstm_run: empty sequence");
  const int n = static_cast<int>(xs.size());
  const int hidden = cell.hidden();
  std::vector<Tensor> hs(n);
  Tensor h = Tensor::zeros({hidden});
  Tensor c = Tensor::zeros({hidden});
  for (int k = 0; k < n; ++k) {
    const int i = reverse ? n - 1 - k : k;
    std::tie(h, c) = lstm_step(cell, xs[i], h, c);
    hs[i] = h;
  }
  return hs;
}

std::vector<Tensor> bilstm_run(const BiLstmLayer& layer, const std::vector<Tensor>& xs) {
  const auto fwd = lstm_run(layer.fwd, xs, false);
  const auto bwd = lstm_run(layer.bwd, xs, true);
  std::vector<Tensor> out(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) out[i] = concat({fwd[i], bwd[i]});
  return out;
}

std::vector<Tensor> bilstm_stack_run(const std::vector<BiLstmLayer>& layers,
                                     const std::vector<Tensor>& xs) {
  std::vector<Tensor> seq = xs;
  for (const auto& layer : layers) seq = bilstm_run(layer, seq);
  return seq;
}

Tensor bilstm_final_states(const BiLstmLayer& layer, const std::vector<Tensor>& xs) {
  const auto fwd = lstm_run(layer.fwd, xs, false);
  const auto bwd = lstm_run(layer.bwd, xs, true);
  return concat({fwd.back(), bwd.front()});
}

}  // namespace relex
