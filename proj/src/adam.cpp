#include "relex/adam.hpp"

#include <cmath>

namespace relex {

void adam_step(const ParamRegistry& params, AdamState& state) {
  state.step += 1;
  const auto& c = state.config;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (const auto& name : params.names()) {
    Tensor p = params.get(name);
    if (!p.trainable()) continue;
    auto& mom = state.moments[name];
    if (mom.m.empty()) {
      mom.m.assign(p.size(), 0.0);
      mom.v.assign(p.size(), 0.0);
    }
    auto& values = p.values();
    const auto& g = p.grad();
    for (int i = 0; i < p.size(); ++i) {
      mom.m[i] = c.beta1 * mom.m[i] + (1.0 - c.beta1) * g[i];
      mom.v[i] = c.beta2 * mom.v[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double mhat = mom.m[i] / bc1;
      const double vhat = mom.v[i] / bc2;
      values[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
  }
}

}  // namespace relex
