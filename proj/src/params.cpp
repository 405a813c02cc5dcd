#include "relex/params.hpp"

#include <cmath>

#include "relex/errors.hpp"

namespace relex {

std::vector<double> initial_values(const Shape& shape, Init init, RngStream& rng) {
  std::vector<double> values(numel(shape), 0.0);
  switch (init) {
    case Init::Zeros:
      break;
    case Init::Glorot: {
      const double fan_out = shape.front();
      const double fan_in = shape.back();
      const double limit = std::sqrt(6.0 / (fan_in + fan_out));
      for (double& v : values) v = rng.uniform(-limit, limit);
      break;
    }
    case Init::Embedding: {
      const double half = 0.5 / shape.back();
      for (double& v : values) v = rng.uniform(-half, half);
      break;
    }
  }
  return values;
}

Tensor ParamRegistry::create(const std::string& name, const Shape& shape, Init init,
                             RngStream& rng) {
  if (has(name)) throw Error("parameter registered twice: " + name);
  Tensor t = Tensor::parameter(shape, initial_values(shape, init, rng));
  order_.push_back(name);
  by_name_.emplace(name, t);
  return t;
}

Tensor ParamRegistry::get(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw Error("unknown parameter: " + name);
  return it->second;
}

std::vector<std::pair<std::string, Shape>> ParamRegistry::shapes() const {
  std::vector<std::pair<std::string, Shape>> out;
  out.reserve(order_.size());
  for (const auto& name : order_) out.emplace_back(name, get(name).shape());
  return out;
}

int ParamRegistry::total_size() const {
  int n = 0;
  for (const auto& name : order_) n += get(name).size();
  return n;
}

void ParamRegistry::set_trainable_prefix(const std::string& prefix, bool trainable) {
  for (const auto& name : order_) {
    if (name.rfind(prefix, 0) == 0) get(name).set_trainable(trainable);
  }
}

void ParamRegistry::zero_grads() {
  for (const auto& name : order_) get(name).zero_grad();
}

}  // namespace relex
