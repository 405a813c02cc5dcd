#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "relex/rng.hpp"
#include "relex/tensor.hpp"

namespace relex {

enum class Init { Zeros, Glorot, Embedding };

// Draws initial values in element order. Glorot treats the leading dimension
// as fan-out and the trailing dimension as fan-in; Embedding draws from
// uniform(-0.5/width, 0.5/width) where width is the trailing dimension.
std::vector<double> initial_values(const Shape& shape, Init init, RngStream& rng);

// Named parameters in a fixed registration order. The order defines both the
// initialization draw sequence and the checkpoint layout.
class ParamRegistry {
 public:
  Tensor create(const std::string& name, const Shape& shape, Init init, RngStream& rng);
  Tensor get(const std::string& name) const;
  bool has(const std::string& name) const { return by_name_.count(name) != 0; }
  const std::vector<std::string>& names() const { return order_; }
  std::vector<std::pair<std::string, Shape>> shapes() const;
  int total_size() const;
  void set_trainable_prefix(const std::string& prefix, bool trainable);
  void zero_grads();

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, Tensor> by_name_;
};

}  // namespace relex
