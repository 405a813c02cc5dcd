#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "relex/params.hpp"

namespace relex {

struct AdamConfig {
  double lr = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Per-parameter first and second moments plus the shared step counter.
struct AdamState {
  explicit AdamState(AdamConfig config = {}) : config(config) {}
  AdamConfig config;
  long long step = 0;
  struct Moments {
    std::vector<double> m, v;
  };
  std::unordered_map<std::string, Moments> moments;
};

// One bias-corrected update of every trainable parameter. Frozen parameters
// are skipped entirely: no moment entry, no update.
void adam_step(const ParamRegistry& params, AdamState& state);

}  // namespace relex
