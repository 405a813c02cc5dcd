#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace relex {

std::uint64_t splitmix64(std::uint64_t x);

// One deterministic random stream. Every draw is derived from raw
// mt19937_64 output (no std:: distributions), so sequences are identical
// across platforms and standard libraries.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }
  double uniform();                     // [0, 1)
  double uniform(double lo, double hi);
  int uniform_int(int n);               // [0, n), n >= 1
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      std::swap(v[i], v[uniform_int(i + 1)]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

// Stream indices of the seed-splitting scheme. One user-facing seed fans
// out into independent streams so that, e.g., toggling dropout does not
// perturb parameter initialization.
enum class RngUse : std::uint64_t {
  Init = 0,
  Shuffle = 1,
  Dropout = 2,
  WordDropout = 3,
};

RngStream make_stream(std::uint64_t seed, RngUse use);

// The four streams one training run consumes.
struct RngSet {
  RngStream init;
  RngStream shuffle;
  RngStream dropout;
  RngStream word_dropout;
  explicit RngSet(std::uint64_t seed)
      : init(make_stream(seed, RngUse::Init)),
        shuffle(make_stream(seed, RngUse::Shuffle)),
        dropout(make_stream(seed, RngUse::Dropout)),
        word_dropout(make_stream(seed, RngUse::WordDropout)) {}
};

}  // namespace relex
