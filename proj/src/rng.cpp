#include "relex/rng.hpp"

#include "relex/errors.hpp"

namespace relex {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double RngStream::uniform() {
  // Top 53 bits of the raw output, a dyadic rational in [0, 1).
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

int RngStream::uniform_int(int n) {
  if (n < 1) throw Error("uniform_int: n must be >= 1");
  // Rejection sampling on the top bits; unbiased for any n.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return static_cast<int>(x % bound);
}

RngStream make_stream(std::uint64_t seed, RngUse use) {
  return RngStream(splitmix64(seed * 0x100000001b3ULL + static_cast<std::uint64_t>(use)));
}

}  // namespace relex
