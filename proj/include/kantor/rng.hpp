#pragma once

#include <cstdint>
#include <random>

namespace kantor {

/// Deterministic random source. Wraps mt19937_64 with explicit double
/// conversion so that sequences are identical across standard libraries
/// (std::uniform_real_distribution is implementation-defined).
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1), 53 bits of randomness.
  double next_double() {
    return double(gen_() >> 11) * (1.0 / 9007199254740992.0);
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Uniform integer in [0, n).
  uint64_t below(uint64_t n) { return n ? gen_() % n : 0; }

  /// Fisher-Yates shuffle.
  template <typename Seq>
  void shuffle(Seq& s) {
    for (size_t i = s.size(); i > 1; --i) {
      size_t j = size_t(below(i));
      std::swap(s[i - 1], s[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace kantor
