#pragma once

#include <cstdint>
#include <initializer_list>

namespace logiprep {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Counter-based generator: draw i is mix64(key + i * golden), so a stream
// is fully determined by its key and the number of draws taken. Keys are
// derived from (seed, doc_id, sent_idx) so results never depend on which
// worker processed a sentence or in what order.
class CounterRng {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

  static constexpr CounterRng keyed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x6C6F676970726570ULL;
    for (auto p : parts) h = mix64(h ^ mix64(p + kGolden));
    return CounterRng(h);
  }

  constexpr std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGolden); }

  // Uniform in [0, 1) with 53 bits of precision.
  constexpr double next_unit() {
    return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
  }

  // Uniform in [0, n), unbiased (rejection on the top of the range).
  constexpr std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  constexpr std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace logiprep
