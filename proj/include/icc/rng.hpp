#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace icc {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent substream seed from one base seed. Every source of
// randomness in a run (init, resample, synthetic labels, ...) pulls its seed
// through here with a distinct stream name, so experiments stay reproducible
// when parts run in parallel or out of order.
std::uint64_t derive_seed(std::uint64_t base, std::string_view stream,
                          std::uint64_t index = 0);

// mt19937_64 with hand-rolled uniform/normal transforms. The engine is
// bit-exact across standard libraries; the std distributions are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1) with 53 random bits
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // inclusive range, rejection-sampled for exact uniformity
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);

  // standard normal, Box-Muller with a cached spare
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace icc
