#ifndef RECURLAB_RANDOM_H_
#define RECURLAB_RANDOM_H_

#include <cstdint>
#include <random>

#include "recurlab/numeric.h"

namespace recurlab {

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream for sample `index` under `master_seed`. Only the raw
// engine output is used (never std:: distributions), so streams are
// identical across standard libraries.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t index)
      : engine_(SplitMix64(SplitMix64(master_seed) ^ SplitMix64(index + 0x5851f42d4c957f2dULL))) {}

  std::uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double NextUnit() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, 2^bits).
  Integer NextBits(unsigned bits) {
    Integer value = 0;
    unsigned filled = 0;
    while (filled < bits) {
      Integer word(static_cast<unsigned long>(NextU64()));
      value = (value << 64) + word;
      filled += 64;
    }
    return value >> (filled - bits);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace recurlab

#endif  // RECURLAB_RANDOM_H_
