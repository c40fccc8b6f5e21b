#ifndef FRBC_RNG_HPP
#define FRBC_RNG_HPP

#include <cstdint>
#include <random>

namespace frbc {

// Seeded random source used everywhere randomness is needed.
//
// Backed by std::mt19937_64, whose output sequence is fixed by the C++
// standard, so a seed fully determines every draw on any conforming
// implementation. Normal variates use the basic Box-Muller transform and
// consume exactly two 64-bit words per call (no caching of the second
// variate), keeping the stream position a pure function of the call sequence.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // N(mean, stddev^2); stddev is the standard deviation.
  double normal(double mean, double stddev);

  // Uniform index in [0, n). n must be > 0.
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace frbc

#endif
