#pragma once

#include <cstdint>
#include <vector>

namespace tubematch {

// Advances a splitmix64 state and returns the next output. Used to expand
// seeds into generator state and to derive independent per-trial seeds.
std::uint64_t splitmix64_next(std::uint64_t& state);

// Natural log built from frexp plus a fixed-length atanh series. Only uses
// correctly-rounded IEEE-754 operations, so the gaussian sampling path stays
// bit-identical across platforms and libm versions. x must be positive and
// finite.
double portable_log(double x);

// xoshiro256** seeded through splitmix64. The exact draw sequence is part of
// the toolkit's determinism contract (see README), so every consumer goes
// through this class rather than <random>.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform in [0, 1) with 53 random mantissa bits.
    double next_double();

    // Uniform in [lo, hi).
    double next_uniform(double lo, double hi);

    // Standard normal via the Marsaglia polar method; pairs are cached.
    double next_gaussian();
    double next_gaussian(double mean, double sigma);

    // Uniform in [0, bound) without modulo bias. bound must be positive.
    std::uint64_t next_below(std::uint64_t bound);

    // Fisher-Yates permutation of {0, .., n-1}.
    std::vector<int> permutation(int n);

  private:
    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace tubematch
