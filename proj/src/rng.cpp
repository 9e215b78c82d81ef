#include "tubematch/rng.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tubematch {

std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double portable_log(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw std::invalid_argument("portable_log: argument must be positive and finite");
    }
    int exponent = 0;
    double m = std::frexp(x, &exponent);  // m in [0.5, 1), exact
    if (m < 0.70710678118654752440) {     // keep m in [sqrt(1/2), sqrt(2))
        m *= 2.0;
        exponent -= 1;
    }
    const double t = (m - 1.0) / (m + 1.0);  // |t| <= 0.1716
    const double t2 = t * t;
    // atanh(t) = t * sum_k t^(2k) / (2k+1); 12 terms reach full double
    // precision for |t| <= 0.1716. Fixed-order Horner keeps the result
    // reproducible.
    double poly = 1.0 / 23.0;
    poly = poly * t2 + 1.0 / 21.0;
    poly = poly * t2 + 1.0 / 19.0;
    poly = poly * t2 + 1.0 / 17.0;
    poly = poly * t2 + 1.0 / 15.0;
    poly = poly * t2 + 1.0 / 13.0;
    poly = poly * t2 + 1.0 / 11.0;
    poly = poly * t2 + 1.0 / 9.0;
    poly = poly * t2 + 1.0 / 7.0;
    poly = poly * t2 + 1.0 / 5.0;
    poly = poly * t2 + 1.0 / 3.0;
    poly = poly * t2 + 1.0;
    const double ln2 = 0.69314718055994530942;
    return 2.0 * t * poly + static_cast<double>(exponent) * ln2;
}

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (std::uint64_t& word : state_) {
        word = splitmix64_next(sm);
    }
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) {
        state_[0] = 1;  // xoshiro forbids the all-zero state
    }
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
}

double Rng::next_gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * next_double() - 1.0;
        v = 2.0 * next_double() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * portable_log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

double Rng::next_gaussian(double mean, double sigma) {
    return mean + sigma * next_gaussian();
}

std::uint64_t Rng::next_below(std::uint64_t bound) {
    if (bound == 0) {
        throw std::invalid_argument("Rng::next_below: bound must be positive");
    }
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
        const std::uint64_t r = next_u64();
        if (r >= threshold) return r % bound;
    }
}

std::vector<int> Rng::permutation(int n) {
    if (n < 0) {
        throw std::invalid_argument("Rng::permutation: negative size");
    }
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    for (int i = n - 1; i > 0; --i) {
        const auto j = static_cast<int>(next_below(static_cast<std::uint64_t>(i) + 1));
        std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
    }
    return p;
}

}  // namespace tubematch
