#ifndef RAYSIM_RNG_HPP_
#define RAYSIM_RNG_HPP_

#include <cstdint>
#include <random>

namespace raysim {

// splitmix64; used both as a seed mixer and as a stateless per-key hash so
// that derived streams (trial, cell, qubit) are independent of evaluation
// order.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t hash_mix(uint64_t a, uint64_t b) {
    return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2)));
}

/// Maps a 64-bit hash to a double in [0, 1).
inline double u64_to_unit_double(uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

/// Seeded random stream. Streams for parallel work are derived from a master
/// seed plus integer indices, never from wall-clock time.
class Rng {
  public:
    explicit Rng(uint64_t seed) : engine_(splitmix64(seed)) {}

    static Rng derive(uint64_t master, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
        uint64_t s = splitmix64(master);
        s = hash_mix(s, a);
        s = hash_mix(s, b);
        s = hash_mix(s, c);
        return Rng(s);
    }

    uint64_t next_u64() { return engine_(); }

    double uniform() { return u64_to_unit_double(engine_()); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    uint64_t uniform_index(uint64_t n) {
        // modulo bias is < 2^-40 for the n used here (lattice sites, tiles)
        return engine_() % n;
    }

    double normal(double mean, double stddev) {
        std::normal_distribution<double> d(mean, stddev);
        return d(engine_);
    }

    /// Lognormal draw parameterized by the *population* mean and standard
    /// deviation of the lognormal itself (not of the underlying normal).
    double lognormal_mean_std(double mean, double stddev) {
        if (stddev <= 0.0) return mean;
        double sigma2 = std::log(1.0 + (stddev * stddev) / (mean * mean));
        double mu = std::log(mean) - 0.5 * sigma2;
        std::lognormal_distribution<double> d(mu, std::sqrt(sigma2));
        return d(engine_);
    }

    double exponential(double rate) {
        std::exponential_distribution<double> d(rate);
        return d(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
};

}  // namespace raysim

#endif
