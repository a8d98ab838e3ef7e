/*
 * rng.hpp
 *
 * Counter-based deterministic random streams. A stream is fully
 * determined by (seed, stream_id), so work split across threads or
 * reordered across runs draws identical values.
 */

#ifndef MACC_RNG_HPP
#define MACC_RNG_HPP

#include <cstdint>
#include <span>

namespace macc {

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : state_(mix64(seed ^ mix64(stream_id ^ 0xa02bdbf7bb3c0a7ULL))) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    /// Uniform on [0,1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_unit() < p; }

    /// Uniform integer in [0, bound) without modulo bias.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % bound;
    }

    /// Categorical draw by CDF scan; falls through to the last symbol
    /// so rounding in the partial sums cannot escape the support.
    std::size_t categorical(std::span<const double> probs) {
        const double u = next_unit();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return i;
        }
        return probs.size() - 1;
    }

  private:
    std::uint64_t state_;
};

}  // namespace macc

#endif  // MACC_RNG_HPP
