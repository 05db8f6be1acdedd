#ifndef GAPGRAD_RNG_HPP
#define GAPGRAD_RNG_HPP

#include <cmath>
#include <cstdint>
#include <vector>

namespace gapgrad {

/// Deterministic 64-bit generator (splitmix64). Self-contained so that seeded
/// runs reproduce bit-for-bit regardless of the standard library in use.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). Rejection-free enough for our n.
    std::uint64_t next_below(std::uint64_t n) {
        // Lemire's multiply-shift with rejection to remove modulo bias.
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            std::uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Uniform integer in [lo, hi] inclusive.
    long long next_int(long long lo, long long hi) {
        return lo + static_cast<long long>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    /// Exponential with the given mean.
    double next_exponential(double mean) {
        double u = next_double();
        return -mean * std::log1p(-u);
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

/// Combine a base seed with stream indices (member, iteration, ...) into a
/// new independent seed. Used to derive per-member ensemble seeds.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    Rng mix(base ^ (a * 0xd1342543de82ef95ULL) ^ (b * 0xda942042e4dd58b5ULL));
    mix.next_u64();
    return mix.next_u64();
}

}  // namespace gapgrad

#endif
