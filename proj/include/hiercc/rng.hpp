#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace hiercc {

// SplitMix64, used to derive substream seeds.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t s) : state(s) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

// xoshiro256++ with a fixed cross-platform stream-splitting rule: the stream
// for (seed, trial, lane) depends only on those three values, never on the
// order streams are created or consumed.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t trial, std::uint64_t lane) {
        SplitMix64 mixer(mix3(seed, trial, lane));
        for (auto& w : s_) w = mixer.next();
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Shifted exponential: alpha + Exp(mu).
    double next_shifted_exponential(double mu, double alpha) {
        return alpha - mu * std::log1p(-next_double());
    }

    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    // Uniform permutation of {0, ..., n-1} (Fisher-Yates).
    std::vector<std::size_t> next_permutation_of(std::size_t n) {
        std::vector<std::size_t> p(n);
        std::iota(p.begin(), p.end(), std::size_t{0});
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t mix3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
        SplitMix64 sm(a);
        std::uint64_t h = sm.next();
        sm.state = h ^ (b + 0x9e3779b97f4a7c15ULL);
        h = sm.next();
        sm.state = h ^ (c + 0xc2b2ae3d27d4eb4fULL);
        return sm.next();
    }

    std::array<std::uint64_t, 4> s_{};
};

}  // namespace hiercc
