#pragma once

#include <cstdint>
#include <string_view>

// Pinned hashing and RNG. Every deterministic artifact (bench scaffolds, blind
// shuffles, embedder buckets, k-means seeding, weight init) flows through these
// functions, never through std::hash or the std distributions, which differ
// between standard libraries.

namespace vptt {

// FNV-1a, 64-bit: offset 14695981039346656037, prime 1099511628211.
inline constexpr std::uint64_t fnv1a64_offset = 14695981039346656037ull;
inline constexpr std::uint64_t fnv1a64_prime = 1099511628211ull;

constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = fnv1a64_offset) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= fnv1a64_prime;
    }
    return h;
}

constexpr std::uint64_t fnv1a64(std::uint64_t value, std::uint64_t h = fnv1a64_offset) {
    for (int i = 0; i < 8; ++i) {
        h ^= (value >> (8 * i)) & 0xffu;
        h *= fnv1a64_prime;
    }
    return h;
}

// splitmix64 finalizer (Steele et al.); gives FNV output full avalanche.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Stable 64-bit hash of a byte string, optionally salted.
constexpr std::uint64_t stable_hash(std::string_view bytes, std::uint64_t salt = 0) {
    return mix64(fnv1a64(bytes, fnv1a64(salt)));
}

constexpr std::uint64_t stable_hash(std::uint64_t value, std::uint64_t salt = 0) {
    return mix64(fnv1a64(value, fnv1a64(salt)));
}

// splitmix64 stream. Small state, full period 2^64, portable output.
class rng {
  public:
    explicit rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    // Uniform in [0, 1): top 53 bits scaled by 2^-53.
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n): Lemire multiply-shift. Bias is < 2^-64, irrelevant here.
    std::uint64_t next_below(std::uint64_t n) {
        return std::uint64_t((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Standard normal via Box-Muller (cos branch only; one draw per call pair).
    double next_normal();

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace vptt
