#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace rr {

// splitmix64; used to derive independent sub-seeds from one root seed so
// that the per-purpose RNG streams (init, shuffle, generator) don't overlap.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Seed for a named purpose under a root seed.
inline uint64_t derive_seed(uint64_t root, const std::string& purpose) {
    return splitmix64(root ^ splitmix64(fnv1a(purpose)));
}

inline std::mt19937_64 make_rng(uint64_t root, const std::string& purpose) {
    return std::mt19937_64(derive_seed(root, purpose));
}

// Uniform double in [lo, hi); implemented directly so the stream is stable
// regardless of the standard library's distribution internals.
inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

inline int64_t uniform_int(std::mt19937_64& rng, int64_t lo, int64_t hi) {  // inclusive range
    const uint64_t span = static_cast<uint64_t>(hi - lo + 1);
    return lo + static_cast<int64_t>(rng() % span);
}

inline double gaussian(std::mt19937_64& rng) {
    // Box-Muller, polar-free form; two uniforms per sample kept simple.
    double u1 = uniform_real(rng, 1e-12, 1.0);
    double u2 = uniform_real(rng, 0.0, 1.0);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace rr
