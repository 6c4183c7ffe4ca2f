#pragma once

#include <cstdint>
#include <random>

namespace guiding {

// Splittable seeding: simulation streams (events, diffusion noise, per-run
// Monte-Carlo seeds) are derived from one master seed so that streams are
// independent and reproducible.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(splitmix64(master) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1));
}

namespace stream {
constexpr std::uint64_t events = 1;
constexpr std::uint64_t noise = 2;
constexpr std::uint64_t topology = 3;
constexpr std::uint64_t candidates = 4;
constexpr std::uint64_t run_base = 1000;
} // namespace stream

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed ^ 0x5bf0'3635'dcf9'8dfbULL)); }

} // namespace guiding
