#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace v2v {

inline double db_to_linear(double x_db) { return std::pow(10.0, x_db / 10.0); }

inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

// dBm <-> watts
inline double dbm_to_watts(double p_dbm) { return std::pow(10.0, (p_dbm - 30.0) / 10.0); }

inline double watts_to_dbm(double p_w) { return 10.0 * std::log10(p_w) + 30.0; }

inline double splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return static_cast<double>(z ^ (z >> 31));
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    a ^= b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2);
    return a;
}

// Deterministic per-stream engine: one engine per (seed, stream ids),
// never shared between links.
inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t s1, std::uint64_t s2 = 0,
                                   std::uint64_t s3 = 0) {
    std::uint64_t h = hash_combine(hash_combine(hash_combine(seed, s1), s2), s3);
    return std::mt19937_64(h);
}

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace v2v
