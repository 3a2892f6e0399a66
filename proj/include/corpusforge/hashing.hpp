// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>

namespace corpusforge {

/// splitmix64 step. Deterministic across platforms; used to derive hash and
/// permutation parameters from seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Stateless finalizer mix (murmur3-style).
inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xFF51AFD7ED558CCDULL;
    x ^= x >> 33;
    x *= 0xC4CEB9FE1A85EC53ULL;
    x ^= x >> 33;
    return x;
}

/// Seeded FNV-1a over bytes, strengthened with a final mix.
inline std::uint64_t hash_bytes(std::string_view data, std::uint64_t seed = 0) {
    std::uint64_t h = 0xCBF29CE484222325ULL ^ mix64(seed);
    for (const char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return mix64(h);
}

/// Plain FNV-1a (no final mix); used for content digests in reports.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace corpusforge
