// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "corpusforge/hashing.hpp"

namespace corpusforge {

/// Deterministic generator with fully specified output, so seeded runs are
/// bit-identical across platforms and standard library versions
/// (std::uniform_int_distribution and std::shuffle make no such promise).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // Warm up so near-zero seeds do not yield near-zero first outputs.
        next();
        next();
    }

    std::uint64_t next() { return splitmix64(state_); }

    /// Uniform integer in [0, n). n must be > 0. Rejection sampling keeps the
    /// draw unbiased.
    std::uint64_t bounded(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    /// Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Fisher-Yates shuffle with this generator.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(bounded(i));
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

/// Derives a per-stage seed from the run seed. Keyed by stage name so partial
/// reruns of one stage reproduce the full pipeline's draws for that stage.
inline std::uint64_t stage_seed(std::uint64_t run_seed, std::string_view stage_name) {
    return mix64(run_seed ^ hash_bytes(stage_name, 0x5EEDC0DEULL));
}

}  // namespace corpusforge
