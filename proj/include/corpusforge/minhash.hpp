// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "corpusforge/errors.hpp"
#include "corpusforge/hashing.hpp"
#include "corpusforge/utf8.hpp"

namespace corpusforge {

/// Hashed character k-gram shingles of one document. `hashes` is sorted and
/// deduplicated, so it behaves as a set with a canonical representation.
struct ShingleSet {
    std::string doc_id;
    std::vector<std::uint64_t> hashes;
    int k = 5;
};

/// MinHash sketch: mins[i] is the minimum of permutation i over the shingle
/// hashes. Positions agree between two sketches with probability equal to the
/// Jaccard similarity of the underlying sets.
struct MinHashSignature {
    std::string doc_id;
    std::vector<std::uint64_t> mins;
    std::uint64_t param_seed = 0;
};

/// Casefolds ASCII and collapses whitespace runs to single spaces, so trivial
/// formatting differences do not defeat near-duplicate detection.
inline std::string canonicalize_for_shingles(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (std::size_t pos = 0; pos < text.size();) {
        const auto d = utf8::decode(text, pos);
        pos += static_cast<std::size_t>(d.len);
        if (d.cp == ' ' || d.cp == '\t' || d.cp == '\n' || d.cp == '\r') {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        const char32_t cp = (d.cp >= 'A' && d.cp <= 'Z') ? d.cp - 'A' + 'a' : d.cp;
        utf8::append(out, cp);
    }
    return out;
}

/// Sliding codepoint window of width k over the canonicalized text. Texts
/// shorter than k codepoints yield an empty set (exact-match-only documents).
inline ShingleSet shingles(std::string_view text, int k, std::uint64_t hasher_seed,
                           std::string doc_id = "") {
    if (k < 1) throw ConfigError("shingle width k must be >= 1");
    ShingleSet set;
    set.doc_id = std::move(doc_id);
    set.k = k;

    const std::string canon = canonicalize_for_shingles(text);

    // Byte offsets of each codepoint start, plus end sentinel.
    std::vector<std::size_t> starts;
    for (std::size_t pos = 0; pos < canon.size();) {
        starts.push_back(pos);
        pos += static_cast<std::size_t>(utf8::decode(canon, pos).len);
    }
    starts.push_back(canon.size());

    const auto n = starts.size() - 1;
    if (n < static_cast<std::size_t>(k)) return set;

    set.hashes.reserve(n - static_cast<std::size_t>(k) + 1);
    for (std::size_t i = 0; i + static_cast<std::size_t>(k) <= n; ++i) {
        const auto lo = starts[i];
        const auto hi = starts[i + static_cast<std::size_t>(k)];
        set.hashes.push_back(hash_bytes(std::string_view(canon).substr(lo, hi - lo), hasher_seed));
    }
    std::sort(set.hashes.begin(), set.hashes.end());
    set.hashes.erase(std::unique(set.hashes.begin(), set.hashes.end()), set.hashes.end());
    return set;
}

namespace detail {

inline constexpr std::uint64_t kMersennePrime61 = (1ULL << 61) - 1;

inline std::uint64_t mulmod61(std::uint64_t a, std::uint64_t b) {
    const auto p = static_cast<unsigned __int128>(a) * b;
    std::uint64_t r = static_cast<std::uint64_t>(p & kMersennePrime61) +
                      static_cast<std::uint64_t>(p >> 61);
    if (r >= kMersennePrime61) r -= kMersennePrime61;
    return r;
}

struct Permutation {
    std::uint64_t a;  // in [1, p-1]
    std::uint64_t b;  // in [0, p-1]

    std::uint64_t apply(std::uint64_t x) const {
        std::uint64_t r = mulmod61(a, x % kMersennePrime61) + b;
        if (r >= kMersennePrime61) r -= kMersennePrime61;
        return r;
    }
};

inline std::vector<Permutation> permutations(int count, std::uint64_t param_seed) {
    std::vector<Permutation> perms;
    perms.reserve(static_cast<std::size_t>(count));
    std::uint64_t state = mix64(param_seed ^ 0xA5A5A5A55A5A5A5AULL);
    for (int i = 0; i < count; ++i) {
        const std::uint64_t a = splitmix64(state) % (kMersennePrime61 - 1) + 1;
        const std::uint64_t b = splitmix64(state) % kMersennePrime61;
        perms.push_back({a, b});
    }
    return perms;
}

}  // namespace detail

/// mins[i] = min over the shingle hashes of (a_i * x + b_i mod 2^61-1), with
/// (a_i, b_i) derived deterministically from param_seed.
/// Throws DataError on an empty shingle set; callers fall back to exact-hash
/// deduplication for such documents.
inline MinHashSignature signature(const ShingleSet& s, int num_hashes, std::uint64_t param_seed) {
    if (num_hashes < 1) throw ConfigError("signature length H must be >= 1");
    if (s.hashes.empty())
        throw DataError("cannot sign empty shingle set for doc '" + s.doc_id + "'");

    const auto perms = detail::permutations(num_hashes, param_seed);
    MinHashSignature sig;
    sig.doc_id = s.doc_id;
    sig.param_seed = param_seed;
    sig.mins.assign(static_cast<std::size_t>(num_hashes), ~0ULL);
    for (const std::uint64_t x : s.hashes) {
        for (std::size_t i = 0; i < perms.size(); ++i) {
            const std::uint64_t v = perms[i].apply(x);
            if (v < sig.mins[i]) sig.mins[i] = v;
        }
    }
    return sig;
}

/// Fraction of positions where the two sketches agree.
inline double jaccard_estimate(const MinHashSignature& a, const MinHashSignature& b) {
    if (a.mins.size() != b.mins.size())
        throw ConfigError("signature length mismatch: " + std::to_string(a.mins.size()) + " vs " +
                          std::to_string(b.mins.size()));
    if (a.param_seed != b.param_seed)
        throw ConfigError("signatures built from different permutation seeds");
    if (a.mins.empty()) return 0.0;
    std::size_t agree = 0;
    for (std::size_t i = 0; i < a.mins.size(); ++i)
        if (a.mins[i] == b.mins[i]) ++agree;
    return static_cast<double>(agree) / static_cast<double>(a.mins.size());
}

/// |A∩B| / |A∪B| over the shingle hash sets.
inline double exact_jaccard(const ShingleSet& a, const ShingleSet& b) {
    if (a.hashes.empty() && b.hashes.empty()) return 0.0;
    std::size_t inter = 0, i = 0, j = 0;
    while (i < a.hashes.size() && j < b.hashes.size()) {
        if (a.hashes[i] == b.hashes[j]) ++inter, ++i, ++j;
        else if (a.hashes[i] < b.hashes[j]) ++i;
        else ++j;
    }
    const std::size_t uni = a.hashes.size() + b.hashes.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Probability that two documents with Jaccard similarity j share at least one
/// LSH band: 1 - (1 - j^rows)^bands.
inline double lsh_candidate_probability(double jaccard, int bands, int rows) {
    return 1.0 - std::pow(1.0 - std::pow(jaccard, rows), bands);
}

}  // namespace corpusforge
