// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace corpusforge {

/// Applies `fn` to every element and returns results in input order.
///
/// Work is split into fixed-size chunks claimed from a shared counter; results
/// land in a pre-sized vector indexed by input position, so the output is
/// identical for any worker count. `fn` must be safe to call concurrently.
template <typename In, typename Fn>
auto parallel_map(const std::vector<In>& items, Fn fn, int workers = 1) {
    using Out = decltype(fn(items.front()));
    std::vector<Out> out(items.size());
    if (items.empty()) return out;
    if (workers <= 1) {
        for (std::size_t i = 0; i < items.size(); ++i) out[i] = fn(items[i]);
        return out;
    }

    constexpr std::size_t kChunk = 64;
    std::atomic<std::size_t> next_chunk{0};
    const std::size_t n_chunks = (items.size() + kChunk - 1) / kChunk;

    auto worker = [&] {
        for (;;) {
            const std::size_t c = next_chunk.fetch_add(1);
            if (c >= n_chunks) return;
            const std::size_t lo = c * kChunk;
            const std::size_t hi = std::min(lo + kChunk, items.size());
            for (std::size_t i = lo; i < hi; ++i) out[i] = fn(items[i]);
        }
    };

    std::vector<std::thread> threads;
    const int n = std::min<int>(workers, static_cast<int>(n_chunks));
    threads.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    return out;
}

}  // namespace corpusforge
