// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace bilagrid {

/// Process-wide worker cap (the CLI's --threads). Defaults to 1.
int threadCount();
void setThreadCount(int n);

/// Splits [0, count) into `shards` contiguous ranges and runs
/// fn(begin, end, shard) for each, on up to threadCount() threads. Shard
/// boundaries depend only on `count` and `shards`, so callers that reduce
/// per-shard buffers in shard order get results that are independent of
/// scheduling.
inline void parallelShards(std::size_t count, int shards,
                           const std::function<void(std::size_t, std::size_t, int)>& fn) {
    shards = std::max(shards, 1);
    auto range = [&](int s) {
        const std::size_t b = count * static_cast<std::size_t>(s) / shards;
        const std::size_t e = count * static_cast<std::size_t>(s + 1) / shards;
        return std::pair{b, e};
    };
    const int workers = std::min(threadCount(), shards);
    if (workers <= 1) {
        for (int s = 0; s < shards; ++s) {
            auto [b, e] = range(s);
            fn(b, e, s);
        }
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int s = w; s < shards; s += workers) {
                auto [b, e] = range(s);
                fn(b, e, s);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace bilagrid
