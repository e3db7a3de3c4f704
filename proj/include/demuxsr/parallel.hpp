#pragma once

#include <cstdint>
#include <thread>
#include <vector>

namespace demuxsr {

/// Run fn(i) for i in [0, n). Work is split into contiguous index blocks,
/// one per thread; callers must make fn(i) independent of execution order
/// (each index writes only to its own slot). Results are therefore
/// identical for every thread count.
template <typename Fn>
void parallel_for_index(std::int64_t n, int threads, Fn&& fn) {
    if (n <= 0) return;
    const auto worker_count =
        static_cast<int>(std::min<std::int64_t>(threads < 1 ? 1 : threads, n));
    if (worker_count <= 1) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(worker_count));
    const std::int64_t chunk = (n + worker_count - 1) / worker_count;
    for (int w = 0; w < worker_count; ++w) {
        const std::int64_t begin = w * chunk;
        const std::int64_t end = std::min<std::int64_t>(begin + chunk, n);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] {
            for (std::int64_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace demuxsr
