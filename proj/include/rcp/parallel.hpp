// Minimal fork-join helper for data-parallel loops.
#pragma once

#include <cstddef>
#include <cstdlib>
#include <thread>
#include <vector>

namespace rcp {

// Worker count: hardware concurrency capped by the RCP_THREADS environment
// variable. Always at least 1.
inline unsigned worker_count() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("RCP_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && unsigned(cap) < n) n = unsigned(cap);
    }
    return n;
}

// Applies fn(i) for i in [0, n). Each index is visited exactly once; fn must
// only write to per-index state so the result is identical for any worker
// count.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned workers = worker_count();
    if (workers <= 1 || n < 1024) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = std::size_t(w) * chunk;
        if (begin >= n) break;
        const std::size_t end = std::min(n, begin + chunk);
        threads.emplace_back([&fn, begin, end] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& t : threads) t.join();
}

} // namespace rcp
