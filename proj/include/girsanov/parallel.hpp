#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace girsanov {

// Runs fn(i) for i in [0, n). Work is chunked across threads; each index is
// processed exactly once and writes its own output slot, so results do not
// depend on the schedule or the thread count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         unsigned n_threads = 0) {
    if (n_threads == 0) n_threads = std::thread::hardware_concurrency();
    if (n_threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    if (n_threads > n) n_threads = static_cast<unsigned>(n);
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    std::size_t chunk = (n + n_threads - 1) / n_threads;
    for (unsigned t = 0; t < n_threads; ++t) {
        std::size_t lo = static_cast<std::size_t>(t) * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([lo, hi, &fn]() {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& w : workers) w.join();
}

}  // namespace girsanov
