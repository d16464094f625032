#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace sptree {

/// Runs fn(begin, end) over contiguous chunks of [0, n) on `workers` threads.
/// Chunk boundaries depend only on (n, workers), so reductions that combine
/// per-chunk results in chunk order are bit-reproducible for a fixed worker
/// count.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned workers, Fn&& fn) {
    if (workers == 0) workers = 1;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
    if (workers <= 1 || n == 0) {
        fn(std::size_t{0}, n, 0u);
        return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = std::min(n, static_cast<std::size_t>(w) * chunk);
        const std::size_t hi = std::min(n, lo + chunk);
        threads.emplace_back([&, lo, hi, w] {
            try {
                fn(lo, hi, w);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline unsigned default_workers() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

} // namespace sptree
