#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bcoint {

// Worker count: BCOINT_THREADS if set to a positive integer, otherwise the
// machine's hardware concurrency (at least 1).
unsigned thread_count();

// Calls fn(i) for i in [0, n) across `threads` workers (0 = thread_count()).
// Each index runs exactly once; callers write results into slot i so the
// outcome does not depend on scheduling. The first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = thread_count();
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned used = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    pool.reserve(used);
    for (unsigned k = 0; k < used; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace bcoint
