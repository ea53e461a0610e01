#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <optional>
#include <random>
#include <thread>
#include <vector>

namespace measinf::random {

/// Engine for stream `stream` of run `seed`. Streams are independent of how
/// work is split across threads.
std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t stream);

/// Uniform on [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

/// Explicit request, else MEASURE_INFINITY_THREADS, else 1.
unsigned resolve_threads(std::optional<unsigned> requested = std::nullopt);

/// Calls body(task) for task in [0, n_tasks) on up to `threads` threads.
/// Callers write per-task results into preallocated slots and merge them in
/// task order afterwards, so results never depend on the thread count.
template <class Body>
void parallel_for(std::size_t n_tasks, unsigned threads, Body&& body) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n_tasks, 1))));
    if (threads == 1) {
        for (std::size_t t = 0; t < n_tasks; ++t) body(t);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t t = next++; t < n_tasks; t = next++) {
                try {
                    body(t);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                    next = n_tasks;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace measinf::random
