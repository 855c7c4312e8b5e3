#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace pcs::detail {

inline unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

// Runs fn(i) for i in [0, count). Work items must be independent and write
// only to their own output slots, so the result is identical for any worker
// count or schedule. The first exception thrown by a worker is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
    workers = resolve_workers(workers);
    if (count == 0) return;
    if (workers <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    if (workers > count) workers = static_cast<unsigned>(count);

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned t = 1; t < workers; ++t) pool.emplace_back(body);
    body();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace pcs::detail
