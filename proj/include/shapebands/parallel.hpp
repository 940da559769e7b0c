#pragma once

// Minimal parallel-for over independent work items. Callers guarantee that
// items are independent (per-replicate seeding), so results never depend on
// the thread count.

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace shapebands {

inline int default_thread_count() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

inline void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    if (threads <= 0) threads = default_thread_count();
    if (threads > count) threads = count;
    if (count <= 0) return;
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }

    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    const int chunk = std::max(1, count / (threads * 8));

    auto worker = [&]() {
        for (;;) {
            const int begin = next.fetch_add(chunk);
            if (begin >= count) return;
            const int end = std::min(count, begin + chunk);
            for (int i = begin; i < end; ++i) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace shapebands
